//! Classical RK4 time stepping of the Galerkin system.
//!
//! Both projections are re-applied after every stage. The dissipation
//! accumulators of the energy ledger are advanced with the same stage weights
//! as the state, so the discrete energy balance closes to the scheme's order.

use crate::diagnostics::{ledger_update, Dissipation, LedgerRow};
use crate::dynamics::{evaluate, AdvectionForm, RhsEval, SimState};
use crate::error::{Error, Result};
use crate::spectral::{project_in_place, project_tensor_in_place};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scheme {
    #[default]
    Rk4,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    /// Upper bound on the step; the actual step is `min(dt, cfl limit)`.
    pub dt: f64,
    pub t_end: f64,
    /// Safety factor in `(0, 1]` applied to the stability limits.
    pub cfl_safety: f64,
    pub scheme: Scheme,
    /// Steps between stored snapshots; the final state is always stored.
    pub snapshot_every: usize,
    pub advection: AdvectionForm,
    /// Take exactly `dt` every step instead of the CFL-limited step, so that
    /// runs with different data share one time grid. The caller keeps `dt`
    /// below the stability bound.
    pub fixed_step: bool,
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            cfl_safety: 0.5,
            scheme: Scheme::Rk4,
            snapshot_every: 1,
            advection: AdvectionForm::Convective,
            fixed_step: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidConfig(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if self.snapshot_every == 0 {
            return Err(Error::InvalidConfig("snapshot_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// Stored states and the per-step energy ledger of one run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    snapshots: Vec<SimState>,
    ledger: Vec<LedgerRow>,
}

impl Trajectory {
    pub fn snapshots(&self) -> &[SimState] {
        &self.snapshots
    }

    pub fn ledger(&self) -> &[LedgerRow] {
        &self.ledger
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(SimState::t).collect()
    }

    pub fn initial(&self) -> &SimState {
        &self.snapshots[0]
    }

    pub fn final_state(&self) -> &SimState {
        self.snapshots.last().expect("trajectory holds the initial state")
    }

    pub fn eps(&self) -> f64 {
        self.snapshots[0].eps()
    }

    /// Ledger row whose time equals `t` to within `1e-12` relative.
    pub fn ledger_at(&self, t: f64) -> Option<&LedgerRow> {
        let tol = 1e-12 * t.abs().max(1.0);
        self.ledger.iter().find(|r| (r.t - t).abs() <= tol)
    }

    /// Builds a trajectory from parts, e.g. to test diagnostics on edited ledgers.
    pub fn from_parts(snapshots: Vec<SimState>, ledger: Vec<LedgerRow>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::InvalidConfig("trajectory needs at least one snapshot".into()));
        }
        if snapshots.windows(2).any(|w| w[1].t() <= w[0].t()) {
            return Err(Error::InvalidConfig("snapshot times must increase strictly".into()));
        }
        Ok(Self { snapshots, ledger })
    }
}

/// One RK4 step; see [`rk4_step`] for the variant that reuses a stage-1
/// evaluation and reports the dissipation increment.
pub fn step_rk4(s: &SimState, dt: f64) -> Result<SimState> {
    let k1 = evaluate(s, AdvectionForm::Convective);
    rk4_step(s, &k1, dt, AdvectionForm::Convective).map(|(next, _)| next)
}

/// RK4 step from `s` given `k1 = evaluate(s)`.
pub fn rk4_step(
    s: &SimState,
    k1: &RhsEval,
    dt: f64,
    form: AdvectionForm,
) -> Result<(SimState, Dissipation)> {
    let r1 = Dissipation::rates(s);
    let y2 = stage(s, &[(0.5 * dt, k1)]);
    let k2 = evaluate(&y2, form);
    let y3 = stage(s, &[(0.5 * dt, &k2)]);
    let k3 = evaluate(&y3, form);
    let y4 = stage(s, &[(dt, &k3)]);
    let k4 = evaluate(&y4, form);
    let w = dt / 6.0;
    let mut next = stage(s, &[(w, k1), (2.0 * w, &k2), (2.0 * w, &k3), (w, &k4)]);
    next.set_time(s.t() + dt);
    if !next.is_finite() {
        return Err(Error::NonFinite { t: next.t(), eps: s.eps() });
    }
    let (r2, r3, r4) = (Dissipation::rates(&y2), Dissipation::rates(&y3), Dissipation::rates(&y4));
    let inc = Dissipation {
        viscous: w * (r1.viscous + 2.0 * r2.viscous + 2.0 * r3.viscous + r4.viscous),
        regularization: w
            * (r1.regularization + 2.0 * r2.regularization + 2.0 * r3.regularization + r4.regularization),
    };
    Ok((next, inc))
}

/// `s + Σ a_i k_i`, re-projected.
fn stage(s: &SimState, terms: &[(f64, &RhsEval)]) -> SimState {
    let mut y = s.clone();
    {
        let (u, f) = y.parts_mut();
        for (a, k) in terms {
            u.axpy(*a, &k.du_dt);
            f.axpy(*a, &k.df_dt);
        }
        project_in_place(u.components_mut());
        project_tensor_in_place(f);
    }
    y
}

/// Stable step for the current state:
/// `cfl_safety · min(1/(k_max max|u|), 2/(max(1, ε) k_max²))`, capped at `cfg.dt`.
pub fn cfl_dt(s: &SimState, cfg: &IntegratorConfig) -> f64 {
    let grid = s.grid();
    let k_max = grid.k_max();
    let phys = s.u().physical();
    let u_max = (0..grid.size())
        .map(|p| phys.iter().map(|c| c[p] * c[p]).sum::<f64>())
        .fold(0.0, f64::max)
        .sqrt();
    let advective = if u_max > 0.0 { 1.0 / (k_max * u_max) } else { f64::INFINITY };
    let diffusive = 2.0 / (s.eps().max(1.0) * k_max * k_max);
    (cfg.cfl_safety * advective.min(diffusive)).min(cfg.dt)
}

/// Largest step that is CFL-admissible for every state, for fixed-step runs
/// that must share a time grid.
pub fn common_dt<'a>(states: impl IntoIterator<Item = &'a SimState>, cfg: &IntegratorConfig) -> f64 {
    states.into_iter().map(|s| cfl_dt(s, cfg)).fold(cfg.dt, f64::min)
}

/// Integrates from `initial` to `cfg.t_end`, recording a ledger row per step.
pub fn run(initial: &SimState, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let form = cfg.advection;
    let mut s = initial.clone().with_time(0.0);
    let mut k1 = evaluate(&s, form);
    let row0 = LedgerRow::initial(&s, &k1);
    let initial_total = s.kinetic() + s.elastic();
    let mut ledger = vec![row0];
    let mut snapshots = vec![s.clone()];
    let mut step = 0usize;
    loop {
        let remaining = cfg.t_end - s.t();
        if remaining <= 1e-12 * cfg.t_end {
            break;
        }
        let mut dt = if cfg.fixed_step { cfg.dt } else { cfl_dt(&s, cfg) };
        let last = remaining <= dt * (1.0 + 1e-9);
        if last {
            dt = remaining;
        }
        let (mut next, inc) = rk4_step(&s, &k1, dt, form)?;
        if last {
            next.set_time(cfg.t_end);
        }
        step += 1;
        k1 = evaluate(&next, form);
        let row = ledger_update(ledger.last().expect("non-empty"), &next, &k1, inc, initial_total);
        ledger.push(row);
        if last || step % cfg.snapshot_every == 0 {
            snapshots.push(next.clone());
        }
        s = next;
        if last {
            break;
        }
    }
    Ok(Trajectory { snapshots, ledger })
}
