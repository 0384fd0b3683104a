use crate::dynamics::{RhsEval, SimState};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::spectral::{divergence_ratio_tensor, divergence_ratio_vec};

/// One row of the energy ledger.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    /// `½‖u‖²`
    pub kinetic: f64,
    /// `½‖F‖²`
    pub elastic: f64,
    /// `∫₀ᵗ ‖∇u‖²`
    pub visc_accum: f64,
    /// `ε ∫₀ᵗ ‖∇F‖²`
    pub reg_accum: f64,
    /// `(F Fᵀ, ∇u)` at `t`
    pub exchange: f64,
    /// `kinetic + elastic + visc_accum + reg_accum - initial total`
    pub balance_residual: f64,
    /// Sum of the instantaneous energy productions of the two equations,
    /// `(∂t u, u) + ‖∇u‖² + (∂t F, F) + ε‖∇F‖²`; the exchange terms cancel.
    pub production_mismatch: f64,
    /// Larger of the relative divergences of `u` and `F`.
    pub divergence: f64,
}

impl LedgerRow {
    /// Row for the initial state.
    pub fn initial(s: &SimState, rhs: &RhsEval) -> Self {
        let total = s.kinetic() + s.elastic();
        ledger_update(&Self::default(), s, rhs, Dissipation::default(), total)
    }

    /// `kinetic + elastic + visc_accum + reg_accum`.
    pub fn total(&self) -> f64 {
        self.kinetic + self.elastic + self.visc_accum + self.reg_accum
    }
}

/// Dissipation accumulated over one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dissipation {
    pub viscous: f64,
    pub regularization: f64,
}

impl Dissipation {
    /// Instantaneous rates `(‖∇u‖², ε‖∇F‖²)` at a state.
    pub fn rates(s: &SimState) -> Self {
        Self { viscous: s.u().grad_norm_sq(), regularization: s.eps() * s.f().grad_norm_sq() }
    }

    /// Trapezoidal increment between two rate evaluations `dt` apart.
    pub fn trapezoid(start: Self, end: Self, dt: f64) -> Self {
        Self {
            viscous: 0.5 * dt * (start.viscous + end.viscous),
            regularization: 0.5 * dt * (start.regularization + end.regularization),
        }
    }
}

/// Advances the ledger to state `s`. `rhs` must be evaluated at `s`;
/// `increment` is the dissipation accumulated since `prev`.
pub fn ledger_update(
    prev: &LedgerRow,
    s: &SimState,
    rhs: &RhsEval,
    increment: Dissipation,
    initial_total: f64,
) -> LedgerRow {
    let rates = Dissipation::rates(s);
    let kinetic = s.kinetic();
    let elastic = s.elastic();
    let visc_accum = prev.visc_accum + increment.viscous;
    let reg_accum = prev.reg_accum + increment.regularization;
    let production_u = rhs.du_dt.inner(s.u()) + rates.viscous;
    let production_f = rhs.df_dt.inner(s.f()) + rates.regularization;
    LedgerRow {
        t: s.t(),
        kinetic,
        elastic,
        visc_accum,
        reg_accum,
        exchange: rhs.exchange,
        balance_residual: kinetic + elastic + visc_accum + reg_accum - initial_total,
        production_mismatch: production_u + production_f,
        divergence: divergence_ratio_vec(s.u()).max(divergence_ratio_tensor(s.f())),
    }
}

/// Outcome of the energy-inequality check
/// `½(‖u‖² + ‖F‖²)(t) + ∫₀ᵗ‖∇u‖² ≤ ½(‖u₀‖² + ‖F₀‖²) + tol`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyCheck {
    pub passed: bool,
    /// `max_t (lhs - rhs)`; positive means energy was produced.
    pub worst_violation: f64,
    /// `rhs - lhs` per ledger row, the discrete stand-in for the dissipation defect.
    pub slack: Vec<f64>,
    /// Largest `balance_residual` in the ledger (includes the ε-dissipation).
    pub max_balance_residual: f64,
}

impl EnergyCheck {
    pub fn min_slack(&self) -> f64 {
        self.slack.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn verify_energy_inequality(traj: &Trajectory, tol: f64) -> Result<EnergyCheck> {
    check_rows(traj.ledger(), tol)
}

pub(crate) fn check_rows(rows: &[LedgerRow], tol: f64) -> Result<EnergyCheck> {
    let first = rows.first().ok_or(Error::LedgerMissing)?;
    let initial = first.kinetic + first.elastic;
    let slack: Vec<f64> = rows
        .iter()
        .map(|r| initial - (r.kinetic + r.elastic + r.visc_accum))
        .collect();
    let worst_violation = slack.iter().map(|s| -s).fold(f64::NEG_INFINITY, f64::max);
    let max_balance_residual =
        rows.iter().map(|r| r.balance_residual).fold(f64::NEG_INFINITY, f64::max);
    Ok(EnergyCheck { passed: worst_violation <= tol, worst_violation, slack, max_balance_residual })
}
