use crate::dynamics::SimState;
use crate::error::{Error, Result};
use crate::integrator::{common_dt, run, IntegratorConfig, Trajectory};
use crate::par;
use crate::quadrature;
use crate::spectral::TensorField;

/// Finite-resolution shadow of the dissipation defect and the corrector,
/// measured against the smallest-ε run.
#[derive(Clone, Debug)]
pub struct DefectReport {
    pub eps_values: Vec<f64>,
    /// Snapshot times shared by all runs.
    pub times: Vec<f64>,
    /// `[ε][t]`: `‖F^ε‖² − ‖F‖² + ∫₀ᵗ (‖∇u^ε‖² − ‖∇u‖²)`, signed.
    pub d_proxy: Vec<Vec<f64>>,
    /// `[ε][t]`: `‖F^ε (F^ε)ᵀ − F Fᵀ‖_{L¹}` with the pointwise Frobenius norm.
    pub corrector_proxy: Vec<Vec<f64>>,
    /// `ε ∫₀ᵀ ‖∇F^ε‖²` per run.
    pub reg_accum: Vec<f64>,
    /// Smallest `c` with `∫₀ᵗ corrector ≤ c ∫₀ᵗ max(D, 0) + tol` at every
    /// time, per ε; zero for runs identical to the reference and infinite
    /// when the positive part of the defect cannot dominate.
    pub fitted_c: Vec<f64>,
    pub trajectories: Vec<Trajectory>,
}

impl DefectReport {
    /// Index of the reference run (the last, smallest ε).
    pub fn reference(&self) -> usize {
        self.eps_values.len() - 1
    }

    /// `D_proxy` at the final time per ε.
    pub fn final_defect(&self) -> Vec<f64> {
        self.d_proxy.iter().map(|d| *d.last().expect("non-empty series")).collect()
    }

    /// Every non-reference run satisfies the domination bound with a finite `c`.
    pub fn dominated(&self) -> bool {
        self.fitted_c[..self.reference()].iter().all(|c| c.is_finite())
    }
}

/// Runs `initial` once per ε (concurrently) on one fixed time grid and
/// compares every run with the smallest-ε one. `eps_values` must be
/// non-increasing.
pub fn defect_study(
    initial: &SimState,
    eps_values: &[f64],
    cfg: &IntegratorConfig,
    tol: f64,
) -> Result<DefectReport> {
    if eps_values.is_empty() {
        return Err(Error::InvalidConfig("empty eps sequence".into()));
    }
    if eps_values.windows(2).any(|w| w[1] > w[0]) || eps_values.iter().any(|e| !(*e >= 0.0)) {
        return Err(Error::InvalidConfig(format!("eps values must be non-increasing and >= 0: {eps_values:?}")));
    }
    let starts: Vec<SimState> = eps_values.iter().map(|&e| initial.clone().with_eps(e)).collect();
    let cfg = IntegratorConfig { dt: common_dt(&starts, cfg), fixed_step: true, ..cfg.clone() };
    let runs = par::map_slice(&starts, |s| run(s, &cfg));
    let trajectories = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let reference = trajectories.last().expect("non-empty");
    let times = reference.times();
    let ref_products: Vec<Vec<Vec<f64>>> = par::map_slice(reference.snapshots(), |s| gram(s.f()));
    let mut d_proxy = Vec::with_capacity(eps_values.len());
    let mut corrector_proxy = Vec::with_capacity(eps_values.len());
    let mut fitted_c = Vec::with_capacity(eps_values.len());
    for traj in &trajectories {
        let d: Vec<f64> = traj
            .snapshots()
            .iter()
            .zip(reference.snapshots())
            .map(|(s, r)| {
                let (row, row_ref) = (ledger_row(traj, s.t()), ledger_row(reference, r.t()));
                2.0 * (row.elastic - row_ref.elastic) + (row.visc_accum - row_ref.visc_accum)
            })
            .collect();
        let corr: Vec<f64> = par::map_range(times.len(), |i| {
            l1_distance(&gram(traj.snapshots()[i].f()), &ref_products[i], &traj.snapshots()[i])
        });
        fitted_c.push(fit_domination(&times, &corr, &d, tol));
        d_proxy.push(d);
        corrector_proxy.push(corr);
    }
    let reg_accum = trajectories
        .iter()
        .map(|t| t.ledger().last().expect("ledger row").reg_accum)
        .collect();
    Ok(DefectReport {
        eps_values: eps_values.to_vec(),
        times,
        d_proxy,
        corrector_proxy,
        reg_accum,
        fitted_c,
        trajectories,
    })
}

fn ledger_row(traj: &Trajectory, t: f64) -> &super::LedgerRow {
    traj.ledger_at(t).expect("every snapshot has a ledger row")
}

/// Grid values of `F Fᵀ`, row-major.
fn gram(f: &TensorField) -> Vec<Vec<f64>> {
    let d = f.grid().dim();
    let phys = f.physical();
    let size = f.grid().size();
    (0..d * d)
        .map(|ik| {
            let (i, k) = (ik / d, ik % d);
            (0..size).map(|p| (0..d).map(|j| phys[i * d + j][p] * phys[k * d + j][p]).sum()).collect()
        })
        .collect()
}

fn l1_distance(a: &[Vec<f64>], b: &[Vec<f64>], s: &SimState) -> f64 {
    let grid = s.grid();
    grid.cell_volume()
        * par::ordered_sum(grid.size(), |p| {
            a.iter().zip(b).map(|(x, y)| (x[p] - y[p]).powi(2)).sum::<f64>().sqrt()
        })
}

/// Smallest `c ≥ 0` with `∫₀ᵗ corr ≤ c ∫₀ᵗ max(D, 0) + tol` for all `t`.
pub fn fit_domination(times: &[f64], corrector: &[f64], defect: &[f64], tol: f64) -> f64 {
    let positive: Vec<f64> = defect.iter().map(|d| d.max(0.0)).collect();
    let lhs = quadrature::cumulative(times, corrector);
    // the positive part is only piecewise smooth, so integrate it with trapezoids
    let mut rhs = vec![0.0; times.len()];
    for i in 1..times.len() {
        rhs[i] = rhs[i - 1] + 0.5 * (times[i] - times[i - 1]) * (positive[i] + positive[i - 1]);
    }
    let mut c: f64 = 0.0;
    for (l, r) in lhs.iter().zip(&rhs) {
        if *l <= tol {
            continue;
        }
        if *r <= 0.0 {
            return f64::INFINITY;
        }
        c = c.max((l - tol) / r);
    }
    c
}
