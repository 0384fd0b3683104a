//! Relative energy between two solutions and the Gronwall-envelope check.

use crate::dynamics::SimState;
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::par;
use crate::quadrature;
use crate::spectral::{common_grid, transfer_tensor, transfer_vec, Grid, TensorField, VectorField};

/// `½‖u‖² + ½‖F‖²`.
pub fn energy(s: &SimState) -> f64 {
    s.kinetic() + s.elastic()
}

/// Both states on their common (finer) grid.
fn on_common_grid(s: &SimState, r: &SimState) -> Result<(Grid, [VectorField; 2], [TensorField; 2])> {
    let g = common_grid(s.grid(), r.grid())?;
    let u = [transfer_vec(s.u(), g)?, transfer_vec(r.u(), g)?];
    let f = [transfer_tensor(s.f(), g)?, transfer_tensor(r.f(), g)?];
    Ok((g, u, f))
}

/// `(‖u − ũ‖², ‖F − F̃‖², ‖∇(u − ũ)‖²)`.
fn gaps(s: &SimState, r: &SimState) -> Result<[f64; 3]> {
    let (_, [mut du, ur], [mut df, fr]) = on_common_grid(s, r)?;
    du.axpy(-1.0, &ur);
    df.axpy(-1.0, &fr);
    Ok([du.norm_sq(), df.norm_sq(), du.grad_norm_sq()])
}

/// `½‖u − ũ‖² + ½‖F − F̃‖² + visc_accum_diff`, where the caller supplies
/// `∫₀ᵗ ‖∇(u − ũ)‖²`.
pub fn rel_energy(s: &SimState, s_ref: &SimState, visc_accum_diff: f64) -> Result<f64> {
    let [u2, f2, _] = gaps(s, s_ref)?;
    Ok(0.5 * (u2 + f2) + visc_accum_diff)
}

/// `E(u,F) + E(ũ,F̃) − (u,ũ) − (F,F̃)`, the expanded form of the first two terms.
pub fn rel_energy_expanded(s: &SimState, s_ref: &SimState) -> Result<f64> {
    let (_, [u, ur], [f, fr]) = on_common_grid(s, s_ref)?;
    Ok(0.5 * (u.norm_sq() + f.norm_sq() + ur.norm_sq() + fr.norm_sq()) - u.inner(&ur) - f.inner(&fr))
}

/// Pointwise maxima `(‖∇u‖, ‖∇F‖, ‖F‖)` with Frobenius norms at each point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupNorms {
    pub grad_u: f64,
    pub grad_f: f64,
    pub f: f64,
    /// Norm fraction carried by the outermost retained shell.
    pub tail_ratio: f64,
}

impl SupNorms {
    /// Spectral tail small enough for the maxima to be trusted.
    pub fn resolved(&self) -> bool {
        self.tail_ratio < 1e-8
    }

    /// `‖∇ũ‖_∞ + ‖∇F̃‖_∞ + ‖F̃‖²_∞`.
    pub fn gronwall_coeff(&self) -> f64 {
        self.grad_u + self.grad_f + self.f * self.f
    }
}

/// Oversampling factor of [`sup_norms`].
pub const OVERSAMPLE: usize = 4;

/// Maxima over a grid refined `OVERSAMPLE` times, evaluated spectrally.
pub fn sup_norms(s: &SimState) -> SupNorms {
    let g = *s.grid();
    let fine = Grid::with_length(g.dim(), g.n() * OVERSAMPLE, g.length()).expect("refined grid is valid");
    let u = transfer_vec(s.u(), fine).expect("integer ratio");
    let f = transfer_tensor(s.f(), fine).expect("integer ratio");
    let grad_u: Vec<Vec<f64>> = u.gradient().components().iter().map(|c| c.physical()).collect();
    let grad_f: Vec<Vec<f64>> = f.gradient().iter().map(|c| c.physical()).collect();
    let f_phys = f.physical();
    let pointwise_max = |fields: &[Vec<f64>]| {
        par::map_range(fine.size(), |p| fields.iter().map(|c| c[p] * c[p]).sum::<f64>())
            .into_iter()
            .fold(0.0, f64::max)
            .sqrt()
    };
    SupNorms {
        grad_u: pointwise_max(&grad_u),
        grad_f: pointwise_max(&grad_f),
        f: pointwise_max(&f_phys),
        tail_ratio: tail_ratio(s),
    }
}

fn tail_ratio(s: &SimState) -> f64 {
    let g = s.grid();
    let band = g.retained_band();
    let (mut tail, mut total) = (0.0, 0.0);
    for field in s.u().components().iter().chain(s.f().components()) {
        for (m, c) in field.coeffs().iter().enumerate() {
            let w = c.norm_sqr();
            total += w;
            if g.mode_vector(m).iter().any(|x| x.abs() == band) {
                tail += w;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        (tail / total).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelEnergySeries {
    pub times: Vec<f64>,
    pub rel_energy: Vec<f64>,
    /// Gronwall coefficient of the reference solution.
    pub coeff: Vec<f64>,
    /// `∫₀ᵗ coeff`.
    pub coeff_integral: Vec<f64>,
}

impl RelEnergySeries {
    /// `seed · exp(c ∫₀ᵗ coeff)`.
    pub fn envelope(&self, c: f64, seed: f64) -> Vec<f64> {
        self.coeff_integral.iter().map(|i| seed * (c * i).exp()).collect()
    }

    pub fn sup(&self) -> f64 {
        self.rel_energy.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest `c ≥ 0` with `rel_energy ≤ seed · exp(c ∫coeff) + tol` at every
    /// time; infinite when no `c` works.
    pub fn fit_c(&self, seed: f64, tol: f64) -> f64 {
        let mut c: f64 = 0.0;
        for (r, i) in self.rel_energy.iter().zip(&self.coeff_integral) {
            let excess = r - tol;
            if excess <= seed {
                continue;
            }
            if *i <= 0.0 || seed <= 0.0 {
                return f64::INFINITY;
            }
            c = c.max((excess / seed).ln() / i);
        }
        // keep the binding time on the safe side of rounding
        c * (1.0 + 1e-12)
    }
}

/// Relative energy of `traj` with respect to `traj_ref` at their common
/// snapshot times; `∫‖∇(u − ũ)‖²` is accumulated over those snapshots.
pub fn rel_energy_series(traj: &Trajectory, traj_ref: &Trajectory) -> Result<RelEnergySeries> {
    let (a, b) = (traj.snapshots(), traj_ref.snapshots());
    if a.len() != b.len() {
        return Err(Error::TimeMismatch { index: a.len().min(b.len()) });
    }
    for (index, (x, y)) in a.iter().zip(b).enumerate() {
        if (x.t() - y.t()).abs() > 1e-12 * x.t().abs().max(1.0) {
            return Err(Error::TimeMismatch { index });
        }
    }
    common_grid(a[0].grid(), b[0].grid())?;
    let times = traj.times();
    let per_time: Vec<Result<([f64; 3], f64)>> = par::map_range(a.len(), |i| {
        Ok((gaps(&a[i], &b[i])?, sup_norms(&b[i]).gronwall_coeff()))
    });
    let mut gap = Vec::with_capacity(a.len());
    let mut coeff = Vec::with_capacity(a.len());
    for r in per_time {
        let (g, c) = r?;
        gap.push(g);
        coeff.push(c);
    }
    let grad_gap: Vec<f64> = gap.iter().map(|g| g[2]).collect();
    let visc = quadrature::cumulative(&times, &grad_gap);
    let rel_energy = gap.iter().zip(&visc).map(|(g, v)| 0.5 * (g[0] + g[1]) + v).collect();
    let coeff_integral = quadrature::cumulative(&times, &coeff);
    Ok(RelEnergySeries { times, rel_energy, coeff, coeff_integral })
}

/// Constant in the Gronwall envelope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GronwallConstant {
    Fixed(f64),
    /// The smallest constant for which the envelope holds.
    Fit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UniquenessReport {
    pub series: RelEnergySeries,
    pub envelope: Vec<f64>,
    /// Constant used for the envelope.
    pub c: f64,
    /// `rel_energy(0)`.
    pub initial: f64,
    pub sup_rel_energy: f64,
    /// `max_t (rel_energy − envelope)`.
    pub worst_margin: f64,
    pub passed: bool,
}

/// Checks `rel_energy(t) ≤ max(rel_energy(0), tol0) · exp(c ∫₀ᵗ coeff) + tol`.
pub fn verify_uniqueness(
    traj: &Trajectory,
    traj_ref: &Trajectory,
    c: GronwallConstant,
    tol: f64,
    tol0: f64,
) -> Result<UniquenessReport> {
    let series = rel_energy_series(traj, traj_ref)?;
    let initial = series.rel_energy[0];
    if initial > tol0 {
        return Err(Error::InitialMismatch { value: initial, tol: tol0 });
    }
    let seed = initial.max(tol0);
    let c = match c {
        GronwallConstant::Fixed(c) => c,
        GronwallConstant::Fit => series.fit_c(seed, tol),
    };
    let envelope = if c.is_finite() {
        series.envelope(c, seed)
    } else {
        vec![f64::INFINITY; series.times.len()]
    };
    let worst_margin = series
        .rel_energy
        .iter()
        .zip(&envelope)
        .map(|(r, e)| r - e)
        .fold(f64::NEG_INFINITY, f64::max);
    let passed = c.is_finite() && worst_margin <= tol;
    Ok(UniquenessReport {
        sup_rel_energy: series.sup(),
        series,
        envelope,
        c,
        initial,
        worst_margin,
        passed,
    })
}
