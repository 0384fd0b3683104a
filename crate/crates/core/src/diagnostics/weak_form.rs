use crate::dynamics::SimState;
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::par;
use crate::quadrature;
use crate::spectral::{divergence_ratio_tensor, divergence_ratio_vec, TensorField, VectorField};

/// Time-independent test pair `(ψ, Ψ)` for the momentum and deformation identities.
#[derive(Clone, Debug, PartialEq)]
pub struct TestField {
    pub psi: VectorField,
    pub psi_f: TensorField,
}

/// Largest relative divergence accepted in a test field.
pub const TEST_DIVERGENCE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct WeakFormReport {
    pub times: Vec<f64>,
    /// `[test field][time]` residual of the momentum identity.
    pub momentum: Vec<Vec<f64>>,
    /// `[test field][time]` residual of the deformation identity.
    pub deformation: Vec<Vec<f64>>,
    pub max_momentum: f64,
    pub max_deformation: f64,
    /// Either residual exceeded the threshold.
    pub flagged: bool,
}

/// Residuals of
/// `(u(t),ψ) − (u₀,ψ) = ∫₀ᵗ (u⊗u, ∇ψ) − (∇u + FFᵀ, ∇ψ)` and
/// `(F(t),Ψ) − (F₀,Ψ) = ∫₀ᵗ (u⊗F, ∇Ψ) + (∇u F, Ψ) − ε(∇F, ∇Ψ)`
/// at the stored snapshots, with the time integrals taken by fourth-order
/// quadrature over the snapshot times. The corrector term is omitted.
pub fn weak_form_residual(
    traj: &Trajectory,
    test_fields: &[TestField],
    threshold: f64,
) -> Result<WeakFormReport> {
    let grid = *traj.initial().grid();
    for (index, tf) in test_fields.iter().enumerate() {
        if tf.psi.grid() != &grid || tf.psi_f.grid() != &grid {
            return Err(Error::GridMismatch(format!("test field {index} is not on {grid:?}")));
        }
        let ratio = divergence_ratio_vec(&tf.psi).max(divergence_ratio_tensor(&tf.psi_f));
        if ratio > TEST_DIVERGENCE_TOL {
            return Err(Error::TestFieldNotDivergenceFree { index, ratio });
        }
    }
    let times = traj.times();
    let snaps = traj.snapshots();
    let prepared: Vec<PreparedTest> = test_fields.iter().map(PreparedTest::new).collect();
    // [time][test] -> (pairings, integrands)
    let per_time = par::map_slice(snaps, |s| {
        let v = StateValues::new(s);
        prepared.iter().map(|t| t.evaluate(s, &v)).collect::<Vec<_>>()
    });
    let mut momentum = Vec::with_capacity(test_fields.len());
    let mut deformation = Vec::with_capacity(test_fields.len());
    for t in 0..test_fields.len() {
        let column = |f: fn(&Pairing) -> (f64, f64)| -> Vec<f64> {
            let (pair, integrand): (Vec<f64>, Vec<f64>) = per_time.iter().map(|row| f(&row[t])).unzip();
            let integral = quadrature::cumulative(&times, &integrand);
            pair.iter().zip(&integral).map(|(p, i)| p - pair[0] - i).collect()
        };
        momentum.push(column(|p| (p.u_psi, p.momentum)));
        deformation.push(column(|p| (p.f_psi, p.deformation)));
    }
    let max_abs = |rows: &[Vec<f64>]| rows.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let (max_momentum, max_deformation) = (max_abs(&momentum), max_abs(&deformation));
    Ok(WeakFormReport {
        times,
        flagged: max_momentum > threshold || max_deformation > threshold,
        momentum,
        deformation,
        max_momentum,
        max_deformation,
    })
}

struct Pairing {
    u_psi: f64,
    f_psi: f64,
    momentum: f64,
    deformation: f64,
}

struct StateValues {
    u: Vec<Vec<f64>>,
    grad_u: Vec<Vec<f64>>,
    f: Vec<Vec<f64>>,
    grad_f: Vec<Vec<f64>>,
}

impl StateValues {
    fn new(s: &SimState) -> Self {
        Self {
            u: s.u().physical(),
            grad_u: s.u().gradient().physical(),
            f: s.f().physical(),
            grad_f: s.f().gradient().iter().map(|c| c.physical()).collect(),
        }
    }
}

struct PreparedTest {
    psi: Vec<Vec<f64>>,
    grad_psi: Vec<Vec<f64>>,
    psi_f: Vec<Vec<f64>>,
    grad_psi_f: Vec<Vec<f64>>,
}

impl PreparedTest {
    fn new(t: &TestField) -> Self {
        Self {
            psi: t.psi.physical(),
            grad_psi: t.psi.gradient().physical(),
            psi_f: t.psi_f.physical(),
            grad_psi_f: t.psi_f.gradient().iter().map(|c| c.physical()).collect(),
        }
    }

    fn evaluate(&self, s: &SimState, v: &StateValues) -> Pairing {
        let grid = s.grid();
        let d = grid.dim();
        let eps = s.eps();
        let w = grid.cell_volume();
        let sum = |f: &(dyn Fn(usize) -> f64 + Sync + Send)| w * par::ordered_sum(grid.size(), f);
        let u_psi = sum(&|p| (0..d).map(|i| v.u[i][p] * self.psi[i][p]).sum());
        let f_psi = sum(&|p| (0..d * d).map(|ij| v.f[ij][p] * self.psi_f[ij][p]).sum());
        let momentum = sum(&|p| {
            let mut acc = 0.0;
            for i in 0..d {
                for j in 0..d {
                    let ff: f64 = (0..d).map(|k| v.f[i * d + k][p] * v.f[j * d + k][p]).sum();
                    let flux = v.u[i][p] * v.u[j][p] - v.grad_u[i * d + j][p] - ff;
                    acc += flux * self.grad_psi[i * d + j][p];
                }
            }
            acc
        });
        let deformation = sum(&|p| {
            let mut acc = 0.0;
            for i in 0..d {
                for j in 0..d {
                    let ij = i * d + j;
                    for k in 0..d {
                        acc += v.u[k][p] * v.f[ij][p] * self.grad_psi_f[ij * d + k][p];
                        acc += v.grad_u[i * d + k][p] * v.f[k * d + j][p] * self.psi_f[ij][p];
                        acc -= eps * v.grad_f[ij * d + k][p] * self.grad_psi_f[ij * d + k][p];
                    }
                }
            }
            acc
        });
        Pairing { u_psi, f_psi, momentum, deformation }
    }
}
