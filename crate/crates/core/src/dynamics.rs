//! Semi-discrete right-hand sides of the ε-regularized system
//!
//! ```text
//! ∂t u = P[-div(u⊗u) + Δu + div(F Fᵀ)]
//! ∂t F = Q[-u·∇F + ∇u F + ε ΔF]
//! ```
//!
//! on the periodic torus. `P` is the Leray projector and `Q` its column-wise
//! version, which also eliminates the constraint multiplier of the `F`
//! equation. Quadratic products are formed on the grid and truncated with the
//! 2/3 rule before any derivative is taken, so for states inside the retained
//! band the Galerkin energy exchange is exact.

use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{
    project_in_place, project_tensor_in_place, Grid, ScalarField, TensorField, VectorField,
};

/// Form of the transport term in the deformation equation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AdvectionForm {
    /// `u·∇F`.
    #[default]
    Convective,
    /// `div(u⊗F)`, `(div(u⊗F))_ij = ∂_k(u_k F_ij)`.
    Divergence,
}

/// State of the Galerkin system. The spectral coefficients of `u` and `F`
/// are the Galerkin coordinates; both stay divergence-free and inside the
/// 2/3-rule band.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    t: f64,
    eps: f64,
    u: VectorField,
    f: TensorField,
}

impl SimState {
    /// Builds a state at `t = 0` from arbitrary fields: both are projected onto
    /// divergence-free fields and truncated to the retained band.
    pub fn new(mut u: VectorField, mut f: TensorField, eps: f64) -> Result<Self> {
        check_parts(&u, &f, eps)?;
        u.dealias();
        f.dealias();
        project_in_place(u.components_mut());
        project_tensor_in_place(&mut f);
        Ok(Self { t: 0.0, eps, u, f })
    }

    /// Assembles a state without projecting or truncating; used when the
    /// coefficients must be kept bit for bit (snapshot loading).
    pub fn from_raw_parts(t: f64, u: VectorField, f: TensorField, eps: f64) -> Result<Self> {
        check_parts(&u, &f, eps)?;
        Ok(Self { t, eps, u, f })
    }

    pub fn zero(grid: Grid, eps: f64) -> Result<Self> {
        Self::new(VectorField::zeros(grid), TensorField::zeros(grid), eps)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn u(&self) -> &VectorField {
        &self.u
    }

    pub fn f(&self) -> &TensorField {
        &self.f
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    /// `½‖u‖²`.
    pub fn kinetic(&self) -> f64 {
        0.5 * self.u.norm_sq()
    }

    /// `½‖F‖²`.
    pub fn elastic(&self) -> f64 {
        0.5 * self.f.norm_sq()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.f.is_finite()
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut VectorField, &mut TensorField) {
        (&mut self.u, &mut self.f)
    }

    pub(crate) fn set_time(&mut self, t: f64) {
        self.t = t;
    }
}

fn check_parts(u: &VectorField, f: &TensorField, eps: f64) -> Result<()> {
    if u.grid() != f.grid() {
        return Err(Error::GridMismatch(format!("u on {:?}, F on {:?}", u.grid(), f.grid())));
    }
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::InvalidConfig(format!("eps must be finite and >= 0, got {eps}")));
    }
    Ok(())
}

/// Right-hand side of both equations at one state.
#[derive(Clone, Debug)]
pub struct RhsEval {
    pub du_dt: VectorField,
    pub df_dt: TensorField,
    /// `(F Fᵀ, ∇u)`.
    pub exchange: f64,
}

/// Grid values needed by the nonlinear terms.
struct GridValues {
    u: Vec<Vec<f64>>,
    /// `[i*d + k] = ∂_k u_i`.
    grad_u: Vec<Vec<f64>>,
    f: Vec<Vec<f64>>,
    /// `[(i*d + j)*d + k] = ∂_k F_ij`, only for the convective form.
    grad_f: Vec<Vec<f64>>,
}

impl GridValues {
    fn new(s: &SimState, with_grad_f: bool) -> Self {
        let grad_f = if with_grad_f {
            par::map_slice(&s.f.gradient(), ScalarField::physical)
        } else {
            Vec::new()
        };
        Self {
            u: s.u.physical(),
            grad_u: s.u.gradient().physical(),
            f: s.f.physical(),
            grad_f,
        }
    }
}

/// Forward transform followed by 2/3-rule truncation.
fn truncated(grid: Grid, values: Vec<f64>) -> ScalarField {
    let mut f = ScalarField::from_physical(grid, &values).expect("grid-sized product");
    f.dealias();
    f
}

fn momentum_from(s: &SimState, v: &GridValues) -> VectorField {
    let grid = *s.grid();
    let d = grid.dim();
    let size = grid.size();
    // stress M = F Fᵀ - u⊗u (symmetric), truncated
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect();
    let stress = par::map_slice(&pairs, |&(i, j)| {
        let vals = (0..size)
            .map(|p| {
                let ff: f64 = (0..d).map(|k| v.f[i * d + k][p] * v.f[j * d + k][p]).sum();
                ff - v.u[i][p] * v.u[j][p]
            })
            .collect();
        truncated(grid, vals)
    });
    let entry = |i: usize, j: usize| {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        &stress[pairs.iter().position(|&q| q == (a, b)).expect("pair present")]
    };
    let mut comps = par::map_range(d, |j| {
        let mut out = s.u.component(j).laplacian();
        for i in 0..d {
            out.axpy(1.0, &entry(i, j).derivative(i));
        }
        out
    });
    project_in_place(&mut comps);
    VectorField::from_components(grid, comps).expect("d components")
}

fn deformation_from(s: &SimState, v: &GridValues, form: AdvectionForm) -> TensorField {
    let grid = *s.grid();
    let d = grid.dim();
    let size = grid.size();
    let comps = par::map_range(d * d, |ij| {
        let (i, j) = (ij / d, ij % d);
        // stretching ∇u F, plus the transport term when in convective form
        let vals = (0..size)
            .map(|p| {
                let mut acc: f64 = (0..d).map(|k| v.grad_u[i * d + k][p] * v.f[k * d + j][p]).sum();
                if form == AdvectionForm::Convective {
                    acc -= (0..d).map(|k| v.u[k][p] * v.grad_f[ij * d + k][p]).sum::<f64>();
                }
                acc
            })
            .collect();
        let mut out = truncated(grid, vals);
        if form == AdvectionForm::Divergence {
            for k in 0..d {
                let flux = (0..size).map(|p| v.u[k][p] * v.f[ij][p]).collect();
                out.axpy(-1.0, &truncated(grid, flux).derivative(k));
            }
        }
        if s.eps != 0.0 {
            out.axpy(s.eps, &s.f.components()[ij].laplacian());
        }
        out
    });
    let mut f = TensorField::from_components(grid, comps).expect("d*d components");
    project_tensor_in_place(&mut f);
    f
}

fn exchange_from(s: &SimState, v: &GridValues) -> f64 {
    let grid = s.grid();
    let d = grid.dim();
    grid.cell_volume()
        * par::ordered_sum(grid.size(), |p| {
            let mut acc = 0.0;
            for i in 0..d {
                for k in 0..d {
                    let ff: f64 = (0..d).map(|j| v.f[i * d + j][p] * v.f[k * d + j][p]).sum();
                    acc += ff * v.grad_u[i * d + k][p];
                }
            }
            acc
        })
}

/// Evaluates both right-hand sides and the exchange term in one pass.
pub fn evaluate(s: &SimState, form: AdvectionForm) -> RhsEval {
    let v = GridValues::new(s, form == AdvectionForm::Convective);
    RhsEval {
        du_dt: momentum_from(s, &v),
        df_dt: deformation_from(s, &v, form),
        exchange: exchange_from(s, &v),
    }
}

/// `P[-div(u⊗u) + Δu + div(F Fᵀ)]`.
pub fn momentum_rhs(s: &SimState) -> VectorField {
    momentum_from(s, &GridValues::new(s, false))
}

/// `Q[-u·∇F + ∇u F + ε ΔF]`.
pub fn deformation_rhs(s: &SimState) -> TensorField {
    deformation_rhs_with(s, AdvectionForm::Convective)
}

pub fn deformation_rhs_with(s: &SimState, form: AdvectionForm) -> TensorField {
    let v = GridValues::new(s, form == AdvectionForm::Convective);
    deformation_from(s, &v, form)
}

/// `(F Fᵀ, ∇u) = ∫ (F Fᵀ)_ik ∂_k u_i`.
pub fn exchange_term(s: &SimState) -> f64 {
    exchange_from(s, &GridValues::new(s, false))
}
