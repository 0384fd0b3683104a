use num_complex::Complex64;

use super::fft;
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::par;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Real periodic scalar field stored by its spectral coefficients.
///
/// Grid values are produced on demand by [`ScalarField::physical`]; the two
/// representations agree to transform round-off.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, coeffs: vec![Complex64::default(); grid.size()] }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    pub fn from_physical(grid: Grid, values: &[f64]) -> Result<Self> {
        Ok(Self { grid, coeffs: fft::fft_forward(&grid, values)? })
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.size() {
            return Err(Error::InvalidShape { expected: grid.size(), actual: coeffs.len() });
        }
        Ok(Self { grid, coeffs })
    }

    /// Samples `f` at the grid points.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64 + Sync + Send) -> Self {
        let values = par::map_range(grid.size(), |p| f(grid.coords(p)));
        let mut coeffs: Vec<Complex64> = values.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        fft::forward_in_place(&grid, &mut coeffs);
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn physical(&self) -> Vec<f64> {
        let mut data = self.coeffs.clone();
        fft::inverse_in_place(&self.grid, &mut data);
        data.into_iter().map(|c| c.re).collect()
    }

    /// Spectral derivative along `axis` (Nyquist component dropped).
    pub fn derivative(&self, axis: usize) -> Self {
        let t = self.grid.tables();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&t.deriv_k)
            .map(|(c, k)| c * I * k[axis])
            .collect();
        Self { grid: self.grid, coeffs }
    }

    pub fn laplacian(&self) -> Self {
        let t = self.grid.tables();
        let coeffs = self.coeffs.iter().zip(&t.k_sq).map(|(c, k2)| c * -k2).collect();
        Self { grid: self.grid, coeffs }
    }

    /// 2/3-rule truncation: zeroes every mode with some `3|m_axis| >= n`.
    pub fn dealias(&mut self) {
        let t = self.grid.tables();
        for (c, &keep) in self.coeffs.iter_mut().zip(&t.retained) {
            if !keep {
                *c = Complex64::default();
            }
        }
    }

    pub fn dealiased(&self) -> Self {
        let mut f = self.clone();
        f.dealias();
        f
    }

    /// `∫_Ω f g` (Parseval).
    pub fn inner(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        let a = &self.coeffs;
        let b = &other.coeffs;
        self.grid.volume() * par::ordered_sum(a.len(), |i| (a[i] * b[i].conj()).re)
    }

    pub fn norm_sq(&self) -> f64 {
        let a = &self.coeffs;
        self.grid.volume() * par::ordered_sum(a.len(), |i| a[i].norm_sqr())
    }

    /// `‖∇f‖²` evaluated spectrally.
    pub fn grad_norm_sq(&self) -> f64 {
        let t = self.grid.tables();
        let a = &self.coeffs;
        self.grid.volume() * par::ordered_sum(a.len(), |i| t.k_sq[i] * a[i].norm_sqr())
    }

    /// Largest coefficient modulus.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert_eq!(self.grid, other.grid);
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o * a;
        }
    }
}

macro_rules! multi_component_field {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name {
            grid: Grid,
            comps: Vec<ScalarField>,
        }

        impl $name {
            pub fn grid(&self) -> &Grid {
                &self.grid
            }

            pub fn components(&self) -> &[ScalarField] {
                &self.comps
            }

            pub fn components_mut(&mut self) -> &mut [ScalarField] {
                &mut self.comps
            }

            pub fn into_components(self) -> Vec<ScalarField> {
                self.comps
            }

            pub fn inner(&self, other: &Self) -> f64 {
                self.comps.iter().zip(&other.comps).map(|(a, b)| a.inner(b)).sum()
            }

            pub fn norm_sq(&self) -> f64 {
                self.comps.iter().map(ScalarField::norm_sq).sum()
            }

            pub fn norm(&self) -> f64 {
                self.norm_sq().sqrt()
            }

            pub fn grad_norm_sq(&self) -> f64 {
                self.comps.iter().map(ScalarField::grad_norm_sq).sum()
            }

            pub fn is_finite(&self) -> bool {
                self.comps.iter().all(ScalarField::is_finite)
            }

            pub fn scale(&mut self, a: f64) {
                self.comps.iter_mut().for_each(|c| c.scale(a));
            }

            pub fn axpy(&mut self, a: f64, other: &Self) {
                for (c, o) in self.comps.iter_mut().zip(&other.comps) {
                    c.axpy(a, o);
                }
            }

            pub fn dealias(&mut self) {
                self.comps.iter_mut().for_each(ScalarField::dealias);
            }

            pub fn laplacian(&self) -> Self {
                Self { grid: self.grid, comps: self.comps.iter().map(ScalarField::laplacian).collect() }
            }

            /// Grid values of every component.
            pub fn physical(&self) -> Vec<Vec<f64>> {
                par::map_slice(&self.comps, ScalarField::physical)
            }
        }
    };
}

multi_component_field!(
    /// `d`-component vector field.
    VectorField
);

multi_component_field!(
    /// `d×d` matrix field, components stored row-major (`F_ij` at `i*d + j`).
    TensorField
);

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, comps: vec![ScalarField::zeros(grid); grid.dim()] }
    }

    pub fn from_components(grid: Grid, comps: Vec<ScalarField>) -> Result<Self> {
        check_components(&grid, &comps, grid.dim())?;
        Ok(Self { grid, comps })
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 3] + Sync + Send) -> Self {
        let comps = (0..grid.dim())
            .map(|i| ScalarField::from_fn(grid, |x| f(x)[i]))
            .collect();
        Self { grid, comps }
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.comps[i]
    }

    /// Velocity gradient with `(∇u)_ij = ∂_j u_i`.
    pub fn gradient(&self) -> TensorField {
        let d = self.grid.dim();
        let comps = par::map_range(d * d, |ij| self.comps[ij / d].derivative(ij % d));
        TensorField { grid: self.grid, comps }
    }
}

impl TensorField {
    pub fn zeros(grid: Grid) -> Self {
        let d = grid.dim();
        Self { grid, comps: vec![ScalarField::zeros(grid); d * d] }
    }

    /// Constant matrix field, `m` given row-major.
    pub fn constant(grid: Grid, m: &[f64]) -> Result<Self> {
        let d = grid.dim();
        if m.len() != d * d {
            return Err(Error::InvalidShape { expected: d * d, actual: m.len() });
        }
        Ok(Self { grid, comps: m.iter().map(|&v| ScalarField::constant(grid, v)).collect() })
    }

    pub fn identity(grid: Grid) -> Self {
        let d = grid.dim();
        let m: Vec<f64> = (0..d * d).map(|ij| if ij / d == ij % d { 1.0 } else { 0.0 }).collect();
        Self::constant(grid, &m).expect("identity has d*d entries")
    }

    pub fn from_components(grid: Grid, comps: Vec<ScalarField>) -> Result<Self> {
        check_components(&grid, &comps, grid.dim() * grid.dim())?;
        Ok(Self { grid, comps })
    }

    /// `f(x)` returns a 3×3 matrix row-major; only the leading `d×d` block is used.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 9] + Sync + Send) -> Self {
        let d = grid.dim();
        let comps = (0..d * d)
            .map(|ij| {
                let (i, j) = (ij / d, ij % d);
                ScalarField::from_fn(grid, |x| f(x)[i * 3 + j])
            })
            .collect();
        Self { grid, comps }
    }

    pub fn get(&self, i: usize, j: usize) -> &ScalarField {
        &self.comps[i * self.grid.dim() + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut ScalarField {
        let d = self.grid.dim();
        &mut self.comps[i * d + j]
    }

    /// Column `j` as a vector field `(F_1j, …, F_dj)`.
    pub fn column(&self, j: usize) -> VectorField {
        let d = self.grid.dim();
        VectorField { grid: self.grid, comps: (0..d).map(|i| self.get(i, j).clone()).collect() }
    }

    pub fn set_column(&mut self, j: usize, col: VectorField) {
        for (i, c) in col.comps.into_iter().enumerate() {
            *self.get_mut(i, j) = c;
        }
    }

    /// Third-order gradient, entry `[(i*d + j)*d + k] = ∂_k F_ij`.
    pub fn gradient(&self) -> Vec<ScalarField> {
        let d = self.grid.dim();
        par::map_range(d * d * d, |ijk| self.comps[ijk / d].derivative(ijk % d))
    }
}

fn check_components(grid: &Grid, comps: &[ScalarField], expected: usize) -> Result<()> {
    if comps.len() != expected {
        return Err(Error::InvalidShape { expected, actual: comps.len() });
    }
    if let Some(c) = comps.iter().find(|c| c.grid() != grid) {
        return Err(Error::GridMismatch(format!("component on {:?}, field on {:?}", c.grid(), grid)));
    }
    Ok(())
}

/// `cell_volume · Σ_x f(x) g(x)` over grid values, summed in index order.
pub fn physical_inner(grid: &Grid, f: &[f64], g: &[f64]) -> f64 {
    grid.cell_volume() * par::ordered_sum(f.len(), |p| f[p] * g[p])
}
