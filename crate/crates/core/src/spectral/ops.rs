//! Differential operators, Leray projection and spectral grid transfer.

use num_complex::Complex64;

use super::field::{ScalarField, TensorField, VectorField};
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::par;

/// `Σ_i ∂_i u_i`.
pub fn divergence_vec(u: &VectorField) -> ScalarField {
    let grid = *u.grid();
    let t = grid.tables();
    let comps = u.components();
    let coeffs = (0..grid.size())
        .map(|m| {
            let k = t.deriv_k[m];
            let s: Complex64 = (0..grid.dim()).map(|i| comps[i].coeffs()[m] * k[i]).sum();
            s * Complex64::i()
        })
        .collect();
    ScalarField::from_coeffs(grid, coeffs).expect("sizes agree")
}

/// Column divergence, `(div F)_j = Σ_i ∂_i F_ij`.
pub fn divergence_tensor(f: &TensorField) -> VectorField {
    let grid = *f.grid();
    let comps = (0..grid.dim()).map(|j| divergence_vec(&f.column(j))).collect();
    VectorField::from_components(grid, comps).expect("d components")
}

/// Gradient of a scalar.
pub fn gradient(phi: &ScalarField) -> VectorField {
    let grid = *phi.grid();
    let comps = (0..grid.dim()).map(|a| phi.derivative(a)).collect();
    VectorField::from_components(grid, comps).expect("d components")
}

/// Leray projection, modewise `P_k = I - k kᵀ/|k|²` with `P_0 = I`.
pub fn project_divfree_vec(u: &VectorField) -> VectorField {
    let mut out = u.clone();
    project_in_place(out.components_mut());
    out
}

/// Leray projection of every column of `F`.
pub fn project_divfree_tensor(f: &TensorField) -> TensorField {
    let mut out = f.clone();
    project_tensor_in_place(&mut out);
    out
}

pub(crate) fn project_tensor_in_place(f: &mut TensorField) {
    let d = f.grid().dim();
    for j in 0..d {
        let mut col = f.column(j);
        project_in_place(col.components_mut());
        f.set_column(j, col);
    }
}

/// Projects the vector with components `comps` in place.
pub(crate) fn project_in_place(comps: &mut [ScalarField]) {
    let grid = *comps[0].grid();
    let t = grid.tables();
    let d = grid.dim();
    let size = grid.size();
    let mut cols: Vec<Vec<Complex64>> = comps.iter().map(|c| c.coeffs().to_vec()).collect();
    // gather modes into an interleaved buffer so the modewise update runs in parallel
    let mut packed = vec![Complex64::default(); size * d];
    for (i, col) in cols.iter().enumerate() {
        for m in 0..size {
            packed[m * d + i] = col[m];
        }
    }
    par::for_each_chunk(&mut packed, d * 256, |chunk_idx, chunk| {
        for (local, v) in chunk.chunks_mut(d).enumerate() {
            let m = chunk_idx * 256 + local;
            let k = t.deriv_k[m];
            let k2: f64 = k[..d].iter().map(|x| x * x).sum();
            if k2 == 0.0 {
                continue;
            }
            let kv: Complex64 = (0..d).map(|i| v[i] * k[i]).sum();
            let s = kv / k2;
            for i in 0..d {
                v[i] -= s * k[i];
            }
        }
    });
    for (i, col) in cols.iter_mut().enumerate() {
        for m in 0..size {
            col[m] = packed[m * d + i];
        }
    }
    for (c, col) in comps.iter_mut().zip(cols) {
        c.coeffs_mut().copy_from_slice(&col);
    }
}

/// 2/3-rule truncation of a raw coefficient array.
pub fn dealias(grid: &Grid, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut f = ScalarField::from_coeffs(*grid, coeffs.to_vec())?;
    f.dealias();
    Ok(f.into_coeffs())
}

/// `‖div u‖ / ‖u‖_{W^{1,2}}`, zero for the zero field.
pub fn divergence_ratio_vec(u: &VectorField) -> f64 {
    let norm = (u.norm_sq() + u.grad_norm_sq()).sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    divergence_vec(u).norm_sq().sqrt() / norm
}

/// Column-divergence counterpart of [`divergence_ratio_vec`].
pub fn divergence_ratio_tensor(f: &TensorField) -> f64 {
    let norm = (f.norm_sq() + f.grad_norm_sq()).sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    divergence_tensor(f).norm() / norm
}

/// Checks that two grids can exchange coefficients and returns the finer one.
pub fn common_grid(a: &Grid, b: &Grid) -> Result<Grid> {
    if a.dim() != b.dim() || a.length() != b.length() {
        return Err(Error::GridMismatch(format!("{a:?} vs {b:?}")));
    }
    let (lo, hi) = if a.n() <= b.n() { (a, b) } else { (b, a) };
    if hi.n() % lo.n() != 0 {
        return Err(Error::GridMismatch(format!(
            "resolution ratio {}/{} is not an integer",
            hi.n(),
            lo.n()
        )));
    }
    Ok(*hi)
}

/// Spectral prolongation/restriction: copies every mode representable on both
/// grids, dropping the Nyquist planes of the coarser one.
pub fn transfer(field: &ScalarField, target: Grid) -> Result<ScalarField> {
    let src = *field.grid();
    common_grid(&src, &target)?;
    if src == target {
        return Ok(field.clone());
    }
    let limit = (src.n().min(target.n()) / 2) as i64;
    let mut out = ScalarField::zeros(target);
    let dst = out.coeffs_mut();
    for (m, c) in field.coeffs().iter().enumerate() {
        let mv = src.mode_vector(m);
        if mv[..src.dim()].iter().any(|x| x.abs() >= limit) {
            continue;
        }
        let mut idx = [0usize; 3];
        for a in 0..src.dim() {
            idx[a] = target.index_of_mode(mv[a]);
        }
        dst[target.flatten(idx)] = *c;
    }
    Ok(out)
}

pub fn transfer_vec(u: &VectorField, target: Grid) -> Result<VectorField> {
    let comps = u.components().iter().map(|c| transfer(c, target)).collect::<Result<_>>()?;
    VectorField::from_components(target, comps)
}

pub fn transfer_tensor(f: &TensorField, target: Grid) -> Result<TensorField> {
    let comps = f.components().iter().map(|c| transfer(c, target)).collect::<Result<_>>()?;
    TensorField::from_components(target, comps)
}
