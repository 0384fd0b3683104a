//! Multi-dimensional transforms built from 1-D `rustfft` plans applied axis by axis.
//!
//! Convention: `c_m = (1/N) Σ_x f(x) e^{-i m·x}`, so a constant field maps to
//! itself at mode 0 and `sin x` has `-i/2` at mode `+1`.

use num_complex::Complex64;
use rustfft::Fft;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::par;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

fn transform(grid: &Grid, data: &mut [Complex64], dir: Direction) {
    let tables = grid.tables();
    let plan: &dyn Fft<f64> = match dir {
        Direction::Forward => tables.forward.as_ref(),
        Direction::Inverse => tables.inverse.as_ref(),
    };
    let n = grid.n();
    let dim = grid.dim();
    // lines per parallel task, keeps tasks coarse on small grids
    let batch = n * n.max(8);
    for axis in (0..dim).rev() {
        let stride = n.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            par::for_each_chunk(data, batch, |_, chunk| plan.process(chunk));
            continue;
        }
        let block = n * stride;
        par::for_each_chunk(data, block, |_, blk| {
            let mut lines = vec![Complex64::default(); block];
            for inner in 0..stride {
                for m in 0..n {
                    lines[inner * n + m] = blk[m * stride + inner];
                }
            }
            plan.process(&mut lines);
            for inner in 0..stride {
                for m in 0..n {
                    blk[m * stride + inner] = lines[inner * n + m];
                }
            }
        });
    }
    if dir == Direction::Forward {
        let norm = 1.0 / grid.size() as f64;
        par::for_each_chunk(data, batch, |_, chunk| {
            for c in chunk {
                *c *= norm;
            }
        });
    }
}

/// Spectral coefficients of a real field given by its grid values.
pub fn fft_forward(grid: &Grid, values: &[f64]) -> Result<Vec<Complex64>> {
    check_len(grid, values.len())?;
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(grid, &mut data, Direction::Forward);
    Ok(data)
}

/// Grid values of the real field with the given (conjugate-symmetric) coefficients.
pub fn fft_inverse(grid: &Grid, coeffs: &[Complex64]) -> Result<Vec<f64>> {
    check_len(grid, coeffs.len())?;
    let mut data = coeffs.to_vec();
    transform(grid, &mut data, Direction::Inverse);
    Ok(data.into_iter().map(|c| c.re).collect())
}

pub(crate) fn forward_in_place(grid: &Grid, data: &mut [Complex64]) {
    transform(grid, data, Direction::Forward);
}

pub(crate) fn inverse_in_place(grid: &Grid, data: &mut [Complex64]) {
    transform(grid, data, Direction::Inverse);
}

fn check_len(grid: &Grid, len: usize) -> Result<()> {
    if len != grid.size() {
        return Err(Error::InvalidShape { expected: grid.size(), actual: len });
    }
    Ok(())
}
