//! Binary snapshot and basis files, little-endian throughout.
//!
//! Snapshot: `VEFSNAP\0`, version `u32`, `d u32`, `n u32`, `length f64`,
//! `t f64`, `eps f64`, then `(re, im)` pairs of `f64` for `u_1..u_d`,
//! `F_11..F_dd`, each in row-major mode order.
//!
//! Basis: `VEFBASIS`, version `u32`, `nx u32`, `ny u32`, `lx f64`, `ly f64`,
//! `count u32`, then per eigenpair `λ f64` followed by the `4 nx ny` values
//! of the flat matrix field.

use std::path::Path;

use num_complex::Complex64;

use crate::dynamics::SimState;
use crate::error::{Error, Result};
use crate::neumann_basis::{EigenPair, RectGrid};
use crate::spectral::{Grid, ScalarField, TensorField, VectorField};

pub const SNAPSHOT_MAGIC: [u8; 8] = *b"VEFSNAP\0";
pub const BASIS_MAGIC: [u8; 8] = *b"VEFBASIS";
pub const SNAPSHOT_VERSION: u32 = 1;

pub fn snapshot_bytes(s: &SimState) -> Vec<u8> {
    let g = s.grid();
    let comps = g.dim() + g.dim() * g.dim();
    let mut out = Vec::with_capacity(48 + comps * g.size() * 16);
    out.extend_from_slice(&SNAPSHOT_MAGIC);
    out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    for x in [g.length(), s.t(), s.eps()] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for field in s.u().components().iter().chain(s.f().components()) {
        for c in field.coeffs() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    out
}

pub fn snapshot_from_bytes(bytes: &[u8]) -> Result<SimState> {
    let mut r = Reader::new(bytes);
    if r.take(8)? != SNAPSHOT_MAGIC {
        return Err(Error::BadMagic);
    }
    let version = r.u32()?;
    if version != SNAPSHOT_VERSION {
        return Err(Error::VersionUnsupported(version));
    }
    let (d, n) = (r.u32()? as usize, r.u32()? as usize);
    let (length, t, eps) = (r.f64()?, r.f64()?, r.f64()?);
    let grid = Grid::with_length(d, n, length)?;
    let mut fields = Vec::with_capacity(d + d * d);
    for _ in 0..d + d * d {
        let coeffs = (0..grid.size())
            .map(|_| Ok(Complex64::new(r.f64()?, r.f64()?)))
            .collect::<Result<Vec<_>>>()?;
        fields.push(ScalarField::from_coeffs(grid, coeffs)?);
    }
    r.finish()?;
    let f = fields.split_off(d);
    SimState::from_raw_parts(
        t,
        VectorField::from_components(grid, fields)?,
        TensorField::from_components(grid, f)?,
        eps,
    )
}

pub fn save_snapshot(path: impl AsRef<Path>, s: &SimState) -> Result<()> {
    std::fs::write(path, snapshot_bytes(s))?;
    Ok(())
}

/// Loads a snapshot verbatim, without re-projecting.
pub fn load_snapshot(path: impl AsRef<Path>) -> Result<SimState> {
    snapshot_from_bytes(&std::fs::read(path)?)
}

pub fn basis_bytes(grid: &RectGrid, pairs: &[EigenPair]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&BASIS_MAGIC);
    out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.nx as u32).to_le_bytes());
    out.extend_from_slice(&(grid.ny as u32).to_le_bytes());
    out.extend_from_slice(&grid.lx.to_le_bytes());
    out.extend_from_slice(&grid.ly.to_le_bytes());
    out.extend_from_slice(&(pairs.len() as u32).to_le_bytes());
    for p in pairs {
        out.extend_from_slice(&p.lambda.to_le_bytes());
        for x in &p.phi {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn basis_from_bytes(bytes: &[u8]) -> Result<(RectGrid, Vec<EigenPair>)> {
    let mut r = Reader::new(bytes);
    if r.take(8)? != BASIS_MAGIC {
        return Err(Error::BadMagic);
    }
    let version = r.u32()?;
    if version != SNAPSHOT_VERSION {
        return Err(Error::VersionUnsupported(version));
    }
    let (nx, ny) = (r.u32()? as usize, r.u32()? as usize);
    let (lx, ly) = (r.f64()?, r.f64()?);
    let grid = RectGrid::new(nx, ny, lx, ly)?;
    let count = r.u32()? as usize;
    let mut pairs = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let lambda = r.f64()?;
        let phi = (0..grid.field_len()).map(|_| r.f64()).collect::<Result<_>>()?;
        pairs.push(EigenPair { lambda, phi });
    }
    r.finish()?;
    Ok((grid, pairs))
}

pub fn save_basis(path: impl AsRef<Path>, grid: &RectGrid, pairs: &[EigenPair]) -> Result<()> {
    std::fs::write(path, basis_bytes(grid, pairs))?;
    Ok(())
}

pub fn load_basis(path: impl AsRef<Path>) -> Result<(RectGrid, Vec<EigenPair>)> {
    basis_from_bytes(&std::fs::read(path)?)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).ok_or(Error::TruncatedPayload)?;
        let chunk = self.bytes.get(self.pos..end).ok_or(Error::TruncatedPayload)?;
        self.pos = end;
        Ok(chunk)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::InvalidShape { expected: self.pos, actual: self.bytes.len() });
        }
        Ok(())
    }
}
