use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform periodic grid on the torus `[0, length)^dim`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
}

impl Grid {
    /// Grid on the `2π`-periodic torus.
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        Self::with_length(dim, n, 2.0 * PI)
    }

    pub fn with_length(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{2, 3}}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "modes per axis must be even and >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("period must be positive, got {length}")));
        }
        Ok(Self { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total number of grid points (`n^dim`).
    pub fn size(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// `|Ω| = length^dim`.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Quadrature weight of one grid point.
    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.size() as f64
    }

    /// `2π / length`.
    pub fn wavenumber_scale(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Signed integer mode in `[-n/2, n/2 - 1]` for array index `i`.
    pub fn mode(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Array index of the signed integer mode `m`.
    pub fn index_of_mode(&self, m: i64) -> usize {
        m.rem_euclid(self.n as i64) as usize
    }

    /// Per-axis indices of a flat row-major index; axis 0 varies slowest.
    pub fn unflatten(&self, flat: usize) -> [usize; 3] {
        let n = self.n;
        match self.dim {
            2 => [flat / n, flat % n, 0],
            _ => [flat / (n * n), (flat / n) % n, flat % n],
        }
    }

    pub fn flatten(&self, idx: [usize; 3]) -> usize {
        let n = self.n;
        match self.dim {
            2 => idx[0] * n + idx[1],
            _ => (idx[0] * n + idx[1]) * n + idx[2],
        }
    }

    /// Physical coordinates of grid point `flat`.
    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let h = self.length / self.n as f64;
        let idx = self.unflatten(flat);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = idx[a] as f64 * h;
        }
        x
    }

    /// Signed integer wavevector of flat mode index `flat`.
    pub fn mode_vector(&self, flat: usize) -> [i64; 3] {
        let idx = self.unflatten(flat);
        let mut m = [0; 3];
        for a in 0..self.dim {
            m[a] = self.mode(idx[a]);
        }
        m
    }

    /// Largest resolvable wavenumber, `(n/2) · 2π/length`.
    pub fn k_max(&self) -> f64 {
        (self.n / 2) as f64 * self.wavenumber_scale()
    }

    /// Largest integer mode kept by the 2/3 rule.
    pub fn retained_band(&self) -> i64 {
        // |m| is kept when 3|m| < n; identical to |m| <= n/3 unless 3 divides n,
        // where the strict form is the one that keeps quadratic products alias-free.
        ((self.n as i64) - 1) / 3
    }

    pub(crate) fn tables(&self) -> Arc<Tables> {
        static CACHE: Lazy<Mutex<HashMap<(usize, usize, u64), Arc<Tables>>>> =
            Lazy::new(|| Mutex::new(HashMap::new()));
        let key = (self.dim, self.n, self.length.to_bits());
        let mut cache = CACHE.lock().expect("spectral table cache poisoned");
        cache
            .entry(key)
            .or_insert_with(|| Arc::new(Tables::build(self)))
            .clone()
    }
}

/// Per-grid wavenumber tables and FFT plans.
pub(crate) struct Tables {
    /// Wavevectors used for first derivatives; the Nyquist component is zeroed.
    pub deriv_k: Vec<[f64; 3]>,
    /// `|k|^2` with the true wavenumbers (Nyquist included).
    pub k_sq: Vec<f64>,
    /// 2/3-rule mask.
    pub retained: Vec<bool>,
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
}

impl Tables {
    fn build(grid: &Grid) -> Self {
        let scale = grid.wavenumber_scale();
        let nyq = -(grid.n as i64) / 2;
        let band = grid.retained_band();
        let size = grid.size();
        let mut deriv_k = Vec::with_capacity(size);
        let mut k_sq = Vec::with_capacity(size);
        let mut retained = Vec::with_capacity(size);
        for flat in 0..size {
            let m = grid.mode_vector(flat);
            let mut kd = [0.0; 3];
            let mut ks = 0.0;
            let mut keep = true;
            for a in 0..grid.dim {
                let k = m[a] as f64 * scale;
                ks += k * k;
                kd[a] = if m[a] == nyq { 0.0 } else { k };
                keep &= m[a].abs() <= band;
            }
            deriv_k.push(kd);
            k_sq.push(ks);
            retained.push(keep);
        }
        let mut planner = FftPlanner::new();
        Self {
            deriv_k,
            k_sq,
            retained,
            forward: planner.plan_fft_forward(grid.n),
            inverse: planner.plan_fft_inverse(grid.n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(1, 16).is_err());
        assert!(Grid::new(2, 6).is_err());
        assert!(Grid::new(2, 17).is_err());
        assert!(Grid::with_length(2, 16, 0.0).is_err());
    }

    #[test]
    fn wavenumbers_span_symmetric_range() {
        let g = Grid::new(2, 16).unwrap();
        let modes: Vec<i64> = (0..16).map(|i| g.mode(i)).collect();
        assert_eq!(*modes.iter().min().unwrap(), -8);
        assert_eq!(*modes.iter().max().unwrap(), 7);
        for m in -8..8 {
            assert_eq!(g.mode(g.index_of_mode(m)), m);
        }
        let g = Grid::with_length(2, 8, 1.0).unwrap();
        assert!((g.wavenumber_scale() - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn flatten_roundtrip() {
        let g = Grid::new(3, 8).unwrap();
        for flat in 0..g.size() {
            assert_eq!(g.flatten(g.unflatten(flat)), flat);
        }
    }

    #[test]
    fn band_follows_two_thirds_rule() {
        assert_eq!(Grid::new(2, 16).unwrap().retained_band(), 5);
        assert_eq!(Grid::new(2, 8).unwrap().retained_band(), 2);
        assert_eq!(Grid::new(2, 32).unwrap().retained_band(), 10);
        assert_eq!(Grid::new(2, 24).unwrap().retained_band(), 7);
    }
}
