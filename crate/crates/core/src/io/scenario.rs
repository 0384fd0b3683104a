//! Flat `key = value` scenario files and the initial-data generators.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dynamics::{AdvectionForm, SimState};
use crate::error::{Error, Result};
use crate::integrator::IntegratorConfig;
use crate::spectral::{transfer_tensor, transfer_vec, Grid, ScalarField, TensorField, VectorField};

pub const GENERATORS: [&str; 4] =
    ["taylor_green", "random_divfree", "single_mode", "identity_plus_perturbation"];

/// Initial-data parameters; unused fields are ignored by a given generator.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorParams {
    /// Velocity amplitude (root-mean-square for `random_divfree`).
    pub amplitude: f64,
    /// Root-mean-square amplitude of the random part of `F`.
    pub f_amplitude: f64,
    /// Adds the identity to the random `F`.
    pub f_identity: bool,
    /// Perturbation size of `identity_plus_perturbation`.
    pub delta: f64,
    pub seed: u64,
    /// Integer wave vector of `single_mode` / `identity_plus_perturbation`.
    pub mode: [i64; 3],
    /// Resolution on which the data are generated before spectral transfer
    /// to the scenario grid; lets runs at several resolutions share data.
    pub data_n: Option<usize>,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            f_amplitude: 0.0,
            f_identity: false,
            delta: 0.0,
            seed: 0,
            mode: [1, 0, 0],
            data_n: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub grid: Grid,
    pub generator: String,
    pub params: GeneratorParams,
    pub eps: f64,
    pub integrator: IntegratorConfig,
}

impl Scenario {
    pub fn new(name: &str, grid: Grid, generator: &str) -> Self {
        Self {
            name: name.to_string(),
            grid,
            generator: generator.to_string(),
            params: GeneratorParams::default(),
            eps: 0.0,
            integrator: IntegratorConfig::new(0.01, 1.0),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Parses `key = value` lines; `#` starts a comment. Unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut name = String::from("scenario");
        let (mut dim, mut n, mut length) = (2usize, 32usize, 2.0 * std::f64::consts::PI);
        let mut generator = String::from("taylor_green");
        let mut params = GeneratorParams::default();
        let mut eps = 0.0;
        let mut cfg = IntegratorConfig::new(0.01, 1.0);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| {
                Error::InvalidConfig(format!("line {}: bad {what} `{value}`", lineno + 1))
            };
            let num = |v: &str| v.parse::<f64>().map_err(|_| bad(key));
            match key {
                "name" => name = value.to_string(),
                "dim" => dim = value.parse().map_err(|_| bad(key))?,
                "n" => n = value.parse().map_err(|_| bad(key))?,
                "length" => length = num(value)?,
                "generator" => generator = value.to_string(),
                "amplitude" => params.amplitude = num(value)?,
                "f_amplitude" => params.f_amplitude = num(value)?,
                "f_identity" => params.f_identity = value.parse().map_err(|_| bad(key))?,
                "delta" => params.delta = num(value)?,
                "seed" => params.seed = value.parse().map_err(|_| bad(key))?,
                "mode" => {
                    let parts: Vec<i64> = value
                        .split(',')
                        .map(|p| p.trim().parse::<i64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad(key))?;
                    if parts.is_empty() || parts.len() > 3 {
                        return Err(bad(key));
                    }
                    params.mode = [0; 3];
                    params.mode[..parts.len()].copy_from_slice(&parts);
                }
                "data_n" => params.data_n = Some(value.parse().map_err(|_| bad(key))?),
                "eps" => eps = num(value)?,
                "dt" => cfg.dt = num(value)?,
                "t_end" => cfg.t_end = num(value)?,
                "cfl_safety" => cfg.cfl_safety = num(value)?,
                "snapshot_every" => cfg.snapshot_every = value.parse().map_err(|_| bad(key))?,
                "fixed_step" => cfg.fixed_step = value.parse().map_err(|_| bad(key))?,
                "scheme" if value == "rk4" => {}
                "advection" => {
                    cfg.advection = match value {
                        "convective" => AdvectionForm::Convective,
                        "divergence" => AdvectionForm::Divergence,
                        _ => return Err(bad(key)),
                    }
                }
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "line {}: unknown key or value `{line}`",
                        lineno + 1
                    )))
                }
            }
        }
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::InvalidConfig(format!("eps must be >= 0, got {eps}")));
        }
        cfg.validate()?;
        let grid = Grid::with_length(dim, n, length)?;
        Ok(Self { name, grid, generator, params, eps, integrator: cfg })
    }

    /// Canonical text form; `parse(to_text())` reproduces the scenario.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let c = &self.integrator;
        let mut s = String::new();
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "dim = {}", self.grid.dim());
        let _ = writeln!(s, "n = {}", self.grid.n());
        let _ = writeln!(s, "length = {:e}", self.grid.length());
        let _ = writeln!(s, "generator = {}", self.generator);
        let _ = writeln!(s, "amplitude = {:e}", p.amplitude);
        let _ = writeln!(s, "f_amplitude = {:e}", p.f_amplitude);
        let _ = writeln!(s, "f_identity = {}", p.f_identity);
        let _ = writeln!(s, "delta = {:e}", p.delta);
        let _ = writeln!(s, "seed = {}", p.seed);
        let _ = writeln!(s, "mode = {},{},{}", p.mode[0], p.mode[1], p.mode[2]);
        if let Some(dn) = p.data_n {
            let _ = writeln!(s, "data_n = {dn}");
        }
        let _ = writeln!(s, "eps = {:e}", self.eps);
        let _ = writeln!(s, "dt = {:e}", c.dt);
        let _ = writeln!(s, "t_end = {:e}", c.t_end);
        let _ = writeln!(s, "cfl_safety = {:e}", c.cfl_safety);
        let _ = writeln!(s, "snapshot_every = {}", c.snapshot_every);
        let _ = writeln!(s, "fixed_step = {}", c.fixed_step);
        let form = match c.advection {
            AdvectionForm::Convective => "convective",
            AdvectionForm::Divergence => "divergence",
        };
        let _ = writeln!(s, "advection = {form}");
        s
    }
}

/// Builds the projected, dealiased initial state of a scenario.
pub fn make_initial(sc: &Scenario) -> Result<SimState> {
    if let Some(dn) = sc.params.data_n.filter(|&dn| dn != sc.grid.n()) {
        let coarse_grid = Grid::with_length(sc.grid.dim(), dn, sc.grid.length())?;
        let mut coarse = sc.clone();
        coarse.grid = coarse_grid;
        coarse.params.data_n = None;
        let s = make_initial(&coarse)?;
        return SimState::new(
            transfer_vec(s.u(), sc.grid)?,
            transfer_tensor(s.f(), sc.grid)?,
            sc.eps,
        );
    }
    let g = sc.grid;
    let p = &sc.params;
    let (u, f) = match sc.generator.as_str() {
        "taylor_green" => (taylor_green(g, p.amplitude), TensorField::zeros(g)),
        "random_divfree" => {
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
            let u = random_vector(g, &mut rng, p.amplitude);
            let mut f = random_tensor(g, &mut rng, p.f_amplitude);
            if p.f_identity {
                f.axpy(1.0, &TensorField::identity(g));
            }
            (u, f)
        }
        "single_mode" => {
            let (k, a) = mode_and_normal(g, p.mode)?;
            let amp = p.amplitude;
            let u = VectorField::from_fn(g, move |x| {
                let s = amp * dot(&k, &x).sin();
                [s * a[0], s * a[1], s * a[2]]
            });
            (u, TensorField::zeros(g))
        }
        "identity_plus_perturbation" => {
            let (k, a) = mode_and_normal(g, p.mode)?;
            let (d, delta) = (g.dim(), p.delta);
            let f = TensorField::from_fn(g, move |x| {
                let c = delta * dot(&k, &x).cos();
                let mut m = [0.0; 9];
                for i in 0..d {
                    for j in 0..d {
                        m[i * 3 + j] = f64::from(u8::from(i == j)) + c * a[i] * a[j];
                    }
                }
                m
            });
            (VectorField::zeros(g), f)
        }
        other => return Err(Error::UnknownGenerator(other.to_string())),
    };
    SimState::new(u, f, sc.eps)
}

fn dot(k: &[f64; 3], x: &[f64; 3]) -> f64 {
    k[0] * x[0] + k[1] * x[1] + k[2] * x[2]
}

/// `(sin x cos y, −cos x sin y)`, with a `cos z` factor in 3D.
pub fn taylor_green(g: Grid, amplitude: f64) -> VectorField {
    let three = g.dim() == 3;
    let s = g.wavenumber_scale();
    VectorField::from_fn(g, move |x| {
        let (x0, x1) = (s * x[0], s * x[1]);
        let z = if three { (s * x[2]).cos() } else { 1.0 };
        [amplitude * x0.sin() * x1.cos() * z, -amplitude * x0.cos() * x1.sin() * z, 0.0]
    })
}

/// Physical wave vector of integer `mode` and a unit vector orthogonal to it.
fn mode_and_normal(g: Grid, mode: [i64; 3]) -> Result<([f64; 3], [f64; 3])> {
    let d = g.dim();
    if mode[..d].iter().all(|&m| m == 0) {
        return Err(Error::InvalidConfig("mode must be nonzero".into()));
    }
    if mode[d..].iter().any(|&m| m != 0) {
        return Err(Error::InvalidConfig(format!("mode has more than {d} components")));
    }
    let s = g.wavenumber_scale();
    let k = mode.map(|m| m as f64 * s);
    let a = if d == 2 {
        [-k[1], k[0], 0.0]
    } else {
        // cross with the axis least aligned with k
        let axis = (0..3)
            .min_by(|&i, &j| k[i].abs().total_cmp(&k[j].abs()))
            .expect("three axes");
        let mut e = [0.0; 3];
        e[axis] = 1.0;
        [k[1] * e[2] - k[2] * e[1], k[2] * e[0] - k[0] * e[2], k[0] * e[1] - k[1] * e[0]]
    };
    let norm = dot(&a, &a).sqrt();
    Ok((k, a.map(|c| c / norm)))
}

/// Real field with complex Gaussian coefficients scaled by `|k|^{-3}` on the
/// retained band, mean zero.
fn random_scalar(g: Grid, rng: &mut ChaCha8Rng) -> ScalarField {
    let band = g.retained_band();
    let s = g.wavenumber_scale();
    let coeffs: Vec<Complex64> = (0..g.size())
        .map(|m| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let mv = g.mode_vector(m);
            let k2: f64 = mv.iter().map(|&c| (c as f64 * s).powi(2)).sum();
            if k2 == 0.0 || mv.iter().any(|c| c.abs() > band) {
                Complex64::default()
            } else {
                Complex64::new(re, im) * k2.powf(-1.5)
            }
        })
        .collect();
    // keep the real part to restore Hermitian symmetry
    let raw = ScalarField::from_coeffs(g, coeffs).expect("sizes agree");
    ScalarField::from_physical(g, &raw.physical()).expect("sizes agree")
}

fn random_vector(g: Grid, rng: &mut ChaCha8Rng, rms: f64) -> VectorField {
    let comps = (0..g.dim()).map(|_| random_scalar(g, rng)).collect();
    let mut u = VectorField::from_components(g, comps).expect("d components");
    crate::spectral::project_in_place(u.components_mut());
    u.dealias();
    normalize(u.norm_sq(), g, rms, |a| u.scale(a));
    u
}

fn random_tensor(g: Grid, rng: &mut ChaCha8Rng, rms: f64) -> TensorField {
    let comps = (0..g.dim() * g.dim()).map(|_| random_scalar(g, rng)).collect();
    let mut f = TensorField::from_components(g, comps).expect("d² components");
    crate::spectral::project_tensor_in_place(&mut f);
    f.dealias();
    normalize(f.norm_sq(), g, rms, |a| f.scale(a));
    f
}

fn normalize(norm_sq: f64, g: Grid, rms: f64, scale: impl FnOnce(f64)) {
    let current = (norm_sq / g.volume()).sqrt();
    scale(if current > 0.0 { rms / current } else { 0.0 });
}
