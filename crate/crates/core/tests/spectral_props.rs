use proptest::prelude::*;
use viscoelastic::io::{make_initial, GeneratorParams, Scenario};
use viscoelastic::spectral::{
    dealias, divergence_ratio_tensor, divergence_ratio_vec, fft_forward, fft_inverse, physical_inner,
    project_divfree_tensor, project_divfree_vec, transfer_vec,
};
use viscoelastic::{Grid, SimState, TensorField, VectorField};

fn random_vector(g: Grid, seed: u64) -> VectorField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let vals: Vec<Vec<f64>> = (0..g.dim()).map(|_| (0..g.size()).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let comps = vals
        .iter()
        .map(|v| viscoelastic::ScalarField::from_physical(g, v).unwrap())
        .collect();
    VectorField::from_components(g, comps).unwrap()
}

fn random_tensor(g: Grid, seed: u64) -> TensorField {
    let cols: Vec<VectorField> = (0..g.dim()).map(|j| random_vector(g, seed.wrapping_mul(7).wrapping_add(j as u64))).collect();
    let mut f = TensorField::zeros(g);
    for (j, c) in cols.into_iter().enumerate() {
        f.set_column(j, c);
    }
    f
}

fn grid() -> impl Strategy<Value = Grid> {
    prop_oneof![
        (4usize..=8).prop_map(|h| Grid::new(2, 2 * h).unwrap()),
        Just(Grid::new(3, 8).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parseval_and_inverse(g in grid(), seed in any::<u64>()) {
        let v = random_vector(g, seed).component(0).physical();
        let c = fft_forward(&g, &v).unwrap();
        let back = fft_inverse(&g, &c).unwrap();
        for (a, b) in v.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let physical = physical_inner(&g, &v, &v);
        let spectral: f64 = g.volume() * c.iter().map(|z| z.norm_sqr()).sum::<f64>();
        prop_assert!((physical - spectral).abs() <= 1e-12 * physical.max(1.0));
    }

    #[test]
    fn leray_projection_properties(g in grid(), seed in any::<u64>()) {
        let v = random_vector(g, seed);
        let p = project_divfree_vec(&v);
        prop_assert!(divergence_ratio_vec(&p) < 1e-12);
        let pp = project_divfree_vec(&p);
        for (a, b) in p.components().iter().zip(pp.components()) {
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                prop_assert!((x - y).norm() < 1e-14);
            }
        }
        // v - Pv is orthogonal to Pv
        let cross: f64 = v.components().iter().zip(p.components()).map(|(a, b)| a.inner(b) - b.norm_sq()).sum();
        prop_assert!(cross.abs() < 1e-10 * v.components().iter().map(|c| c.norm_sq()).sum::<f64>().max(1.0));
    }

    #[test]
    fn column_projection_properties(g in grid(), seed in any::<u64>()) {
        let f = random_tensor(g, seed);
        let q = project_divfree_tensor(&f);
        prop_assert!(divergence_ratio_tensor(&q) < 1e-12);
        let norm_f: f64 = f.components().iter().map(|c| c.norm_sq()).sum();
        let norm_q: f64 = q.components().iter().map(|c| c.norm_sq()).sum();
        prop_assert!(norm_q <= norm_f * (1.0 + 1e-12));
    }

    #[test]
    fn dealias_is_idempotent(g in grid(), seed in any::<u64>()) {
        let c = random_vector(g, seed).component(0).coeffs().to_vec();
        let once = dealias(&g, &c).unwrap();
        let twice = dealias(&g, &once).unwrap();
        prop_assert_eq!(&once, &twice);
        let band = g.retained_band();
        for (flat, z) in once.iter().enumerate() {
            let m = g.mode_vector(flat);
            if m.iter().any(|x| x.abs() > band) {
                prop_assert_eq!(z.norm(), 0.0);
            }
        }
    }

    #[test]
    fn transfer_roundtrip(h in 4usize..=8, seed in any::<u64>()) {
        let n = 2 * h;
        let coarse = Grid::new(2, n).unwrap();
        let fine = Grid::new(2, 2 * n).unwrap();
        let mut v = random_vector(coarse, seed);
        v.dealias();
        let up = transfer_vec(&v, fine).unwrap();
        let down = transfer_vec(&up, coarse).unwrap();
        for ((a, b), c) in v.components().iter().zip(down.components()).zip(up.components()) {
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                prop_assert!((x - y).norm() < 1e-15);
            }
            prop_assert!((a.norm_sq() - c.norm_sq()).abs() < 1e-12 * a.norm_sq().max(1.0));
        }
    }

    /// `∫ ∇w G · Ξ = −∫ (w ⊗ Gᵀ) · ∇Ξ` for divergence-free `G`.
    #[test]
    fn integration_by_parts_identity(seed in any::<u64>()) {
        let g = Grid::new(2, 16).unwrap();
        // band-limited, so the triple products are alias free on the grid
        let mut w = random_vector(g, seed);
        w.dealias();
        let mut big_g = random_tensor(g, seed ^ 0x5a5a);
        big_g.dealias();
        let big_g = project_divfree_tensor(&big_g);
        let mut xi = random_tensor(g, seed.wrapping_add(17));
        xi.dealias();
        let (wv, gw) = (w.physical(), w.gradient().physical());
        let gv = big_g.physical();
        let xv = xi.physical();
        let gx: Vec<Vec<f64>> = xi.gradient().iter().map(|c| c.physical()).collect();
        let (mut lhs, mut rhs) = (0.0, 0.0);
        for p in 0..g.size() {
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        lhs += gw[i * 2 + k][p] * gv[k * 2 + j][p] * xv[i * 2 + j][p];
                        rhs -= wv[i][p] * gv[k * 2 + j][p] * gx[(i * 2 + j) * 2 + k][p];
                    }
                }
            }
        }
        let h = g.cell_volume();
        prop_assert!((h * (lhs - rhs)).abs() < 1e-10, "{} vs {}", h * lhs, h * rhs);
    }
}

#[test]
fn generators_are_divergence_free() {
    for gen in viscoelastic::io::GENERATORS {
        let mut sc = Scenario::new("g", Grid::new(2, 16).unwrap(), gen);
        sc.params = GeneratorParams { amplitude: 0.5, f_amplitude: 0.3, delta: 0.2, seed: 7, ..Default::default() };
        let s: SimState = make_initial(&sc).unwrap();
        assert!(divergence_ratio_vec(s.u()) < 1e-14, "{gen}");
        assert!(divergence_ratio_tensor(s.f()) < 1e-14, "{gen}");
    }
}
