use proptest::prelude::*;
use viscoelastic::diagnostics::verify_energy_inequality;
use viscoelastic::integrator::{run, IntegratorConfig};
use viscoelastic::io::{make_initial, GeneratorParams, Scenario};
use viscoelastic::{Grid, SimState};

fn random(seed: u64, eps: f64) -> SimState {
    let mut sc = Scenario::new("r", Grid::new(2, 16).unwrap(), "random_divfree");
    sc.params = GeneratorParams { amplitude: 0.5, f_amplitude: 0.4, f_identity: true, seed, ..Default::default() };
    sc.eps = eps;
    make_initial(&sc).unwrap()
}

fn distance(a: &SimState, b: &SimState) -> f64 {
    let du: f64 = a.u().components().iter().zip(b.u().components()).map(|(x, y)| {
        let mut d = x.clone();
        d.axpy(-1.0, y);
        d.norm_sq()
    }).sum();
    let df: f64 = a.f().components().iter().zip(b.f().components()).map(|(x, y)| {
        let mut d = x.clone();
        d.axpy(-1.0, y);
        d.norm_sq()
    }).sum();
    (du + df).sqrt()
}

fn fixed(dt: f64, t_end: f64) -> IntegratorConfig {
    let mut cfg = IntegratorConfig::new(dt, t_end);
    cfg.fixed_step = true;
    cfg
}

#[test]
fn converges_to_sub_stepped_reference_at_fourth_order() {
    let s = random(4, 0.05);
    let reference = run(&s, &fixed(0.02 / 64.0, 0.4)).unwrap();
    let errors: Vec<f64> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&dt| distance(run(&s, &fixed(dt, 0.4)).unwrap().final_state(), reference.final_state()))
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((13.0..=19.0).contains(&ratio), "errors {errors:?}");
    }
}

#[test]
fn stokes_decay_is_exponential() {
    let mut sc = Scenario::new("tg", Grid::new(2, 16).unwrap(), "taylor_green");
    sc.params.amplitude = 1.0;
    let s = make_initial(&sc).unwrap();
    let traj = run(&s, &fixed(0.001, 0.5)).unwrap();
    for snap in traj.snapshots() {
        let exact = s.kinetic() * (-4.0 * snap.t()).exp();
        assert!((snap.kinetic() - exact).abs() < 1e-12 * s.kinetic(), "t = {}", snap.t());
    }
    // the viscous dissipation accounts for the whole loss
    let last = traj.ledger().last().unwrap();
    assert!((last.kinetic + last.visc_accum - s.kinetic()).abs() < 1e-12 * s.kinetic());
}

#[test]
fn final_time_is_hit_exactly() {
    let s = random(1, 0.0);
    let traj = run(&s, &IntegratorConfig::new(0.013, 0.1)).unwrap();
    assert_eq!(traj.final_state().t(), 0.1);
    assert_eq!(traj.ledger().last().unwrap().t, 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Total energy never increases beyond the time-discretisation error.
    #[test]
    fn energy_is_non_increasing(seed in 0u64..1000, eps in prop_oneof![Just(0.0), Just(0.05)]) {
        let s = random(seed, eps);
        let mut cfg = IntegratorConfig::new(0.01, 0.2);
        cfg.cfl_safety = 0.1;
        let traj = run(&s, &cfg).unwrap();
        let rows = traj.ledger();
        for w in rows.windows(2) {
            prop_assert!(w[1].kinetic + w[1].elastic <= w[0].kinetic + w[0].elastic + 1e-10);
        }
        let check = verify_energy_inequality(&traj, 1e-8).unwrap();
        prop_assert!(check.passed, "{:e}", check.worst_violation);
        prop_assert!(rows.iter().all(|r| r.divergence < 1e-12));
        prop_assert!(rows.iter().all(|r| r.production_mismatch.abs() < 1e-10));
    }
}
