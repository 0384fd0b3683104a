use viscoelastic::diagnostics::{defect_study, verify_energy_inequality, weak_form_residual, TestField};
use viscoelastic::integrator::{common_dt, run, IntegratorConfig, Trajectory};
use viscoelastic::io::{make_initial, GeneratorParams, Scenario};
use viscoelastic::{Grid, SimState, TensorField, VectorField};

fn smooth(n: usize, eps: f64, amplitude: f64) -> SimState {
    let mut sc = Scenario::new("s", Grid::new(2, n).unwrap(), "random_divfree");
    sc.params = GeneratorParams {
        amplitude,
        f_amplitude: amplitude,
        f_identity: true,
        seed: 12,
        data_n: Some(8),
        ..Default::default()
    };
    sc.eps = eps;
    make_initial(&sc).unwrap()
}

fn test_fields(g: Grid) -> Vec<TestField> {
    let col = |f: fn([f64; 3]) -> f64, i: usize| {
        TensorField::from_fn(g, move |x| {
            let mut m = [0.0; 9];
            m[i] = f(x);
            m
        })
    };
    vec![
        TestField { psi: VectorField::from_fn(g, |x| [x[1].sin(), 0.0, 0.0]), psi_f: col(|x| x[1].cos(), 0) },
        TestField { psi: VectorField::from_fn(g, |x| [0.0, (2.0 * x[0]).cos(), 0.0]), psi_f: col(|x| x[0].sin(), 3) },
    ]
}

#[test]
fn zero_state_has_zero_ledger() {
    let s = SimState::zero(Grid::new(2, 8).unwrap(), 0.1).unwrap();
    let traj = run(&s, &IntegratorConfig::new(0.05, 0.2)).unwrap();
    for row in traj.ledger() {
        assert_eq!(row.total(), 0.0);
        assert_eq!(row.exchange, 0.0);
        assert_eq!(row.balance_residual, 0.0);
    }
    let check = verify_energy_inequality(&traj, 0.0).unwrap();
    assert!(check.passed);
    assert!(check.slack.iter().all(|s| *s == 0.0));
}

#[test]
fn slack_tracks_regularization_dissipation() {
    let s = smooth(16, 0.1, 0.5);
    let mut cfg = IntegratorConfig::new(0.01, 0.5);
    cfg.cfl_safety = 0.2;
    let traj = run(&s, &cfg).unwrap();
    let check = verify_energy_inequality(&traj, 1e-8).unwrap();
    assert!(check.passed);
    for (slack, row) in check.slack.iter().zip(traj.ledger()) {
        assert!(*slack >= row.reg_accum - 1e-8, "{slack} < {}", row.reg_accum);
    }
}

#[test]
fn injected_energy_fails() {
    let s = smooth(16, 0.0, 0.5);
    let traj = run(&s, &IntegratorConfig::new(0.01, 0.1)).unwrap();
    let mut ledger = traj.ledger().to_vec();
    let k = ledger.len() / 2;
    ledger[k].kinetic += 1e-6;
    let corrupted = Trajectory::from_parts(traj.snapshots().to_vec(), ledger).unwrap();
    let check = verify_energy_inequality(&corrupted, 1e-8).unwrap();
    assert!(!check.passed);
    assert!((check.worst_violation - 1e-6).abs() < 1e-8);
}

#[test]
fn elastic_energy_is_lower_semicontinuous_under_refinement() {
    let coarse = smooth(16, 0.05, 0.6);
    let fine = smooth(32, 0.05, 0.6);
    let mut cfg = IntegratorConfig::new(0.01, 0.5);
    cfg.dt = common_dt([&coarse, &fine], &cfg);
    cfg.fixed_step = true;
    let (a, b) = (run(&coarse, &cfg).unwrap(), run(&fine, &cfg).unwrap());
    // the gap sits at the truncation level, so the tolerance is relative
    let tol = 1e-9 * coarse.elastic();
    for (x, y) in a.snapshots().iter().zip(b.snapshots()) {
        assert_eq!(x.t(), y.t());
        assert!(2.0 * (x.elastic() - y.elastic()) >= -tol, "t = {}", x.t());
    }
}

#[test]
fn defect_vanishes_as_eps_decreases() {
    let s = smooth(16, 0.0, 0.5);
    let mut cfg = IntegratorConfig::new(0.01, 0.5);
    cfg.snapshot_every = 5;
    let rep = defect_study(&s, &[0.04, 0.02, 0.01, 0.005, 0.0025], &cfg, 1e-12).unwrap();
    let magnitude: Vec<f64> = rep.final_defect().iter().map(|d| d.abs()).collect();
    assert!(magnitude.windows(2).all(|w| w[1] < w[0]), "{magnitude:?}");
    assert_eq!(*magnitude.last().unwrap(), 0.0);
    // roughly linear in the distance to the reference ε
    let ratio = magnitude[0] / magnitude[1];
    assert!((1.8..3.0).contains(&ratio), "{ratio}");
    assert!(rep.reg_accum.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn resolved_stokes_decay_satisfies_weak_forms() {
    let g = Grid::new(2, 16).unwrap();
    let mut sc = Scenario::new("tg", g, "taylor_green");
    sc.params.amplitude = 1.0;
    let s = make_initial(&sc).unwrap();
    let mut cfg = IntegratorConfig::new(0.005, 0.5);
    cfg.fixed_step = true;
    let traj = run(&s, &cfg).unwrap();
    let rep = weak_form_residual(&traj, &test_fields(g), 1e-8).unwrap();
    assert!(!rep.flagged, "{} {}", rep.max_momentum, rep.max_deformation);
}

#[test]
fn coarse_snapshots_are_flagged() {
    let mut sc = Scenario::new("r", Grid::new(2, 16).unwrap(), "random_divfree");
    sc.params = GeneratorParams { amplitude: 3.0, f_amplitude: 2.0, f_identity: true, seed: 2, ..Default::default() };
    let s = make_initial(&sc).unwrap();
    let mut cfg = IntegratorConfig::new(0.01, 1.0);
    cfg.snapshot_every = 40;
    let traj = run(&s, &cfg).unwrap();
    let rep = weak_form_residual(&traj, &test_fields(*s.grid()), 1e-8).unwrap();
    assert!(rep.flagged);
    assert!(rep.max_momentum.max(rep.max_deformation) > 1e-4);
}

#[test]
fn resolved_viscoelastic_run_satisfies_weak_forms() {
    let s = smooth(16, 0.05, 0.5);
    let mut cfg = IntegratorConfig::new(0.002, 0.3);
    cfg.fixed_step = true;
    let traj = run(&s, &cfg).unwrap();
    let rep = weak_form_residual(&traj, &test_fields(*s.grid()), 1e-8).unwrap();
    assert!(!rep.flagged, "{} {}", rep.max_momentum, rep.max_deformation);
    assert!(traj.final_state().elastic() > 1.0);
}
