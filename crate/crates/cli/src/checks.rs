//! Small-grid property suite behind `viscoel check`.

use viscoelastic::diagnostics::verify_energy_inequality;
use viscoelastic::integrator::{run, IntegratorConfig};
use viscoelastic::io::{make_initial, snapshot_bytes, snapshot_from_bytes, GeneratorParams, Scenario};
use viscoelastic::neumann_basis::{eigensolve, l2_gram, RectGrid};
use viscoelastic::relative_energy::{verify_uniqueness, GronwallConstant};
use viscoelastic::{Grid, Result, SimState};

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn random_state(n: usize, seed: u64, eps: f64) -> Result<SimState> {
    let mut sc = Scenario::new("check", Grid::new(2, n)?, "random_divfree");
    sc.params = GeneratorParams { amplitude: 0.2, f_amplitude: 0.2, f_identity: true, seed, ..Default::default() };
    sc.eps = eps;
    make_initial(&sc)
}

fn energy_and_transport() -> Result<Vec<Outcome>> {
    let mut balance: f64 = 0.0;
    let mut mismatch: f64 = 0.0;
    let mut divergence: f64 = 0.0;
    let mut cfg = IntegratorConfig::new(0.01, 0.25);
    cfg.cfl_safety = 0.1;
    for seed in 0..4 {
        let s = random_state(16, seed, if seed % 2 == 0 { 0.0 } else { 0.05 })?;
        let traj = run(&s, &cfg)?;
        balance = balance.max(verify_energy_inequality(&traj, 1e-8)?.max_balance_residual);
        for row in traj.ledger() {
            mismatch = mismatch.max(row.production_mismatch.abs());
            divergence = divergence.max(row.divergence);
        }
    }
    Ok(vec![
        Outcome { name: "energy inequality", passed: balance <= 1e-8, detail: format!("max balance residual {balance:e}") },
        Outcome { name: "exchange cancellation", passed: mismatch <= 1e-10, detail: format!("max mismatch {mismatch:e}") },
        Outcome { name: "divergence preservation", passed: divergence <= 1e-9, detail: format!("max ratio {divergence:e}") },
    ])
}

fn integration_by_parts() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let w = random_state(16, 3 * seed, 0.0)?;
        let g = random_state(16, 3 * seed + 1, 0.0)?;
        let xi = random_state(16, 3 * seed + 2, 0.0)?;
        let grid = *w.grid();
        let (wv, gw) = (w.u().physical(), w.u().gradient().physical());
        let gv = g.f().physical();
        let (xv, gx) = (xi.f().physical(), xi.f().gradient().iter().map(|c| c.physical()).collect::<Vec<_>>());
        let (mut lhs, mut rhs) = (0.0, 0.0);
        for p in 0..grid.size() {
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        lhs += gw[i * 2 + k][p] * gv[k * 2 + j][p] * xv[i * 2 + j][p];
                        rhs -= wv[i][p] * gv[k * 2 + j][p] * gx[(i * 2 + j) * 2 + k][p];
                    }
                }
            }
        }
        let scale = grid.cell_volume();
        worst = worst.max(scale * (lhs - rhs).abs());
    }
    Ok(Outcome { name: "integration by parts", passed: worst <= 1e-10, detail: format!("max gap {worst:e}") })
}

fn rk4_order() -> Result<Outcome> {
    let mut sc = Scenario::new("tg", Grid::new(2, 8)?, "taylor_green");
    sc.params.amplitude = 1.0;
    let s = make_initial(&sc)?;
    let exact = s.kinetic() * (-4.0f64).exp();
    let errors: Vec<f64> = [0.1, 0.05]
        .iter()
        .map(|&dt| {
            let mut cfg = IntegratorConfig::new(dt, 1.0);
            cfg.fixed_step = true;
            run(&s, &cfg).map(|t| (t.final_state().kinetic() - exact).abs())
        })
        .collect::<Result<_>>()?;
    let ratio = errors[0] / errors[1];
    Ok(Outcome { name: "rk4 order", passed: (12.0..=20.0).contains(&ratio), detail: format!("error ratio {ratio:.3}") })
}

fn same_grid_uniqueness() -> Result<Outcome> {
    let s = random_state(16, 9, 0.05)?;
    let traj = run(&s, &IntegratorConfig::new(0.01, 0.2))?;
    let again = run(&s, &IntegratorConfig::new(0.01, 0.2))?;
    let rep = verify_uniqueness(&traj, &again, GronwallConstant::Fixed(1.0), 1e-12, 1e-12)?;
    Ok(Outcome {
        name: "same-grid uniqueness",
        passed: rep.passed && rep.sup_rel_energy <= 1e-12,
        detail: format!("sup rel energy {:e}", rep.sup_rel_energy),
    })
}

fn basis() -> Result<Outcome> {
    let grid = RectGrid::unit_square(8)?;
    let pairs = eigensolve(&grid, 6)?;
    let constant_gap = pairs[..4].iter().map(|p| (p.lambda - 1.0).abs()).fold(0.0, f64::max);
    let gram = l2_gram(&grid, &pairs);
    let mut gram_gap: f64 = 0.0;
    for i in 0..pairs.len() {
        for j in 0..pairs.len() {
            let target = if i == j { 1.0 } else { 0.0 };
            gram_gap = gram_gap.max((gram[(i, j)] - target).abs());
        }
    }
    Ok(Outcome {
        name: "neumann basis",
        passed: constant_gap <= 1e-10 && gram_gap <= 1e-10,
        detail: format!("|lambda - 1| {constant_gap:e}, gram {gram_gap:e}"),
    })
}

fn snapshot_roundtrip() -> Result<Outcome> {
    let s = random_state(8, 4, 0.05)?.with_time(0.5);
    let bytes = snapshot_bytes(&s);
    let back = snapshot_from_bytes(&bytes)?;
    Ok(Outcome {
        name: "snapshot roundtrip",
        passed: back == s && snapshot_bytes(&back) == bytes,
        detail: format!("{} bytes", bytes.len()),
    })
}

/// Prints one line per property; true when all hold.
pub fn run_all() -> bool {
    let groups: Vec<Result<Vec<Outcome>>> = vec![
        energy_and_transport(),
        integration_by_parts().map(|o| vec![o]),
        rk4_order().map(|o| vec![o]),
        same_grid_uniqueness().map(|o| vec![o]),
        basis().map(|o| vec![o]),
        snapshot_roundtrip().map(|o| vec![o]),
    ];
    let mut all = true;
    for group in groups {
        match group {
            Ok(outcomes) => {
                for o in outcomes {
                    println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
                    all &= o.passed;
                }
            }
            Err(e) => {
                println!("FAIL error: {e}");
                all = false;
            }
        }
    }
    all
}
