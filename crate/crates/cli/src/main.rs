use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use viscoelastic::diagnostics::{defect_study, verify_energy_inequality};
use viscoelastic::integrator::{common_dt, run, IntegratorConfig};
use viscoelastic::io::csv::{write_energy_csv, write_table};
use viscoelastic::io::{make_initial, save_basis, save_snapshot, Scenario};
use viscoelastic::neumann_basis::{assemble, divergence_ratio, eigensolve, RectGrid};
use viscoelastic::relative_energy::{verify_uniqueness, GronwallConstant};
use viscoelastic::Error;

mod checks;

/// Thread count for the data-parallel kernels.
const THREADS_VAR: &str = "VISCOEL_THREADS";

#[derive(Parser)]
#[command(name = "viscoel", version, about = "Spectral solver and verification harness for incompressible viscoelastic flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario; writes energy.csv and snapshots.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Allowed energy production.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        no_snapshots: bool,
    },
    /// ε-sweep of one scenario against its smallest-ε run; writes defect.csv.
    Defect {
        #[arg(long)]
        scenario: PathBuf,
        /// Non-increasing, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Relative energy of a scenario against a reference; writes relenergy.csv.
    Uniqueness {
        #[arg(long)]
        scenario: PathBuf,
        /// Reference scenario (usually the same data at higher resolution).
        #[arg(long)]
        reference: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Gronwall constant, a number or `fit`.
        #[arg(long, default_value = "1", value_parser = parse_constant)]
        c: GronwallConstant,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Largest accepted initial relative energy.
        #[arg(long, default_value_t = 1e-12)]
        tol0: f64,
    },
    /// Neumann eigenbasis on a rectangle; writes eigen.csv and basis.bin.
    Basis {
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        lx: f64,
        #[arg(long, default_value_t = 1.0)]
        ly: f64,
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Runs the property suite.
    Check,
}

fn parse_constant(s: &str) -> Result<GronwallConstant, String> {
    if s.eq_ignore_ascii_case("fit") {
        return Ok(GronwallConstant::Fit);
    }
    match s.parse::<f64>() {
        Ok(c) if c.is_finite() && c >= 0.0 => Ok(GronwallConstant::Fixed(c)),
        _ => Err(format!("expected a non-negative number or `fit`, got `{s}`")),
    }
}

enum Failure {
    Violation(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFinite { .. } | Error::InitialMismatch { .. } => Failure::Violation(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { scenario, out, tol, no_snapshots } => cmd_run(&scenario, &out, tol, !no_snapshots),
        Command::Defect { scenario, eps, out, tol } => cmd_defect(&scenario, &eps, &out, tol),
        Command::Uniqueness { scenario, reference, out, c, tol, tol0 } => {
            cmd_uniqueness(&scenario, &reference, &out, c, tol, tol0)
        }
        Command::Basis { nx, ny, lx, ly, k, out } => cmd_basis(nx, ny.unwrap_or(nx), lx, ly, k, &out),
        Command::Check => {
            if checks::run_all() {
                Ok(())
            } else {
                Err(Failure::Violation("property suite failed".into()))
            }
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn cmd_run(path: &Path, out: &Path, tol: f64, snapshots: bool) -> Result<(), Failure> {
    let sc = Scenario::load(path)?;
    let traj = run(&make_initial(&sc)?, &sc.integrator)?;
    write_energy_csv(create(out, "energy.csv")?, traj.ledger())?;
    if snapshots {
        let dir = out.join("snapshots");
        fs::create_dir_all(&dir)?;
        for (i, s) in traj.snapshots().iter().enumerate() {
            save_snapshot(dir.join(format!("snap_{i:05}.bin")), s)?;
        }
    }
    let check = verify_energy_inequality(&traj, tol)?;
    println!(
        "{}: {} steps, worst energy production {:e}, max balance residual {:e}",
        sc.name,
        traj.ledger().len() - 1,
        check.worst_violation,
        check.max_balance_residual
    );
    if !check.passed {
        return Err(Failure::Violation(format!("energy inequality exceeded by {:e}", check.worst_violation)));
    }
    Ok(())
}

fn cmd_defect(path: &Path, eps: &[f64], out: &Path, tol: f64) -> Result<(), Failure> {
    let sc = Scenario::load(path)?;
    let report = defect_study(&make_initial(&sc)?, eps, &sc.integrator, tol)?;
    let rows = report.eps_values.iter().enumerate().flat_map(|(e, &eps)| {
        let report = &report;
        report.times.iter().enumerate().map(move |(i, &t)| {
            vec![eps, t, report.d_proxy[e][i], report.corrector_proxy[e][i]]
        })
    });
    write_table(create(out, "defect.csv")?, &["eps", "t", "d_proxy", "corrector_proxy"], rows)?;
    for (e, &eps) in report.eps_values.iter().enumerate() {
        println!(
            "eps {eps}: D_proxy(T) {:e}, reg_accum {:e}, c {}",
            report.d_proxy[e].last().copied().unwrap_or(0.0),
            report.reg_accum[e],
            report.fitted_c[e]
        );
    }
    if !report.dominated() {
        return Err(Failure::Violation("corrector not dominated by the positive defect".into()));
    }
    Ok(())
}

fn cmd_uniqueness(
    path: &Path,
    reference: &Path,
    out: &Path,
    c: GronwallConstant,
    tol: f64,
    tol0: f64,
) -> Result<(), Failure> {
    let (sc, sc_ref) = (Scenario::load(path)?, Scenario::load(reference)?);
    let (a, b) = (make_initial(&sc)?, make_initial(&sc_ref)?);
    let cfg = IntegratorConfig { dt: common_dt([&a, &b], &sc.integrator), fixed_step: true, ..sc.integrator.clone() };
    let (traj, traj_ref) = (run(&a, &cfg)?, run(&b, &cfg)?);
    let report = verify_uniqueness(&traj, &traj_ref, c, tol, tol0)?;
    let series = &report.series;
    let rows = (0..series.times.len())
        .map(|i| vec![series.times[i], series.rel_energy[i], report.envelope[i], series.coeff[i]]);
    write_table(create(out, "relenergy.csv")?, &["t", "rel_energy", "envelope", "coeff"], rows)?;
    println!(
        "initial {:e}, sup {:e}, c {}, worst margin {:e}",
        report.initial, report.sup_rel_energy, report.c, report.worst_margin
    );
    if !report.passed {
        return Err(Failure::Violation("relative energy left the Gronwall envelope".into()));
    }
    Ok(())
}

fn cmd_basis(nx: usize, ny: usize, lx: f64, ly: f64, k: usize, out: &Path) -> Result<(), Failure> {
    let grid = RectGrid::new(nx, ny, lx, ly)?;
    let pairs = eigensolve(&grid, k)?;
    let asm = assemble(&grid);
    let rows = pairs
        .iter()
        .enumerate()
        .map(|(j, p)| vec![(j + 1) as f64, p.lambda, divergence_ratio(&asm, &p.phi)]);
    write_table(create(out, "eigen.csv")?, &["j", "lambda", "divergence_ratio"], rows)?;
    save_basis(out.join("basis.bin"), &grid, &pairs)?;
    for (j, p) in pairs.iter().enumerate() {
        println!("lambda_{} = {}", j + 1, p.lambda);
    }
    Ok(())
}
