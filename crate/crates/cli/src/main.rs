//! `viscokit` command-line front end.

mod config;
mod csvio;
mod error;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use viscokit::calibration::{fit, FitSpec, TraceEntry};
use viscokit::driver::run_program;
use viscokit::model::ViscoModel;
use viscokit::verify::{self, Scope, VerifyOptions};

use config::{RunConfig, TabulateSection};
use csvio::{num, push_row};
use error::{io_err, CliError, CliResult};

#[derive(Parser)]
#[command(name = "viscokit", version, about = "Finite-strain viscoelastic material-point tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a loading program and write the per-step response as CSV.
    Simulate(Common),
    /// Fit free model parameters to one or more data sets.
    Calibrate(Common),
    /// Check analytic derivatives and volumetric identities.
    Verify(VerifyArgs),
    /// Tabulate volumetric energies as CSV.
    Tabulate(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, num_args = 1..)]
    data: Vec<PathBuf>,
    /// Output directory; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Restrict to a scope (strain, hyperelastic, flv, micro, volumetric).
    #[arg(long)]
    only: Vec<String>,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("viscokit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(c) => simulate(&c),
        Command::Calibrate(c) => calibrate(&c),
        Command::Verify(v) => verify_cmd(&v),
        Command::Tabulate(c) => tabulate(&c),
    }
}

fn load_config(c: &Common, required: bool) -> CliResult<RunConfig> {
    match &c.config {
        Some(p) => RunConfig::load(p),
        None if required => Err(CliError::Config("--config is required".into())),
        None => Ok(RunConfig::default()),
    }
}

/// Writes `name` into the output directory, or to stdout without one.
fn emit(c: &Common, name: &str, body: &str) -> CliResult<()> {
    match &c.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(io_err(&path))
        }
        None => std::io::stdout().lock().write_all(body.as_bytes()).map_err(io_err(Path::new("<stdout>"))),
    }
}

const SIMULATE_HEADER: &str = "t,lambda,gamma,P,sigma11,sigma12,sigma13,sigma22,sigma23,sigma33,nominal11,nominal12,phi,D";

fn simulate(c: &Common) -> CliResult<()> {
    let cfg = load_config(c, true)?;
    let model = cfg.require_model()?;
    let program = cfg.program.as_ref().ok_or_else(|| CliError::Config("missing `program` section".into()))?;
    let rows = run_program(model, program)?;
    let mut out = String::from(SIMULATE_HEADER);
    out.push('\n');
    for r in &rows {
        let s = |i, j| num(r.cauchy.get(i, j));
        push_row(
            &mut out,
            &[
                num(r.t),
                num(r.lambda),
                num(r.gamma),
                num(r.p),
                s(0, 0),
                s(0, 1),
                s(0, 2),
                s(1, 1),
                s(1, 2),
                s(2, 2),
                num(r.nominal[0][0]),
                num(r.nominal[0][1]),
                num(r.phi),
                num(r.d),
            ],
        );
    }
    emit(c, "simulate.csv", &out)
}

#[derive(Serialize)]
struct DatasetReport {
    label: String,
    points: usize,
    rate: f64,
    peak: f64,
    hold: f64,
    nmad: f64,
}

#[derive(Serialize)]
struct CalibrationReport {
    seed: u64,
    nmad: f64,
    datasets: Vec<DatasetReport>,
    parameters: serde_json::Map<String, serde_json::Value>,
    evaluations: usize,
    model: ViscoModel,
    trace: Vec<TraceEntry>,
}

fn thread_pool(cfg: &RunConfig) -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        if n == 0 {
            return Err(CliError::Config("`threads` must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Config(e.to_string()))
}

fn calibrate(c: &Common) -> CliResult<()> {
    let cfg = load_config(c, true)?;
    let model = cfg.require_model()?.clone();
    let section = cfg.fit.as_ref().ok_or_else(|| CliError::Config("missing `fit` section".into()))?;
    if c.data.is_empty() {
        return Err(CliError::Config("calibrate needs at least one --data file".into()));
    }
    let data = c.data.iter().map(|p| csvio::read_dataset(p)).collect::<CliResult<Vec<_>>>()?;
    let spec = FitSpec { template: model, parameters: section.parameters.clone(), optimizer: section.optimizer.clone() };
    let seed = c.seed.or(cfg.seed).unwrap_or(0);
    let result = thread_pool(&cfg)?.install(|| fit(&spec, &data, seed))?;
    let report = CalibrationReport {
        seed,
        nmad: result.nmad,
        datasets: data
            .iter()
            .zip(&result.per_dataset)
            .map(|(d, &nmad)| DatasetReport {
                label: d.label.clone(),
                points: d.points.len(),
                rate: d.rate,
                peak: d.peak,
                hold: d.hold,
                nmad,
            })
            .collect(),
        parameters: result.parameters.iter().map(|(k, v)| (k.clone(), serde_json::json!(v))).collect(),
        evaluations: result.evaluations,
        model: result.model,
        trace: result.trace,
    };
    let mut body = serde_json::to_string_pretty(&report).map_err(|e| CliError::Config(e.to_string()))?;
    body.push('\n');
    emit(c, "calibration.json", &body)
}

fn verify_cmd(v: &VerifyArgs) -> CliResult<()> {
    let cfg = load_config(&v.common, false)?;
    let scopes = v
        .only
        .iter()
        .map(|s| s.parse::<Scope>().map_err(|e| CliError::Config(e.to_string())))
        .collect::<CliResult<Vec<_>>>()?;
    let opts = VerifyOptions {
        scopes,
        samples: cfg.verify.unwrap_or_default().samples,
        seed: v.common.seed.or(cfg.seed).unwrap_or(0),
        inject_fault: v.inject_fault,
    };
    let checks = verify::run(&opts);
    let mut out = format!("{:<13} {:<34} {:>12} {:>10}  status\n", "scope", "check", "max error", "tolerance");
    for ch in &checks {
        out += &format!(
            "{:<13} {:<34} {:>12.3e} {:>10.0e}  {}\n",
            ch.scope.name(),
            ch.name,
            ch.max_error,
            ch.tolerance,
            if ch.passed() { "ok" } else { "FAIL" }
        );
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    out += &format!("{} checks, {} failed\n", checks.len(), failed);
    emit(&v.common, "verify.txt", &out)?;
    if failed > 0 {
        return Err(CliError::VerifyFailed { failed, total: checks.len() });
    }
    Ok(())
}

fn tabulate(c: &Common) -> CliResult<()> {
    let cfg = load_config(c, false)?;
    let t = cfg.tabulate.unwrap_or_default();
    let TabulateSection { families, j_min, j_max, p_min, p_max, points } = t;
    if points < 2 || !(j_min > 0.0 && j_max > j_min) || !(p_max > p_min) {
        return Err(CliError::Config("tabulate needs points ≥ 2, 0 < j_min < j_max and p_min < p_max".into()));
    }
    let mut out = String::from("family,J,psi_over_kappa,P_over_kappa,g_over_kappa\n");
    for v in &families {
        v.validate().map_err(|e| CliError::Config(format!("tabulate: {e}")))?;
        let kappa = if v.kappa > 0.0 { v.kappa } else { 1.0 };
        for i in 0..points {
            let w = i as f64 / (points - 1) as f64;
            let j = j_min + w * (j_max - j_min);
            let pk = p_min + w * (p_max - p_min);
            let psi = if v.is_incompressible() {
                "unavailable".to_string()
            } else {
                v.psi(j).map_or_else(|_| "undefined".into(), |x| num(x / kappa))
            };
            let g = if v.has_closed_gibbs() {
                v.gibbs(pk * kappa).map_or_else(|_| "undefined".into(), |x| num(x.g / kappa))
            } else {
                "unavailable".to_string()
            };
            push_row(&mut out, &[v.family.name().to_string(), num(j), psi, num(pk), g]);
        }
    }
    emit(c, "tabulate.csv", &out)
}
