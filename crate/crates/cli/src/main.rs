mod checkpoint;
mod config;
mod experiments;
mod failure;
mod output;

use checkpoint::{Checkpoint, Loaded, Scan, INTERRUPTED};
use clap::{Parser, Subcommand};
use config::{Experiment, Mode, Params, RunConfig};
use failure::Failure;
use output::OutputDir;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::Ordering;

const THREADS_ENV: &str = "FILAMENT_LAB_THREADS";

/// Numerical laboratory for the vortex filament equation.
///
/// Every subcommand reads an optional JSON config
/// `{"experiment", "parameters", "output_dir", "mode", "stop_after_cells"}`,
/// writes CSV and JSON files plus a `manifest.json` of SHA-256 hashes, and exits with
/// 0 (done), 1 (runtime error), 2 (usage error), 3 (numerical blow-up, see
/// `diagnostic.json`), 4 (scan interrupted, checkpoint written) or 5 (bad checkpoint).
#[derive(Parser)]
#[command(name = "filament-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; unknown keys are rejected.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`; default `results/<experiment>`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// `full` unlocks scans with q > 10⁴ and evolutions with N > 8192.
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Worker threads (falls back to FILAMENT_LAB_THREADS, then all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Continue a scan from its checkpoint.jsonl.
    #[arg(long, global = true, value_name = "PATH")]
    resume: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// One-corner self-similar solution: frame, tangent limits A±, optional rotation onto a polygon side.
    ///
    /// Integrates the Frenet system of the self-similar profile for a curvature c0 (or the
    /// c0 of a regular M-gon corner) and compares the tail means of T with the Gamma-function
    /// limits A±. Reproduces the one-corner curve figure and the check of the asymptotic vector.
    /// Parameters: c0 | M, t, s_max, ds, every, rotate.
    OneCorner,
    /// Skew polygon at t = (2π/M²)(p/q): vertices and side tangents.
    ///
    /// Builds the polygon from generalized quadratic Gauss sums. Reproduces the skew-polygon
    /// pictures at rational times. Parameters: M, p, q.
    Polygon,
    /// Algebraic tangent at t_{1,q} against the rotated one-corner tangent, and c0 recovery.
    ///
    /// Reproduces the table of max|T_alg − T_rot| for M = 5 over odd q, q ≡ 0 and q ≡ 2 (mod 4),
    /// the plot of log10|T_alg − T_rot| along the samples, and the table of the recovered
    /// corner curvature c0 for q ≡ 2 (mod 4). Parameters: M, qs.
    Compare,
    /// H_rot(∞) from the fourth-order ODE against ln(1 + tan²(π/M))/tan(π/M).
    ///
    /// Reproduces the semilogarithmic convergence plot of H_rot(s) (with profile_every > 0)
    /// and the closed-form check over M. Parameters: M | Ms, s_max, ds, profile_every.
    Hrot,
    /// Pseudo-spectral evolution of a regular M-gon or the 3-4-12-13 quadrilateral.
    ///
    /// Writes the final curve and a time series of mean height, length, tangent energy
    /// and norm drift. Reproduces the numerical curves compared against the algebraic and
    /// one-corner solutions. Parameters: datum, M, N, steps, t_end, snapshots, update.
    Evolve,
    /// Vertical centre-of-mass speed c_M after one period against its closed form.
    ///
    /// Reproduces the table of |c_M − mean(X₃)/(2π/M²)| over M and N/M, with Nt = nt_base·(N/M÷512)².
    /// Checkpointed per cell. Parameters: Ms, n_over_m, nt_base.
    CmTable,
    /// Energy spectrum maxima of T_s at every p for fixed q.
    ///
    /// Reproduces the scans of √2·max|T̂₁| and max|T̂₃| against t for M = 3, including the jumps
    /// at rationals with small denominators. Checkpointed per p. Parameters: M, q, p.
    EnergyScan,
    /// Global spectrum maxima along q = 2·prime and their logarithmic growth.
    ///
    /// Reproduces the plot of the global maximum against q with the fit a·ln q + b and the
    /// location of the first-component argmax. Checkpointed per q.
    /// Parameters: M, q_min, q_max, search, a, b.
    EnergyFit,
    /// Truncated linear momentum over t = (2π/M²)(p/q), its sine coefficients, and −φ.
    ///
    /// Reproduces the momentum curve beside −φ, the stem plot of k·c_k with the square indices
    /// marked, and the invariance of the first and third components. Checkpointed per p.
    /// Parameters: M, q, k_max, phi_terms.
    Momentum,
    /// Partial sums of Riemann's function φ(x) = Σ sin(πn²x)/n².
    ///
    /// Reproduces the −φ comparison curve. Parameters: n_max, points, x_min, x_max.
    Riemann,
    /// Tangent product P(t) for the 3-4-12-13 quadrilateral.
    ///
    /// Reproduces the table of |P(t) − 7/65| at skew-polygon times, at a reduced grid with
    /// dt scaled as N⁻². Parameters: N, dt_divisor, times.
    Conservation,
}

impl Command {
    fn experiment(self) -> Experiment {
        match self {
            Command::OneCorner => Experiment::OneCorner,
            Command::Polygon => Experiment::Polygon,
            Command::Compare => Experiment::Compare,
            Command::Hrot => Experiment::Hrot,
            Command::Evolve => Experiment::Evolve,
            Command::CmTable => Experiment::CmTable,
            Command::EnergyScan => Experiment::EnergyScan,
            Command::EnergyFit => Experiment::EnergyFit,
            Command::Momentum => Experiment::Momentum,
            Command::Riemann => Experiment::Riemann,
            Command::Conservation => Experiment::Conservation,
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), Failure> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse().map_err(|_| Failure::Usage(format!("{THREADS_ENV}={v} is not a number")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(Failure::Usage("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn read_config(path: Option<&Path>) -> Result<RunConfig, Failure> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            config::parse_config(&text)
        }
        None => Ok(RunConfig {
            experiment: None,
            parameters: None,
            output_dir: None,
            mode: None,
            stop_after_cells: None,
        }),
    }
}

fn execute(
    out: &mut OutputDir,
    params: &Params,
    header: &Value,
    carried: BTreeMap<Vec<u64>, Vec<f64>>,
    budget: Option<u64>,
) -> Result<(), Failure> {
    use experiments as ex;
    let mut scan = || -> Result<Scan, Failure> { Ok(Scan::new(Checkpoint::create(out, header, carried.clone())?, budget)) };
    let finished = match params {
        Params::CmTable(p) => {
            let mut s = scan()?;
            ex::cm_table(out, p, &mut s)?;
            Some(s)
        }
        Params::EnergyScan(p) => {
            let mut s = scan()?;
            ex::energy_scan(out, p, &mut s)?;
            Some(s)
        }
        Params::EnergyFit(p) => {
            let mut s = scan()?;
            ex::energy_fit(out, p, &mut s)?;
            Some(s)
        }
        Params::Momentum(p) => {
            let mut s = scan()?;
            ex::momentum(out, p, &mut s)?;
            Some(s)
        }
        Params::OneCorner(p) => ex::one_corner(out, p).map(|_| None)?,
        Params::Polygon(p) => ex::polygon(out, p).map(|_| None)?,
        Params::Compare(p) => ex::compare(out, p).map(|_| None)?,
        Params::Hrot(p) => ex::hrot(out, p).map(|_| None)?,
        Params::Evolve(p) => ex::evolve(out, p).map(|_| None)?,
        Params::Riemann(p) => ex::riemann(out, p).map(|_| None)?,
        Params::Conservation(p) => ex::conservation(out, p).map(|_| None)?,
    };
    if let Some(s) = finished {
        s.checkpoint.finish()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let exp = cli.command.experiment();
    configure_threads(cli.threads)?;
    let cfg = read_config(cli.config.as_deref())?;
    if let Some(e) = cfg.experiment {
        if e != exp {
            return Err(Failure::Usage(format!("config is for {}, not {}", e.name(), exp.name())));
        }
    }
    let resumed: Option<Loaded> = match &cli.resume {
        Some(_) if !exp.is_scan() => return Err(Failure::Usage(format!("{} has no checkpoint to resume", exp.name()))),
        Some(path) => {
            let l = checkpoint::load(path)?;
            if l.header.get("experiment").and_then(Value::as_str) != Some(exp.name()) {
                return Err(Failure::Checkpoint(format!("{} is not a {} checkpoint", path.display(), exp.name())));
            }
            Some(l)
        }
        None => None,
    };
    // without a config, a resumed scan takes its parameters from the checkpoint
    let raw = cfg
        .parameters
        .clone()
        .or_else(|| resumed.as_ref().and_then(|l| l.header.get("parameters").cloned()));
    let params = Params::parse(exp, raw)?;
    params.check_mode(cli.mode.or(cfg.mode).unwrap_or_default())?;
    let header = json!({ "experiment": exp.name(), "parameters": params.canonical() });

    let mut carried = BTreeMap::new();
    if let Some(l) = resumed {
        if l.header != header {
            return Err(Failure::Checkpoint(format!(
                "checkpoint was written for {} but this run is {}",
                l.header, header
            )));
        }
        if l.complete {
            eprintln!("{}: scan already complete; nothing to do", exp.name());
            return Ok(());
        }
        carried = l.cells;
    }

    let dir = cli
        .out
        .or(cfg.output_dir)
        .or_else(|| cli.resume.as_ref().and_then(|p| p.parent().map(Path::to_path_buf)))
        .unwrap_or_else(|| PathBuf::from("results").join(exp.name()));
    if exp.is_scan() {
        let _ = ctrlc::set_handler(|| {
            if INTERRUPTED.swap(true, Ordering::SeqCst) {
                std::process::exit(130);
            }
            eprintln!("interrupt received; stopping after the current cell");
        });
    }

    let mut out = OutputDir::open(&dir)?;
    let result = execute(&mut out, &params, &header, carried, cfg.stop_after_cells);
    match result {
        Ok(()) => {
            out.write_manifest(exp.name())?;
            Ok(())
        }
        Err(Failure::Usage(m)) if !out.has_emitted() => {
            out.discard_if_empty();
            Err(Failure::Usage(m))
        }
        Err(f) => {
            if let Failure::Numerical { diagnostic, .. } = &f {
                let d = json!({ "experiment": exp.name(), "parameters": params.canonical(), "failure": diagnostic });
                out.write_json("diagnostic.json", &d)?;
            }
            if out.has_emitted() {
                out.write_manifest(exp.name())?;
            }
            Err(f)
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // help and version exit 0, parse errors 2
            std::process::exit(e.exit_code());
        }
    };
    if let Err(f) = run(cli) {
        eprintln!("filament-lab: {f}");
        std::process::exit(f.status());
    }
}
