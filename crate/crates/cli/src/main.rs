use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use stirap_core::spin::{simulate_spin_with, SpinOptions, DEFAULT_STEPS};
use stirap_core::sweep::{self, Grid, SWEEP_HEADER};
use stirap_core::{
    simulate_spring, solve_polynomial, verify_singular_conditions, ControlSignal, Method,
    SystemParams,
};

const EXIT_BAD_ARGS: u8 = 2;
const EXIT_ALL_INVALID: u8 = 3;

#[derive(Parser)]
#[command(
    name = "stirap",
    version,
    about = "Pulse design for lossy three-level population transfer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Suboptimal,
    Optimal,
    Poly,
}

#[derive(clap::Args)]
struct MethodOpts {
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Polynomial degree (7 to 12) for `--method poly`.
    #[arg(long, default_value_t = 12)]
    degree: usize,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    duration: f64,
}

impl MethodOpts {
    fn method(&self) -> Method {
        match self.method {
            MethodArg::Suboptimal => Method::Suboptimal,
            MethodArg::Optimal => Method::Optimal,
            MethodArg::Poly => Method::Polynomial(self.degree),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve for a control and print it as JSON.
    Solve {
        #[command(flatten)]
        opts: MethodOpts,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Simulate the spin for a solved control and dump the trajectory.
    Simulate {
        #[command(flatten)]
        opts: MethodOpts,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
        /// Extra free evolution after T; reported separately.
        #[arg(long)]
        settle: Option<f64>,
        /// Trajectory CSV (`t,theta,X,Y,Z,pop1,pop2,pop3`).
        #[arg(long)]
        out: PathBuf,
        /// Optional spring trajectory CSV (`t,y,v`).
        #[arg(long)]
        spring_out: Option<PathBuf>,
        /// Optional control JSON, as written by `solve`.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Efficiency and spring cost over a grid of durations.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        gamma: Vec<f64>,
        #[arg(long)]
        t_min: f64,
        #[arg(long)]
        t_max: f64,
        #[arg(long)]
        t_step: f64,
        /// Comma-separated list from suboptimal, optimal, poly7 .. poly12.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "suboptimal,optimal,poly8,poly10,poly12"
        )]
        methods: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
        /// Externally computed rows with the sweep header, appended verbatim.
        #[arg(long)]
        extra_csv: Option<PathBuf>,
    },
    /// Efficiency over a grid of switching times.
    Contour {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        duration: f64,
        /// `start:end:count`
        #[arg(long)]
        t1: String,
        /// `start:end:count`
        #[arg(long)]
        t2: String,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure with an exit status attached.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        let code = match error.downcast_ref::<stirap_core::Error>() {
            Some(e) if !e.is_input_error() => EXIT_ALL_INVALID,
            _ => EXIT_BAD_ARGS,
        };
        Failure { code, error }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_BAD_ARGS);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("STIRAP_THREADS") else {
        return Ok(());
    };
    let cap: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("STIRAP_THREADS={raw:?} is not a count"))?;
    if cap == 0 {
        bail!("STIRAP_THREADS must be at least 1");
    }
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    rayon::ThreadPoolBuilder::new()
        .num_threads(cap.min(available))
        .build_global()?;
    Ok(())
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve { opts, json } => {
            let params = SystemParams::new(opts.gamma, opts.duration)?;
            let (doc, _) = solution_json(opts.method(), &params)?;
            write_json(&doc, json.as_deref())?;
        }
        Command::Simulate {
            opts,
            steps,
            settle,
            out,
            spring_out,
            json,
        } => {
            let params = SystemParams::new(opts.gamma, opts.duration)?;
            let method = opts.method();
            let (doc, signal) = solution_json(method, &params)?;
            let traj = simulate_spin_with(
                &signal,
                &params,
                &SpinOptions {
                    steps,
                    settle,
                    check_area: true,
                },
            )?;
            traj.write_csv(create(&out)?)?;
            if let Some(path) = spring_out {
                simulate_spring(&signal, &params, steps)?.write_csv(create(&path)?)?;
            }
            if let Some(path) = json {
                write_json(&doc, Some(&path))?;
            }
            let summary = json!({
                "method": method,
                "gamma": params.gamma(),
                "duration": params.duration(),
                "efficiency": traj.efficiency,
                "settled_efficiency": traj.settled_efficiency,
                "norm_decay_residual": traj.norm_decay_residual,
            });
            write_json(&summary, None)?;
        }
        Command::Sweep {
            gamma,
            t_min,
            t_max,
            t_step,
            methods,
            steps,
            out,
            extra_csv,
        } => {
            let methods = methods
                .iter()
                .filter(|m| !m.trim().is_empty())
                .map(|m| m.trim().parse::<Method>())
                .collect::<Result<Vec<_>, _>>()?;
            let extra = extra_csv.as_deref().map(read_extra_rows).transpose()?;
            let records = sweep::run_sweep(&gamma, t_min, t_max, t_step, &methods, steps)?;
            let mut w = create(&out)?;
            sweep::write_sweep_csv(&records, &mut w)?;
            for row in extra.iter().flatten() {
                writeln!(w, "{row}")?;
            }
            w.flush()?;
            if !records.is_empty() && records.iter().all(|r| !r.valid()) {
                return Err(Failure {
                    code: EXIT_ALL_INVALID,
                    error: anyhow::anyhow!("all {} records are invalid", records.len()),
                });
            }
        }
        Command::Contour {
            gamma,
            duration,
            t1,
            t2,
            steps,
            out,
        } => {
            let t1: Grid = t1.parse()?;
            let t2: Grid = t2.parse()?;
            let records = sweep::run_contour(gamma, duration, &t1, &t2, steps)?;
            let mut w = create(&out)?;
            sweep::write_contour_csv(&records, &mut w)?;
            w.flush()?;
            if !records.is_empty() && records.iter().all(|r| !r.valid()) {
                return Err(Failure {
                    code: EXIT_ALL_INVALID,
                    error: anyhow::anyhow!("all {} grid points are invalid", records.len()),
                });
            }
        }
    }
    Ok(())
}

/// Control description for `method`, plus the signal it was built from.
fn solution_json(method: Method, params: &SystemParams) -> Result<(Value, ControlSignal)> {
    let signal = method.signal(params)?;
    let spring = simulate_spring(&signal, params, DEFAULT_STEPS)?;
    let mut doc = json!({
        "method": method,
        "gamma": params.gamma(),
        "duration": params.duration(),
        "signal": signal,
        "spring_cost": spring.cost,
    });
    match method {
        Method::Polynomial(degree) => {
            doc["polynomial"] = serde_json::to_value(solve_polynomial(degree, params.duration())?)?;
        }
        _ => {
            let seq = method.sequence(params).expect("impulsive method")?;
            if method == Method::Optimal {
                doc["verification"] = serde_json::to_value(verify_singular_conditions(&seq))?;
            }
            doc["sequence"] = serde_json::to_value(seq)?;
        }
    }
    Ok((doc, signal))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_json(doc: &Value, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    match path {
        Some(p) => {
            fs::write(p, text + "\n").with_context(|| format!("cannot write {}", p.display()))?
        }
        None => writeln!(io::stdout().lock(), "{text}")?,
    }
    Ok(())
}

fn read_extra_rows(path: &Path) -> Result<Vec<String>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == SWEEP_HEADER => {}
        _ => bail!(
            "{} must start with the header `{SWEEP_HEADER}`",
            path.display()
        ),
    }
    Ok(lines
        .filter(|l| !l.trim().is_empty())
        .map(str::to_owned)
        .collect())
}
