//! Command-line pipelines over the model: every subcommand resolves a
//! parameter set, runs one analysis, and writes a CSV artifact. Identical
//! invocations produce identical files.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand};
use virodyn::csv::{
    basin_runs_csv, curves_csv, equilibria_csv, lle_map_csv, stability_map_csv,
    stability_reports_csv, sweep1d_csv, CsvDoc,
};
use virodyn::{
    AxisGrid, BasinConfig, CurveLabel, CurveRule, Grid2D, IntegratorConfig, LleConfig, Params,
    RateAxis, State,
};

#[derive(Parser)]
#[command(
    name = "virodyn",
    version,
    about = "Equilibria, bifurcation curves, trajectories, basin probabilities, and chaos maps \
             of a generalist/specialist host-pathogen model, as CSV artifacts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// All nine equilibria with feasibility and residuals.
    Equilibria(EquilibriaArgs),
    /// Integrate one trajectory and dump its samples.
    Simulate(SimulateArgs),
    /// One-dimensional bifurcation sweep along one infection rate.
    Sweep1d(Sweep1dArgs),
    /// Basin probabilities of every attractor over a rate grid.
    StabilityMap(StabilityMapArgs),
    /// Largest Lyapunov exponent over a rate grid.
    LleMap(LleMapArgs),
    /// Sample points of the analytic bifurcation curves.
    Curves(CurvesArgs),
}

#[derive(Args)]
struct ParamArgs {
    /// Parameter file of key=value lines; all 14 keys required.
    #[arg(long, value_name = "PATH", conflicts_with = "defaults_eq7")]
    config: Option<PathBuf>,
    /// Use the built-in reference parameter set (equal strain traits);
    /// the infection rates still come from --alpha/--alpha-s/--set.
    #[arg(long)]
    defaults_eq7: bool,
    /// Override one parameter as key=value; repeatable, last wins.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Generalist infection rate.
    #[arg(long, value_name = "RATE")]
    alpha: Option<f64>,
    /// Specialist infection rate.
    #[arg(long = "alpha-s", value_name = "RATE")]
    alpha_s: Option<f64>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Cap worker parallelism.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Args)]
struct IntegratorArgs {
    /// Integration horizon.
    #[arg(long, default_value_t = 5000.0)]
    t_end: f64,
    /// Dense-output sample spacing.
    #[arg(long, default_value_t = 0.1)]
    sample_dt: f64,
    /// Relative local error tolerance.
    #[arg(long, default_value_t = 1e-9)]
    rel_tol: f64,
    /// Absolute local error tolerance.
    #[arg(long, default_value_t = 1e-11)]
    abs_tol: f64,
    /// Fraction of the horizon discarded as transient.
    #[arg(long, default_value_t = 0.5)]
    transient_fraction: f64,
}

impl IntegratorArgs {
    fn config(&self) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            t_end: self.t_end,
            transient_fraction: self.transient_fraction,
            sample_dt: self.sample_dt,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct EquilibriaArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Also write per-equilibrium eigenvalue reports to this file.
    #[arg(long, value_name = "PATH")]
    reports: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    integrator: IntegratorArgs,
    /// Initial specialist virion load.
    #[arg(long, default_value_t = 0.5)]
    zs0: f64,
    /// Initial generalist virion load.
    #[arg(long, default_value_t = 0.5)]
    z0: f64,
    /// Full initial state as 7 comma-separated values
    /// (x1,x2,ys1,y1,y2,zs,z); overrides --zs0/--z0.
    #[arg(long, value_name = "STATE")]
    state: Option<String>,
}

#[derive(Args)]
struct Sweep1dArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    integrator: IntegratorArgs,
    /// Which infection rate varies.
    #[arg(long, value_enum)]
    axis: AxisArg,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    /// Number of samples (at least 10).
    #[arg(long, default_value_t = 61)]
    count: usize,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum AxisArg {
    Alpha,
    #[value(name = "alpha-s")]
    AlphaS,
}

impl From<AxisArg> for RateAxis {
    fn from(a: AxisArg) -> RateAxis {
        match a {
            AxisArg::Alpha => RateAxis::Alpha,
            AxisArg::AlphaS => RateAxis::AlphaS,
        }
    }
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 0.05)]
    alpha_from: f64,
    #[arg(long, default_value_t = 3.0)]
    alpha_to: f64,
    #[arg(long, default_value_t = 12)]
    alpha_count: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha_s_from: f64,
    #[arg(long, default_value_t = 3.0)]
    alpha_s_to: f64,
    #[arg(long, default_value_t = 12)]
    alpha_s_count: usize,
}

impl GridArgs {
    fn grid(&self) -> Grid2D {
        Grid2D {
            alpha: AxisGrid {
                from: self.alpha_from,
                to: self.alpha_to,
                count: self.alpha_count,
            },
            alpha_s: AxisGrid {
                from: self.alpha_s_from,
                to: self.alpha_s_to,
                count: self.alpha_s_count,
            },
        }
    }
}

#[derive(Args)]
struct StabilityMapArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    integrator: IntegratorArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Per-axis count of initial viral loads per cell.
    #[arg(long, default_value_t = 5)]
    basin_n: usize,
    /// Also write the per-run classification records to this file.
    #[arg(long, value_name = "PATH")]
    runs_out: Option<PathBuf>,
}

#[derive(Args)]
struct LleMapArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Initial specialist virion load.
    #[arg(long, default_value_t = 0.5)]
    zs0: f64,
    /// Initial generalist virion load.
    #[arg(long, default_value_t = 0.5)]
    z0: f64,
    /// Discarded settling time before accumulation.
    #[arg(long, default_value_t = 2000.0)]
    transient: f64,
    /// Accumulation horizon for the exponent.
    #[arg(long, default_value_t = 20000.0)]
    accumulation: f64,
    /// Tangent renormalization interval.
    #[arg(long, default_value_t = 1.0)]
    renorm: f64,
}

#[derive(Args)]
struct CurvesArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Lower edge of the sampled rate box.
    #[arg(long, default_value_t = 0.05)]
    from: f64,
    /// Upper edge of the sampled rate box.
    #[arg(long, default_value_t = 3.0)]
    to: f64,
    /// Samples per curve.
    #[arg(long, default_value_t = 61)]
    count: usize,
}

enum CliError {
    Usage(String),
    Numerical(String),
}

impl From<virodyn::Error> for CliError {
    fn from(e: virodyn::Error) -> CliError {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl ParamArgs {
    /// Resolve the parameter set: config file or built-in defaults, then
    /// rate flags, then --set overrides in order.
    fn resolve(&self, rates_required: bool) -> Result<Params, CliError> {
        let mut p = if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            Params::from_key_values(&text)?
        } else if self.defaults_eq7 {
            Params::baseline(f64::NAN, f64::NAN)
        } else {
            return Err(CliError::Usage(
                "provide --config PATH or --defaults-eq7".into(),
            ));
        };
        if let Some(a) = self.alpha {
            p.alpha = a;
        }
        if let Some(a) = self.alpha_s {
            p.alpha_s = a;
        }
        for kv in &self.set {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("--set {key}: `{value}` is not a number")))?;
            p.set(key.trim(), value)?;
        }
        if !rates_required {
            // grid/curve commands supply the rates themselves
            if p.alpha.is_nan() {
                p.alpha = 1.0;
            }
            if p.alpha_s.is_nan() {
                p.alpha_s = 1.0;
            }
        }
        if p.alpha.is_nan() || p.alpha_s.is_nan() {
            return Err(CliError::Usage(
                "infection rates missing: pass --alpha and --alpha-s (or --set alpha=…)".into(),
            ));
        }
        p.validate()?;
        for w in p.warnings() {
            eprintln!("warning: {w}");
        }
        Ok(p)
    }
}

fn install_threads(output: &OutputArgs) -> Result<(), CliError> {
    if let Some(n) = output.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn write_doc(doc: &CsvDoc, out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, doc.to_string())
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            match doc.write_to(&mut lock).and_then(|()| lock.flush()) {
                Ok(()) => Ok(()),
                // a closed pager/head downstream is not a failure
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                Err(e) => Err(CliError::Numerical(format!("stdout: {e}"))),
            }
        }
    }
}

fn parse_state(text: &str) -> Result<State, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 7 {
        return Err(CliError::Usage(format!(
            "--state needs 7 comma-separated values, got {}",
            parts.len()
        )));
    }
    let mut a = [0.0; 7];
    for (slot, part) in a.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("--state: `{part}` is not a number")))?;
    }
    Ok(State::from_array(a))
}

/// Sample every analytic curve inside the `[from, to]²` rate box.
fn curve_points(
    p: &Params,
    from: f64,
    to: f64,
    count: usize,
) -> Result<Vec<(String, f64, f64)>, CliError> {
    if !(from > 0.0 && to > from && count >= 2) {
        return Err(CliError::Usage(
            "curves need 0 < from < to and count >= 2".into(),
        ));
    }
    let grid = AxisGrid { from, to, count };
    let ticks = grid.values();
    let inside = |v: f64| (from..=to).contains(&v);
    let mut points = Vec::new();
    for label in CurveLabel::ALL {
        match label.rule() {
            CurveRule::ConstAlpha => {
                let Ok(alpha) = virodyn::curve_value(label, p, None) else {
                    continue;
                };
                if inside(alpha) {
                    for &als in &ticks {
                        points.push((label.to_string(), alpha, als));
                    }
                }
            }
            CurveRule::ConstAlphaS => {
                let Ok(als) = virodyn::curve_value(label, p, None) else {
                    continue;
                };
                if inside(als) {
                    for &alpha in &ticks {
                        points.push((label.to_string(), alpha, als));
                    }
                }
            }
            CurveRule::AlphaSOfAlpha => {
                for &alpha in &ticks {
                    if let Ok(als) = virodyn::curve_value(label, p, Some(alpha)) {
                        if inside(als) {
                            points.push((label.to_string(), alpha, als));
                        }
                    }
                }
            }
        }
    }
    Ok(points)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Equilibria(args) => {
            install_threads(&args.output)?;
            let p = args.params.resolve(true)?;
            let eqs = virodyn::all_equilibria(&p)?;
            if let Some(path) = &args.reports {
                let reports = virodyn::classify_all(&p)?;
                let doc = stability_reports_csv(&p, &reports);
                fs::write(path, doc.to_string()).map_err(|e| {
                    CliError::Usage(format!("cannot write {}: {e}", path.display()))
                })?;
            }
            write_doc(&equilibria_csv(&p, &eqs), &args.output.out)
        }
        Command::Simulate(args) => {
            install_threads(&args.output)?;
            let p = args.params.resolve(true)?;
            let s0 = match &args.state {
                Some(text) => parse_state(text)?,
                None => State::new(1.0, p.beta1 / p.beta2, 0.0, 0.0, 0.0, args.zs0, args.z0),
            };
            let traj = virodyn::integrate(&p, &s0, &args.integrator.config())?;
            let mut doc = virodyn::csv::trajectory_csv(&p, &traj);
            doc.push_meta(format!("initial state: {s0}"));
            write_doc(&doc, &args.output.out)
        }
        Command::Sweep1d(args) => {
            install_threads(&args.output)?;
            let p = args.params.resolve(false)?;
            let sweep = virodyn::bifurcation_sweep_1d(
                &p,
                args.axis.into(),
                (args.from, args.to),
                args.count,
                &args.integrator.config(),
                &LleConfig::default(),
            )?;
            write_doc(&sweep1d_csv(&p, &sweep), &args.output.out)
        }
        Command::StabilityMap(args) => {
            install_threads(&args.output)?;
            let p = args.params.resolve(false)?;
            let cfg = BasinConfig {
                n: args.basin_n,
                integrator: args.integrator.config(),
                lle: LleConfig::default(),
            };
            let map = virodyn::stability_map(&p, &args.grid.grid(), &cfg)?;
            if let Some(path) = &args.runs_out {
                let doc = basin_runs_csv(&p, &map);
                fs::write(path, doc.to_string()).map_err(|e| {
                    CliError::Usage(format!("cannot write {}: {e}", path.display()))
                })?;
            }
            write_doc(&stability_map_csv(&p, &map), &args.output.out)
        }
        Command::LleMap(args) => {
            install_threads(&args.output)?;
            let p = args.params.resolve(false)?;
            let cfg = LleConfig {
                transient: args.transient,
                accumulation: args.accumulation,
                renorm_interval: args.renorm,
                ..Default::default()
            };
            let s0 = State::new(1.0, p.beta1 / p.beta2, 0.0, 0.0, 0.0, args.zs0, args.z0);
            let cells = virodyn::lle_map(&p, &args.grid.grid(), &s0, &cfg)?;
            write_doc(&lle_map_csv(&p, &s0, &cells), &args.output.out)
        }
        Command::Curves(args) => {
            install_threads(&args.output)?;
            let p = args.params.resolve(false)?;
            let points = curve_points(&p, args.from, args.to, args.count)?;
            write_doc(&curves_csv(&p, &points), &args.output.out)
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            let cmd = Cli::command();
            let _ = writeln!(std::io::stderr(), "error: {msg}");
            let _ = writeln!(
                std::io::stderr(),
                "run `{} --help` for usage",
                cmd.get_name()
            );
            std::process::exit(1);
        }
        Err(CliError::Numerical(msg)) => {
            let _ = writeln!(std::io::stderr(), "numerical failure: {msg}");
            std::process::exit(2);
        }
    }
}
