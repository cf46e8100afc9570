use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use xlab::config::{ExperimentConfig, ExperimentId, Perturbation, SeedSource};
use xlab::experiments;
use xlab::report::Check;
use xlab::simulate::{self, InitialData, SolveConfig};
use xlab::svg::{LogLogPlot, Series};
use xlab::{Error, Result};
use xlab_core::solver::Method;

/// Numerical laboratory for finite-dimensional controls of 2D Euler flows.
#[derive(Parser)]
#[command(name = "xlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Euler system once and write per-step norms and checkpoints.
    Solve(SolveArgs),
    /// E1: empirical Lipschitz ratios of the resolving operator.
    E1Lipschitz {
        #[command(flatten)]
        common: CommonArgs,
        /// Perturbation scales, largest first (comma separated).
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        perturbation: Option<PerturbationArg>,
    },
    /// E2: entropy slopes of the attainable cloud and a Hölder-ball cloud.
    E2EntropyGap {
        #[command(flatten)]
        common: CommonArgs,
        /// Radius of the control ball.
        #[arg(long)]
        m: Option<f64>,
        /// Piecewise-constant intervals per control.
        #[arg(long)]
        intervals: Option<usize>,
        /// Write both distance matrices in the binary layout.
        #[arg(long)]
        write_matrices: bool,
    },
    /// E3: Monte-Carlo check of the W^{1,1} quantizer and the net cardinality table.
    E3Epsnet {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// E4: solver validation suite.
    E4Validate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Log-log SVG plot of columns of one or more CSV files.
    Plot(PlotArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Descending ε grid (comma separated).
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Master seed (overrides the config file and XLAB_SEED).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads (0: one per core).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PerturbationArg {
    All,
    ForceOnly,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    SemiLagrangian,
    Spectral,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Shear,
    Zero,
    Holder,
}

#[derive(Args)]
struct SolveArgs {
    /// JSON solve configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Built-in initial data.
    #[arg(long, value_enum, conflicts_with = "init_file")]
    init: Option<InitArg>,
    /// Initial velocity in the binary field layout.
    #[arg(long)]
    init_file: Option<PathBuf>,
    /// Seed, index and radius of Hölder initial data.
    #[arg(long, default_value_t = 0)]
    init_seed: u64,
    #[arg(long, default_value_t = 2.5)]
    init_s: f64,
    #[arg(long, default_value_t = 1.0)]
    init_radius: f64,
    /// Control η as CSV (interval,t_start,t_end,c_1..) or JSON.
    #[arg(long)]
    control_file: Option<PathBuf>,
    /// Write a velocity checkpoint every k steps.
    #[arg(long)]
    checkpoint_every: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// CSV files, one series each.
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    #[arg(long, default_value = "eps")]
    x: String,
    #[arg(long, default_value = "packing")]
    y: String,
    #[arg(long, default_value = "")]
    title: String,
    #[arg(long)]
    output: PathBuf,
}

fn experiment_config(id: ExperimentId, a: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::for_experiment(id),
    };
    cfg.experiment = Some(id);
    cfg.apply_env()?;
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = a.$f.clone() { cfg.$f = v; })* };
    }
    set!(grid, s, gamma, horizon, radius, output, workers);
    if let Some(v) = a.samples {
        cfg.samples = Some(v);
    }
    if let Some(v) = &a.eps {
        cfg.eps = Some(v.clone());
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
        cfg.seed_source = SeedSource::Flag;
    }
    Ok(cfg)
}

fn print_checks(summary: &experiments::Summary) -> Result<()> {
    let checks: Vec<Check> = serde_json::from_value(summary.report["checks"].clone())?;
    for c in &checks {
        println!("{}", c.line());
    }
    Ok(())
}

fn run_experiment(id: ExperimentId, cfg: ExperimentConfig) -> Result<bool> {
    let out = cfg.output.clone();
    let summary = experiments::run(id, &cfg)?;
    if let Some(statement) = summary.report.get("statement").and_then(|s| s.as_str()) {
        println!("{statement}");
    }
    print_checks(&summary)?;
    let verdict = if summary.passed { "PASS" } else { "FAIL" };
    println!("{id:?}: {verdict} (outputs in {}, content hash {})", out.display(), summary.content_hash);
    Ok(summary.passed)
}

fn solve(a: SolveArgs) -> Result<bool> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::File { path: path.clone(), source })?;
            serde_json::from_str(&text)?
        }
        None => SolveConfig::default(),
    };
    if let Some(v) = a.grid {
        cfg.grid = v;
    }
    if let Some(v) = a.horizon {
        cfg.horizon = v;
    }
    if let Some(v) = a.dt {
        cfg.dt = v;
    }
    if let Some(m) = a.method {
        cfg.method = match m {
            MethodArg::SemiLagrangian => Method::SemiLagrangian,
            MethodArg::Spectral => Method::SpectralReference,
        };
    }
    if let Some(init) = a.init {
        cfg.initial = match init {
            InitArg::Shear => InitialData::Shear,
            InitArg::Zero => InitialData::Zero,
            InitArg::Holder => {
                InitialData::Holder { s: a.init_s, radius: a.init_radius, seed: a.init_seed, kmax: None }
            }
        };
    }
    if let Some(path) = a.init_file {
        cfg.initial = InitialData::File { path };
    }
    if a.control_file.is_some() {
        cfg.control_file = a.control_file;
    }
    if a.checkpoint_every.is_some() {
        cfg.checkpoint_every = a.checkpoint_every;
    }
    if let Some(v) = a.output {
        cfg.output = v;
    }
    let out = simulate::solve(&cfg)?;
    let last = out.steps.last().expect("at least the initial step");
    println!(
        "solved {} steps to t = {}: sup norm {:.6e}, energy drift {:.3e}, enstrophy drift {:.3e}",
        out.steps.len() - 1,
        last.t,
        last.sup_norm,
        out.energy_drift,
        out.enstrophy_drift
    );
    println!("outputs in {}", cfg.output.display());
    Ok(true)
}

fn plot(a: PlotArgs) -> Result<bool> {
    let mut series = Vec::new();
    for path in &a.input {
        let mut rdr = csv::Reader::from_path(path)?;
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Config(format!("{}: no column {name}", path.display())))
        };
        let (ix, iy) = (col(&a.x)?, col(&a.y)?);
        let mut points = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if let (Some(Ok(x)), Some(Ok(y))) = (rec.get(ix).map(str::parse), rec.get(iy).map(str::parse)) {
                points.push((x, y));
            }
        }
        let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into());
        series.push(Series { name, points });
    }
    let svg = LogLogPlot { title: a.title, x_label: a.x, y_label: a.y, series }.render();
    std::fs::write(&a.output, svg).map_err(|source| Error::File { path: a.output.clone(), source })?;
    println!("wrote {}", a.output.display());
    Ok(true)
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve(a) => solve(a),
        Command::E1Lipschitz { common, scales, perturbation } => {
            let mut cfg = experiment_config(ExperimentId::E1, &common)?;
            if let Some(v) = scales {
                cfg.e1.scales = v;
            }
            if let Some(p) = perturbation {
                cfg.e1.perturbation = match p {
                    PerturbationArg::All => Perturbation::All,
                    PerturbationArg::ForceOnly => Perturbation::ForceOnly,
                };
            }
            run_experiment(ExperimentId::E1, cfg)
        }
        Command::E2EntropyGap { common, m, intervals, write_matrices } => {
            let mut cfg = experiment_config(ExperimentId::E2, &common)?;
            if let Some(v) = m {
                cfg.e2.m = v;
            }
            if let Some(v) = intervals {
                cfg.e2.intervals = v;
            }
            cfg.e2.write_matrices |= write_matrices;
            run_experiment(ExperimentId::E2, cfg)
        }
        Command::E3Epsnet { common } => run_experiment(ExperimentId::E3, experiment_config(ExperimentId::E3, &common)?),
        Command::E4Validate { common } => run_experiment(ExperimentId::E4, experiment_config(ExperimentId::E4, &common)?),
        Command::Plot(a) => plot(a),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
