//! `topowarn` command line.
//!
//! Exit codes: 0 success, 1 input or usage error, 2 internal error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use topowarn::filtration::Threshold;
use topowarn::io::{
    read_price_csv, read_series_csv, write_bifurcation, write_diagram, write_metadata, write_norm_table,
    write_outputs, write_series, IngestError,
};
use topowarn::pipeline::{
    run_full, run_tda, tda_series, window_diagram, Feature, PipelineConfig, PipelineError, RunMetadata,
};
use topowarn::simulate::{
    bifurcation_scan, orbit_fixed, sweep_series, MapParams, ScanConfig, SimulateError, SweepConfig,
    NOISE_GENERATOR,
};
use topowarn::timeseries::first_difference;
use topowarn::{TimeSeries, Timestamp};

#[derive(Debug, Parser)]
#[command(name = "topowarn", version, about = "Topological early-warning signals for time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the Lorenz-type map (slow sweep, frozen orbit or bifurcation scan).
    Simulate(SimulateArgs),
    /// Full pipeline: landscape norms, features, k-means clusters.
    Analyze(AnalyzeArgs),
    /// Persistence diagram of a single window.
    Diagram(DiagramArgs),
    /// Landscape norms and their first differences only.
    Landscape(LandscapeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimPreset {
    /// 2100-point noisy sweep ending at M2 = 0.81.
    #[value(name = "paper-lorenz")]
    Standard,
    /// Slow sweep with the given flags.
    Sweep,
    /// Orbit at fixed parameters.
    Frozen,
    /// Bifurcation diagram over an M2 grid.
    Scan,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "paper-lorenz")]
    preset: SimPreset,
    #[arg(long)]
    m1: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Starting M2 for sweeps, the fixed M2 for `frozen`.
    #[arg(long)]
    m2: Option<f64>,
    #[arg(long)]
    delta_m2: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
    /// Recorded points (per parameter for `scan`).
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long, default_value_t = 0.7)]
    m2_min: f64,
    #[arg(long, default_value_t = 0.85)]
    m2_max: f64,
    #[arg(long, default_value_t = 300)]
    n_params: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    /// Daily closes (`date,close`); log-returns feed the persistence stage.
    Asset,
    /// A simulated series (`index,x`) used as is.
    Lorenz,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    #[arg(long)]
    input: PathBuf,
    /// Last date (or index) kept, inclusive.
    #[arg(long)]
    end_date: Option<String>,
    #[arg(long, value_enum, default_value = "asset")]
    preset: Preset,
    #[arg(long)]
    embed_dim: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    /// Rips scale cap; `auto` uses the largest pairwise distance.
    #[arg(long, default_value = "auto")]
    threshold: String,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated subset of value, log_price, log_return, l1_norm.
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<String>>,
    /// Window indices whose diagrams are exported.
    #[arg(long, value_delimiter = ',')]
    diagrams: Vec<usize>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DiagramArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Window index (0-based).
    #[arg(long)]
    index: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LandscapeArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => 1,
            Failure::Internal(_) => 2,
        }
    }
}

/// Output-side failures; reading the input is classified in [`load`].
impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Io { .. } => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Window { .. } => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<SimulateError> for Failure {
    fn from(e: SimulateError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Internal(format!("{}: {e}", path.display()))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze(a),
        Command::Diagram(a) => diagram(a),
        Command::Landscape(a) => landscape(a),
    };
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            let (Failure::Input(m) | Failure::Internal(m)) = &f;
            eprintln!("error: {m}");
            f.code()
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(write_err(path))
}

fn write_to(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), Failure> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(write_err(path))
}

fn output_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(write_err(dir))
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    output_dir(&a.out)?;
    let base = SweepConfig::standard(a.seed);
    let m1 = a.m1.unwrap_or(base.params0.m1);
    let b = a.b.unwrap_or(base.params0.b);
    let burn_in = a.burn_in.unwrap_or(base.burn_in);
    let mut meta = RunMetadata::default();
    meta.push("version", env!("CARGO_PKG_VERSION"));
    meta.push("preset", a.preset.to_possible_value().expect("no skipped variants").get_name());
    meta.push("m1", m1);
    meta.push("b", b);
    meta.push("burn_in", burn_in);
    let init = base.initial_state;
    meta.push("initial_state", format!("{},{},{}", init[0], init[1], init[2]));

    match a.preset {
        SimPreset::Standard | SimPreset::Sweep => {
            let mut config = SweepConfig {
                params0: MapParams::new(m1, b, a.m2.unwrap_or(base.params0.m2)),
                delta_m2: a.delta_m2.unwrap_or(base.delta_m2),
                noise_eps: a.noise.unwrap_or(base.noise_eps),
                n_steps: a.steps.unwrap_or(base.n_steps),
                burn_in,
                ..base
            };
            if a.preset == SimPreset::Sweep && a.m2.is_none() {
                config.params0.m2 = 0.81 - config.n_steps as f64 * config.delta_m2;
            }
            let series = sweep_series(&config)?;
            meta.push("m2_start", config.params0.m2);
            meta.push("delta_m2", config.delta_m2);
            meta.push("m2_end", config.m2_at(config.n_steps - 1));
            meta.push("noise", config.noise_eps);
            meta.push("steps", config.n_steps);
            meta.push("seed", config.seed);
            meta.push("noise_generator", NOISE_GENERATOR);
            let path = a.out.join("series.csv");
            write_to(&path, |w| write_series(&series, ("index", "x"), w))?;
            info!("wrote {} points to {}", series.len(), path.display());
        }
        SimPreset::Frozen => {
            let params = MapParams::new(m1, b, a.m2.unwrap_or(0.81));
            let n = a.steps.unwrap_or(base.n_steps);
            let orbit = orbit_fixed(params, init, n, burn_in)?;
            let series = TimeSeries::from_values(orbit.iter().map(|s| s[0]).collect())
                .map_err(|e| Failure::Internal(e.to_string()))?;
            meta.push("m2", params.m2);
            meta.push("steps", n);
            write_to(&a.out.join("series.csv"), |w| write_series(&series, ("index", "x"), w))?;
        }
        SimPreset::Scan => {
            let config = ScanConfig {
                m1,
                b,
                m2_range: (a.m2_min, a.m2_max),
                n_params: a.n_params,
                points_per_param: a.steps.unwrap_or(200),
                burn_in,
                initial: init,
            };
            let columns = bifurcation_scan(&config)?;
            let diverged: Vec<String> = columns
                .iter()
                .filter(|c| c.xs.is_err())
                .map(|c| c.m2.to_string())
                .collect();
            meta.push("m2_range", format!("{}..{}", a.m2_min, a.m2_max));
            meta.push("n_params", config.n_params);
            meta.push("points_per_param", config.points_per_param);
            meta.push("diverged_m2", if diverged.is_empty() { "none".into() } else { diverged.join(",") });
            write_to(&a.out.join("bifurcation.csv"), |w| write_bifurcation(&columns, w))?;
        }
    }
    write_to(&a.out.join("metadata.txt"), |w| write_metadata(&meta, w))
}

fn parse_end(s: &str) -> Result<Timestamp, Failure> {
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(Timestamp::Date(d));
    }
    s.parse::<i64>()
        .map(Timestamp::Tick)
        .map_err(|_| Failure::Input(format!("--end-date: `{s}` is neither YYYY-MM-DD nor an integer index")))
}

fn parse_threshold(s: &str) -> Result<Threshold, Failure> {
    if s == "auto" {
        return Ok(Threshold::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(Threshold::Value(v)),
        _ => Err(Failure::Input(format!("--threshold: expected `auto` or a non-negative number, got `{s}`"))),
    }
}

/// Input series (cut at the end date) and the preset-derived configuration.
fn load(p: &PipelineArgs) -> Result<(TimeSeries, PipelineConfig), Failure> {
    let (series, mut config) = match p.preset {
        Preset::Asset => (read_price_csv(&p.input), PipelineConfig::assets()),
        Preset::Lorenz => (read_series_csv(&p.input), PipelineConfig::lorenz()),
    };
    // Any failure to read the input, missing file included, is an input error.
    let series = series.map_err(|e| Failure::Input(e.to_string()))?;
    let series = match &p.end_date {
        Some(end) => {
            let end = parse_end(end)?;
            let cut = series.truncate_through(end);
            if cut.is_empty() {
                return Err(Failure::Input(format!("--end-date {end} precedes every input row")));
            }
            cut
        }
        None => series,
    };
    if let Some(d) = p.embed_dim {
        config = config.with_embed_dim(d);
    }
    if let Some(w) = p.window {
        config = config.with_window(w);
    }
    config.threshold = parse_threshold(&p.threshold)?;
    Ok((series, config))
}

fn analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    let (series, mut config) = load(&a.pipeline)?;
    if let Some(k) = a.k {
        config = config.with_k(k);
    }
    if let Some(r) = a.restarts {
        config = config.with_restarts(r);
    }
    if let Some(m) = a.max_iters {
        config.kmeans = config.kmeans.max_iters(m);
    }
    config = config.with_seed(a.seed);
    if let Some(names) = &a.features {
        config.features = names
            .iter()
            .map(|n| Feature::parse(n).ok_or_else(|| Failure::Input(format!("--features: unknown feature `{n}`"))))
            .collect::<Result<_, _>>()?;
    }
    config.diagram_windows = a.diagrams.clone();
    let mut result = run_full(&series, &config)?;
    result.metadata.push("input", a.pipeline.input.display());
    if let Some(end) = &a.pipeline.end_date {
        result.metadata.push("end_date", end);
    }
    write_outputs(&result, &a.out)?;
    info!("{} windows, {} clusters written to {}", result.norm_series.len(), config.kmeans.k, a.out.display());
    Ok(())
}

fn emit(out: &Option<PathBuf>, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), Failure> {
    match out {
        Some(path) => write_to(path, |w| f(w)),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).map_err(|e| Failure::Internal(format!("stdout: {e}")))
        }
    }
}

fn diagram(a: DiagramArgs) -> Result<(), Failure> {
    let (series, config) = load(&a.pipeline)?;
    let tda = tda_series(&series, &config)?;
    let (label, diagram) = window_diagram(&tda, &config, a.index)?;
    info!("window {} ends at {label}", a.index);
    emit(&a.out, |w| write_diagram(&diagram, w))
}

fn landscape(a: LandscapeArgs) -> Result<(), Failure> {
    let (series, config) = load(&a.pipeline)?;
    let norms = run_tda(&tda_series(&series, &config)?, &config)?;
    let diffs = if norms.len() >= 2 {
        first_difference(&norms).map_err(|e| Failure::Internal(e.to_string()))?
    } else {
        TimeSeries::new(Vec::new(), Vec::new()).map_err(|e| Failure::Internal(e.to_string()))?
    };
    emit(&a.out, |w| write_norm_table(&norms, &diffs, w))
}
