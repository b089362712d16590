//! Command-line front end: evaluate a metric at a point, dump its
//! fundamental tensor, run the axiom check suite over sampled points, or
//! run the classification probes. Configuration comes from a JSON file;
//! see the repository README for the schema.
//!
//! Exit codes: 0 on success (and on an all-pass check run), 1 when the
//! check suite finds a property violation, 2 on invalid input — bad
//! arguments, unreadable or invalid config, or a point outside the
//! metric's domain.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use finsler::classify::{classify, plan_grids, ClassificationReport, ProbeOutcome};
use finsler::config::{to_machine_json, OutputFormat, RunConfig};
use finsler::convolution::{block_tensor, BlockTensor};
use finsler::report::{CheckReport, PropertyReport};
use finsler::sampler::{build_plan, draw_samples, SampleMode};
use finsler::{FinslerMetric, FundamentalTensor, TangentSample};

#[derive(Parser)]
#[command(
    name = "finsler",
    version,
    about = "Evaluate, check, and classify Finsler metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the metric at one tangent-bundle point.
    Eval {
        #[command(flatten)]
        common: Common,
        /// 2n comma-separated coordinates: base point, then fiber vector.
        #[arg(long, value_name = "COORDS", allow_hyphen_values = true)]
        point: String,
        /// Also print the fiber derivative dF/dy.
        #[arg(long)]
        gradient: bool,
    },
    /// Print the fundamental tensor at one tangent-bundle point.
    Tensor {
        #[command(flatten)]
        common: Common,
        /// 2n comma-separated coordinates: base point, then fiber vector.
        #[arg(long, value_name = "COORDS", allow_hyphen_values = true)]
        point: String,
        /// For product metrics: also print the raw block assembly and
        /// compare its symmetrization against the derivative-based tensor.
        #[arg(long)]
        compare_block: bool,
    },
    /// Sample the domain and check the metric axioms and positivity.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Sample the domain and run the classification probes.
    Classify {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Path to the JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Sampling seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Sample count; overrides the config.
    #[arg(long)]
    samples: Option<usize>,
    /// Override one tolerance, e.g. --tol algebraic=1e-8 (repeatable).
    /// The FINSLER_TOL_OVERRIDE environment variable accepts the same
    /// pairs, comma-separated, and is applied last.
    #[arg(long, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Output format; overrides the config.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Machine,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Table => OutputFormat::Table,
            FormatArg::Machine => OutputFormat::Machine,
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Eval {
            common,
            point,
            gradient,
        } => {
            let (cfg, m) = load(&common)?;
            let s = parse_point(&point, m.dim())?;
            check_point(&m, &s)?;
            cmd_eval(&cfg, &m, &s, gradient)
        }
        Command::Tensor {
            common,
            point,
            compare_block,
        } => {
            let (cfg, m) = load(&common)?;
            let s = parse_point(&point, m.dim())?;
            check_point(&m, &s)?;
            cmd_tensor(&cfg, &m, &s, compare_block)
        }
        Command::Check { common } => {
            let (cfg, m) = load(&common)?;
            cmd_check(&cfg, &m)
        }
        Command::Classify { common } => {
            let (cfg, m) = load(&common)?;
            cmd_classify(&cfg, &m)
        }
    }
}

/// Read the config, apply command-line and environment overrides, and
/// build the metric.
fn load(common: &Common) -> Result<(RunConfig, FinslerMetric), String> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| format!("cannot read {}: {e}", common.config.display()))?;
    let mut cfg = RunConfig::from_json(&text).map_err(|e| e.to_string())?;
    if let Some(seed) = common.seed {
        cfg.seed = Some(seed);
    }
    if let Some(samples) = common.samples {
        cfg.samples = samples;
    }
    if let Some(format) = common.format {
        cfg.format = format.into();
    }
    for pair in &common.tol {
        apply_tol_pair(&mut cfg, pair)?;
    }
    if let Ok(env) = std::env::var("FINSLER_TOL_OVERRIDE") {
        for pair in env.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            apply_tol_pair(&mut cfg, pair)
                .map_err(|e| format!("in FINSLER_TOL_OVERRIDE: {e}"))?;
        }
    }
    let m = cfg.build_metric().map_err(|e| e.to_string())?;
    Ok((cfg, m))
}

fn apply_tol_pair(cfg: &mut RunConfig, pair: &str) -> Result<(), String> {
    let (name, value) = pair
        .split_once('=')
        .ok_or_else(|| format!("tolerance override {pair:?} is not NAME=VALUE"))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("tolerance value {value:?} is not a number"))?;
    cfg.tolerances
        .set(name.trim(), value)
        .map_err(|e| e.to_string())
}

/// Parse "--point" into a tangent sample: the first n values are the base
/// point, the remaining n the fiber vector.
fn parse_point(text: &str, dim: usize) -> Result<TangentSample, String> {
    let values: Vec<f64> = text
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| format!("coordinate {v:?} is not a number"))
        })
        .collect::<Result<_, _>>()?;
    if values.len() != 2 * dim {
        return Err(format!(
            "--point needs {} coordinates (base point then fiber vector) \
             for this {dim}-dimensional metric, got {}",
            2 * dim,
            values.len()
        ));
    }
    let (x, y) = values.split_at(dim);
    TangentSample::new(x.to_vec(), y.to_vec()).map_err(|e| e.to_string())
}

fn check_point(m: &FinslerMetric, s: &TangentSample) -> Result<(), String> {
    // The library message already names this a domain violation.
    m.check_domain(s).map_err(|e| e.to_string())
}

/// The seed for sampling commands, from the flag-merged config.
fn require_seed(cfg: &RunConfig) -> Result<u64, String> {
    cfg.seed.ok_or_else(|| {
        "sampling needs a seed; set \"seed\" in the config or pass --seed".to_string()
    })
}

// Fifteen significant digits for headline values.
fn val(v: f64) -> String {
    format!("{v:.14e}")
}

// Three significant digits for deviations in tables.
fn dev(v: f64) -> String {
    format!("{v:.2e}")
}

fn vec_line(v: &[f64]) -> String {
    let inner: Vec<String> = v.iter().map(|c| c.to_string()).collect();
    format!("[{}]", inner.join(", "))
}

#[derive(Serialize)]
struct EvalReport {
    metric: String,
    x: Vec<f64>,
    y: Vec<f64>,
    value: f64,
    squared: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    y_gradient: Option<Vec<f64>>,
}

fn cmd_eval(
    cfg: &RunConfig,
    m: &FinslerMetric,
    s: &TangentSample,
    gradient: bool,
) -> Result<ExitCode, String> {
    let value = m.value(s).map_err(|e| e.to_string())?;
    let squared = m.squared_value(s).map_err(|e| e.to_string())?;
    let y_gradient = if gradient {
        Some(m.y_gradient(s).map_err(|e| e.to_string())?)
    } else {
        None
    };
    let report = EvalReport {
        metric: m.describe(),
        x: s.x.clone(),
        y: s.y.clone(),
        value,
        squared,
        y_gradient,
    };
    match cfg.format {
        OutputFormat::Machine => print!("{}", to_machine_json(&report).map_err(|e| e.to_string())?),
        OutputFormat::Table => {
            println!("metric   {}", report.metric);
            println!("x        {}", vec_line(&report.x));
            println!("y        {}", vec_line(&report.y));
            println!("F        {}", val(report.value));
            println!("F^2      {}", val(report.squared));
            if let Some(g) = &report.y_gradient {
                let cols: Vec<String> = g.iter().map(|&c| val(c)).collect();
                println!("dF/dy    [{}]", cols.join(", "));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct TensorReport {
    metric: String,
    x: Vec<f64>,
    y: Vec<f64>,
    tensor: FundamentalTensor,
    #[serde(skip_serializing_if = "Option::is_none")]
    block: Option<BlockSection>,
}

#[derive(Serialize)]
struct BlockSection {
    raw: BlockTensor,
    /// Full square matrix including the structurally zero bottom-left
    /// block.
    assembled: Vec<Vec<f64>>,
    max_asymmetry: f64,
    /// Largest entry difference between the symmetrized blocks and the
    /// derivative-based tensor.
    max_abs_diff: f64,
}

fn cmd_tensor(
    cfg: &RunConfig,
    m: &FinslerMetric,
    s: &TangentSample,
    compare_block: bool,
) -> Result<ExitCode, String> {
    let tensor = m.fundamental_tensor(s).map_err(|e| e.to_string())?;
    let block = if compare_block {
        let spec = m
            .as_convolution()
            .ok_or("--compare-block needs a product (convolution) metric")?;
        let raw = block_tensor(spec, s).map_err(|e| e.to_string())?;
        let max_abs_diff = raw.symmetrized().max_abs_diff(&tensor.matrix);
        Some(BlockSection {
            assembled: raw.assembled(),
            max_asymmetry: raw.max_asymmetry(),
            max_abs_diff,
            raw,
        })
    } else {
        None
    };
    let report = TensorReport {
        metric: m.describe(),
        x: s.x.clone(),
        y: s.y.clone(),
        tensor,
        block,
    };
    match cfg.format {
        OutputFormat::Machine => print!("{}", to_machine_json(&report).map_err(|e| e.to_string())?),
        OutputFormat::Table => {
            println!("metric          {}", report.metric);
            println!("x               {}", vec_line(&report.x));
            println!("y               {}", vec_line(&report.y));
            println!("min eigenvalue  {}", val(report.tensor.min_eigenvalue));
            println!("g =");
            print_matrix(&report.tensor.matrix.rows());
            if let Some(block) = &report.block {
                println!();
                println!("raw block matrix (bottom-left identically zero) =");
                print_matrix(&block.assembled);
                println!("max asymmetry            {}", dev(block.max_asymmetry));
                println!("sym(block) vs autodiff   {}", dev(block.max_abs_diff));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_matrix(rows: &[Vec<f64>]) {
    for row in rows {
        let cols: Vec<String> = row.iter().map(|&c| format!("{c:>22}", c = val(c))).collect();
        println!("  {}", cols.join(" "));
    }
}

fn cmd_check(cfg: &RunConfig, m: &FinslerMetric) -> Result<ExitCode, String> {
    let seed = require_seed(cfg)?;
    let domain = cfg.domain(m).map_err(|e| e.to_string())?;
    // Chart-only sampling: points where the squared metric fails to be
    // positive must reach the suite so the violation is witnessed rather
    // than silently resampled away.
    let samples = draw_samples(m, &domain, cfg.samples, seed, SampleMode::ChartOnly)
        .map_err(|e| e.to_string())?;
    let report = finsler::report::run_check_suite(m, &samples, &cfg.tolerances, seed);
    match cfg.format {
        OutputFormat::Machine => print!("{}", to_machine_json(&report).map_err(|e| e.to_string())?),
        OutputFormat::Table => print_check_table(&report),
    }
    Ok(if report.all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn print_check_table(report: &CheckReport) {
    println!("metric   {}", report.metric);
    println!("dim      {}", report.dim);
    println!("seed     {}", report.seed);
    println!("samples  {}", report.samples_requested);
    println!();
    let width = report
        .properties
        .iter()
        .map(|p| p.name.len())
        .max()
        .unwrap_or(0);
    for p in &report.properties {
        println!("{}", property_line(p, width));
        if !p.passed {
            if let Some(w) = &p.witness {
                println!("       worst sample: x = {}", vec_line(&w.x));
                println!("                    y = {}", vec_line(&w.y));
            }
        }
    }
    println!();
    println!("overall: {}", if report.all_passed { "pass" } else { "FAIL" });
}

fn property_line(p: &PropertyReport, width: usize) -> String {
    let mut line = String::new();
    let status = if p.passed { "pass " } else { "FAIL " };
    let _ = write!(
        line,
        "{status} {name:<width$}  max {max:>9}  tol {tol:>9}  evaluated {eval}",
        name = p.name,
        max = dev(p.max_deviation),
        tol = dev(p.tolerance),
        eval = p.evaluated,
    );
    if p.skipped > 0 {
        let _ = write!(line, "  skipped {}", p.skipped);
    }
    if p.violations > 0 {
        let _ = write!(line, "  violations {}", p.violations);
    }
    line
}

fn cmd_classify(cfg: &RunConfig, m: &FinslerMetric) -> Result<ExitCode, String> {
    let seed = require_seed(cfg)?;
    let domain = cfg.domain(m).map_err(|e| e.to_string())?;
    let (grid_x, grid_y) = plan_grids(m.dim(), cfg.samples);
    let plan = build_plan(m, &domain, cfg.samples, grid_x, grid_y, seed)
        .map_err(|e| e.to_string())?;
    let report = classify(m, &plan, &cfg.tolerances).map_err(|e| e.to_string())?;
    match cfg.format {
        OutputFormat::Machine => print!("{}", to_machine_json(&report).map_err(|e| e.to_string())?),
        OutputFormat::Table => print_classify_table(&report),
    }
    // Classification is informational; reaching a report is success.
    Ok(ExitCode::SUCCESS)
}

fn print_classify_table(report: &ClassificationReport) {
    println!("metric   {}", report.metric);
    println!("dim      {}", report.dim);
    println!("seed     {}", report.seed);
    println!();
    let rows: [(&str, &ProbeOutcome); 4] = [
        ("riemannian", &report.riemannian),
        ("locally-minkowskian", &report.locally_minkowskian),
        ("randers", &report.randers),
        ("euclidean", &report.euclidean),
    ];
    for (name, probe) in rows {
        let verdict = format!("{:?}", probe.verdict).to_lowercase();
        let mut line = format!(
            "{name:<20} {verdict:<16} max {max:>9}  tol {tol:>9}  evaluated {eval}",
            max = dev(probe.max_deviation),
            tol = dev(probe.tolerance),
            eval = probe.evaluated,
        );
        if probe.skipped > 0 {
            let _ = write!(line, "  skipped {}", probe.skipped);
        }
        println!("{line}");
        if let Some(note) = &probe.note {
            println!("{:<20} note: {note}", "");
        }
    }
}
