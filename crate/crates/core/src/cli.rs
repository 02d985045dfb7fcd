//! The `ridgelet` command-line front end.
//!
//! Exit codes: 0 on success, 2 for usage errors (bad or inconsistent flags),
//! 1 for runtime failures.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::dataset::{read_nodes, write_model, write_nodes, Dataset};
use crate::domain::{is_prime, FiniteDomain, DEFAULT_ENUMERATION_CAP};
use crate::error::Error;
use crate::exec::{init_threads, Execution};
use crate::experiments::{
    fit_scaling, generate_sine_samples, run_risk_experiment_with, run_runtime_experiment,
    write_risk_csv, write_runtime_csv, Method, RiskConfig, RuntimeConfig, RuntimeMethod,
    SyntheticSpec,
};
use crate::oracle::enumerate_exact;
use crate::ridgelet::ActivationTable;
use crate::sampler::{uniform_node, SamplerConfig, SamplerState, Smoothing};
use crate::seed::rng_from_seed;
use crate::subnetwork::{dedup, empirical_risk, ridge_fit};

#[derive(Debug, Parser)]
#[command(name = "ridgelet", version, about = "Sample hidden nodes of sparse ridgelet networks on Z_P^D")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic sine dataset.
    Gen(GenArgs),
    /// Draw hidden nodes for a dataset.
    Sample(SampleArgs),
    /// Fit output weights on a node list and report the empirical risk.
    Fit(FitArgs),
    /// Empirical risk against the number of sampled nodes.
    RiskExperiment(RiskArgs),
    /// Wall-clock time per sample against the input dimension.
    RuntimeExperiment(RuntimeArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub p: u32,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleMethod {
    Dequantized,
    Exact,
    Uniform,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = SampleMethod::Dequantized)]
    pub method: SampleMethod,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lambda_eff: f64,
    /// `auto` sets the smoothing to gamma.
    #[arg(long, default_value = "auto", value_parser = parse_smoothing)]
    pub delta_smooth: Smoothing,
    #[arg(long, default_value_t = 0.1)]
    pub delta_tv: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest node count the exact method may enumerate.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u64,
    /// Node list destination; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub nodes: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    pub lambda_eff: f64,
    /// Model destination; not written if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RiskArgs {
    #[arg(long, default_value_t = 7)]
    pub p: u32,
    #[arg(long, default_value_t = 1)]
    pub d_min: usize,
    #[arg(long, default_value_t = 6)]
    pub d_max: usize,
    #[arg(long, default_value_t = 50)]
    pub m_per_d: usize,
    /// Smallest N; the grid doubles up to `--n-max`.
    #[arg(long, default_value_t = 8)]
    pub n_min: usize,
    #[arg(long, default_value_t = 4096)]
    pub n_max: usize,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    /// Dequantized runs, one per listed delta_tv.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.7")]
    pub delta_tv: Vec<f64>,
    #[arg(long)]
    pub no_exact: bool,
    #[arg(long)]
    pub no_uniform: bool,
    #[arg(long, default_value_t = 1e-3)]
    pub lambda_eff: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u64,
    #[arg(long, default_value = "risk.csv")]
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct RuntimeArgs {
    #[arg(long, default_value_t = 3)]
    pub p: u32,
    #[arg(long, default_value_t = 8)]
    pub naive_d_max: usize,
    /// Dequantized dimensions are the powers of two up to this value.
    #[arg(long, default_value_t = 128)]
    pub deq_d_max: usize,
    #[arg(long, default_value_t = 50)]
    pub m_per_d: usize,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta_tv: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub lambda_eff: f64,
    /// Per-run timeout in seconds.
    #[arg(long, default_value_t = 300.0)]
    pub timeout: f64,
    /// Dense runs needing more memory than this are recorded as timeouts.
    #[arg(long, default_value_t = 3072)]
    pub max_dense_mib: u64,
    #[arg(long, default_value_t = 4)]
    pub naive_fit_min_d: usize,
    #[arg(long, default_value_t = 8)]
    pub deq_fit_min_d: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "runtime.csv")]
    pub out: PathBuf,
}

fn parse_smoothing(s: &str) -> Result<Smoothing, String> {
    if s == "auto" {
        return Ok(Smoothing::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(Smoothing::Fixed(v)),
        _ => Err(format!("expected `auto` or a positive number, got `{s}`")),
    }
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Runtime(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn check_prime(p: u32) -> CliResult<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(usage(format!("P must be prime (got {p})")))
    }
}

fn check_positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("{name} must be positive (got {v})")))
    }
}

fn check_unit(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(usage(format!("{name} must lie in (0, 1) (got {v})")))
    }
}

fn check_at_least_one(name: &str, v: usize) -> CliResult<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(usage(format!("{name} must be at least 1")))
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Runtime(Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Runtime(Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))))
}

/// Runs one parsed command, writing human-readable output to `stdout`.
pub fn run<W: Write>(cli: Cli, stdout: &mut W) -> CliResult<()> {
    match cli.command {
        Command::Gen(a) => cmd_gen(a, stdout),
        Command::Sample(a) => cmd_sample(a, stdout),
        Command::Fit(a) => cmd_fit(a, stdout),
        Command::RiskExperiment(a) => cmd_risk(a, stdout),
        Command::RuntimeExperiment(a) => cmd_runtime(a, stdout),
    }
}

pub fn cmd_gen<W: Write>(a: GenArgs, stdout: &mut W) -> CliResult<()> {
    check_prime(a.p)?;
    check_at_least_one("D", a.d)?;
    check_at_least_one("M", a.m)?;
    let ds = generate_sine_samples(&SyntheticSpec {
        p: a.p,
        d: a.d,
        m: a.m,
        seed: a.seed,
    })?;
    let emp = ds.to_empirical()?;
    let mut w = create(&a.out)?;
    ds.write(&mut w)?;
    w.flush()?;
    let mean_sq: f64 = emp.probs().iter().zip(emp.labels()).map(|(p, y)| p * y * y).sum();
    writeln!(stdout, "P={} D={} M={} K={} mean_sq_label={mean_sq}", a.p, a.d, a.m, emp.k())?;
    Ok(())
}

pub fn cmd_sample<W: Write>(a: SampleArgs, stdout: &mut W) -> CliResult<()> {
    check_positive("lambda-eff", a.lambda_eff)?;
    check_unit("delta-tv", a.delta_tv)?;
    check_at_least_one("n", a.n)?;
    init_threads(a.threads);
    let mut ds = Dataset::read(open(&a.data)?)?;
    ds.dom = ds.dom.with_cap(a.cap);
    let emp = ds.to_empirical()?;
    let g = ActivationTable::relu(ds.dom.p())?;
    let cfg = SamplerConfig::new(a.lambda_eff, a.delta_smooth, a.delta_tv);
    let drawn: Vec<(crate::domain::NodeIndex, bool)> = match a.method {
        SampleMethod::Dequantized => {
            let st = SamplerState::build(&emp, &g, &cfg)?;
            let exec = if a.threads == 1 { Execution::Sequential } else { Execution::default() };
            st.sample_batch_with(a.n, a.seed, exec)?
                .into_iter()
                .map(|o| (o.node, o.accepted))
                .collect()
        }
        SampleMethod::Exact => {
            let exact = enumerate_exact(&emp, &g, &cfg).map_err(|e| match e {
                Error::CapExceeded { .. } => Failure::Runtime(Error::InvalidParameter(format!(
                    "{e}; raise --cap or use --method dequantized"
                ))),
                e => e.into(),
            })?;
            let mut rng = rng_from_seed(a.seed);
            (0..a.n).map(|_| (exact.sample(&mut rng), true)).collect()
        }
        SampleMethod::Uniform => {
            let mut rng = rng_from_seed(a.seed);
            (0..a.n).map(|_| (uniform_node(&ds.dom, &mut rng), true)).collect()
        }
    };
    let iter = drawn.iter().map(|(n, acc)| (n, *acc));
    match &a.out {
        Some(path) => {
            let mut w = create(path)?;
            write_nodes(&mut w, iter)?;
            w.flush()?;
        }
        None => write_nodes(&mut *stdout, iter)?,
    }
    Ok(())
}

pub fn cmd_fit<W: Write>(a: FitArgs, stdout: &mut W) -> CliResult<()> {
    check_positive("lambda-eff", a.lambda_eff)?;
    let ds = Dataset::read(open(&a.data)?)?;
    let emp = ds.to_empirical()?;
    let raw = read_nodes(open(&a.nodes)?, &ds.dom).map_err(|e| {
        Failure::Runtime(Error::InvalidParameter(format!(
            "node file does not match the dataset (P = {}, D = {}): {e}",
            ds.dom.p(),
            ds.dom.d()
        )))
    })?;
    let g = ActivationTable::relu(ds.dom.p())?;
    let nodes = dedup(raw);
    let model = ridge_fit(&nodes, &emp, &g, a.lambda_eff)?;
    let risk = empirical_risk(&model, &emp, &g);
    if let Some(path) = &a.out {
        let mut w = create(path)?;
        write_model(&mut w, &model)?;
        w.flush()?;
    }
    writeln!(stdout, "N={} N_eff={} risk={risk}", nodes.n(), nodes.n_eff())?;
    Ok(())
}

fn doubling_grid(lo: usize, hi: usize) -> Vec<usize> {
    std::iter::successors(Some(lo), |&n| n.checked_mul(2))
        .take_while(|&n| n <= hi)
        .collect()
}

pub fn cmd_risk<W: Write>(a: RiskArgs, stdout: &mut W) -> CliResult<()> {
    check_prime(a.p)?;
    check_at_least_one("d-min", a.d_min)?;
    check_at_least_one("n-min", a.n_min)?;
    check_at_least_one("reps", a.reps)?;
    check_at_least_one("m-per-d", a.m_per_d)?;
    check_positive("lambda-eff", a.lambda_eff)?;
    if a.d_max < a.d_min || a.n_max < a.n_min {
        return Err(usage("grid maxima must not be below the minima"));
    }
    for &t in &a.delta_tv {
        check_unit("delta-tv", t)?;
    }
    let mut methods = Vec::new();
    if !a.no_exact {
        methods.push(Method::Exact);
    }
    methods.extend(a.delta_tv.iter().map(|&delta_tv| Method::Dequantized { delta_tv }));
    if !a.no_uniform {
        methods.push(Method::Uniform);
    }
    if methods.is_empty() {
        return Err(usage("no methods selected"));
    }
    if a.threads > 0 {
        init_threads(a.threads);
    }
    let cfg = RiskConfig {
        p: a.p,
        dims: (a.d_min..=a.d_max).collect(),
        m_per_d: a.m_per_d,
        n_grid: doubling_grid(a.n_min, a.n_max),
        reps: a.reps,
        methods,
        lambda_eff: a.lambda_eff,
        seed: a.seed,
        cap: a.cap,
    };
    let exec = if a.threads == 1 { Execution::Sequential } else { Execution::default() };
    let rows = run_risk_experiment_with(&cfg, exec)?;
    let mut w = create(&a.out)?;
    write_risk_csv(&mut w, &rows)?;
    w.flush()?;
    writeln!(stdout, "wrote {} rows to {}", rows.len(), a.out.display())?;
    Ok(())
}

pub fn cmd_runtime<W: Write>(a: RuntimeArgs, stdout: &mut W) -> CliResult<()> {
    check_prime(a.p)?;
    check_at_least_one("reps", a.reps)?;
    check_at_least_one("m-per-d", a.m_per_d)?;
    check_positive("lambda-eff", a.lambda_eff)?;
    check_positive("timeout", a.timeout)?;
    check_unit("delta-tv", a.delta_tv)?;
    FiniteDomain::new(a.p, 1)?;
    let cfg = RuntimeConfig {
        p: a.p,
        naive_dims: (1..=a.naive_d_max).collect(),
        dequantized_dims: doubling_grid(1, a.deq_d_max),
        m_per_d: a.m_per_d,
        reps: a.reps,
        delta_tv: a.delta_tv,
        lambda_eff: a.lambda_eff,
        seed: a.seed,
        timeout: Duration::from_secs_f64(a.timeout),
        max_dense_bytes: a.max_dense_mib.saturating_mul(1 << 20),
    };
    let rows = run_runtime_experiment(&cfg)?;
    let mut w = create(&a.out)?;
    write_runtime_csv(&mut w, &rows)?;
    w.flush()?;
    writeln!(stdout, "wrote {} rows to {}", rows.len(), a.out.display())?;
    for (method, min_d) in [
        (RuntimeMethod::Naive, a.naive_fit_min_d),
        (RuntimeMethod::Dequantized, a.deq_fit_min_d),
    ] {
        match fit_scaling(&rows, method, min_d, usize::MAX) {
            Ok(fit) => writeln!(
                stdout,
                "{} exponent={:.4} points={} (D >= {min_d})",
                method.name(),
                fit.slope,
                fit.points
            )?,
            Err(e) => {
                info!("{} fit unavailable: {e}", method.name());
                writeln!(stdout, "{} exponent=unavailable ({e})", method.name())?;
            }
        }
    }
    Ok(())
}
