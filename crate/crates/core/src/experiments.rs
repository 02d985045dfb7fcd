//! Synthetic data and the two experiment drivers.
//!
//! Every random draw is keyed by a sub-seed derived from
//! `(seed, D, method id, N, repetition)` through [`derive_seed`], so the
//! CSV output does not depend on scheduling or thread count.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use log::{info, warn};
use rand::Rng;

use crate::dataset::Dataset;
use crate::domain::{FiniteDomain, NodeIndex, Point, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::oracle::{enumerate_exact_with, naive_sample};
use crate::ridgelet::ActivationTable;
use crate::sampler::{uniform_node, EmpiricalDistribution, SamplerConfig, SamplerState, Smoothing};
use crate::seed::{derive_seed, rng_from_seed};
use crate::subnetwork::{dedup, empirical_risk, ridge_fit};

/// Method id reserved for dataset generation in sub-seed derivation.
const DATA_STREAM: u64 = 0xda7a;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub p: u32,
    pub d: usize,
    pub m: usize,
    pub seed: u64,
}

/// `sin((4 pi / P) * (sum_d x_d mod P))`.
pub fn sine_label(x: &[u32], p: u32) -> f64 {
    let s = x.iter().fold(0u64, |acc, &c| (acc + c as u64) % p as u64);
    (4.0 * std::f64::consts::PI / p as f64 * s as f64).sin()
}

/// `M` inputs uniform on `Z_P^D` with noiseless sine labels.
pub fn generate_sine_samples(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.m == 0 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    let dom = FiniteDomain::new(spec.p, spec.d)?;
    let mut rng = rng_from_seed(spec.seed);
    let xs: Vec<Point> = (0..spec.m)
        .map(|_| Point((0..spec.d).map(|_| rng.random_range(0..spec.p)).collect()))
        .collect();
    let ys = xs.iter().map(|x| sine_label(x.coords(), spec.p)).collect();
    Ok(Dataset { dom, xs, ys })
}

pub fn gen_sine_dataset(spec: &SyntheticSpec) -> Result<EmpiricalDistribution> {
    generate_sine_samples(spec)?.to_empirical()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Exact,
    Dequantized { delta_tv: f64 },
    Uniform,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Dequantized { .. } => "dequantized",
            Method::Uniform => "uniform",
        }
    }

    pub fn delta_tv(&self) -> Option<f64> {
        match self {
            Method::Dequantized { delta_tv } => Some(*delta_tv),
            _ => None,
        }
    }

    fn id(&self) -> u64 {
        match self {
            Method::Exact => 1,
            Method::Dequantized { delta_tv } => derive_seed(2, &[delta_tv.to_bits()]),
            Method::Uniform => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RiskConfig {
    pub p: u32,
    pub dims: Vec<usize>,
    pub m_per_d: usize,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub methods: Vec<Method>,
    pub lambda_eff: f64,
    pub seed: u64,
    pub cap: u64,
}

impl Default for RiskConfig {
    fn default() -> Self {
        Self {
            p: 7,
            dims: (1..=6).collect(),
            m_per_d: 50,
            n_grid: (3..=12).map(|k| 1usize << k).collect(),
            reps: 50,
            methods: vec![
                Method::Exact,
                Method::Dequantized { delta_tv: 0.1 },
                Method::Dequantized { delta_tv: 0.7 },
                Method::Uniform,
            ],
            lambda_eff: 1e-3,
            seed: 0,
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskResultRow {
    pub method: &'static str,
    pub delta_tv: Option<f64>,
    pub p: u32,
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub rep: usize,
    pub n_eff: usize,
    pub risk: f64,
    pub seed: u64,
}

/// Sorting key: dimension, method position in the config, N, repetition.
type RowKey = (usize, usize, usize, usize);

fn risk_cell(
    cfg: &RiskConfig,
    d: usize,
    rep: usize,
) -> Result<Vec<(RowKey, RiskResultRow)>> {
    let m = cfg.m_per_d * d;
    let data_seed = derive_seed(cfg.seed, &[d as u64, DATA_STREAM, 0, rep as u64]);
    let emp = gen_sine_dataset(&SyntheticSpec {
        p: cfg.p,
        d,
        m,
        seed: data_seed,
    })?;
    let dom = emp.domain().with_cap(cfg.cap);
    let g = ActivationTable::relu(cfg.p)?;
    let mut rows = Vec::new();
    for (mi, method) in cfg.methods.iter().enumerate() {
        let scfg = SamplerConfig::new(cfg.lambda_eff, Smoothing::Auto, method.delta_tv().unwrap_or(0.5));
        let draw: Box<dyn Fn(usize, u64) -> Vec<NodeIndex>> = match method {
            Method::Exact => {
                if let Err(e) = dom.enumerable_nodes() {
                    warn!("skipping exact method at D = {d}: {e}");
                    continue;
                }
                let exact = enumerate_exact_with(&emp, &g, &scfg, Execution::Sequential)?;
                Box::new(move |n, seed| {
                    let mut rng = rng_from_seed(seed);
                    (0..n).map(|_| exact.sample(&mut rng)).collect()
                })
            }
            Method::Dequantized { .. } => {
                let st = SamplerState::build(&emp, &g, &scfg)?;
                Box::new(move |n, seed| {
                    st.sample_batch_with(n, seed, Execution::Sequential)
                        .expect("n >= 1")
                        .into_iter()
                        .map(|o| o.node)
                        .collect()
                })
            }
            Method::Uniform => Box::new(move |n, seed| {
                let mut rng = rng_from_seed(seed);
                (0..n).map(|_| uniform_node(&dom, &mut rng)).collect()
            }),
        };
        for (ni, &n) in cfg.n_grid.iter().enumerate() {
            let seed = derive_seed(cfg.seed, &[d as u64, method.id(), n as u64, rep as u64]);
            let nodes = dedup(draw(n, seed));
            let model = ridge_fit(&nodes, &emp, &g, cfg.lambda_eff)?;
            rows.push((
                (d, mi, ni, rep),
                RiskResultRow {
                    method: method.name(),
                    delta_tv: method.delta_tv(),
                    p: cfg.p,
                    d,
                    m,
                    n,
                    rep,
                    n_eff: nodes.n_eff(),
                    risk: empirical_risk(&model, &emp, &g),
                    seed,
                },
            ));
        }
    }
    Ok(rows)
}

pub fn run_risk_experiment(cfg: &RiskConfig) -> Result<Vec<RiskResultRow>> {
    run_risk_experiment_with(cfg, Execution::default())
}

/// Risk rows for every `(D, method, N, repetition)`, sorted in that order.
/// Repetitions run in parallel under `exec`; cells that fail are logged
/// and dropped.
pub fn run_risk_experiment_with(cfg: &RiskConfig, exec: Execution) -> Result<Vec<RiskResultRow>> {
    if cfg.n_grid.contains(&0) || cfg.reps == 0 || cfg.m_per_d == 0 {
        return Err(Error::InvalidParameter("N, repetitions and M per D must be positive".into()));
    }
    let jobs: Vec<(usize, usize)> = cfg
        .dims
        .iter()
        .flat_map(|&d| (0..cfg.reps).map(move |rep| (d, rep)))
        .collect();
    let results = map_indexed(jobs.len(), exec, |j| {
        let (d, rep) = jobs[j];
        risk_cell(cfg, d, rep).map_err(|e| (d, rep, e))
    });
    let mut keyed = Vec::new();
    let mut failures = 0;
    for r in results {
        match r {
            Ok(rows) => keyed.extend(rows),
            Err((d, rep, e)) => {
                failures += 1;
                warn!("risk cell D = {d}, rep = {rep} failed: {e}");
            }
        }
    }
    if failures == jobs.len() && !jobs.is_empty() {
        return Err(Error::InvalidParameter("every risk cell failed".into()));
    }
    keyed.sort_by_key(|(k, _)| *k);
    Ok(keyed.into_iter().map(|(_, r)| r).collect())
}

pub const RISK_HEADER: &str = "method,delta_tv,P,D,M,N,rep,N_eff,risk,seed";

pub fn write_risk_csv<W: Write>(mut w: W, rows: &[RiskResultRow]) -> Result<()> {
    writeln!(w, "{RISK_HEADER}")?;
    for r in rows {
        let delta = r.delta_tv.map(|d| d.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.method, delta, r.p, r.d, r.m, r.n, r.rep, r.n_eff, r.risk, r.seed
        )?;
    }
    Ok(())
}

/// Mean and standard error of one `(method, delta_tv, D, N)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskSummary {
    pub method: &'static str,
    pub delta_tv: Option<f64>,
    pub d: usize,
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

/// Cells keyed by `(D, method, delta_tv bits, N)`.
type Cells<'a> = BTreeMap<(usize, &'a str, u64, usize), (Option<f64>, Vec<f64>)>;

pub fn summarize_risk(rows: &[RiskResultRow]) -> Vec<RiskSummary> {
    let mut cells: Cells = BTreeMap::new();
    for r in rows {
        let key = (r.d, r.method, r.delta_tv.map_or(0, f64::to_bits), r.n);
        cells.entry(key).or_insert_with(|| (r.delta_tv, Vec::new())).1.push(r.risk);
    }
    cells
        .into_iter()
        .map(|((d, method, _, n), (delta_tv, v))| {
            let (mean, stderr) = mean_stderr(&v);
            RiskSummary {
                method,
                delta_tv,
                d,
                n,
                mean,
                stderr,
                count: v.len(),
            }
        })
        .collect()
}

/// Sample mean and standard error of the mean (n - 1 denominator).
pub fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuntimeMethod {
    Naive,
    Dequantized,
}

impl RuntimeMethod {
    pub fn name(&self) -> &'static str {
        match self {
            RuntimeMethod::Naive => "naive",
            RuntimeMethod::Dequantized => "dequantized",
        }
    }

    fn id(&self) -> u64 {
        match self {
            RuntimeMethod::Naive => 11,
            RuntimeMethod::Dequantized => 12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RuntimeConfig {
    pub p: u32,
    pub naive_dims: Vec<usize>,
    pub dequantized_dims: Vec<usize>,
    pub m_per_d: usize,
    pub reps: usize,
    pub delta_tv: f64,
    pub lambda_eff: f64,
    pub seed: u64,
    pub timeout: Duration,
    /// Dense runs whose estimated working set exceeds this are skipped.
    pub max_dense_bytes: u64,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        Self {
            p: 3,
            naive_dims: (1..=8).collect(),
            dequantized_dims: vec![1, 2, 4, 8, 16, 32, 64, 128],
            m_per_d: 50,
            reps: 20,
            delta_tv: 0.1,
            lambda_eff: 1e-3,
            seed: 0,
            timeout: Duration::from_secs(300),
            max_dense_bytes: 3 << 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeResultRow {
    pub method: &'static str,
    pub p: u32,
    pub d: usize,
    pub m: usize,
    pub rep: usize,
    pub wall_seconds: f64,
    pub timeout: bool,
    pub seed: u64,
}

/// Bytes held by the dense baseline: the `P^(D+1) x P^(D+1)` system plus the
/// `P^(D+1) x P^D` ridgelet matrix.
fn dense_bytes(p: u32, d: usize) -> u128 {
    let nodes = (p as u128).saturating_pow(d as u32 + 1);
    let points = (p as u128).saturating_pow(d as u32);
    nodes.saturating_mul(nodes + points).saturating_mul(8)
}

/// Wall-clock time for one end-to-end sample per method and repetition.
///
/// Dataset generation is excluded; sampler preprocessing is included. Once a
/// dense run times out, or the previous dimension's mean extrapolated by the
/// cubic cost ratio exceeds the timeout, the remaining naive runs are
/// recorded as timeouts without executing (their `wall_seconds` is the
/// timeout).
pub fn run_runtime_experiment(cfg: &RuntimeConfig) -> Result<Vec<RuntimeResultRow>> {
    if cfg.reps == 0 || cfg.m_per_d == 0 {
        return Err(Error::InvalidParameter("repetitions and M per D must be positive".into()));
    }
    let g = ActivationTable::relu(cfg.p)?;
    let scfg = SamplerConfig::new(cfg.lambda_eff, Smoothing::Auto, cfg.delta_tv);
    scfg.validate()?;
    let mut rows = Vec::new();
    let timeout_secs = cfg.timeout.as_secs_f64();

    let mut give_up = false;
    let mut prev_mean: Option<f64> = None;
    let growth = (cfg.p as f64).powi(3);
    for &d in &cfg.naive_dims {
        let m = cfg.m_per_d * d;
        let predicted_over = prev_mean.is_some_and(|t| t * growth > timeout_secs);
        let too_big = dense_bytes(cfg.p, d) > cfg.max_dense_bytes as u128;
        if too_big {
            warn!("naive D = {d}: dense working set exceeds {} bytes", cfg.max_dense_bytes);
        }
        let skip = give_up || predicted_over || too_big;
        let mut times = Vec::new();
        for rep in 0..cfg.reps {
            let seed = derive_seed(cfg.seed, &[d as u64, RuntimeMethod::Naive.id(), 0, rep as u64]);
            let (wall_seconds, timeout) = if skip || give_up {
                (timeout_secs, true)
            } else {
                let emp = runtime_dataset(cfg, d, rep)?;
                let mut rng = rng_from_seed(seed);
                let start = Instant::now();
                naive_sample(&emp, &g, &scfg, &mut rng)?;
                let t = start.elapsed().as_secs_f64();
                if t > timeout_secs {
                    give_up = true;
                    (t, true)
                } else {
                    times.push(t);
                    (t, false)
                }
            };
            rows.push(RuntimeResultRow {
                method: RuntimeMethod::Naive.name(),
                p: cfg.p,
                d,
                m,
                rep,
                wall_seconds: wall_seconds.max(f64::MIN_POSITIVE),
                timeout,
                seed,
            });
        }
        if skip {
            give_up = true;
        } else if !times.is_empty() {
            let mean = times.iter().sum::<f64>() / times.len() as f64;
            info!("naive D = {d}: mean {mean:.4} s");
            prev_mean = Some(mean);
        }
    }

    for &d in &cfg.dequantized_dims {
        let m = cfg.m_per_d * d;
        for rep in 0..cfg.reps {
            let seed = derive_seed(cfg.seed, &[d as u64, RuntimeMethod::Dequantized.id(), 0, rep as u64]);
            let emp = runtime_dataset(cfg, d, rep)?;
            let mut rng = rng_from_seed(seed);
            let start = Instant::now();
            let st = SamplerState::build(&emp, &g, &scfg)?;
            st.sample_node(&mut rng);
            let t = start.elapsed().as_secs_f64();
            rows.push(RuntimeResultRow {
                method: RuntimeMethod::Dequantized.name(),
                p: cfg.p,
                d,
                m,
                rep,
                wall_seconds: t.max(f64::MIN_POSITIVE),
                timeout: t > timeout_secs,
                seed,
            });
        }
        info!("dequantized D = {d} done");
    }
    Ok(rows)
}

fn runtime_dataset(cfg: &RuntimeConfig, d: usize, rep: usize) -> Result<EmpiricalDistribution> {
    gen_sine_dataset(&SyntheticSpec {
        p: cfg.p,
        d,
        m: cfg.m_per_d * d,
        seed: derive_seed(cfg.seed, &[d as u64, DATA_STREAM, 1, rep as u64]),
    })
}

pub const RUNTIME_HEADER: &str = "method,P,D,M,rep,wall_seconds,timeout,seed";

pub fn write_runtime_csv<W: Write>(mut w: W, rows: &[RuntimeResultRow]) -> Result<()> {
    writeln!(w, "{RUNTIME_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.method, r.p, r.d, r.m, r.rep, r.wall_seconds, r.timeout, r.seed
        )?;
    }
    Ok(())
}

/// Least-squares line through `log(mean time)` against a scale variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Which regressor a fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingAxis {
    /// `D * ln P`: exponential growth `P^(slope * D)`.
    DLogP,
    /// `ln D`: polynomial growth `D^slope`.
    LogD,
}

impl RuntimeMethod {
    pub fn axis(&self) -> ScalingAxis {
        match self {
            RuntimeMethod::Naive => ScalingAxis::DLogP,
            RuntimeMethod::Dequantized => ScalingAxis::LogD,
        }
    }
}

/// Fits the scaling exponent of `method` over non-timeout rows with
/// `min_d <= D <= max_d`.
pub fn fit_scaling(
    rows: &[RuntimeResultRow],
    method: RuntimeMethod,
    min_d: usize,
    max_d: usize,
) -> Result<ScalingFit> {
    let mut by_d: BTreeMap<usize, (u32, Vec<f64>)> = BTreeMap::new();
    for r in rows {
        if r.method == method.name() && !r.timeout && (min_d..=max_d).contains(&r.d) {
            by_d.entry(r.d).or_insert_with(|| (r.p, Vec::new())).1.push(r.wall_seconds);
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = by_d
        .iter()
        .map(|(&d, (p, t))| {
            let mean = t.iter().sum::<f64>() / t.len() as f64;
            let x = match method.axis() {
                ScalingAxis::DLogP => d as f64 * (*p as f64).ln(),
                ScalingAxis::LogD => (d as f64).ln(),
            };
            (x, mean.ln())
        })
        .unzip();
    fit_line(&xs, &ys)
}

/// Ordinary least squares `y = slope * x + intercept`; needs three points.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    if xs.len() < 3 || xs.len() != ys.len() {
        return Err(Error::InvalidParameter(format!(
            "scaling fit needs at least 3 grid points (got {})",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("scaling fit needs distinct x values".into()));
    }
    let slope = sxy / sxx;
    Ok(ScalingFit {
        slope,
        intercept: my - slope * mx,
        points: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_labels() {
        assert_eq!(sine_label(&[3, 4], 7), 0.0);
        let want = (12.0 * std::f64::consts::PI / 7.0).sin();
        assert!((sine_label(&[3], 7) - want).abs() < 1e-15);
        assert_eq!(sine_label(&[1, 5, 2], 7), sine_label(&[6, 6, 3], 7));
    }

    #[test]
    fn generated_dataset_shape() {
        let spec = SyntheticSpec { p: 7, d: 2, m: 100, seed: 1 };
        let ds = generate_sine_samples(&spec).unwrap();
        assert_eq!(ds.m(), 100);
        assert_eq!(ds, generate_sine_samples(&spec).unwrap());
        let emp = ds.to_empirical().unwrap();
        assert!(emp.k() <= 49);
        assert!((emp.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(generate_sine_samples(&SyntheticSpec { m: 0, ..spec }).is_err());
    }

    #[test]
    fn default_grids() {
        let cfg = RiskConfig::default();
        assert_eq!(cfg.n_grid, vec![8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096]);
        assert_eq!(cfg.reps, 50);
        assert_eq!(cfg.dims, vec![1, 2, 3, 4, 5, 6]);
        let rt = RuntimeConfig::default();
        assert_eq!(rt.reps, 20);
        assert_eq!(rt.dequantized_dims, vec![1, 2, 4, 8, 16, 32, 64, 128]);
    }

    #[test]
    fn uniform_n_eff_saturates() {
        let cfg = RiskConfig {
            dims: vec![1],
            n_grid: vec![8, 2048],
            reps: 2,
            methods: vec![Method::Uniform],
            ..RiskConfig::default()
        };
        let rows = run_risk_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            assert!(r.n_eff <= 49 && r.n_eff <= r.n);
            assert!(r.risk.is_finite() && r.risk >= 0.0);
        }
        assert!(rows.iter().any(|r| r.n == 2048 && r.n_eff == 49));
    }

    #[test]
    fn risk_rows_do_not_depend_on_execution() {
        let cfg = RiskConfig {
            dims: vec![1, 2],
            n_grid: vec![8, 32],
            reps: 3,
            ..RiskConfig::default()
        };
        let seq = run_risk_experiment_with(&cfg, Execution::Sequential).unwrap();
        let par = run_risk_experiment_with(&cfg, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_risk_csv(&mut a, &seq).unwrap();
        write_risk_csv(&mut b, &par).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("method,delta_tv,P,D,M,N,rep,N_eff,risk,seed\nexact,,7,1,50,8,0,"));
    }

    #[test]
    fn exact_power_law_fit() {
        let rows: Vec<RuntimeResultRow> = [8usize, 16, 32, 64, 128]
            .iter()
            .map(|&d| RuntimeResultRow {
                method: "dequantized",
                p: 3,
                d,
                m: 50 * d,
                rep: 0,
                wall_seconds: 2e-6 * (d as f64).powi(3),
                timeout: false,
                seed: 0,
            })
            .collect();
        let fit = fit_scaling(&rows, RuntimeMethod::Dequantized, 1, 1000).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-9);
        assert_eq!(fit.points, 5);
        let flat: Vec<_> = rows.iter().map(|r| RuntimeResultRow { wall_seconds: 0.5, ..r.clone() }).collect();
        assert!(fit_scaling(&flat, RuntimeMethod::Dequantized, 1, 1000).unwrap().slope.abs() < 1e-12);
        assert!(fit_scaling(&rows, RuntimeMethod::Dequantized, 64, 1000).is_err());
    }

    #[test]
    fn exponential_fit_on_d_log_p() {
        let rows: Vec<RuntimeResultRow> = (1..=6)
            .map(|d| RuntimeResultRow {
                method: "naive",
                p: 3,
                d,
                m: 50 * d,
                rep: 0,
                wall_seconds: 1e-5 * 3f64.powf(2.85 * d as f64),
                timeout: d == 6,
                seed: 0,
            })
            .collect();
        let fit = fit_scaling(&rows, RuntimeMethod::Naive, 1, 10).unwrap();
        assert!((fit.slope - 2.85).abs() < 1e-9);
        assert_eq!(fit.points, 5);
    }

    #[test]
    fn small_runtime_experiment() {
        let cfg = RuntimeConfig {
            naive_dims: vec![1, 2, 3],
            dequantized_dims: vec![1, 2],
            reps: 2,
            ..RuntimeConfig::default()
        };
        let rows = run_runtime_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 10);
        assert!(rows.iter().all(|r| r.wall_seconds > 0.0 && !r.timeout));
        assert!(rows.iter().any(|r| r.method == "naive"));
        assert!(rows.iter().any(|r| r.method == "dequantized"));
    }

    #[test]
    fn oversized_dense_runs_are_skipped() {
        let cfg = RuntimeConfig {
            naive_dims: vec![1, 2],
            dequantized_dims: vec![],
            reps: 1,
            max_dense_bytes: 2_000,
            ..RuntimeConfig::default()
        };
        let rows = run_runtime_experiment(&cfg).unwrap();
        assert!(!rows[0].timeout);
        assert!(rows[1].timeout);
    }
}
