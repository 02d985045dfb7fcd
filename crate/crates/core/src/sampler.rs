//! Rejection sampler for the optimized hidden-node distribution
//! `p*(a, b) = s(a, b) / (s(a, b) + delta) / Z`.
//!
//! The regularized coefficients are never formed as a dense vector. They
//! equal the ridgelet transform of the data-supported vector
//! `phi(x) = P^(-D/2) p(x) f(x) / (lambda_eff + p(x))`, so every weight
//! `s(a, b)` is a sum over the `K` support points. Proposals come from
//!
//! ```text
//! q(a, b) = (1/gamma) sum_x phi(x)^2 P^(-D) r((a.x - b) mod P)^2
//! ```
//!
//! drawn as `x ~ phi^2`, `a` uniform, `t ~ r^2`, `b = a.x - t`, and are
//! accepted with probability `delta/(delta + s) * s/(K gamma q)`, which
//! Cauchy-Schwarz keeps at or below one. After `I` rejections the sampler
//! falls back to a uniform node, which bounds the total variation distance
//! to `p*` by the configured `delta_tv`.

use std::collections::HashMap;

use rand::Rng;

use crate::domain::{dot_mod, sub_mod, FiniteDomain, NodeIndex, Point};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::ridgelet::ActivationTable;
use crate::seed::stream_rng;
use crate::sq_tree::SqTree;

/// Aggregated training data: distinct support points with their empirical
/// probabilities and labels.
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    dom: FiniteDomain,
    // K x D residues, row-major.
    points: Vec<u32>,
    probs: Vec<f64>,
    labels: Vec<f64>,
    m: usize,
}

impl EmpiricalDistribution {
    /// Aggregates `M` labelled samples. Support order is first occurrence.
    /// A point seen twice must carry the same label.
    pub fn from_samples(dom: &FiniteDomain, xs: &[Point], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch {
                expected: xs.len(),
                got: ys.len(),
            });
        }
        if xs.is_empty() {
            return Err(Error::Empty);
        }
        let mut slot: HashMap<&Point, usize> = HashMap::with_capacity(xs.len());
        let mut points = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        let mut labels = Vec::new();
        for (x, &y) in xs.iter().zip(ys) {
            dom.check_point(x)?;
            if !y.is_finite() {
                return Err(Error::InvalidParameter(format!("non-finite label {y}")));
            }
            match slot.get(x) {
                Some(&i) => {
                    if labels[i] != y {
                        return Err(Error::InvalidParameter(format!(
                            "point {:?} has conflicting labels {} and {}",
                            x.coords(),
                            labels[i],
                            y
                        )));
                    }
                    counts[i] += 1;
                }
                None => {
                    slot.insert(x, counts.len());
                    points.extend_from_slice(x.coords());
                    counts.push(1);
                    labels.push(y);
                }
            }
        }
        let m = xs.len();
        let probs = counts.iter().map(|&c| c as f64 / m as f64).collect();
        Ok(Self {
            dom: *dom,
            points,
            probs,
            labels,
            m,
        })
    }

    pub fn domain(&self) -> &FiniteDomain {
        &self.dom
    }

    /// Number of distinct support points.
    pub fn k(&self) -> usize {
        self.probs.len()
    }

    /// Number of raw samples.
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[u32] {
        let d = self.dom.d();
        &self.points[i * d..(i + 1) * d]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn support(&self) -> Vec<Point> {
        (0..self.k()).map(|i| Point(self.point(i).to_vec())).collect()
    }
}

/// Smoothing parameter `delta` of the optimized distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothing {
    /// `delta = gamma`, resolved once `gamma` is known.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    /// `lambda * P^(-D)`.
    pub lambda_eff: f64,
    pub delta_smooth: Smoothing,
    /// Target total variation distance, in `(0, 1)`.
    pub delta_tv: f64,
}

impl SamplerConfig {
    pub fn new(lambda_eff: f64, delta_smooth: Smoothing, delta_tv: f64) -> Self {
        Self {
            lambda_eff,
            delta_smooth,
            delta_tv,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_eff > 0.0 && self.lambda_eff.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda_eff must be positive (got {})",
                self.lambda_eff
            )));
        }
        if let Smoothing::Fixed(d) = self.delta_smooth {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "smoothing delta must be positive (got {d})"
                )));
            }
        }
        if !(self.delta_tv > 0.0 && self.delta_tv < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta_tv must lie in (0, 1) (got {})",
                self.delta_tv
            )));
        }
        Ok(())
    }
}

/// The data-supported vector `phi` and its squared norm `gamma`.
#[derive(Debug, Clone)]
pub struct PhiVector {
    /// `p(x) f(x) / (lambda_eff + p(x))`, i.e. `phi` without `P^(-D/2)`.
    unscaled: Vec<f64>,
    entries: Vec<f64>,
    gamma: f64,
    unscaled_gamma: f64,
    lambda_eff: f64,
}

impl PhiVector {
    pub fn new(emp: &EmpiricalDistribution, lambda_eff: f64) -> Self {
        let dom = emp.domain();
        let c = crate::ridgelet::scale(dom);
        let unscaled: Vec<f64> = emp
            .probs()
            .iter()
            .zip(emp.labels())
            .map(|(&p, &f)| p * f / (lambda_eff + p))
            .collect();
        let entries: Vec<f64> = unscaled.iter().map(|v| v * c).collect();
        let gamma = entries.iter().map(|v| v * v).sum();
        let unscaled_gamma = unscaled.iter().map(|v| v * v).sum();
        Self {
            unscaled,
            entries,
            gamma,
            unscaled_gamma,
            lambda_eff,
        }
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda_eff(&self) -> f64 {
        self.lambda_eff
    }
}

/// Result of one call to [`SamplerState::sample_node`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleOutcome {
    pub node: NodeIndex,
    /// `false` when every iteration rejected and the uniform fallback fired.
    pub accepted: bool,
    pub iterations_used: u64,
}

/// One proposal together with its acceptance decision.
#[derive(Debug, Clone)]
pub struct Trial {
    pub node: NodeIndex,
    pub ratio: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct SamplerState {
    emp: EmpiricalDistribution,
    g: ActivationTable,
    phi: PhiVector,
    tree: SqTree,
    delta_smooth: f64,
    // delta / gamma; the ratio form keeps P^(-D) out of the hot path.
    smoothing_ratio: f64,
    // P^(-D); may underflow to zero for very large domains, which is harmless
    // since it only scales s/gamma <= 1.
    inv_points: f64,
    delta_tv: f64,
    iterations: u64,
}

impl SamplerState {
    /// Preprocessing: `phi`, `gamma`, the sampling tree and the iteration budget
    /// `I = ceil(K (1 + gamma/delta) ln(1/delta_tv))`.
    pub fn build(emp: &EmpiricalDistribution, g: &ActivationTable, cfg: &SamplerConfig) -> Result<Self> {
        cfg.validate()?;
        let dom = *emp.domain();
        g.check_domain(&dom)?;
        let phi = PhiVector::new(emp, cfg.lambda_eff);
        if !(phi.unscaled_gamma > 0.0) || !(phi.gamma > 0.0) {
            return Err(Error::DegenerateTarget);
        }
        let tree = SqTree::build(phi.entries.clone())?;
        let (delta_smooth, smoothing_ratio) = match cfg.delta_smooth {
            Smoothing::Auto => (phi.gamma, 1.0),
            Smoothing::Fixed(d) => (d, d / phi.gamma),
        };
        let k = emp.k() as f64;
        let budget = (k * (1.0 + 1.0 / smoothing_ratio) * (1.0 / cfg.delta_tv).ln()).ceil();
        let iterations = if budget.is_finite() { (budget as u64).max(1) } else { u64::MAX };
        Ok(Self {
            emp: emp.clone(),
            g: g.clone(),
            phi,
            tree,
            delta_smooth,
            smoothing_ratio,
            inv_points: (-(dom.d() as f64) * (dom.p() as f64).ln()).exp(),
            delta_tv: cfg.delta_tv,
            iterations,
        })
    }

    pub fn domain(&self) -> &FiniteDomain {
        self.emp.domain()
    }

    pub fn empirical(&self) -> &EmpiricalDistribution {
        &self.emp
    }

    pub fn activation(&self) -> &ActivationTable {
        &self.g
    }

    pub fn phi(&self) -> &PhiVector {
        &self.phi
    }

    pub fn tree(&self) -> &SqTree {
        &self.tree
    }

    pub fn gamma(&self) -> f64 {
        self.phi.gamma
    }

    pub fn delta_smooth(&self) -> f64 {
        self.delta_smooth
    }

    pub fn delta_tv(&self) -> f64 {
        self.delta_tv
    }

    pub fn iteration_budget(&self) -> u64 {
        self.iterations
    }

    /// `(sum_x r(.) phi~(x))^2` and `sum_x phi~(x)^2 r(.)^2` over the support,
    /// where `phi~` is `phi` without its `P^(-D/2)` factor.
    #[inline]
    fn support_sums(&self, node: &NodeIndex) -> (f64, f64) {
        let p = self.domain().p();
        let a = node.a.coords();
        let mut corr = 0.0;
        let mut spread = 0.0;
        for (i, &psi) in self.phi.unscaled.iter().enumerate() {
            let r = self.g.value(sub_mod(dot_mod(a, self.emp.point(i), p), node.b, p));
            let term = r * psi;
            corr += term;
            spread += term * term;
        }
        (corr * corr, spread)
    }

    /// `s(a, b) = |P^(-D/2) w*(a, b)|^2`.
    pub fn weight_s(&self, node: &NodeIndex) -> f64 {
        let (corr_sq, _) = self.support_sums(node);
        corr_sq * self.inv_points * self.inv_points
    }

    /// `s(a, b) / gamma`, computed without forming `P^(-2D)`.
    pub fn relative_weight(&self, node: &NodeIndex) -> f64 {
        let (corr_sq, _) = self.support_sums(node);
        self.inv_points * corr_sq / self.phi.unscaled_gamma
    }

    /// `q(a, b)`, the proposal probability.
    pub fn proposal_probability(&self, node: &NodeIndex) -> f64 {
        let (_, spread) = self.support_sums(node);
        spread * self.inv_points * self.inv_points / self.phi.gamma
    }

    pub fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> NodeIndex {
        let dom = self.domain();
        let p = dom.p();
        let i = self
            .tree
            .sample_index(rng)
            .expect("state construction guarantees gamma > 0");
        let a: Vec<u32> = (0..dom.d()).map(|_| rng.random_range(0..p)).collect();
        let t = self.g.sample_phase(rng);
        let b = sub_mod(dot_mod(&a, self.emp.point(i), p), t, p);
        NodeIndex { a: Point(a), b }
    }

    /// `delta/(delta + s) * s/(K gamma q)` for a given `q = q(node)`.
    pub fn acceptance_ratio(&self, node: &NodeIndex, q_val: f64) -> Result<f64> {
        if !(q_val > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "proposal probability must be positive (got {q_val})"
            )));
        }
        let s = self.weight_s(node);
        let k = self.emp.k() as f64;
        Ok(self.delta_smooth / (self.delta_smooth + s) * (s / (k * self.phi.gamma * q_val)))
    }

    /// The acceptance ratio in cancelled form:
    /// `rho/(rho + s/gamma) * corr^2 / (K spread)` with `rho = delta/gamma`.
    fn ratio_for(&self, node: &NodeIndex) -> f64 {
        let (corr_sq, spread) = self.support_sums(node);
        if spread <= 0.0 {
            return 0.0;
        }
        let k = self.emp.k() as f64;
        let s_rel = self.inv_points * corr_sq / self.phi.unscaled_gamma;
        let rho = self.smoothing_ratio;
        rho / (rho + s_rel) * (corr_sq / (k * spread))
    }

    /// One propose/accept round.
    pub fn trial<R: Rng + ?Sized>(&self, rng: &mut R) -> Trial {
        let node = self.propose(rng);
        let ratio = self.ratio_for(&node);
        debug_assert!(ratio <= 1.0 + 1e-12, "acceptance ratio {ratio} exceeds one");
        let u: f64 = rng.random();
        Trial {
            node,
            ratio,
            accepted: u < ratio,
        }
    }

    pub fn sample_node<R: Rng + ?Sized>(&self, rng: &mut R) -> SampleOutcome {
        for used in 1..=self.iterations {
            let t = self.trial(rng);
            if t.accepted {
                return SampleOutcome {
                    node: t.node,
                    accepted: true,
                    iterations_used: used,
                };
            }
        }
        SampleOutcome {
            node: uniform_node(self.domain(), rng),
            accepted: false,
            iterations_used: self.iterations,
        }
    }

    /// `n` independent samples; sample `i` uses stream `i` under `seed`, so
    /// the batch is the same whatever the thread count.
    pub fn sample_batch(&self, n: usize, seed: u64) -> Result<Vec<SampleOutcome>> {
        self.sample_batch_with(n, seed, Execution::default())
    }

    pub fn sample_batch_with(&self, n: usize, seed: u64, exec: Execution) -> Result<Vec<SampleOutcome>> {
        if n == 0 {
            return Err(Error::InvalidParameter("batch size must be at least 1".into()));
        }
        Ok(map_indexed(n, exec, |i| {
            let mut rng = stream_rng(seed, i as u64);
            self.sample_node(&mut rng)
        }))
    }
}

/// A node drawn uniformly from `Z_P^D x Z_P`.
pub fn uniform_node<R: Rng + ?Sized>(dom: &FiniteDomain, rng: &mut R) -> NodeIndex {
    let p = dom.p();
    let a: Vec<u32> = (0..dom.d()).map(|_| rng.random_range(0..p)).collect();
    NodeIndex {
        a: Point(a),
        b: rng.random_range(0..p),
    }
}
