//! Exact references for the optimized distribution.
//!
//! [`enumerate_exact`] evaluates `s(a, b)` at every node through the reduced
//! support-sum formula. [`naive_dense_solve`] goes the long way: it builds
//! the ridgelet matrix, forms `R P R^T + lambda_eff I` over the whole node
//! space and factors it, which is the exponential-cost baseline.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::domain::{dot_mod, sub_mod, FiniteDomain, NodeIndex};
use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::ridgelet::{scale, ActivationTable, DenseRidgelet};
use crate::sampler::{EmpiricalDistribution, PhiVector, SamplerConfig, Smoothing};

#[derive(Debug, Clone)]
pub struct ExactDistribution {
    dom: FiniteDomain,
    s_table: Vec<f64>,
    z: f64,
    p_star: Vec<f64>,
    cumulative: Vec<f64>,
    delta_smooth: f64,
}

impl ExactDistribution {
    /// `p*(n) = s(n)/(s(n) + delta) / Z` from a full weight table indexed by
    /// flat node index.
    pub fn from_weights(dom: &FiniteDomain, s_table: Vec<f64>, delta_smooth: f64) -> Result<Self> {
        let nodes = dom.enumerable_nodes()?;
        if s_table.len() != nodes {
            return Err(Error::DimensionMismatch {
                expected: nodes,
                got: s_table.len(),
            });
        }
        if !(delta_smooth > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "smoothing delta must be positive (got {delta_smooth})"
            )));
        }
        let unnormalized: Vec<f64> = s_table.iter().map(|&s| s / (s + delta_smooth)).collect();
        let z: f64 = unnormalized.iter().sum();
        if !(z > 0.0) {
            return Err(Error::DegenerateTarget);
        }
        let p_star: Vec<f64> = unnormalized.iter().map(|u| u / z).collect();
        let mut acc = 0.0;
        let cumulative = p_star
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self {
            dom: *dom,
            s_table,
            z,
            p_star,
            cumulative,
            delta_smooth,
        })
    }

    pub fn domain(&self) -> &FiniteDomain {
        &self.dom
    }

    pub fn s_table(&self) -> &[f64] {
        &self.s_table
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn p_star(&self) -> &[f64] {
        &self.p_star
    }

    pub fn delta_smooth(&self) -> f64 {
        self.delta_smooth
    }

    /// Flat node index drawn by inverse CDF.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty table");
        let u = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        if i < self.p_star.len() {
            return i;
        }
        // u landed on the last cumulative value through round-off.
        self.p_star
            .iter()
            .rposition(|&p| p > 0.0)
            .expect("Z > 0 guarantees a positive entry")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> NodeIndex {
        let i = self.sample_index(rng);
        self.dom.decode_node(i as u64).expect("index within node space")
    }
}

fn resolve_smoothing(cfg: &SamplerConfig, gamma: f64) -> f64 {
    match cfg.delta_smooth {
        Smoothing::Auto => gamma,
        Smoothing::Fixed(d) => d,
    }
}

/// Weight table `s(a, b)` over all nodes via the support-sum formula.
pub fn enumerate_weights(
    emp: &EmpiricalDistribution,
    g: &ActivationTable,
    lambda_eff: f64,
    exec: Execution,
) -> Result<(Vec<f64>, f64)> {
    let dom = *emp.domain();
    g.check_domain(&dom)?;
    dom.enumerable_nodes()?;
    let n_a = dom.point_count() as usize;
    let p = dom.p();
    let phi = PhiVector::new(emp, lambda_eff);
    let c = scale(&dom);
    let entries = phi.entries();
    let blocks = map_indexed(n_a, exec, |ai| {
        let a = dom.decode_point(ai as u64).expect("a within range");
        let dots: Vec<u32> = (0..emp.k())
            .map(|i| dot_mod(a.coords(), emp.point(i), p))
            .collect();
        (0..p)
            .map(|b| {
                let sum: f64 = dots
                    .iter()
                    .zip(entries)
                    .map(|(&v, &phi)| g.value(sub_mod(v, b, p)) * phi)
                    .sum();
                let w = c * sum;
                w * w
            })
            .collect::<Vec<f64>>()
    });
    Ok((blocks.concat(), phi.gamma()))
}

/// Dense `p*` by full enumeration.
pub fn enumerate_exact(
    emp: &EmpiricalDistribution,
    g: &ActivationTable,
    cfg: &SamplerConfig,
) -> Result<ExactDistribution> {
    enumerate_exact_with(emp, g, cfg, Execution::default())
}

pub fn enumerate_exact_with(
    emp: &EmpiricalDistribution,
    g: &ActivationTable,
    cfg: &SamplerConfig,
    exec: Execution,
) -> Result<ExactDistribution> {
    cfg.validate()?;
    let (s_table, gamma) = enumerate_weights(emp, g, cfg.lambda_eff, exec)?;
    if !(gamma > 0.0) {
        return Err(Error::DegenerateTarget);
    }
    ExactDistribution::from_weights(emp.domain(), s_table, resolve_smoothing(cfg, gamma))
}

/// The dense regularized system and its solution.
#[derive(Debug, Clone)]
pub struct DenseModel {
    pub ridgelet: DenseRidgelet,
    /// `R P R^T + lambda_eff I`.
    pub system: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub w_star: DVector<f64>,
    /// `P f` as a dense vector over `Z_P^D`.
    pub psi_in: Vec<f64>,
}

impl DenseModel {
    /// `s(a, b) = |P^(-D/2) w*(a, b)|^2` for every node.
    pub fn weights(&self) -> Vec<f64> {
        let c = scale(self.ridgelet.domain());
        self.w_star.iter().map(|w| (c * w) * (c * w)).collect()
    }

    /// `||A w* - R P f||_2`.
    pub fn residual(&self) -> f64 {
        (&self.system * &self.w_star - &self.rhs).norm()
    }
}

struct Assembled {
    ridgelet: DenseRidgelet,
    system: DMatrix<f64>,
    rhs: DVector<f64>,
    psi_in: Vec<f64>,
}

fn assemble(emp: &EmpiricalDistribution, g: &ActivationTable, cfg: &SamplerConfig) -> Result<Assembled> {
    cfg.validate()?;
    let dom = *emp.domain();
    let ridgelet = DenseRidgelet::new(&dom, g)?;
    let n_points = dom.enumerable_points()?;
    let mut psi_in = vec![0.0; n_points];
    let mut support_cols = Vec::with_capacity(emp.k());
    for (i, x) in emp.support().iter().enumerate() {
        let j = dom.encode_point(x)? as usize;
        psi_in[j] = emp.probs()[i] * emp.labels()[i];
        support_cols.push(j);
    }
    let r = ridgelet.matrix();
    // R diag(p) R^T; columns outside the support carry zero weight.
    let root_probs: Vec<f64> = emp.probs().iter().map(|p| p.sqrt()).collect();
    let weighted = DMatrix::from_fn(r.nrows(), support_cols.len(), |i, k| {
        r[(i, support_cols[k])] * root_probs[k]
    });
    let mut system = &weighted * weighted.transpose();
    for i in 0..system.nrows() {
        system[(i, i)] += cfg.lambda_eff;
    }
    let rhs = r * DVector::from_column_slice(&psi_in);
    Ok(Assembled {
        ridgelet,
        system,
        rhs,
        psi_in,
    })
}

/// Builds `R`, forms `A = R P R^T + lambda_eff I` and solves `A w = R P f` by
/// Cholesky factorization.
pub fn naive_dense_solve(
    emp: &EmpiricalDistribution,
    g: &ActivationTable,
    cfg: &SamplerConfig,
) -> Result<DenseModel> {
    let Assembled {
        ridgelet,
        system,
        rhs,
        psi_in,
    } = assemble(emp, g, cfg)?;
    let w_star = system
        .clone()
        .cholesky()
        .ok_or(Error::Factorization)?
        .solve(&rhs);
    Ok(DenseModel {
        ridgelet,
        system,
        rhs,
        w_star,
        psi_in,
    })
}

/// The naive baseline sampler end to end: dense solve, weight table over all
/// nodes, normalization, one inverse-CDF draw.
pub fn naive_sample<R: Rng + ?Sized>(
    emp: &EmpiricalDistribution,
    g: &ActivationTable,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<NodeIndex> {
    let asm = assemble(emp, g, cfg)?;
    // The system is factored in place; nothing else needs it.
    let w_star = asm.system.cholesky().ok_or(Error::Factorization)?.solve(&asm.rhs);
    let c = scale(emp.domain());
    let weights = w_star.iter().map(|w| (c * w) * (c * w)).collect();
    let gamma = PhiVector::new(emp, cfg.lambda_eff).gamma();
    let dist = ExactDistribution::from_weights(emp.domain(), weights, resolve_smoothing(cfg, gamma))?;
    Ok(dist.sample(rng))
}

/// Largest entrywise gap between the dense solution `w*` and `R` applied to
/// the diagonally reweighted vector `(P + lambda_eff I)^(-1) P f`.
pub fn inverse_decomposition_residual(
    emp: &EmpiricalDistribution,
    g: &ActivationTable,
    cfg: &SamplerConfig,
) -> Result<f64> {
    let model = naive_dense_solve(emp, g, cfg)?;
    let dom = *emp.domain();
    let mut reweighted = vec![0.0; dom.enumerable_points()?];
    for (i, x) in emp.support().iter().enumerate() {
        let p = emp.probs()[i];
        reweighted[dom.encode_point(x)? as usize] = p * emp.labels()[i] / (p + cfg.lambda_eff);
    }
    let reduced = model.ridgelet.apply(&reweighted)?;
    Ok(model
        .w_star
        .iter()
        .zip(reduced.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
