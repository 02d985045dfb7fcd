//! Sparse single-hidden-layer networks built from sampled nodes.
//!
//! Sampled nodes are deduplicated, then the output weights solve the
//! weighted ridge problem on the empirical support
//!
//! ```text
//! min_theta  sum_i p_i (Phi theta - f)_i^2 + lambda_eff |theta|^2
//! ```
//!
//! with `Phi[i, j] = P^(-D/2) g((a_j . x_i - b_j) mod P)`.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};

use crate::domain::{FiniteDomain, NodeIndex};
use crate::error::{Error, Result};
use crate::ridgelet::{scale, ActivationTable};
use crate::sampler::EmpiricalDistribution;

/// Raw sampled nodes and their distinct subset in first-occurrence order.
#[derive(Debug, Clone, Default)]
pub struct NodeSet {
    pub raw: Vec<NodeIndex>,
    pub unique: Vec<NodeIndex>,
}

impl NodeSet {
    pub fn n(&self) -> usize {
        self.raw.len()
    }

    pub fn n_eff(&self) -> usize {
        self.unique.len()
    }
}

pub fn dedup(raw: Vec<NodeIndex>) -> NodeSet {
    let mut seen = HashSet::with_capacity(raw.len());
    let unique = raw.iter().filter(|n| seen.insert(*n)).cloned().collect();
    NodeSet { raw, unique }
}

/// `K x N_eff` design matrix over the empirical support.
pub fn design_matrix(
    nodes: &[NodeIndex],
    emp: &EmpiricalDistribution,
    g: &ActivationTable,
) -> Result<DMatrix<f64>> {
    let dom = emp.domain();
    g.check_domain(dom)?;
    for n in nodes {
        dom.check_node(n)?;
    }
    let c = scale(dom);
    let p = dom.p();
    Ok(DMatrix::from_fn(emp.k(), nodes.len(), |i, j| {
        c * g.value(nodes[j].phase(emp.point(i), p))
    }))
}

#[derive(Debug, Clone)]
pub struct FittedModel {
    pub dom: FiniteDomain,
    pub nodes: Vec<NodeIndex>,
    pub theta: Vec<f64>,
    pub lambda_eff: f64,
}

impl FittedModel {
    pub fn empty(dom: &FiniteDomain, lambda_eff: f64) -> Self {
        Self {
            dom: *dom,
            nodes: Vec::new(),
            theta: Vec::new(),
            lambda_eff,
        }
    }

    pub fn n_eff(&self) -> usize {
        self.nodes.len()
    }

    pub fn predict(&self, x: &[u32], g: &ActivationTable) -> f64 {
        let p = self.dom.p();
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.theta)
            .map(|(n, t)| t * g.value(n.phase(x, p)))
            .sum();
        sum * scale(&self.dom)
    }

    /// Predictions at every support point of `emp`.
    pub fn predictions(&self, emp: &EmpiricalDistribution, g: &ActivationTable) -> Vec<f64> {
        (0..emp.k()).map(|i| self.predict(emp.point(i), g)).collect()
    }

    /// The regularized ridge objective at the stored weights.
    pub fn objective(&self, emp: &EmpiricalDistribution, g: &ActivationTable) -> f64 {
        ridge_objective(self, &self.theta, emp, g)
    }

    /// `||(Phi^T P Phi + lambda I) theta - Phi^T P f||_2`.
    pub fn normal_equation_residual(&self, emp: &EmpiricalDistribution, g: &ActivationTable) -> Result<f64> {
        if self.nodes.is_empty() {
            return Ok(0.0);
        }
        let phi = design_matrix(&self.nodes, emp, g)?;
        let w = DVector::from_column_slice(emp.probs());
        let f = DVector::from_column_slice(emp.labels());
        let theta = DVector::from_column_slice(&self.theta);
        let weighted_resid = (&phi * &theta - &f).component_mul(&w);
        let grad = phi.tr_mul(&weighted_resid) + theta * self.lambda_eff;
        Ok(grad.norm())
    }
}

/// Objective value for arbitrary weights on the model's node set.
pub fn ridge_objective(
    model: &FittedModel,
    theta: &[f64],
    emp: &EmpiricalDistribution,
    g: &ActivationTable,
) -> f64 {
    let probe = FittedModel {
        theta: theta.to_vec(),
        ..model.clone()
    };
    let preds = probe.predictions(emp, g);
    let loss: f64 = preds
        .iter()
        .zip(emp.labels())
        .zip(emp.probs())
        .map(|((y_hat, y), p)| p * (y_hat - y) * (y_hat - y))
        .sum();
    loss + model.lambda_eff * theta.iter().map(|t| t * t).sum::<f64>()
}

/// Weighted ridge fit of output weights on the deduplicated nodes.
///
/// Solves the `N_eff x N_eff` normal equations, or the equivalent `K x K`
/// dual system when there are more nodes than support points.
pub fn ridge_fit(
    nodes: &NodeSet,
    emp: &EmpiricalDistribution,
    g: &ActivationTable,
    lambda_eff: f64,
) -> Result<FittedModel> {
    if !(lambda_eff > 0.0 && lambda_eff.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda_eff must be positive (got {lambda_eff})"
        )));
    }
    let dom = emp.domain();
    if nodes.unique.is_empty() {
        return Ok(FittedModel::empty(dom, lambda_eff));
    }
    let phi = design_matrix(&nodes.unique, emp, g)?;
    let root_p = DVector::from_iterator(emp.k(), emp.probs().iter().map(|p| p.sqrt()));
    // B = P^(1/2) Phi, y = P^(1/2) f.
    let mut b = phi;
    for (mut row, &w) in b.row_iter_mut().zip(root_p.iter()) {
        row *= w;
    }
    let y = DVector::from_iterator(
        emp.k(),
        emp.labels().iter().zip(root_p.iter()).map(|(f, w)| f * w),
    );
    let theta = if b.ncols() <= b.nrows() {
        let mut gram = b.tr_mul(&b);
        add_diagonal(&mut gram, lambda_eff);
        let rhs = b.tr_mul(&y);
        gram.cholesky().ok_or(Error::Factorization)?.solve(&rhs)
    } else {
        // theta = B^T (B B^T + lambda I)^(-1) y
        let mut gram = &b * b.transpose();
        add_diagonal(&mut gram, lambda_eff);
        let alpha = gram.cholesky().ok_or(Error::Factorization)?.solve(&y);
        b.tr_mul(&alpha)
    };
    Ok(FittedModel {
        dom: *dom,
        nodes: nodes.unique.clone(),
        theta: theta.iter().copied().collect(),
        lambda_eff,
    })
}

fn add_diagonal(m: &mut DMatrix<f64>, v: f64) {
    for i in 0..m.nrows() {
        m[(i, i)] += v;
    }
}

/// `sum_i p_i (prediction_i - f_i)^2` over the empirical support.
pub fn empirical_risk(model: &FittedModel, emp: &EmpiricalDistribution, g: &ActivationTable) -> f64 {
    model
        .predictions(emp, g)
        .iter()
        .zip(emp.labels())
        .zip(emp.probs())
        .map(|((y_hat, y), p)| p * (y_hat - y) * (y_hat - y))
        .sum()
}
