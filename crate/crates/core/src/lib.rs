//! Classical sampling of hidden nodes for sparse discrete ridgelet networks.
//!
//! The crate covers the whole pipeline on the prime field `Z_P`:
//!
//! - [`domain`]: residue arithmetic and node indexing,
//! - [`ridgelet`]: activation tables and the discrete ridgelet transform,
//! - [`sq_tree`]: sampling-and-query access to a vector,
//! - [`sampler`]: the rejection sampler for the optimized node distribution,
//! - [`oracle`]: exact enumeration and the dense-solve baseline,
//! - [`subnetwork`]: dedup, ridge fit and empirical risk,
//! - [`experiments`]: synthetic data and the risk/runtime drivers,
//! - [`cli`]: the `ridgelet` command-line front end.

pub mod cli;
pub mod dataset;
pub mod domain;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod oracle;
pub mod ridgelet;
pub mod sampler;
pub mod seed;
pub mod sq_tree;
pub mod subnetwork;

pub use domain::{FiniteDomain, NodeIndex, Point};
pub use error::{Error, Result};
pub use oracle::{enumerate_exact, naive_dense_solve, ExactDistribution};
pub use ridgelet::{ActivationTable, DomainFunction};
pub use sampler::{EmpiricalDistribution, SampleOutcome, SamplerConfig, SamplerState, Smoothing};
pub use subnetwork::{dedup, empirical_risk, ridge_fit, FittedModel, NodeSet};
