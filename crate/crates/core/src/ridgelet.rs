//! Discrete ridgelet transform over `Z_P^D`.
//!
//! The activation table `g` doubles as the ridgelet function `r`, so the
//! admissibility constant is one and `S[R[f]] = f` holds exactly.
//!
//! ```text
//! R[f](a, b) = P^(-D/2) sum_x f(x) r((a.x - b) mod P)
//! S[w](x)    = P^(-D/2) sum_{a,b} w(a, b) g((a.x - b) mod P)
//! ```

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;

use crate::domain::{FiniteDomain, NodeIndex, Point};
use crate::error::{Error, Result};

const TABLE_TOL: f64 = 1e-12;

/// A centered, unit-norm table `g: Z_P -> R`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationTable {
    values: Vec<f64>,
    // Cumulative sums of g(t)^2, used to draw t with probability g(t)^2.
    cumulative_sq: Vec<f64>,
}

impl ActivationTable {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidActivation("table needs at least two entries".into()));
        }
        let sum: f64 = values.iter().sum();
        let sum_sq: f64 = values.iter().map(|v| v * v).sum();
        if sum.abs() > TABLE_TOL {
            return Err(Error::InvalidActivation(format!("not centered (sum = {sum:e})")));
        }
        if (sum_sq - 1.0).abs() > TABLE_TOL {
            return Err(Error::InvalidActivation(format!(
                "not unit norm (sum of squares = {sum_sq})"
            )));
        }
        let mut acc = 0.0;
        let cumulative_sq = values
            .iter()
            .map(|v| {
                acc += v * v;
                acc
            })
            .collect();
        Ok(Self {
            values,
            cumulative_sq,
        })
    }

    /// Centered and normalized discrete ReLU: `x` on `0..=(P-1)/2`, zero
    /// above, then mean-subtracted and scaled to unit Euclidean norm.
    pub fn relu(p: u32) -> Result<Self> {
        if p < 3 {
            return Err(Error::InvalidActivation(format!(
                "ReLU table needs P >= 3 (got {p})"
            )));
        }
        let half = (p - 1) / 2;
        let raw: Vec<f64> = (0..p).map(|x| if x <= half { x as f64 } else { 0.0 }).collect();
        let mean = raw.iter().sum::<f64>() / p as f64;
        let centered: Vec<f64> = raw.iter().map(|v| v - mean).collect();
        let norm = centered.iter().map(|v| v * v).sum::<f64>().sqrt();
        Self::from_values(centered.into_iter().map(|v| v / norm).collect())
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.values.len() as u32
    }

    #[inline]
    pub fn value(&self, t: u32) -> f64 {
        self.values[t as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Draws `t` with probability `g(t)^2`.
    pub fn sample_phase<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let total = *self.cumulative_sq.last().expect("non-empty table");
        let u = rng.random::<f64>() * total;
        let i = self.cumulative_sq.partition_point(|&c| c <= u);
        // Round-off can push u past the last cumulative value.
        let mut i = i.min(self.values.len() - 1);
        while self.values[i] == 0.0 && i > 0 {
            i -= 1;
        }
        i as u32
    }

    pub(crate) fn check_domain(&self, dom: &FiniteDomain) -> Result<()> {
        if self.modulus() != dom.p() {
            return Err(Error::InvalidParameter(format!(
                "activation table has {} entries but P = {}",
                self.modulus(),
                dom.p()
            )));
        }
        Ok(())
    }
}

/// A real function on `Z_P^D`, stored densely (length `P^D`, row-major) or
/// as a list of distinct support points.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainFunction {
    Dense(Vec<f64>),
    Sparse { points: Vec<Point>, values: Vec<f64> },
}

impl DomainFunction {
    pub fn dense(values: Vec<f64>, dom: &FiniteDomain) -> Result<Self> {
        let len = dom.enumerable_points()?;
        if values.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: values.len(),
            });
        }
        Ok(Self::Dense(values))
    }

    pub fn sparse(points: Vec<Point>, values: Vec<f64>, dom: &FiniteDomain) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: values.len(),
            });
        }
        let mut seen = std::collections::HashSet::with_capacity(points.len());
        for x in &points {
            dom.check_point(x)?;
            if !seen.insert(x) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate support point {:?}",
                    x.coords()
                )));
            }
        }
        Ok(Self::Sparse { points, values })
    }

    pub fn to_dense(&self, dom: &FiniteDomain) -> Result<Vec<f64>> {
        match self {
            Self::Dense(v) => Ok(v.clone()),
            Self::Sparse { points, values } => {
                let mut out = vec![0.0; dom.enumerable_points()?];
                for (x, &v) in points.iter().zip(values) {
                    out[dom.encode_point(x)? as usize] = v;
                }
                Ok(out)
            }
        }
    }

    /// Nonzero-capable entries as `(point, value)` pairs.
    pub fn support(&self, dom: &FiniteDomain) -> Result<Vec<(Point, f64)>> {
        match self {
            Self::Sparse { points, values } => {
                Ok(points.iter().cloned().zip(values.iter().copied()).collect())
            }
            Self::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &val)| val != 0.0)
                .map(|(i, &val)| Ok((dom.decode_point(i as u64)?, val)))
                .collect(),
        }
    }
}

/// `R[f](a, b)`, summed over the support of `f` only.
pub fn ridgelet_coefficient(
    f: &DomainFunction,
    node: &NodeIndex,
    g: &ActivationTable,
    dom: &FiniteDomain,
) -> Result<f64> {
    g.check_domain(dom)?;
    dom.check_node(node)?;
    let p = dom.p();
    let sum: f64 = f
        .support(dom)?
        .iter()
        .map(|(x, v)| v * g.value(node.phase(x.coords(), p)))
        .sum();
    Ok(sum * scale(dom))
}

/// `P^(-D/2)`.
#[inline]
pub fn scale(dom: &FiniteDomain) -> f64 {
    (-(dom.d() as f64) * 0.5 * (dom.p() as f64).ln()).exp()
}

/// The ridgelet transform materialized as a `P^(D+1) x P^D` matrix.
#[derive(Debug, Clone)]
pub struct DenseRidgelet {
    dom: FiniteDomain,
    matrix: DMatrix<f64>,
}

impl DenseRidgelet {
    pub fn new(dom: &FiniteDomain, g: &ActivationTable) -> Result<Self> {
        g.check_domain(dom)?;
        let rows = dom.enumerable_nodes()?;
        let cols = dom.enumerable_points()?;
        let points: Vec<Point> = (0..cols as u64)
            .map(|i| dom.decode_point(i))
            .collect::<Result<_>>()?;
        let c = scale(dom);
        let p = dom.p();
        let mut matrix = DMatrix::zeros(rows, cols);
        for (j, x) in points.iter().enumerate() {
            let mut column = matrix.column_mut(j);
            for (ai, a) in points.iter().enumerate() {
                let v = crate::domain::dot_mod(a.coords(), x.coords(), p);
                for b in 0..p {
                    column[ai * p as usize + b as usize] =
                        c * g.value(crate::domain::sub_mod(v, b, p));
                }
            }
        }
        Ok(Self { dom: *dom, matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn domain(&self) -> &FiniteDomain {
        &self.dom
    }

    /// Exact `R f` for a dense `f`.
    pub fn apply(&self, f: &[f64]) -> Result<DVector<f64>> {
        if f.len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                got: f.len(),
            });
        }
        Ok(&self.matrix * DVector::from_column_slice(f))
    }

    /// `R^T w`.
    pub fn apply_transpose(&self, w: &DVector<f64>) -> Result<DVector<f64>> {
        if w.len() != self.matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.nrows(),
                got: w.len(),
            });
        }
        Ok(self.matrix.tr_mul(w))
    }

    /// `max |R^T R - I|`.
    pub fn isometry_defect(&self) -> f64 {
        let gram = self.matrix.tr_mul(&self.matrix);
        let n = gram.nrows();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }
}

/// `S[w](x)` for a dense coefficient vector indexed by flat node index.
pub fn reconstruct(w: &[f64], g: &ActivationTable, dom: &FiniteDomain, x: &Point) -> Result<f64> {
    g.check_domain(dom)?;
    dom.check_point(x)?;
    let nodes = dom.enumerable_nodes()?;
    if w.len() != nodes {
        return Err(Error::DimensionMismatch {
            expected: nodes,
            got: w.len(),
        });
    }
    let p = dom.p() as usize;
    let mut sum = 0.0;
    for (ai, block) in w.chunks(p).enumerate() {
        let a = dom.decode_point(ai as u64)?;
        let v = crate::domain::dot_mod(a.coords(), x.coords(), dom.p());
        for (b, &wb) in block.iter().enumerate() {
            sum += wb * g.value(crate::domain::sub_mod(v, b as u32, dom.p()));
        }
    }
    Ok(sum * scale(dom))
}

/// `S[w](x)` for a sparse list of weighted nodes.
pub fn reconstruct_sparse(
    nodes: &[(NodeIndex, f64)],
    g: &ActivationTable,
    dom: &FiniteDomain,
    x: &Point,
) -> Result<f64> {
    g.check_domain(dom)?;
    dom.check_point(x)?;
    let mut sum = 0.0;
    for (n, w) in nodes {
        dom.check_node(n)?;
        sum += w * g.value(n.phase(x.coords(), dom.p()));
    }
    Ok(sum * scale(dom))
}

/// Maximum residual of the slice identity
/// `F_1[R[f](a, .)](v) = F_D[f](v a mod P) * conj(F_1[r](v))`
/// over all `a` and `v`, both sides by direct DFT summation.
pub fn fourier_slice_residual(
    f: &DomainFunction,
    g: &ActivationTable,
    dom: &FiniteDomain,
) -> Result<f64> {
    g.check_domain(dom)?;
    let f = f.to_dense(dom)?;
    let p = dom.p();
    let pu = p as usize;
    let n_points = f.len();
    let points: Vec<Point> = (0..n_points as u64)
        .map(|i| dom.decode_point(i))
        .collect::<Result<_>>()?;
    let roots: Vec<Complex<f64>> = (0..p)
        .map(|k| Complex::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 / p as f64))
        .collect();
    let inv_sqrt_p = 1.0 / (p as f64).sqrt();
    let c = scale(dom);

    // F_D[f](u) for every u.
    let f_hat: Vec<Complex<f64>> = points
        .iter()
        .map(|u| {
            let s: Complex<f64> = points
                .iter()
                .zip(&f)
                .map(|(x, &fx)| roots[crate::domain::dot_mod(u.coords(), x.coords(), p) as usize] * fx)
                .sum();
            s * c
        })
        .collect();
    let r_hat: Vec<Complex<f64>> = (0..p)
        .map(|v| {
            let s: Complex<f64> = (0..p)
                .map(|b| roots[(v as u64 * b as u64 % p as u64) as usize] * g.value(b))
                .sum();
            s * inv_sqrt_p
        })
        .collect();

    let mut worst: f64 = 0.0;
    let mut slice = vec![0.0; pu];
    for a in &points {
        for (b, out) in slice.iter_mut().enumerate() {
            *out = points
                .iter()
                .zip(&f)
                .map(|(x, &fx)| {
                    let v = crate::domain::dot_mod(a.coords(), x.coords(), p);
                    fx * g.value(crate::domain::sub_mod(v, b as u32, p))
                })
                .sum::<f64>()
                * c;
        }
        for v in 0..p {
            let lhs: Complex<f64> = slice
                .iter()
                .enumerate()
                .map(|(b, &h)| roots[(v as u64 * b as u64 % p as u64) as usize] * h)
                .sum::<Complex<f64>>()
                * inv_sqrt_p;
            let va = Point(a.coords().iter().map(|&ai| ((v as u64 * ai as u64) % p as u64) as u32).collect());
            let rhs = f_hat[dom.encode_point(&va)? as usize] * r_hat[v as usize].conj();
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}
