//! Prime-field arithmetic on `Z_P` and index encoding for `Z_P^D` and the
//! hidden-node space `Z_P^D x Z_P`.
//!
//! Nodes are ordered row-major: `index = encode(a) * P + b`, with the first
//! coordinate of `a` most significant.

use std::fmt;

use crate::error::{Error, Result};

/// Default upper bound on the number of hidden nodes any dense enumeration
/// may touch.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut k = 3u32;
    while (k as u64) * (k as u64) <= n as u64 {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 2;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiniteDomain {
    p: u32,
    d: usize,
    cap: u64,
}

impl FiniteDomain {
    pub fn new(p: u32, d: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            p,
            d,
            cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// `P^D` as an exact big count (saturating well beyond any desk-scale use).
    pub fn point_count(&self) -> u128 {
        pow_saturating(self.p as u128, self.d)
    }

    /// `P^(D+1)`.
    pub fn node_count(&self) -> u128 {
        pow_saturating(self.p as u128, self.d + 1)
    }

    /// Number of nodes as a `usize`, refusing when it exceeds the cap.
    pub fn enumerable_nodes(&self) -> Result<usize> {
        let n = self.node_count();
        if n > self.cap as u128 {
            return Err(Error::CapExceeded {
                requested: n,
                cap: self.cap,
            });
        }
        Ok(n as usize)
    }

    /// Number of points as a `usize`, under the same cap as the node space.
    pub fn enumerable_points(&self) -> Result<usize> {
        self.enumerable_nodes()?;
        Ok(self.point_count() as usize)
    }

    pub fn check_point(&self, x: &Point) -> Result<()> {
        if x.0.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.0.len(),
            });
        }
        match x.0.iter().find(|&&c| c >= self.p) {
            Some(&value) => Err(Error::ResidueOutOfRange { value, p: self.p }),
            None => Ok(()),
        }
    }

    pub fn check_node(&self, n: &NodeIndex) -> Result<()> {
        self.check_point(&n.a)?;
        if n.b >= self.p {
            return Err(Error::ResidueOutOfRange {
                value: n.b,
                p: self.p,
            });
        }
        Ok(())
    }

    /// `(sum_i a_i x_i) mod P`.
    pub fn inner_product_mod(&self, a: &Point, x: &Point) -> Result<u32> {
        self.check_point(a)?;
        self.check_point(x)?;
        Ok(dot_mod(&a.0, &x.0, self.p))
    }

    pub fn encode_point(&self, x: &Point) -> Result<u64> {
        self.enumerable_points()?;
        self.check_point(x)?;
        Ok(x.0.iter().fold(0u64, |acc, &c| acc * self.p as u64 + c as u64))
    }

    pub fn decode_point(&self, index: u64) -> Result<Point> {
        let len = self.enumerable_points()? as u64;
        if index >= len {
            return Err(Error::IndexOutOfRange { index, len });
        }
        Ok(Point(self.digits(index)))
    }

    pub fn encode_node(&self, n: &NodeIndex) -> Result<u64> {
        self.check_node(n)?;
        Ok(self.encode_point(&n.a)? * self.p as u64 + n.b as u64)
    }

    pub fn decode_node(&self, index: u64) -> Result<NodeIndex> {
        let len = self.enumerable_nodes()? as u64;
        if index >= len {
            return Err(Error::IndexOutOfRange { index, len });
        }
        let p = self.p as u64;
        Ok(NodeIndex {
            a: Point(self.digits(index / p)),
            b: (index % p) as u32,
        })
    }

    fn digits(&self, mut index: u64) -> Vec<u32> {
        let p = self.p as u64;
        let mut coords = vec![0u32; self.d];
        for c in coords.iter_mut().rev() {
            *c = (index % p) as u32;
            index /= p;
        }
        coords
    }
}

fn pow_saturating(base: u128, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base))
}

/// Inner product of two residue slices reduced mod `p`. Callers guarantee
/// equal lengths and residues `< p`.
#[inline]
pub fn dot_mod(a: &[u32], x: &[u32], p: u32) -> u32 {
    debug_assert_eq!(a.len(), x.len());
    let p = p as u64;
    // Each product is < p^2; flush before the accumulator could overflow.
    let flush = (u64::MAX / (p * p).max(1)).max(1) as usize;
    let mut acc = 0u64;
    for (chunk_a, chunk_x) in a.chunks(flush).zip(x.chunks(flush)) {
        let s: u64 = chunk_a
            .iter()
            .zip(chunk_x)
            .map(|(&ai, &xi)| ai as u64 * xi as u64)
            .sum();
        acc = (acc + s % p) % p;
    }
    acc as u32
}

/// `(v - t) mod p` for residues `v, t < p`.
#[inline]
pub fn sub_mod(v: u32, t: u32, p: u32) -> u32 {
    if v >= t {
        v - t
    } else {
        v + p - t
    }
}

/// A point of `Z_P^D`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(pub Vec<u32>);

impl Point {
    pub fn coords(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for Point {
    fn from(v: Vec<u32>) -> Self {
        Point(v)
    }
}

/// A hidden-node parameter pair `(a, b)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeIndex {
    pub a: Point,
    pub b: u32,
}

impl NodeIndex {
    pub fn new(a: impl Into<Point>, b: u32) -> Self {
        Self { a: a.into(), b }
    }

    /// `(a^T x - b) mod P`, the argument of the activation at input `x`.
    #[inline]
    pub fn phase(&self, x: &[u32], p: u32) -> u32 {
        sub_mod(dot_mod(&self.a.0, x, p), self.b, p)
    }
}

impl fmt::Display for NodeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.a.0 {
            write!(f, "{c},")?;
        }
        write!(f, "{}", self.b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn primality() {
        let primes: Vec<u32> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            primes,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
        assert!(matches!(FiniteDomain::new(4, 1), Err(Error::NotPrime(4))));
        assert!(matches!(FiniteDomain::new(1, 1), Err(Error::NotPrime(1))));
        assert!(matches!(FiniteDomain::new(3, 0), Err(Error::ZeroDimension)));
    }

    #[test]
    fn inner_products() {
        let dom = FiniteDomain::new(7, 2).unwrap();
        let ip = |a: Vec<u32>, x: Vec<u32>| dom.inner_product_mod(&a.into(), &x.into());
        assert_eq!(ip(vec![0, 0], vec![5, 6]).unwrap(), 0);
        assert_eq!(ip(vec![1, 1], vec![3, 4]).unwrap(), 0);
        // (8 + 15) mod 7
        assert_eq!(ip(vec![2, 3], vec![4, 5]).unwrap(), 2);
        assert!(matches!(
            ip(vec![1], vec![3, 4]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            ip(vec![7, 0], vec![3, 4]),
            Err(Error::ResidueOutOfRange { .. })
        ));
    }

    #[test]
    fn node_encoding_endpoints() {
        let dom = FiniteDomain::new(3, 1).unwrap();
        assert_eq!(dom.encode_node(&NodeIndex::new(vec![0], 0)).unwrap(), 0);
        let dom = FiniteDomain::new(5, 3).unwrap();
        let last = dom.node_count() as u64 - 1;
        assert_eq!(
            dom.decode_node(last).unwrap(),
            NodeIndex::new(vec![4, 4, 4], 4)
        );
        assert!(matches!(
            dom.decode_node(last + 1),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn exhaustive_round_trip() {
        let dom = FiniteDomain::new(3, 2).unwrap();
        assert_eq!(dom.node_count(), 27);
        for i in 0..27u64 {
            let n = dom.decode_node(i).unwrap();
            assert_eq!(dom.encode_node(&n).unwrap(), i);
        }
        // Row-major: b varies fastest.
        assert_eq!(dom.decode_node(4).unwrap(), NodeIndex::new(vec![0, 1], 1));
    }

    #[test]
    fn cap_is_enforced() {
        let dom = FiniteDomain::new(7, 8).unwrap();
        assert!(matches!(
            dom.enumerable_nodes(),
            Err(Error::CapExceeded { .. })
        ));
        let small = FiniteDomain::new(3, 2).unwrap().with_cap(10);
        assert!(small.decode_node(0).is_err());
        assert!(FiniteDomain::new(3, 2).unwrap().with_cap(27).decode_node(0).is_ok());
    }

    fn prime_strategy() -> impl Strategy<Value = u32> {
        prop::sample::select(vec![2u32, 3, 5, 7, 11, 13, 101, 251])
    }

    proptest! {
        #[test]
        fn encode_decode_bijection(p in prime_strategy(), d in 1usize..4, seed in any::<u64>()) {
            let dom = FiniteDomain::new(p, d).unwrap();
            let count = dom.node_count();
            prop_assume!(count <= dom.cap() as u128);
            let i = seed % count as u64;
            let node = dom.decode_node(i).unwrap();
            prop_assert_eq!(dom.encode_node(&node).unwrap(), i);
        }

        #[test]
        fn inner_product_matches_bigint(
            p in prime_strategy(),
            pairs in prop::collection::vec((any::<u32>(), any::<u32>()), 1..300),
        ) {
            let a: Vec<u32> = pairs.iter().map(|(u, _)| u % p).collect();
            let x: Vec<u32> = pairs.iter().map(|(_, v)| v % p).collect();
            let reference: u128 = a.iter().zip(&x).map(|(&u, &v)| u as u128 * v as u128).sum::<u128>()
                % p as u128;
            prop_assert_eq!(dot_mod(&a, &x, p) as u128, reference);
        }
    }
}
