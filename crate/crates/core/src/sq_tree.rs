//! Sampling-and-query access to a real vector.
//!
//! A static complete binary tree in heap layout: node `i` has children
//! `2i` and `2i + 1`, leaves start at `width` (the next power of two at or
//! above the vector length), and every internal node holds the sum of
//! squared magnitudes below it. Slot 0 is unused.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SqTree {
    values: Vec<f64>,
    sums: Vec<f64>,
    width: usize,
}

impl SqTree {
    pub fn build(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        let width = values.len().next_power_of_two();
        let mut sums = vec![0.0; 2 * width];
        for (slot, v) in sums[width..].iter_mut().zip(&values) {
            *slot = v * v;
        }
        for i in (1..width).rev() {
            sums[i] = sums[2 * i] + sums[2 * i + 1];
        }
        Ok(Self {
            values,
            sums,
            width,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.width.trailing_zeros() as usize
    }

    pub fn query(&self, i: usize) -> Result<f64> {
        self.values.get(i).copied().ok_or(Error::IndexOutOfRange {
            index: i as u64,
            len: self.values.len() as u64,
        })
    }

    /// `||v||^2` as stored at the root.
    pub fn norm_sq(&self) -> f64 {
        self.sums[1]
    }

    /// Draws `i` with probability `v_i^2 / ||v||^2`.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        let total = self.norm_sq();
        if !(total > 0.0) {
            return Err(Error::ZeroNorm);
        }
        let mut u = rng.random::<f64>() * total;
        let mut node = 1;
        while node < self.width {
            let left = self.sums[2 * node];
            let right = self.sums[2 * node + 1];
            // Zero-mass subtrees are never entered, whatever round-off did to u.
            if right == 0.0 || (left > 0.0 && u < left) {
                node *= 2;
            } else {
                u -= left;
                node = 2 * node + 1;
            }
        }
        Ok(node - self.width)
    }

    /// Verifies every internal node against its children; returns the worst
    /// relative mismatch.
    pub fn consistency_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            worst = worst.max((self.sums[self.width + i] - v * v).abs());
        }
        for i in 1..self.width {
            let children = self.sums[2 * i] + self.sums[2 * i + 1];
            let denom = children.abs().max(f64::MIN_POSITIVE);
            worst = worst.max((self.sums[i] - children).abs() / denom);
        }
        worst
    }
}
