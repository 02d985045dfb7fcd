#![allow(dead_code)]

use ridgelet_sampler::domain::{FiniteDomain, NodeIndex};
use ridgelet_sampler::experiments::{gen_sine_dataset, SyntheticSpec};
use ridgelet_sampler::EmpiricalDistribution;
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn sine_instance(p: u32, d: usize, m: usize, seed: u64) -> EmpiricalDistribution {
    gen_sine_dataset(&SyntheticSpec { p, d, m, seed }).unwrap()
}

pub fn counts<'a>(dom: &FiniteDomain, nodes: impl IntoIterator<Item = &'a NodeIndex>) -> Vec<u64> {
    let mut c = vec![0u64; dom.enumerable_nodes().unwrap()];
    for n in nodes {
        c[dom.encode_node(n).unwrap() as usize] += 1;
    }
    c
}

pub fn total_variation(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    0.5 * counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| (c as f64 / n as f64 - p).abs())
        .sum::<f64>()
}

/// Pearson goodness-of-fit p-value. Cells with expected count below 5 are
/// pooled into one; a count landing on a zero-probability cell gives 0.
pub fn chi_square_p_value(counts: &[u64], probs: &[f64]) -> f64 {
    let n = counts.iter().sum::<u64>() as f64;
    let mut stat = 0.0;
    let mut cells = 0usize;
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        if p == 0.0 {
            if c > 0 {
                return 0.0;
            }
            continue;
        }
        let e = n * p;
        if e < 5.0 {
            pooled_obs += c as f64;
            pooled_exp += e;
        } else {
            stat += (c as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        cells += 1;
    }
    assert!(cells >= 2, "too few cells for a chi-square test");
    ChiSquared::new((cells - 1) as f64).unwrap().sf(stat)
}
