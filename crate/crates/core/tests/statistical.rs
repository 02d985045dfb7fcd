//! Goodness-of-fit checks of every sampler against its enumerated law.
//! Seeds are fixed, so each test is deterministic; the p-value floor only
//! guards against a wrong law, not against bad luck.

mod common;

use common::{chi_square_p_value, counts, sine_instance, total_variation};
use rand::Rng;
use ridgelet_sampler::domain::FiniteDomain;
use ridgelet_sampler::seed::rng_from_seed;
use ridgelet_sampler::sq_tree::SqTree;
use ridgelet_sampler::{
    enumerate_exact, ActivationTable, SamplerConfig, SamplerState, Smoothing,
};

const P_FLOOR: f64 = 1e-4;

#[test]
fn proposals_follow_q() {
    let emp = sine_instance(3, 2, 30, 5);
    let g = ActivationTable::relu(3).unwrap();
    let st = SamplerState::build(&emp, &g, &SamplerConfig::new(1e-3, Smoothing::Auto, 0.1)).unwrap();
    let dom = *st.domain();
    let q: Vec<f64> = (0..dom.enumerable_nodes().unwrap() as u64)
        .map(|i| st.proposal_probability(&dom.decode_node(i).unwrap()))
        .collect();
    assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let mut rng = rng_from_seed(11);
    let drawn: Vec<_> = (0..200_000).map(|_| st.propose(&mut rng)).collect();
    let pv = chi_square_p_value(&counts(&dom, &drawn), &q);
    assert!(pv > P_FLOOR, "p-value {pv}");
}

#[test]
fn sq_tree_samples_squared_magnitudes() {
    let mut rng = rng_from_seed(3);
    let mut v: Vec<f64> = (0..37).map(|_| rng.random_range(-2.0..2.0)).collect();
    v[4] = 0.0;
    v[20] = 0.0;
    let tree = SqTree::build(v.clone()).unwrap();
    let norm: f64 = v.iter().map(|x| x * x).sum();
    let probs: Vec<f64> = v.iter().map(|x| x * x / norm).collect();
    let mut c = vec![0u64; v.len()];
    for _ in 0..100_000 {
        c[tree.sample_index(&mut rng).unwrap()] += 1;
    }
    assert_eq!(c[4] + c[20], 0);
    let pv = chi_square_p_value(&c, &probs);
    assert!(pv > P_FLOOR, "p-value {pv}");
}

#[test]
fn exact_sampler_follows_p_star() {
    let emp = sine_instance(5, 2, 60, 8);
    let g = ActivationTable::relu(5).unwrap();
    let exact = enumerate_exact(&emp, &g, &SamplerConfig::new(1e-3, Smoothing::Auto, 0.1)).unwrap();
    let mut rng = rng_from_seed(21);
    let drawn: Vec<_> = (0..200_000).map(|_| exact.sample(&mut rng)).collect();
    let pv = chi_square_p_value(&counts(emp.domain(), &drawn), exact.p_star());
    assert!(pv > P_FLOOR, "p-value {pv}");
}

fn accepted_law_matches(delta: Smoothing, seed: u64) {
    let emp = sine_instance(3, 2, 30, seed);
    let g = ActivationTable::relu(3).unwrap();
    let cfg = SamplerConfig::new(1e-3, delta, 0.05);
    let st = SamplerState::build(&emp, &g, &cfg).unwrap();
    let exact = enumerate_exact(&emp, &g, &cfg).unwrap();
    let out = st.sample_batch(100_000, seed).unwrap();
    let accepted: Vec<_> = out.iter().filter(|o| o.accepted).map(|o| o.node.clone()).collect();
    assert!(accepted.len() > 90_000, "only {} accepted", accepted.len());
    let pv = chi_square_p_value(&counts(emp.domain(), &accepted), exact.p_star());
    assert!(pv > P_FLOOR, "p-value {pv}");
}

#[test]
fn accepted_draws_follow_p_star() {
    accepted_law_matches(Smoothing::Auto, 1);
    accepted_law_matches(Smoothing::Fixed(1e-4), 2);
}

#[test]
fn large_smoothing_tends_to_normalized_weights() {
    let emp = sine_instance(3, 2, 30, 4);
    let g = ActivationTable::relu(3).unwrap();
    let cfg = SamplerConfig::new(1e-3, Smoothing::Fixed(1e9), 0.05);
    let exact = enumerate_exact(&emp, &g, &cfg).unwrap();
    let gamma: f64 = exact.s_table().iter().sum();
    for (p, s) in exact.p_star().iter().zip(exact.s_table()) {
        assert!((p - s / gamma).abs() < 1e-8);
    }
    accepted_law_matches(Smoothing::Fixed(1e9), 4);
}

#[test]
fn sampler_tv_within_budget_on_small_instances() {
    for (p, d, seed) in [(3u32, 1usize, 1u64), (5, 1, 2), (3, 2, 3)] {
        let emp = sine_instance(p, d, 20 * d, seed);
        let g = ActivationTable::relu(p).unwrap();
        let cfg = SamplerConfig::new(1e-3, Smoothing::Auto, 0.05);
        let st = SamplerState::build(&emp, &g, &cfg).unwrap();
        let exact = enumerate_exact(&emp, &g, &cfg).unwrap();
        let nodes: Vec<_> = st.sample_batch(50_000, seed).unwrap().into_iter().map(|o| o.node).collect();
        let tv = total_variation(&counts(&FiniteDomain::new(p, d).unwrap(), &nodes), exact.p_star());
        assert!(tv <= 0.05 + 0.02, "P={p} D={d}: TV {tv}");
    }
}
