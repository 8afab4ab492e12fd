//! Shared random-instance generators for the integration suites.
//!
//! Everything is driven by an explicit `ChaCha8Rng` so every suite is
//! deterministic for a fixed seed.

// Each suite pulls a different subset of these helpers.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use eaton_chain::{FiniteChain, FiniteModel, NullColumnPolicy, TransitionKernel, WeightedMeasure};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Nonnegative weights, each zeroed with probability `p_zero`, at least one
/// positive.
pub fn random_weights(rng: &mut ChaCha8Rng, n: usize, p_zero: f64) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random::<f64>() < p_zero {
                    0.0
                } else {
                    rng.random_range(0.1..1.0)
                }
            })
            .collect();
        if w.iter().any(|&v| v > 0.0) {
            return w;
        }
    }
}

fn random_stochastic_row(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Vec<f64> {
    let mut row = vec![0.0; n];
    loop {
        for v in row.iter_mut() {
            *v = if rng.random::<f64>() < density {
                rng.random_range(0.1..1.0)
            } else {
                0.0
            };
        }
        if row.iter().any(|&v| v > 0.0) {
            break;
        }
    }
    let s: f64 = row.iter().sum();
    for v in row.iter_mut() {
        *v /= s;
    }
    row
}

/// A chain on 2..=`max_states` states with random sparsity and a random
/// reference measure that may have zero weights.
pub fn random_chain(rng: &mut ChaCha8Rng, max_states: usize) -> FiniteChain {
    let n = rng.random_range(2..=max_states);
    let labels: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let density = rng.random_range(0.2..0.9);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| random_stochastic_row(rng, n, density)).collect();
    let phi = WeightedMeasure::new(labels.clone(), random_weights(rng, n, 0.3)).unwrap();
    let kernel = TransitionKernel::new(labels, rows).unwrap();
    FiniteChain::new(kernel, phi).unwrap()
}

/// A model with random support patterns and a prior that may have null
/// rows.
pub fn random_model(rng: &mut ChaCha8Rng, max_theta: usize, max_x: usize) -> FiniteModel {
    let nt = rng.random_range(2..=max_theta);
    let nx = rng.random_range(2..=max_x);
    let theta_labels: Vec<String> = (0..nt).map(|i| format!("t{i}")).collect();
    let x_labels: Vec<String> = (0..nx).map(|j| format!("x{j}")).collect();
    let density = rng.random_range(0.3..0.9);
    let rows: Vec<Vec<f64>> = (0..nt).map(|_| random_stochastic_row(rng, nx, density)).collect();
    let nu = WeightedMeasure::new(theta_labels, random_weights(rng, nt, 0.35)).unwrap();
    FiniteModel::new(nu, x_labels, rows).unwrap()
}

fn random_proper_subset(rng: &mut ChaCha8Rng, n: usize) -> BTreeSet<usize> {
    loop {
        let s: BTreeSet<usize> = (0..n).filter(|_| rng.random::<bool>()).collect();
        if !s.is_empty() && s.len() < n {
            return s;
        }
    }
}

/// A model built around a known support partition: rows in `C` live inside
/// `A`, all other rows have positive prior weight and avoid `A` entirely.
/// Returns the model with the planted parameter set.
pub fn planted_witness_model(rng: &mut ChaCha8Rng) -> (FiniteModel, BTreeSet<usize>) {
    let nt = rng.random_range(3..=6);
    let nx = rng.random_range(3..=6);
    let c = random_proper_subset(rng, nt);
    let a = random_proper_subset(rng, nx);
    let a_bar: Vec<usize> = (0..nx).filter(|j| !a.contains(j)).collect();
    let a_vec: Vec<usize> = a.iter().copied().collect();

    let mut rows = Vec::with_capacity(nt);
    let mut weights = Vec::with_capacity(nt);
    for i in 0..nt {
        let support = if c.contains(&i) { &a_vec } else { &a_bar };
        let mut row = vec![0.0; nx];
        let inner = random_stochastic_row(rng, support.len(), 0.8);
        for (pos, &j) in support.iter().enumerate() {
            row[j] = inner[pos];
        }
        rows.push(row);
        weights.push(if c.contains(&i) && rng.random::<bool>() {
            0.0
        } else {
            rng.random_range(0.1..1.0)
        });
    }
    let theta_labels: Vec<String> = (0..nt).map(|i| format!("t{i}")).collect();
    let x_labels: Vec<String> = (0..nx).map(|j| format!("x{j}")).collect();
    let nu = WeightedMeasure::new(theta_labels, weights).unwrap();
    (FiniteModel::new(nu, x_labels, rows).unwrap(), c)
}

/// A random column policy: point mass, uniform, or a random distribution
/// over the whole grid.
pub fn random_policy(rng: &mut ChaCha8Rng, n_theta: usize) -> NullColumnPolicy {
    match rng.random_range(0..3) {
        0 => NullColumnPolicy::PointMass(rng.random_range(0..n_theta)),
        1 => NullColumnPolicy::UniformOverPositivePrior,
        _ => {
            let raw: Vec<f64> = (0..n_theta).map(|_| rng.random_range(0.01..1.0)).collect();
            let s: f64 = raw.iter().sum();
            NullColumnPolicy::Custom(raw.into_iter().map(|v| v / s).collect())
        }
    }
}

/// Prints the per-criterion verdict line and fails the test on FAIL.
pub fn report(n: usize, desc: &str, ok: bool) {
    println!(
        "criterion {n:2} [{}]: {desc}",
        if ok { "pass" } else { "FAIL" }
    );
    assert!(ok, "criterion {n} failed: {desc}");
}
