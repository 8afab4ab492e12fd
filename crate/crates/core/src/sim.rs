//! Monte Carlo return-time diagnostics. The first return time counts from
//! step one, so starting inside the target set does not trivially count as
//! a return. Estimates bound `Pr(return <= horizon)` from below and can
//! refute recurrence heuristically, never certify it.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::FiniteChain;
use crate::error::{Error, Result};
use crate::kernel::TransitionKernel;
use crate::worked::ex1_sample_increment;

/// Horizon, replicate count, and seed for a return-time experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReturnTimeConfig {
    pub horizon: usize,
    pub replicates: usize,
    pub seed: u64,
}

impl ReturnTimeConfig {
    fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.replicates == 0 {
            return Err(Error::InvalidArgument(
                "horizon and replicate count must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Estimated probability of returning to the target within the horizon,
/// with a 95% normal-approximation half-width and the number of censored
/// (never-returning) runs. Censored runs are reported, never imputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnEstimate {
    pub p_hat: f64,
    pub ci_halfwidth: f64,
    pub censored_count: usize,
    pub replicates: usize,
}

fn estimate(hits: usize, replicates: usize) -> ReturnEstimate {
    let p = hits as f64 / replicates as f64;
    ReturnEstimate {
        p_hat: p,
        ci_halfwidth: 1.96 * (p * (1.0 - p) / replicates as f64).sqrt(),
        censored_count: replicates - hits,
        replicates,
    }
}

/// One rng stream per replicate, derived from the seed, so parallel and
/// serial execution orders agree and a longer horizon extends rather than
/// reshuffles each trajectory.
fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

fn sample_row<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (z, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return z;
        }
    }
    row.len() - 1
}

/// Simulates first returns to `target` on a finite kernel, starting from
/// `start`. Deterministic given the seed.
pub fn simulate_return_finite(
    kernel: &TransitionKernel,
    start: usize,
    target: &BTreeSet<usize>,
    cfg: &ReturnTimeConfig,
) -> Result<ReturnEstimate> {
    cfg.validate()?;
    if start >= kernel.n_states() || target.iter().any(|&i| i >= kernel.n_states()) {
        return Err(Error::InvalidArgument("state index out of range".into()));
    }
    if target.is_empty() {
        return Err(Error::InvalidArgument("target set is empty".into()));
    }
    let mut hits = 0;
    for rep in 0..cfg.replicates {
        let mut rng = replicate_rng(cfg.seed, rep);
        let mut state = start;
        for _ in 1..=cfg.horizon {
            state = sample_row(kernel.row(state), &mut rng);
            if target.contains(&state) {
                hits += 1;
                break;
            }
        }
    }
    Ok(estimate(hits, cfg.replicates))
}

/// Exact `Pr(return <= horizon)` by the taboo recursion: propagate the
/// start mass, harvest whatever enters the target at each step, and keep
/// iterating only the mass that has stayed outside. Linear-algebra oracle
/// for the Monte Carlo estimator.
pub fn exact_return_probability(
    kernel: &TransitionKernel,
    start: usize,
    target: &BTreeSet<usize>,
    horizon: usize,
) -> Result<f64> {
    if start >= kernel.n_states() || target.iter().any(|&i| i >= kernel.n_states()) {
        return Err(Error::InvalidArgument("state index out of range".into()));
    }
    if target.is_empty() || horizon == 0 {
        return Err(Error::InvalidArgument(
            "target must be nonempty and horizon at least 1".into(),
        ));
    }
    let n = kernel.n_states();
    let mut alive = vec![0.0; n];
    alive[start] = 1.0;
    let mut returned = 0.0;
    for _ in 1..=horizon {
        let mut next = vec![0.0; n];
        for (y, &mass) in alive.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (z, &p) in kernel.row(y).iter().enumerate() {
                next[z] += mass * p;
            }
        }
        for &z in target {
            returned += next[z];
            next[z] = 0.0;
        }
        alive = next;
    }
    Ok(returned.min(1.0))
}

/// Simulates first returns of the triangular-increment random walk from a
/// real starting point to a closed interval.
pub fn simulate_return_walk(
    start: f64,
    target: (f64, f64),
    cfg: &ReturnTimeConfig,
) -> Result<ReturnEstimate> {
    cfg.validate()?;
    let (lo, hi) = target;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "target interval [{lo}, {hi}] must have positive length"
        )));
    }
    let mut hits = 0;
    for rep in 0..cfg.replicates {
        let mut rng = replicate_rng(cfg.seed, rep);
        let mut w = start;
        for _ in 1..=cfg.horizon {
            w += ex1_sample_increment(&mut rng);
            if (lo..=hi).contains(&w) {
                hits += 1;
                break;
            }
        }
    }
    Ok(estimate(hits, cfg.replicates))
}

/// Per-start return estimates for a set, with the standing caveat about
/// what simulation can and cannot establish.
#[derive(Debug, Clone)]
pub struct LocalRecurrenceReport {
    pub entries: Vec<(usize, ReturnEstimate)>,
    pub caveat: &'static str,
}

pub const RECURRENCE_CAVEAT: &str = "simulation bounds Pr(return <= horizon) from below; \
it can flag likely non-recurrence but can never certify local recurrence";

/// Runs the return-time experiment from each listed start inside the
/// target set.
pub fn local_recurrence_report(
    chain: &FiniteChain,
    target: &BTreeSet<usize>,
    starts: &[usize],
    cfg: &ReturnTimeConfig,
) -> Result<LocalRecurrenceReport> {
    for &s in starts {
        if !target.contains(&s) {
            return Err(Error::InvalidArgument(format!(
                "start {s} lies outside the target set"
            )));
        }
    }
    let entries = starts
        .iter()
        .map(|&s| simulate_return_finite(chain.kernel(), s, target, cfg).map(|e| (s, e)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalRecurrenceReport {
        entries,
        caveat: RECURRENCE_CAVEAT,
    })
}
