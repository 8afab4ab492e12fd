use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::measure::WeightedMeasure;
use crate::model::{FiniteModel, PosteriorKernel};
use crate::STOCH_TOL;

/// A row-stochastic transition matrix over one labeled state space.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    state_labels: Vec<String>,
    s: Vec<Vec<f64>>,
}

impl TransitionKernel {
    pub fn new(state_labels: Vec<String>, s: Vec<Vec<f64>>) -> Result<Self> {
        if state_labels.is_empty() {
            return Err(Error::InvalidModel("empty state space".into()));
        }
        let mut seen = HashSet::new();
        for l in &state_labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidModel(format!("duplicate state label {l:?}")));
            }
        }
        if s.len() != state_labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} rows vs {} states",
                s.len(),
                state_labels.len()
            )));
        }
        for (i, row) in s.iter().enumerate() {
            if row.len() != state_labels.len() {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries for {} states",
                    row.len(),
                    state_labels.len()
                )));
            }
            let mut sum = 0.0;
            for &v in row {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidModel(format!(
                        "row {i} contains entry {v} outside [0, 1]"
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > STOCH_TOL {
                return Err(Error::InvalidModel(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self { state_labels, s })
    }

    pub fn n_states(&self) -> usize {
        self.state_labels.len()
    }

    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.s
    }

    pub fn at(&self, from: usize, to: usize) -> f64 {
        self.s[from][to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        &self.s[from]
    }

    /// Transition mass from `from` into an index set.
    pub fn mass_into<'a, I: IntoIterator<Item = &'a usize>>(&self, from: usize, set: I) -> f64 {
        set.into_iter().map(|&k| self.s[from][k]).sum()
    }
}

/// Builds the parameter-space kernel `R[i][k] = sum_j Q[k][j] * P[i][j]`:
/// draw a sample from the model at the current parameter, then draw the
/// next parameter from the posterior at that sample.
pub fn build_eaton_kernel(model: &FiniteModel, q: &PosteriorKernel) -> Result<TransitionKernel> {
    if q.n_theta() != model.n_theta() || q.n_x() != model.n_x() {
        return Err(Error::DimensionMismatch(format!(
            "posterior is {}x{}, model is {}x{}",
            q.n_theta(),
            q.n_x(),
            model.n_theta(),
            model.n_x()
        )));
    }
    let n = model.n_theta();
    let mut r = vec![vec![0.0; n]; n];
    for (i, r_row) in r.iter_mut().enumerate() {
        let p_row = &model.p()[i];
        for (k, out) in r_row.iter_mut().enumerate() {
            let q_row = &q.q()[k];
            let dot: f64 = p_row.iter().zip(q_row).map(|(&p, &qv)| p * qv).sum();
            // Rounding can push the dot product past 1 by an ulp.
            *out = dot.min(1.0);
        }
    }
    TransitionKernel::new(model.prior().labels().to_vec(), r)
}

/// Result of an entrywise detailed-balance check.
#[derive(Debug, Clone)]
pub struct ReversibilityReport {
    /// Max over pairs of `|nu_i * R[i][k] - nu_k * R[k][i]|`.
    pub max_residual: f64,
    pub worst_pair: (usize, usize),
    pub tol: f64,
    pub pass: bool,
}

/// Checks detailed balance of `r` with respect to `nu` entrywise. On a
/// finite space this is equivalent to symmetry against all bounded test
/// functions.
pub fn check_reversibility(
    r: &TransitionKernel,
    nu: &WeightedMeasure,
    tol: f64,
) -> Result<ReversibilityReport> {
    if nu.len() != r.n_states() {
        return Err(Error::DimensionMismatch(format!(
            "measure over {} points, kernel over {} states",
            nu.len(),
            r.n_states()
        )));
    }
    let mut max_residual = 0.0;
    let mut worst = (0, 0);
    for i in 0..r.n_states() {
        for k in (i + 1)..r.n_states() {
            let v = (nu.weight(i) * r.at(i, k) - nu.weight(k) * r.at(k, i)).abs();
            if v > max_residual {
                max_residual = v;
                worst = (i, k);
            }
        }
    }
    Ok(ReversibilityReport {
        max_residual,
        worst_pair: worst,
        tol,
        pass: max_residual <= tol,
    })
}

/// Rows on which two kernels over the same state space differ by more than
/// `tol` in some entry. For kernels built from two formal posteriors of the
/// same model, every disagreeing row carries zero prior weight.
pub fn compare_versions(
    r1: &TransitionKernel,
    r2: &TransitionKernel,
    tol: f64,
) -> Result<BTreeSet<usize>> {
    if r1.state_labels() != r2.state_labels() {
        return Err(Error::DimensionMismatch(
            "kernels have different state labels".into(),
        ));
    }
    let mut rows = BTreeSet::new();
    for i in 0..r1.n_states() {
        let diff = r1
            .row(i)
            .iter()
            .zip(r2.row(i))
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        if diff > tol {
            rows.insert(i);
        }
    }
    Ok(rows)
}
