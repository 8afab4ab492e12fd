use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::measure::WeightedMeasure;
use crate::STOCH_TOL;

/// A discretized statistical model: a row-stochastic matrix `P` over a
/// parameter grid carrying the prior and a sample grid.
///
/// `p[i][j]` is the probability of observing sample point `j` under
/// parameter point `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteModel {
    theta: WeightedMeasure,
    x_labels: Vec<String>,
    p: Vec<Vec<f64>>,
}

impl FiniteModel {
    pub fn new(theta: WeightedMeasure, x_labels: Vec<String>, p: Vec<Vec<f64>>) -> Result<Self> {
        if x_labels.is_empty() {
            return Err(Error::InvalidModel("empty sample grid".into()));
        }
        let mut seen = HashSet::new();
        for l in &x_labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidModel(format!("duplicate sample label {l:?}")));
            }
        }
        if p.len() != theta.len() {
            return Err(Error::DimensionMismatch(format!(
                "P has {} rows, parameter grid has {} points",
                p.len(),
                theta.len()
            )));
        }
        for (i, row) in p.iter().enumerate() {
            if row.len() != x_labels.len() {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, sample grid has {} points",
                    row.len(),
                    x_labels.len()
                )));
            }
            let mut sum = 0.0;
            for &v in row {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidModel(format!(
                        "P[{i}] contains entry {v} outside [0, 1]"
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > STOCH_TOL {
                return Err(Error::InvalidModel(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self { theta, x_labels, p })
    }

    /// The prior measure over the parameter grid.
    pub fn prior(&self) -> &WeightedMeasure {
        &self.theta
    }

    pub fn x_labels(&self) -> &[String] {
        &self.x_labels
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn n_x(&self) -> usize {
        self.x_labels.len()
    }

    pub fn p(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn p_at(&self, i: usize, j: usize) -> f64 {
        self.p[i][j]
    }
}

/// How to fill posterior columns over which the marginal has no mass.
///
/// Distinct policies yield distinct versions of the formal posterior, all
/// agreeing where the marginal is positive.
#[derive(Debug, Clone, PartialEq)]
pub enum NullColumnPolicy {
    /// Point mass at the given parameter index.
    PointMass(usize),
    /// Uniform over the parameter points with positive prior weight.
    UniformOverPositivePrior,
    /// An explicit distribution over the parameter grid (must sum to 1).
    Custom(Vec<f64>),
}

impl NullColumnPolicy {
    fn column(&self, prior: &WeightedMeasure) -> Result<Vec<f64>> {
        let n = prior.len();
        match self {
            NullColumnPolicy::PointMass(i) => {
                if *i >= n {
                    return Err(Error::InvalidArgument(format!(
                        "point-mass index {i} out of range for {n} parameter points"
                    )));
                }
                let mut col = vec![0.0; n];
                col[*i] = 1.0;
                Ok(col)
            }
            NullColumnPolicy::UniformOverPositivePrior => {
                let pos = prior.positive_indices();
                let mass = 1.0 / pos.len() as f64;
                let mut col = vec![0.0; n];
                for i in pos {
                    col[i] = mass;
                }
                Ok(col)
            }
            NullColumnPolicy::Custom(dist) => {
                if dist.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "custom distribution has {} entries, parameter grid has {n}",
                        dist.len()
                    )));
                }
                let sum: f64 = dist.iter().sum();
                if dist.iter().any(|&v| !(0.0..=1.0).contains(&v)) || (sum - 1.0).abs() > STOCH_TOL
                {
                    return Err(Error::InvalidArgument(format!(
                        "custom distribution must be a probability vector (sum {sum})"
                    )));
                }
                Ok(dist.clone())
            }
        }
    }

    pub fn tag(&self) -> String {
        match self {
            NullColumnPolicy::PointMass(i) => format!("pointmass({i})"),
            NullColumnPolicy::UniformOverPositivePrior => "uniform-over-positive-prior".into(),
            NullColumnPolicy::Custom(_) => "custom".into(),
        }
    }
}

/// A formal posterior on the grid: column `j` of `q` is a probability
/// distribution over the parameter points, and wherever the marginal is
/// positive the defining identity `q[i][j] * M_j = P[i][j] * nu_i` holds.
/// Columns with `M_j = 0` are filled by a [`NullColumnPolicy`]; the set of
/// such columns and the policy used are recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorKernel {
    q: Vec<Vec<f64>>,
    null_columns: BTreeSet<usize>,
    policy_tag: String,
}

impl PosteriorKernel {
    pub(crate) fn from_parts(
        q: Vec<Vec<f64>>,
        null_columns: BTreeSet<usize>,
        policy_tag: String,
    ) -> Self {
        Self {
            q,
            null_columns,
            policy_tag,
        }
    }

    pub fn q(&self) -> &[Vec<f64>] {
        &self.q
    }

    pub fn q_at(&self, i: usize, j: usize) -> f64 {
        self.q[i][j]
    }

    pub fn n_theta(&self) -> usize {
        self.q.len()
    }

    pub fn n_x(&self) -> usize {
        self.q.first().map_or(0, Vec::len)
    }

    pub fn null_columns(&self) -> &BTreeSet<usize> {
        &self.null_columns
    }

    pub fn policy_tag(&self) -> &str {
        &self.policy_tag
    }

    /// Posterior mass of a set of parameter indices given sample column `j`.
    pub fn column_mass<'a, I: IntoIterator<Item = &'a usize>>(&self, set: I, j: usize) -> f64 {
        set.into_iter().map(|&i| self.q[i][j]).sum()
    }

    /// Replaces the given columns with the supplied distribution, retagging
    /// the result. Used to construct deliberately reducible versions.
    pub(crate) fn with_columns_replaced(
        &self,
        columns: &BTreeSet<usize>,
        dist: &[f64],
        tag: String,
    ) -> Self {
        let mut q = self.q.clone();
        for (i, row) in q.iter_mut().enumerate() {
            for &j in columns {
                row[j] = dist[i];
            }
        }
        Self {
            q,
            null_columns: self.null_columns.clone(),
            policy_tag: tag,
        }
    }
}

/// The marginal measure over the sample grid: `M_j = sum_i P[i][j] * nu_i`.
pub fn marginal(model: &FiniteModel) -> WeightedMeasure {
    let nu = model.prior().weights();
    let weights: Vec<f64> = (0..model.n_x())
        .map(|j| (0..model.n_theta()).map(|i| model.p_at(i, j) * nu[i]).sum())
        .collect();
    // Total mass equals the prior's total mass, so some weight is positive
    // and the constructor cannot fail.
    WeightedMeasure::new(model.x_labels().to_vec(), weights)
        .expect("marginal inherits positivity from the prior")
}

/// Marginal entries at or below this threshold are treated as null columns.
/// The default is exact zero; a positive threshold accommodates matrices
/// entered with rounding noise.
pub fn build_fpd_with_threshold(
    model: &FiniteModel,
    policy: &NullColumnPolicy,
    null_threshold: f64,
) -> Result<PosteriorKernel> {
    let m = marginal(model);
    if m.weights().iter().all(|&w| w <= null_threshold) {
        return Err(Error::DegenerateModel);
    }
    let fill = policy.column(model.prior())?;
    let nu = model.prior().weights();
    let mut q = vec![vec![0.0; model.n_x()]; model.n_theta()];
    let mut null_columns = BTreeSet::new();
    for j in 0..model.n_x() {
        let mj = m.weight(j);
        if mj <= null_threshold {
            null_columns.insert(j);
            for (i, row) in q.iter_mut().enumerate() {
                row[j] = fill[i];
            }
        } else {
            for (i, row) in q.iter_mut().enumerate() {
                // The ratio can overshoot 1 by an ulp when mj rounds down.
                row[j] = (model.p_at(i, j) * nu[i] / mj).min(1.0);
            }
        }
    }
    Ok(PosteriorKernel::from_parts(q, null_columns, policy.tag()))
}

/// Builds a formal posterior by Bayes' rule on positive-marginal columns,
/// filling null columns per the policy.
pub fn build_fpd(model: &FiniteModel, policy: &NullColumnPolicy) -> Result<PosteriorKernel> {
    build_fpd_with_threshold(model, policy, 0.0)
}

/// Result of checking a posterior kernel against the defining identity.
#[derive(Debug, Clone)]
pub struct FpdReport {
    /// Max over entries of `|q[i][j] * M_j - P[i][j] * nu_i|`.
    pub max_identity_violation: f64,
    /// Entry attaining the identity violation.
    pub worst_entry: (usize, usize),
    /// Max over columns of `|column sum - 1|`.
    pub max_column_sum_dev: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Checks the posterior identity `q[i][j] * M_j = P[i][j] * nu_i` entrywise
/// and the column-stochasticity of `q`.
pub fn verify_fpd(q: &PosteriorKernel, model: &FiniteModel, tol: f64) -> Result<FpdReport> {
    if q.n_theta() != model.n_theta() || q.n_x() != model.n_x() {
        return Err(Error::DimensionMismatch(format!(
            "posterior is {}x{}, model is {}x{}",
            q.n_theta(),
            q.n_x(),
            model.n_theta(),
            model.n_x()
        )));
    }
    let m = marginal(model);
    let nu = model.prior().weights();
    let mut max_violation = 0.0;
    let mut worst = (0, 0);
    for i in 0..model.n_theta() {
        for j in 0..model.n_x() {
            let v = (q.q_at(i, j) * m.weight(j) - model.p_at(i, j) * nu[i]).abs();
            if v > max_violation {
                max_violation = v;
                worst = (i, j);
            }
        }
    }
    let mut max_col_dev = 0.0_f64;
    for j in 0..model.n_x() {
        let sum: f64 = (0..model.n_theta()).map(|i| q.q_at(i, j)).sum();
        max_col_dev = max_col_dev.max((sum - 1.0).abs());
    }
    Ok(FpdReport {
        max_identity_violation: max_violation,
        worst_entry: worst,
        max_column_sum_dev: max_col_dev,
        tol,
        pass: max_violation <= tol && max_col_dev <= tol,
    })
}
