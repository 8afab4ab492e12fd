//! The two reference model families: a location-uniform model under a flat
//! prior (whose parameter chain is a triangular-increment random walk) and
//! a scale-uniform model under `d(theta)/theta`, with the zero-parameter
//! sampling distribution left as a modelling choice.

use rand::Rng;

use crate::error::{Error, Result};
use crate::measure::WeightedMeasure;
use crate::model::{FiniteModel, NullColumnPolicy};

/// How the scale-uniform model samples when the scale parameter is zero.
/// The choice is irrelevant to the prior (which puts no mass there) but
/// decides whether a reducible version of the parameter chain exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroVariant {
    /// All observations exactly zero.
    PointMassAtOrigin,
    /// Observations i.i.d. unit-scale exponential.
    UnitExponential,
}

/// Grid bounds and spacing for the discretizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationSpec {
    pub lower: f64,
    pub upper: f64,
    pub h: f64,
    pub include_origin_atom: bool,
}

impl DiscretizationSpec {
    /// Number of cells, after checking that the spacing divides the range.
    pub fn n_cells(&self) -> Result<usize> {
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper) {
            return Err(Error::InvalidArgument(format!(
                "need lower < upper, got [{}, {}]",
                self.lower, self.upper
            )));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "spacing must be positive, got {}",
                self.h
            )));
        }
        let k = ((self.upper - self.lower) / self.h).round();
        if k < 1.0 || ((self.upper - self.lower) - k * self.h).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "spacing {} does not divide the range [{}, {}]",
                self.h, self.lower, self.upper
            )));
        }
        Ok(k as usize)
    }
}

/// A discretized model together with its real grid coordinates and the
/// rows whose sampling window was truncated at the grid boundary (and
/// renormalized). Boundary rows are excluded from density-convergence
/// comparisons but included in irreducibility verdicts.
#[derive(Debug, Clone)]
pub struct Discretized {
    pub model: FiniteModel,
    pub boundary_rows: Vec<usize>,
    pub theta_values: Vec<f64>,
    pub x_values: Vec<f64>,
}

/// Density of the random-walk increment: triangular on (-1, 1).
pub fn ex1_increment_density(z: f64) -> f64 {
    if z.abs() < 1.0 {
        1.0 - z.abs()
    } else {
        0.0
    }
}

/// One-step transition density of the location-uniform parameter chain;
/// the parameter enters only as a location shift.
pub fn ex1_transition_density(theta: f64, eta: f64) -> f64 {
    ex1_increment_density(eta - theta)
}

/// Draws a triangular increment as the difference of two independent
/// uniforms. Exactly the target density, branch-free.
pub fn ex1_sample_increment<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    u1 - u2
}

/// Exact CDF of the triangular increment, for distribution tests.
pub fn ex1_increment_cdf(z: f64) -> f64 {
    if z <= -1.0 {
        0.0
    } else if z < 0.0 {
        0.5 + z + z * z / 2.0
    } else if z < 1.0 {
        0.5 + z - z * z / 2.0
    } else {
        1.0
    }
}

fn format_coord(v: f64) -> String {
    format!("{v:.6}")
}

/// Discretizes the location-uniform model on a shared parameter/sample
/// grid of spacing `h`. Parameter points are grid nodes; sample points are
/// cells. Each row spreads uniform mass over the cells inside its window
/// of length one, truncated and renormalized at the upper bound.
pub fn ex1_discretize(spec: &DiscretizationSpec) -> Result<Discretized> {
    if spec.include_origin_atom {
        return Err(Error::InvalidArgument(
            "origin atom applies to the scale model only".into(),
        ));
    }
    if spec.upper - spec.lower <= 2.0 {
        return Err(Error::InvalidArgument(
            "range must exceed 2 so interior rows exist".into(),
        ));
    }
    let k = spec.n_cells()?;
    let h = spec.h;
    let theta_values: Vec<f64> = (0..k).map(|i| spec.lower + i as f64 * h).collect();
    let x_values: Vec<f64> = (0..k).map(|j| spec.lower + (j as f64 + 0.5) * h).collect();

    let mut p = vec![vec![0.0; k]; k];
    let mut boundary_rows = Vec::new();
    for (i, row) in p.iter_mut().enumerate() {
        let win_lo = theta_values[i];
        let win_hi = (win_lo + 1.0).min(spec.upper);
        if win_lo + 1.0 > spec.upper + 1e-12 {
            boundary_rows.push(i);
        }
        let mut sum = 0.0;
        for (j, entry) in row.iter_mut().enumerate() {
            let cell_lo = spec.lower + j as f64 * h;
            let cell_hi = cell_lo + h;
            let mut overlap = (cell_hi.min(win_hi) - cell_lo.max(win_lo)).max(0.0);
            // Snap away 1-ulp slivers so the positivity pattern stays exact.
            if overlap < h * 1e-9 {
                overlap = 0.0;
            }
            *entry = overlap;
            sum += overlap;
        }
        for entry in row.iter_mut() {
            *entry /= sum;
        }
    }
    let theta_labels: Vec<String> = theta_values.iter().map(|&v| format_coord(v)).collect();
    let x_labels: Vec<String> = x_values.iter().map(|&v| format_coord(v)).collect();
    let nu = WeightedMeasure::new(theta_labels, vec![h; k])?;
    let model = FiniteModel::new(nu, x_labels, p)?;
    Ok(Discretized {
        model,
        boundary_rows,
        theta_values,
        x_values,
    })
}

/// Posterior density of the scale parameter given the sample maximum:
/// `n * x_max^n / theta^(n+1)` above `x_max`, zero below.
pub fn ex2_posterior_density(theta: f64, x_max: f64, n: usize) -> Result<f64> {
    if !(x_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sample maximum must be positive, got {x_max}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    if theta <= x_max {
        return Ok(0.0);
    }
    let n_f = n as f64;
    Ok(n_f * x_max.powi(n as i32) / theta.powi(n as i32 + 1))
}

/// Marginal density of the sample under the scale-uniform model and the
/// `d(theta)/theta` prior, with respect to Lebesgue measure on the full
/// n-dimensional sample space: `1 / (n * x_max^n)`.
pub fn ex2_marginal_density(x_max: f64, n: usize) -> Result<f64> {
    if !(x_max > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sample maximum must be positive, got {x_max}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    Ok(1.0 / (n as f64 * x_max.powi(n as i32)))
}

/// Discretizes the scale-uniform model, collapsed to the sufficient
/// statistic (the sample maximum). The sample grid is an origin atom plus
/// cells of `(0, upper)`; the parameter grid is the origin plus the same
/// cells. The prior weight of a positive cell is `h / theta`, and the
/// origin carries none.
pub fn ex2_discretize(n: usize, variant: ZeroVariant, spec: &DiscretizationSpec) -> Result<Discretized> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    if !spec.include_origin_atom {
        return Err(Error::InvalidArgument(
            "the scale model grid requires the origin atom".into(),
        ));
    }
    if spec.lower != 0.0 {
        return Err(Error::InvalidArgument(
            "the scale model grid starts at zero".into(),
        ));
    }
    let k = spec.n_cells()?;
    let h = spec.h;
    let n_i = n as i32;

    let mut theta_values = vec![0.0];
    let mut x_values = vec![0.0];
    for c in 0..k {
        let center = (c as f64 + 0.5) * h;
        theta_values.push(center);
        x_values.push(center);
    }
    let size = k + 1;
    let mut p = vec![vec![0.0; size]; size];
    let mut boundary_rows = Vec::new();

    match variant {
        ZeroVariant::PointMassAtOrigin => p[0][0] = 1.0,
        ZeroVariant::UnitExponential => {
            // CDF of the maximum of n unit exponentials, truncated at the
            // grid boundary and renormalized.
            let cdf = |t: f64| (1.0 - (-t).exp()).powi(n_i);
            let total = cdf(spec.upper);
            boundary_rows.push(0);
            for j in 1..size {
                let a = (j - 1) as f64 * h;
                let b = a + h;
                p[0][j] = (cdf(b) - cdf(a)) / total;
            }
        }
    }

    for i in 1..size {
        let theta = theta_values[i];
        let mut sum = 0.0;
        for j in 1..size {
            let a = (j - 1) as f64 * h;
            let b = a + h;
            let mass = ((b.min(theta).powi(n_i) - a.min(theta).powi(n_i)) / theta.powi(n_i)).max(0.0);
            p[i][j] = mass;
            sum += mass;
        }
        for entry in p[i].iter_mut() {
            *entry /= sum;
        }
    }

    let theta_labels: Vec<String> = theta_values.iter().map(|&v| format_coord(v)).collect();
    let x_labels: Vec<String> = x_values.iter().map(|&v| format_coord(v)).collect();
    let mut nu = vec![0.0; size];
    for i in 1..size {
        nu[i] = h / theta_values[i];
    }
    let model = FiniteModel::new(WeightedMeasure::new(theta_labels, nu)?, x_labels, p)?;
    Ok(Discretized {
        model,
        boundary_rows,
        theta_values,
        x_values,
    })
}

/// The posterior version that parks the zero-sample column on the origin:
/// the reducible choice.
pub fn ex2_q0_policy() -> NullColumnPolicy {
    NullColumnPolicy::PointMass(0)
}

/// The posterior version that spreads the zero-sample column over the
/// whole positive half-line: a discretized unit-mean exponential over the
/// positive cells. Any full-support choice works; this one is canonical
/// here.
pub fn ex2_q1_policy(disc: &Discretized) -> NullColumnPolicy {
    let mut weights: Vec<f64> = disc
        .theta_values
        .iter()
        .map(|&t| if t > 0.0 { (-t).exp() } else { 0.0 })
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    NullColumnPolicy::Custom(weights)
}
