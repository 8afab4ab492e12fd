use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::kernel::build_eaton_kernel;
use crate::model::{marginal, FiniteModel, PosteriorKernel};
use crate::ClosedSet;

/// Bipartite support structure of a model: for each parameter index, the
/// set of sample columns with `P[i][j] > tau`.
#[derive(Debug, Clone)]
pub struct SupportGraph {
    supports: Vec<BTreeSet<usize>>,
    tau: f64,
}

impl SupportGraph {
    pub fn new(model: &FiniteModel, tau: f64) -> Result<Self> {
        if tau < 0.0 || !tau.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "support threshold must be finite and nonnegative, got {tau}"
            )));
        }
        let supports = model
            .p()
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(_, &v)| v > tau)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        Ok(Self { supports, tau })
    }

    pub fn support(&self, i: usize) -> &BTreeSet<usize> {
        &self.supports[i]
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Connected components of the given rows under support overlap, each
    /// sorted, ordered by lowest member. Two rows are connected when their
    /// supports share a column.
    pub fn overlap_components(&self, rows: &[usize]) -> Vec<Vec<usize>> {
        let n_cols = self
            .supports
            .iter()
            .flat_map(|s| s.iter().copied())
            .max()
            .map_or(0, |m| m + 1);
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n_cols];
        for &i in rows {
            for &j in &self.supports[i] {
                col_rows[j].push(i);
            }
        }
        let mut seen_row = vec![false; self.supports.len()];
        let mut seen_col = vec![false; n_cols];
        let mut components = Vec::new();
        for &start in rows {
            if seen_row[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = vec![start];
            seen_row[start] = true;
            while let Some(i) = stack.pop() {
                comp.push(i);
                for &j in &self.supports[i] {
                    if seen_col[j] {
                        continue;
                    }
                    seen_col[j] = true;
                    for &k in &col_rows[j] {
                        if !seen_row[k] {
                            seen_row[k] = true;
                            stack.push(k);
                        }
                    }
                }
            }
            comp.sort_unstable();
            components.push(comp);
        }
        components
    }
}

/// A pair of sets certifying that a reducible version of the parameter
/// chain exists: every sampling support of `c` lies inside `a`, while the
/// supports of positive-prior rows outside `c` avoid `a` entirely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionWitness {
    pub c: BTreeSet<usize>,
    pub a: BTreeSet<usize>,
}

/// Searches for a partition witness from `(P, nu)` alone, with exact-zero
/// support semantics.
pub fn find_partition_witness(model: &FiniteModel) -> Option<PartitionWitness> {
    find_partition_witness_with_tau(model, 0.0).expect("zero threshold is valid")
}

/// As [`find_partition_witness`], with entries at or below `tau` treated as
/// zero. Verdicts are threshold-dependent; nonzero thresholds are meant for
/// matrices entered with rounding noise.
///
/// Two cases produce a witness:
/// 1. the positive-prior rows split into two or more support-overlap
///    components, in which case `c` is the component containing the lowest
///    positive-prior index and `a` the union of its supports; or
/// 2. some zero-prior row's support avoids every positive-prior support, in
///    which case that single row and its support form the witness.
pub fn find_partition_witness_with_tau(
    model: &FiniteModel,
    tau: f64,
) -> Result<Option<PartitionWitness>> {
    let graph = SupportGraph::new(model, tau)?;
    let positive = model.prior().positive_indices();

    let components = graph.overlap_components(&positive);
    if components.len() >= 2 {
        let lowest = *positive.iter().min().expect("prior has positive mass");
        let comp = components
            .iter()
            .find(|c| c.contains(&lowest))
            .expect("lowest positive index lies in some component");
        let c: BTreeSet<usize> = comp.iter().copied().collect();
        let a: BTreeSet<usize> = comp
            .iter()
            .flat_map(|&i| graph.support(i).iter().copied())
            .collect();
        return Ok(Some(PartitionWitness { c, a }));
    }

    let positive_union: BTreeSet<usize> = positive
        .iter()
        .flat_map(|&i| graph.support(i).iter().copied())
        .collect();
    for i in 0..model.n_theta() {
        if model.prior().weight(i) > 0.0 {
            continue;
        }
        let supp = graph.support(i);
        if !supp.is_empty() && supp.is_disjoint(&positive_union) {
            return Ok(Some(PartitionWitness {
                c: [i].into_iter().collect(),
                a: supp.clone(),
            }));
        }
    }
    Ok(None)
}

/// Outcome of checking a witness against the model, with the reasons for
/// any failure.
#[derive(Debug, Clone)]
pub struct WitnessValidation {
    pub ok: bool,
    pub failures: Vec<String>,
}

/// Checks the three witness conditions directly against `P` and `nu`, with
/// exact-zero semantics.
pub fn validate_witness(model: &FiniteModel, w: &PartitionWitness) -> Result<WitnessValidation> {
    if w.c.iter().any(|&i| i >= model.n_theta()) {
        return Err(Error::InvalidArgument("parameter index out of range".into()));
    }
    if w.a.iter().any(|&j| j >= model.n_x()) {
        return Err(Error::InvalidArgument("sample index out of range".into()));
    }
    let mut failures = Vec::new();
    if w.c.is_empty() {
        failures.push("C is empty".into());
    }
    let outside_mass: f64 = (0..model.n_theta())
        .filter(|i| !w.c.contains(i))
        .map(|i| model.prior().weight(i))
        .sum();
    if outside_mass <= 0.0 {
        failures.push("complement of C carries no prior mass".into());
    }
    for &i in &w.c {
        let leak: f64 = (0..model.n_x())
            .filter(|j| !w.a.contains(j))
            .map(|j| model.p_at(i, j))
            .sum();
        if leak != 0.0 {
            failures.push(format!(
                "row {i} in C has mass {leak} outside A",
            ));
        }
    }
    for i in 0..model.n_theta() {
        if w.c.contains(&i) || model.prior().weight(i) == 0.0 {
            continue;
        }
        let leak: f64 = w.a.iter().map(|&j| model.p_at(i, j)).sum();
        if leak != 0.0 {
            failures.push(format!(
                "positive-prior row {i} outside C has mass {leak} inside A",
            ));
        }
    }
    Ok(WitnessValidation {
        ok: failures.is_empty(),
        failures,
    })
}

/// Exhaustive witness search for small models. For a fixed `c`, any valid
/// `a` can be replaced by the union of `c`'s supports, so enumeration runs
/// over parameter subsets only.
pub fn brute_force_witness(model: &FiniteModel) -> Result<Option<PartitionWitness>> {
    let nt = model.n_theta();
    let nx = model.n_x();
    if nt > 12 || nx > 12 {
        return Err(Error::TooLarge(format!(
            "{nt} parameter points x {nx} sample points (limit 12 x 12)"
        )));
    }
    let graph = SupportGraph::new(model, 0.0)?;
    for mask in 1u32..(1 << nt) {
        let c: BTreeSet<usize> = (0..nt).filter(|&i| mask & (1 << i) != 0).collect();
        let a: BTreeSet<usize> = c
            .iter()
            .flat_map(|&i| graph.support(i).iter().copied())
            .collect();
        let w = PartitionWitness { c, a };
        if validate_witness(model, &w)?.ok {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Builds the deliberately reducible posterior version from a witness: on
/// the (marginal-null) columns of `a` whose posterior leaks outside `c`,
/// the posterior is replaced by a point mass at `theta0`. The kernel built
/// from the result has `c` as a closed set.
pub fn build_reducible_version(
    model: &FiniteModel,
    q: &PosteriorKernel,
    w: &PartitionWitness,
    theta0: usize,
) -> Result<PosteriorKernel> {
    let validation = validate_witness(model, w)?;
    if !validation.ok {
        return Err(Error::InvalidWitness(validation.failures.join("; ")));
    }
    if !w.c.contains(&theta0) {
        return Err(Error::InvalidArgument(format!(
            "theta0 = {theta0} does not lie in C"
        )));
    }
    if q.n_theta() != model.n_theta() || q.n_x() != model.n_x() {
        return Err(Error::DimensionMismatch(
            "posterior and model dimensions differ".into(),
        ));
    }
    let outside: Vec<usize> = (0..model.n_theta()).filter(|i| !w.c.contains(i)).collect();
    let d: BTreeSet<usize> = w
        .a
        .iter()
        .copied()
        .filter(|&j| q.column_mass(&outside, j) > 0.0)
        .collect();
    let m = marginal(model);
    for &j in &d {
        if m.weight(j) > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "column {j} leaks posterior mass outside C yet has positive marginal; \
                 the supplied posterior does not satisfy the defining identity"
            )));
        }
    }
    let mut point_mass = vec![0.0; model.n_theta()];
    point_mass[theta0] = 1.0;
    Ok(q.with_columns_replaced(
        &d,
        &point_mass,
        format!("{}+pointmass({theta0})@D", q.policy_tag()),
    ))
}

/// Recovers a partition witness from a closed set of the kernel built from
/// `q`: `a` is the set of sample columns whose posterior puts no mass
/// outside `c`.
pub fn witness_from_closed_set(
    model: &FiniteModel,
    q: &PosteriorKernel,
    closed: &ClosedSet,
) -> Result<PartitionWitness> {
    if closed.states.iter().any(|&i| i >= model.n_theta()) {
        return Err(Error::InvalidArgument("parameter index out of range".into()));
    }
    let outside_mass: f64 = (0..model.n_theta())
        .filter(|i| !closed.states.contains(i))
        .map(|i| model.prior().weight(i))
        .sum();
    if outside_mass <= 0.0 {
        return Err(Error::InvalidArgument(
            "complement of the closed set carries no prior mass".into(),
        ));
    }
    let r = build_eaton_kernel(model, q)?;
    for &i in &closed.states {
        for k in 0..model.n_theta() {
            if !closed.states.contains(&k) && r.at(i, k) != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "set is not closed for the kernel: R[{i}][{k}] = {}",
                    r.at(i, k)
                )));
            }
        }
    }
    let outside: Vec<usize> = (0..model.n_theta())
        .filter(|i| !closed.states.contains(i))
        .collect();
    let a: BTreeSet<usize> = (0..model.n_x())
        .filter(|&j| q.column_mass(&outside, j) == 0.0)
        .collect();
    Ok(PartitionWitness {
        c: closed.states.clone(),
        a,
    })
}

/// True iff every row of `P` has the same support. A common support
/// guarantees that no partition witness exists; the converse fails.
pub fn common_support_quick_check(model: &FiniteModel) -> bool {
    let graph = SupportGraph::new(model, 0.0).expect("zero threshold is valid");
    (1..model.n_theta()).all(|i| graph.support(i) == graph.support(0))
}
