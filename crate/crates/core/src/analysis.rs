use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::kernel::TransitionKernel;
use crate::measure::WeightedMeasure;

/// A finite chain paired with the reference measure its irreducibility is
/// judged against.
#[derive(Debug, Clone)]
pub struct FiniteChain {
    kernel: TransitionKernel,
    phi: WeightedMeasure,
}

impl FiniteChain {
    pub fn new(kernel: TransitionKernel, phi: WeightedMeasure) -> Result<Self> {
        if kernel.state_labels() != phi.labels() {
            return Err(Error::DimensionMismatch(
                "kernel and reference measure must share the same ordered labels".into(),
            ));
        }
        Ok(Self { kernel, phi })
    }

    pub fn kernel(&self) -> &TransitionKernel {
        &self.kernel
    }

    pub fn phi(&self) -> &WeightedMeasure {
        &self.phi
    }

    pub fn n_states(&self) -> usize {
        self.kernel.n_states()
    }
}

/// A certificate of reducibility: a state `y` from which the positive-mass
/// set `a` is unreachable in any number of steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducibilityWitness {
    pub y: usize,
    pub a: BTreeSet<usize>,
}

/// A nonempty absorbing set: no transition mass leaves it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedSet {
    pub states: BTreeSet<usize>,
}

/// Adjacency lists of the positivity pattern: edge `(y, z)` iff
/// `S[y][z] > threshold`.
///
/// Reachability and closedness are decided on this exact pattern, not on
/// floating-point matrix powers, so verdicts are immune to rounding.
#[derive(Debug, Clone)]
pub struct PositivityDigraph {
    pub adj: Vec<Vec<usize>>,
}

pub fn positivity_digraph(kernel: &TransitionKernel, threshold: f64) -> Result<PositivityDigraph> {
    if threshold < 0.0 || !threshold.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "threshold must be finite and nonnegative, got {threshold}"
        )));
    }
    let adj = kernel
        .matrix()
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|&(_, &v)| v > threshold)
                .map(|(z, _)| z)
                .collect()
        })
        .collect();
    Ok(PositivityDigraph { adj })
}

impl PositivityDigraph {
    pub fn n_states(&self) -> usize {
        self.adj.len()
    }

    /// States reachable from `y` in at least one step (so `y` itself only
    /// if it can be revisited).
    pub fn reachable_in_positive_steps(&self, y: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        let mut stack: Vec<usize> = Vec::new();
        for &z in &self.adj[y] {
            if !seen[z] {
                seen[z] = true;
                stack.push(z);
            }
        }
        while let Some(w) = stack.pop() {
            for &z in &self.adj[w] {
                if !seen[z] {
                    seen[z] = true;
                    stack.push(z);
                }
            }
        }
        seen
    }
}

/// The `n`-step kernel, by repeated multiplication. `n = 0` is rejected:
/// the induction starts at the one-step kernel.
pub fn n_step(kernel: &TransitionKernel, n: usize) -> Result<TransitionKernel> {
    if n == 0 {
        return Err(Error::InvalidArgument("step count must be at least 1".into()));
    }
    let size = kernel.n_states();
    let mut acc: Vec<Vec<f64>> = kernel.matrix().to_vec();
    for _ in 1..n {
        let mut next = vec![vec![0.0; size]; size];
        for (y, next_row) in next.iter_mut().enumerate() {
            for (w, &step) in acc[y].iter().enumerate() {
                if step == 0.0 {
                    continue;
                }
                for (z, out) in next_row.iter_mut().enumerate() {
                    *out += step * kernel.at(w, z);
                }
            }
        }
        acc = next;
    }
    // Rounding can push a sum a hair past 1; clamp so the constructor's
    // entry check stays meaningful for large n.
    for row in &mut acc {
        for v in row.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
    }
    TransitionKernel::new(kernel.state_labels().to_vec(), acc)
}

/// Outcome of the irreducibility decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IrreducibilityVerdict {
    Irreducible,
    Reducible(ReducibilityWitness),
}

impl IrreducibilityVerdict {
    pub fn is_irreducible(&self) -> bool {
        matches!(self, IrreducibilityVerdict::Irreducible)
    }
}

/// Decides irreducibility by reachability on the positivity digraph: the
/// chain is irreducible iff every state of positive reference mass is
/// reachable (in at least one step) from every state. If not, returns the
/// lowest-index failing state `y` together with the set of all
/// positive-mass states unreachable from it.
pub fn is_phi_irreducible(chain: &FiniteChain) -> IrreducibilityVerdict {
    let graph = positivity_digraph(chain.kernel(), 0.0).expect("zero threshold is valid");
    let positive: Vec<usize> = chain.phi().positive_indices();
    for y in 0..chain.n_states() {
        let reach = graph.reachable_in_positive_steps(y);
        let unreachable: BTreeSet<usize> = positive
            .iter()
            .copied()
            .filter(|&t| !reach[t])
            .collect();
        if !unreachable.is_empty() {
            return IrreducibilityVerdict::Reducible(ReducibilityWitness { y, a: unreachable });
        }
    }
    IrreducibilityVerdict::Irreducible
}

fn check_witness(chain: &FiniteChain, w: &ReducibilityWitness) -> Result<()> {
    if w.y >= chain.n_states() || w.a.iter().any(|&i| i >= chain.n_states()) {
        return Err(Error::InvalidWitness("state index out of range".into()));
    }
    if chain.phi().mass_of(&w.a) <= 0.0 {
        return Err(Error::InvalidWitness("target set has zero mass".into()));
    }
    let graph = positivity_digraph(chain.kernel(), 0.0)?;
    let reach = graph.reachable_in_positive_steps(w.y);
    if w.a.iter().any(|&t| reach[t]) {
        return Err(Error::InvalidWitness(
            "target set is reachable from the witness state".into(),
        ));
    }
    Ok(())
}

/// Moves a reducibility witness outside its own target set: if `y` lies in
/// `a`, returns the lowest-index state outside `a` that also cannot reach
/// `a`; such a state always exists for a valid witness.
pub fn relocate_witness(chain: &FiniteChain, w: &ReducibilityWitness) -> Result<usize> {
    check_witness(chain, w)?;
    if !w.a.contains(&w.y) {
        return Ok(w.y);
    }
    let graph = positivity_digraph(chain.kernel(), 0.0)?;
    for y in 0..chain.n_states() {
        if w.a.contains(&y) {
            continue;
        }
        let reach = graph.reachable_in_positive_steps(y);
        if w.a.iter().all(|&t| !reach[t]) {
            return Ok(y);
        }
    }
    Err(Error::InvalidWitness(
        "no relocation target exists; witness does not certify reducibility".into(),
    ))
}

/// Extracts a closed set from a witness with `y` outside `a`: the states
/// that are neither in `a` nor able to reach `a`. Contains `y`, is closed,
/// and its complement carries at least the mass of `a`.
pub fn closed_set_from_witness(chain: &FiniteChain, w: &ReducibilityWitness) -> Result<ClosedSet> {
    check_witness(chain, w)?;
    if w.a.contains(&w.y) {
        return Err(Error::InvalidWitness(
            "witness state lies in the target set; relocate it first".into(),
        ));
    }
    let graph = positivity_digraph(chain.kernel(), 0.0)?;
    let states: BTreeSet<usize> = (0..chain.n_states())
        .filter(|&s| {
            if w.a.contains(&s) {
                return false;
            }
            let reach = graph.reachable_in_positive_steps(s);
            w.a.iter().all(|&t| !reach[t])
        })
        .collect();
    debug_assert!(states.contains(&w.y));
    Ok(ClosedSet { states })
}

/// Minimal closed sets together with the reducibility verdict they imply.
#[derive(Debug, Clone)]
pub struct ClosedSetReport {
    /// Bottom strongly connected components of the positivity digraph, in
    /// order of their lowest state index.
    pub minimal_closed_sets: Vec<ClosedSet>,
    /// True iff some closed set leaves positive mass outside.
    pub reducible: bool,
}

/// Iterative Tarjan; returns components in reverse topological order.
fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0usize;
    // (node, next child position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        call.push((root, 0));
        while let Some(&mut (v, ref mut ci)) = call.last_mut() {
            if *ci == 0 {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *ci < adj[v].len() {
                let w = adj[v][*ci];
                *ci += 1;
                if index[w] == usize::MAX {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    components.push(comp);
                }
            }
        }
    }
    components
}

/// Lists the minimal closed sets (bottom strongly connected components of
/// the positivity digraph) and reports reducibility: the chain is reducible
/// iff some closed set has positive mass outside it.
pub fn find_closed_sets(chain: &FiniteChain) -> ClosedSetReport {
    let graph = positivity_digraph(chain.kernel(), 0.0).expect("zero threshold is valid");
    let components = strongly_connected_components(&graph.adj);
    let mut comp_of = vec![0usize; chain.n_states()];
    for (c, comp) in components.iter().enumerate() {
        for &v in comp {
            comp_of[v] = c;
        }
    }
    let mut bottom: Vec<ClosedSet> = components
        .iter()
        .enumerate()
        .filter(|(c, comp)| {
            comp.iter()
                .all(|&v| graph.adj[v].iter().all(|&z| comp_of[z] == *c))
        })
        .map(|(_, comp)| ClosedSet {
            states: comp.iter().copied().collect(),
        })
        .collect();
    bottom.sort_by_key(|c| *c.states.iter().next().expect("closed sets are nonempty"));
    let total = chain.phi().total_mass();
    let reducible = bottom
        .iter()
        .any(|c| total - chain.phi().mass_of(&c.states) > 0.0);
    ClosedSetReport {
        minimal_closed_sets: bottom,
        reducible,
    }
}

/// Exhaustive reducibility check by subset enumeration, for small chains
/// only. Tests every nonempty subset for closedness under the exact
/// positivity pattern and positive outside mass.
pub fn brute_force_reducible(chain: &FiniteChain) -> Result<bool> {
    let n = chain.n_states();
    if n > 15 {
        return Err(Error::TooLarge(format!("{n} states (limit 15)")));
    }
    let s = chain.kernel().matrix();
    let phi = chain.phi();
    for mask in 1u32..(1 << n) {
        let in_c = |z: usize| mask & (1 << z) != 0;
        let closed = (0..n)
            .filter(|&y| in_c(y))
            .all(|y| (0..n).all(|z| in_c(z) || s[y][z] == 0.0));
        if !closed {
            continue;
        }
        let outside_mass: f64 = (0..n).filter(|&z| !in_c(z)).map(|z| phi.weight(z)).sum();
        if outside_mass > 0.0 {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Reachability in one to `max_steps` steps over the boolean semiring, by
/// accumulating pattern powers. Second, independent route to the same
/// relation as [`PositivityDigraph::reachable_in_positive_steps`].
pub fn boolean_reachability(kernel: &TransitionKernel, max_steps: usize) -> Vec<Vec<bool>> {
    let n = kernel.n_states();
    let pattern: Vec<Vec<bool>> = kernel
        .matrix()
        .iter()
        .map(|row| row.iter().map(|&v| v > 0.0).collect())
        .collect();
    let mut power = pattern.clone();
    let mut acc = pattern.clone();
    for _ in 1..max_steps {
        let mut next = vec![vec![false; n]; n];
        for (y, next_row) in next.iter_mut().enumerate() {
            for w in 0..n {
                if power[y][w] {
                    for (z, out) in next_row.iter_mut().enumerate() {
                        *out |= pattern[w][z];
                    }
                }
            }
        }
        for y in 0..n {
            for z in 0..n {
                acc[y][z] |= next[y][z];
            }
        }
        power = next;
    }
    acc
}
