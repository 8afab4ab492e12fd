//! Irreducibility analysis for Markov chains driven by formal posterior
//! distributions.
//!
//! Given a discretized statistical model `P(x | theta)` (a row-stochastic
//! matrix over a parameter grid and a sample grid) and an improper prior
//! represented as unnormalized nonnegative weights, this crate builds the
//! parameter-space transition kernel
//!
//! ```text
//! R[i][k] = sum_j Q[k][j] * P[i][j]
//! ```
//!
//! where `Q` is a formal posterior, and decides whether the resulting chain
//! is irreducible with respect to the prior. The decision is made three
//! independent ways — reachability on the positivity digraph, minimal closed
//! sets (bottom strongly connected components), and a support-partition
//! check on `(P, nu)` alone — and the crate ships brute-force oracles for
//! both routes so the equivalences can be tested exhaustively on small
//! instances.
//!
//! Two worked model families (a location-uniform model under a flat prior
//! and a scale-uniform model under `d(theta)/theta`) are provided as
//! discretizers, together with Monte Carlo return-time diagnostics and an
//! exact taboo-recursion oracle for finite chains.

pub mod analysis;
pub mod error;
pub mod io;
pub mod kernel;
pub mod measure;
pub mod model;
pub mod partition;
pub mod sim;
pub mod worked;

pub use analysis::{
    boolean_reachability, brute_force_reducible, closed_set_from_witness, find_closed_sets,
    is_phi_irreducible, n_step, positivity_digraph, relocate_witness, ClosedSet, ClosedSetReport,
    FiniteChain, IrreducibilityVerdict, PositivityDigraph, ReducibilityWitness,
};
pub use error::{Error, Result};
pub use kernel::{
    build_eaton_kernel, check_reversibility, compare_versions, ReversibilityReport,
    TransitionKernel,
};
pub use measure::WeightedMeasure;
pub use model::{
    build_fpd, marginal, verify_fpd, FiniteModel, FpdReport, NullColumnPolicy, PosteriorKernel,
};
pub use partition::{
    brute_force_witness, build_reducible_version, common_support_quick_check,
    find_partition_witness, find_partition_witness_with_tau, validate_witness,
    witness_from_closed_set, PartitionWitness, SupportGraph, WitnessValidation,
};
pub use sim::{
    exact_return_probability, local_recurrence_report, simulate_return_finite,
    simulate_return_walk, LocalRecurrenceReport, ReturnEstimate, ReturnTimeConfig,
};
pub use worked::{
    ex1_discretize, ex1_increment_cdf, ex1_increment_density, ex1_sample_increment,
    ex1_transition_density, ex2_discretize, ex2_marginal_density, ex2_posterior_density,
    ex2_q0_policy, ex2_q1_policy, Discretized, DiscretizationSpec, ZeroVariant,
};

/// Tolerance used for stochasticity and posterior-identity checks.
///
/// All constructions are finite sums and ratios of doubles with no
/// iteration, so accumulated rounding stays well below this.
pub const STOCH_TOL: f64 = 1e-12;
