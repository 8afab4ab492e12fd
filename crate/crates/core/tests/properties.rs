//! Property tests over randomly generated instances. Strategies draw a
//! seed and expand it through the shared generators, so shrinking works on
//! the seed while instance construction stays in one place.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use eaton_chain::{
    boolean_reachability, build_eaton_kernel, build_fpd, check_reversibility, compare_versions,
    find_closed_sets, is_phi_irreducible, n_step, positivity_digraph, simulate_return_finite,
    verify_fpd, FiniteChain, NullColumnPolicy, ReturnTimeConfig,
};

proptest! {
    #[test]
    fn fpd_identity_holds_on_random_models(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let model = common::random_model(&mut rng, 7, 7);
        let q = build_fpd(&model, &NullColumnPolicy::UniformOverPositivePrior).unwrap();
        let report = verify_fpd(&q, &model, 1e-12).unwrap();
        prop_assert!(report.pass, "violation {:.3e} at {:?}",
            report.max_identity_violation, report.worst_entry);
    }

    #[test]
    fn kernel_is_reversible_and_mass_preserving(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let model = common::random_model(&mut rng, 7, 7);
        let q = build_fpd(&model, &NullColumnPolicy::UniformOverPositivePrior).unwrap();
        let r = build_eaton_kernel(&model, &q).unwrap();
        let rev = check_reversibility(&r, model.prior(), 1e-12).unwrap();
        prop_assert!(rev.pass, "residual {:.3e}", rev.max_residual);
        for k in 0..model.n_theta() {
            let pushed: f64 = (0..model.n_theta())
                .map(|i| model.prior().weight(i) * r.at(i, k))
                .sum();
            prop_assert!((pushed - model.prior().weight(k)).abs() <= 1e-12);
        }
    }

    #[test]
    fn reachability_routes_agree(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let chain = common::random_chain(&mut rng, 8);
        let n = chain.n_states();
        let graph = positivity_digraph(chain.kernel(), 0.0).unwrap();
        let boolean = boolean_reachability(chain.kernel(), n);
        for y in 0..n {
            prop_assert_eq!(&graph.reachable_in_positive_steps(y), &boolean[y]);
        }
        let verdict = is_phi_irreducible(&chain).is_irreducible();
        prop_assert_eq!(verdict, !find_closed_sets(&chain).reducible);
    }

    #[test]
    fn minimal_closed_sets_absorb_all_power_mass(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let chain = common::random_chain(&mut rng, 8);
        let report = find_closed_sets(&chain);
        let powers = [1, 2, 5, 8];
        for closed in &report.minimal_closed_sets {
            for &n in &powers {
                let sn = n_step(chain.kernel(), n).unwrap();
                for &i in &closed.states {
                    let inside: f64 = closed.states.iter().map(|&k| sn.at(i, k)).sum();
                    prop_assert!((inside - 1.0).abs() <= 1e-9,
                        "mass {inside} stays inside after {n} steps");
                }
            }
        }
    }

    #[test]
    fn versions_differ_only_on_null_rows(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let model = common::random_model(&mut rng, 7, 7);
        let pa = common::random_policy(&mut rng, model.n_theta());
        let pb = common::random_policy(&mut rng, model.n_theta());
        let ra = build_eaton_kernel(&model, &build_fpd(&model, &pa).unwrap()).unwrap();
        let rb = build_eaton_kernel(&model, &build_fpd(&model, &pb).unwrap()).unwrap();
        for i in compare_versions(&ra, &rb, 0.0).unwrap() {
            prop_assert_eq!(model.prior().weight(i), 0.0,
                "row {} has positive prior weight but differs", i);
        }
    }

    #[test]
    fn return_estimates_are_monotone_in_horizon(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let chain = common::random_chain(&mut rng, 6);
        let n = chain.n_states();
        let start = (seed % n as u64) as usize;
        let target: BTreeSet<usize> = [(seed / 7 % n as u64) as usize].into();
        let mut prev = -1.0;
        for horizon in [5, 20, 80] {
            let est = simulate_return_finite(
                chain.kernel(),
                start,
                &target,
                &ReturnTimeConfig { horizon, replicates: 300, seed },
            )
            .unwrap();
            prop_assert!(est.p_hat >= prev);
            prev = est.p_hat;
        }
    }

    #[test]
    fn witness_models_have_reducible_certified_versions(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (model, _) = common::planted_witness_model(&mut rng);
        let w = eaton_chain::find_partition_witness(&model);
        prop_assert!(w.is_some(), "planted structure must be detected");
        let w = w.unwrap();
        let validation = eaton_chain::validate_witness(&model, &w).unwrap();
        prop_assert!(validation.ok, "{:?}", validation.failures);
        // Mutual singularity of the two support blocks: no column carries
        // mass from both sides of the partition.
        let q = build_fpd(&model, &NullColumnPolicy::UniformOverPositivePrior).unwrap();
        let qt = eaton_chain::build_reducible_version(
            &model, &q, &w, *w.c.iter().next().unwrap(),
        )
        .unwrap();
        let rt = build_eaton_kernel(&model, &qt).unwrap();
        let chain = FiniteChain::new(rt, model.prior().clone()).unwrap();
        prop_assert!(!is_phi_irreducible(&chain).is_irreducible());
    }
}
