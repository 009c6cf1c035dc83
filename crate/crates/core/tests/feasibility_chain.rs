//! Distributions induced by random conversations pass every necessary
//! condition, and the witness search reconstructs them.

mod common;

use parley::conversation::DEFAULT_TRANSCRIPT_BUDGET as BUDGET;
use parley::feasibility::{
    check_mediator_feasibility, check_product_condition, search_witness, witness_to_conversation, FeasibilityVerdict,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn induced_distributions_are_feasible(seed in any::<u64>(), rounds in 0usize..=2) {
        let mut rng = common::rng(seed);
        let c = common::conversation(&mut rng, 2, 2, rounds);
        let (pa, pb) = (common::belief(&mut rng, 2, false), common::belief(&mut rng, 2, false));
        let j = c.induced_joint_posterior(&pa, &pb, BUDGET).unwrap();
        prop_assert!(check_product_condition(&j));
        let m = check_mediator_feasibility(&j, &pa, &pb).unwrap();
        prop_assert!(!matches!(m, FeasibilityVerdict::Infeasible { .. }), "{:?}", m);
        // exact simplex time grows steeply with the flow LP; past this size the search says Unknown
        match search_witness(&j, rounds, &pa, &pb, 400, &[]).unwrap() {
            FeasibilityVerdict::Feasible { .. } => {}
            FeasibilityVerdict::Unknown { .. } => return Ok(()),
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn found_witnesses_are_sound(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let c = common::conversation(&mut rng, 2, 2, 1);
        let (pa, pb) = (common::belief(&mut rng, 2, false), common::belief(&mut rng, 2, false));
        let j = c.induced_joint_posterior(&pa, &pb, BUDGET).unwrap();
        let v = search_witness(&j, 1, &pa, &pb, 50_000, &[]).unwrap();
        // one round moves both beliefs once, so the target's own coordinates suffice
        let w = v.witness().expect("one-round targets are found on their own grid");
        let rebuilt = witness_to_conversation(w, &pa, &pb).unwrap();
        prop_assert_eq!(rebuilt.induced_joint_posterior(&pa, &pb, BUDGET).unwrap(), j);
    }
}
