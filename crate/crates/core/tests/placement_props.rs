use proptest::prelude::*;

use sfcrel_core::placement::{
    build_preferences, exhaustive_min_active, ilp_exact_place, place, verify_stability, PlacementMethod,
    PlacementRequest, SubstrateNode,
};
use sfcrel_core::Error;

fn instance(max_reqs: usize, max_nodes: usize) -> impl Strategy<Value = (Vec<u32>, Vec<(u32, f64)>)> {
    (
        prop::collection::vec(1u32..=40, 1..=max_reqs),
        prop::collection::vec((20u32..=64, prop::sample::select(vec![0.99, 0.995, 0.999])), 1..=max_nodes),
    )
}

/// Uniform substrates, as real deployments use, at larger sizes.
fn uniform_instance() -> impl Strategy<Value = (Vec<u32>, Vec<(u32, f64)>)> {
    (prop::collection::vec(1u32..=30, 1..=40), 32u32..=64, 1usize..=40)
        .prop_map(|(d, c, k)| (d, vec![(c, 0.999); k]))
}

fn build(demands: &[u32], nodes: &[(u32, f64)]) -> (Vec<PlacementRequest>, Vec<SubstrateNode>) {
    (
        PlacementRequest::from_demands(demands),
        nodes.iter().enumerate().map(|(i, &(c, p))| SubstrateNode::new(format!("n{i}"), c, p)).collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    // mixed sizes with little slack make the exact search exponential, so
    // those stay smaller
    fn every_method_is_valid_and_exact_is_a_lower_bound((demands, nodes) in prop_oneof![instance(16, 16), uniform_instance()]) {
        let (r, n) = build(&demands, &nodes);
        let exact = ilp_exact_place(&r, &n);
        for m in [PlacementMethod::Mma, PlacementMethod::Mdm, PlacementMethod::Ffd] {
            match place(m, &r, &n) {
                Ok(o) => {
                    prop_assert!(o.validate(&r, &n).is_ok());
                    let e = exact.as_ref().expect("a heuristic packing proves feasibility");
                    prop_assert!(e.active_nodes <= o.active_nodes);
                    if m == PlacementMethod::Mma {
                        prop_assert!(verify_stability(&o, &r, &build_preferences(&r, &n)));
                    }
                }
                Err(Error::CapacityExhausted(_) | Error::Unplaceable { .. }) => {}
                Err(e) => prop_assert!(false, "{m}: {e}"),
            }
        }
        if let Ok(e) = &exact {
            prop_assert!(e.validate(&r, &n).is_ok());
        }
    }

    #[test]
    fn exact_matches_brute_force((demands, nodes) in instance(7, 4)) {
        let (r, n) = build(&demands, &nodes);
        let brute = exhaustive_min_active(&r, &n).unwrap();
        prop_assert_eq!(brute, ilp_exact_place(&r, &n).ok().map(|o| o.active_nodes));
    }

    #[test]
    fn placement_is_deterministic((demands, nodes) in instance(20, 10)) {
        let (r, n) = build(&demands, &nodes);
        for m in PlacementMethod::ALL {
            let a = place(m, &r, &n).ok();
            prop_assert_eq!(a, place(m, &r, &n).ok());
        }
    }
}
