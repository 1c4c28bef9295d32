use std::path::Path;

use proptest::prelude::*;

use sfcrel_core::queueing::QueueSetting;
use sfcrel_core::reliability::VnfDescriptor;
use sfcrel_core::scenario::{
    load_scenario, reference_scenario, write_scenario, DemandModel, Scenario, ServiceTemplate, SubstrateSpec,
    SCHEMA_VERSION,
};
use sfcrel_core::Error;

fn bundled(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn vnf() -> impl Strategy<Value = VnfDescriptor> {
    ("[A-Z]{2,5}", 500u32..=1000, 1u32..=500, 1u32..=16)
        .prop_map(|(k, p, mu, c)| VnfDescriptor::new(k, f64::from(p) / 1000.0, f64::from(mu), c))
}

fn service() -> impl Strategy<Value = ServiceTemplate> {
    (1u32..=300, 1u32..=1000, 500u32..=999, prop::collection::vec(vnf(), 1..=6)).prop_map(|(lambda, budget, r, vnfs)| {
        ServiceTemplate {
            service_name: String::new(),
            traffic_share: 0.0,
            arrival_rate: f64::from(lambda),
            delay_budget: f64::from(budget) / 1000.0,
            reliability_target: f64::from(r) / 1000.0,
            vnfs,
        }
    })
}

fn demands(count: usize) -> impl Strategy<Value = DemandModel> {
    prop_oneof![
        (1u32..=20, 0u32..=20).prop_map(|(min, extra)| DemandModel::Uniform { min, max: min + extra }),
        Just(DemandModel::FromDesign),
        prop::collection::vec(1u32..=60, count).prop_map(|values| DemandModel::Explicit { values }),
    ]
}

fn scenario() -> impl Strategy<Value = Scenario> {
    (1usize..=80, prop::collection::vec(service(), 1..=5), any::<u64>(), any::<bool>())
        .prop_flat_map(|(count, catalog, seed, mm1)| {
            (Just(count), Just(catalog), Just(seed), Just(mm1), demands(count), 1usize..=500, 1u32..=128, 900u32..=1000)
        })
        .prop_map(|(count, mut catalog, seed, mm1, demands, nodes, cap, p)| {
            let n = catalog.len();
            for (i, s) in catalog.iter_mut().enumerate() {
                s.service_name = format!("svc{i}");
                s.traffic_share = 1.0 / n as f64;
            }
            Scenario {
                schema_version: SCHEMA_VERSION,
                name: format!("generated-{seed}"),
                setting: if mm1 { QueueSetting::MM1 } else { QueueSetting::MMM },
                seed,
                request_count: count,
                substrate: SubstrateSpec { node_count: nodes, capacity: cap, reliability: f64::from(p) / 1000.0 },
                demands,
                service_catalog: catalog,
            }
        })
}

proptest! {
    #[test]
    fn write_then_load_is_identity(s in scenario()) {
        prop_assert!(s.validate().is_ok());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        write_scenario(&s, &path).unwrap();
        prop_assert_eq!(load_scenario(&path).unwrap(), s);
    }
}

#[test]
fn bundled_reference_matches_builtin() {
    assert_eq!(load_scenario(bundled("reference.json")).unwrap(), reference_scenario());
}

#[test]
fn bundled_worked_example_parses() {
    let s = load_scenario(bundled("worked_example.json")).unwrap();
    assert_eq!(s.demands, DemandModel::Explicit { values: vec![15, 10, 5, 20, 30] });
    assert_eq!(s.nodes().len(), 3);
}

#[test]
fn rule_violations_are_reported_together() {
    let mut s = reference_scenario();
    s.service_catalog.clear();
    s.substrate.capacity = 0;
    match s.validate() {
        Err(Error::Validation(v)) => assert_eq!(v.len(), 2, "{v:?}"),
        other => panic!("{other:?}"),
    }

    let mut s = reference_scenario();
    for t in &mut s.service_catalog {
        t.traffic_share *= 0.9;
    }
    assert!(matches!(s.validate(), Err(Error::Validation(_))));

    let mut s = reference_scenario();
    s.schema_version = 2;
    assert!(matches!(Scenario::from_json(&s.to_json()), Err(Error::Validation(_))));
}

#[test]
fn unknown_fields_are_parse_errors() {
    let text = reference_scenario().to_json().replacen("\"seed\"", "\"sead\": 1,\n  \"seed\"", 1);
    assert!(matches!(Scenario::from_json(&text), Err(Error::Parse(_))));
}
