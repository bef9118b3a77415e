mod common;

use proptest::prelude::*;
use strat_forge::local_model::default_max_depth;
use strat_forge::strat::stratum_dimension;
use strat_forge::{assemble_partition, link_tree, open_dense_stratum, QuotientKind, WeightSystem};

fn kind() -> impl Strategy<Value = QuotientKind> {
    prop_oneof![Just(QuotientKind::Symplectic), Just(QuotientKind::ContactSphere)]
}

/// Torus ranks 1 and 2, optionally with one finite factor, on up to 5 coordinates.
fn system() -> impl Strategy<Value = WeightSystem> {
    (1usize..=5, 1usize..=2, prop_oneof![Just(0i64), 2i64..=4]).prop_flat_map(|(n, k, m)| {
        (
            proptest::collection::vec(proptest::collection::vec(-3i64..=3, n), k),
            proptest::collection::vec(0i64..4, n),
        )
            .prop_map(move |(weights, chars)| {
                let (moduli, finite) = if m == 0 { (vec![], vec![]) } else { (vec![m], vec![chars]) };
                WeightSystem::new(k, moduli, weights, finite, n).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn partitions_are_consistent(ws in system(), kind in kind()) {
        let p = assemble_partition(&ws, kind).unwrap();
        p.check_integrity().unwrap();
        for s in &p.strata {
            let base = s.representative().union(p.free_coords);
            prop_assert_eq!(stratum_dimension(&ws, base, kind).unwrap(), s.dimension);
        }
        if !p.is_empty() {
            prop_assert_eq!(open_dense_stratum(&p).unwrap().len(), p.components.len());
        }
    }

    #[test]
    fn link_trees_satisfy_their_ledgers(ws in system(), kind in kind()) {
        let tree = link_tree(&ws, kind, default_max_depth(&ws)).unwrap();
        prop_assert!(!tree.is_truncated());
        tree.check_integrity().unwrap();
    }

    #[test]
    fn serialization_round_trips(ws in system(), kind in kind()) {
        let text = serde_json::to_string(&ws).unwrap();
        prop_assert_eq!(&serde_json::from_str::<WeightSystem>(&text).unwrap(), &ws);
        let tree = link_tree(&ws, kind, 2).unwrap();
        let text = serde_json::to_string(&tree).unwrap();
        let back: strat_forge::LinkTree = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), text);
        prop_assert_eq!(back, tree);
    }
}

#[test]
fn corpus_trees_are_complete() {
    for (name, ws) in common::corpus() {
        for kind in [QuotientKind::Symplectic, QuotientKind::ContactSphere] {
            let tree = link_tree(&ws, kind, default_max_depth(&ws)).unwrap();
            assert!(!tree.is_truncated(), "{name}");
            tree.check_integrity().unwrap();
        }
    }
}
