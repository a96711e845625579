//! Checks against the bundled fixture networks. Expected unit counts,
//! depth bounds, and oracle set sizes were enumerated with
//! `bench::enumerate_trees` before being frozen here.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use foon_core::bench::{DEFAULT_ENUMERATION_CAP, enumerate_trees, run_table_seq};
use foon_core::retrieval::{RetrievalQuery, Strategy, retrieve};
use foon_core::{
    KitchenItem, ObjectNode, UniversalFoon, parse_kitchen, parse_subgraph, serialize_subgraph,
};

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name))
        .unwrap_or_else(|e| panic!("reading fixture {name}: {e}"))
}

fn load(name: &str) -> (UniversalFoon, Vec<KitchenItem>) {
    let units = parse_subgraph(&read_fixture(&format!("{name}.foon"))).expect("fixture parses");
    let kitchen = parse_kitchen(&read_fixture(&format!("{name}.kitchen"))).expect("kitchen parses");
    (UniversalFoon::merge([units]), kitchen)
}

fn load_goals(name: &str) -> Vec<ObjectNode> {
    parse_kitchen(&read_fixture(&format!("{name}.goals")))
        .expect("goals parse")
        .iter()
        .map(KitchenItem::to_object_node)
        .collect()
}

#[test]
fn fixtures_parse_with_expected_unit_counts() {
    for (name, expected) in [
        ("sweet_tea", 1),
        ("salad", 12),
        ("cocoa", 10),
        ("pancakes", 13),
        ("cyclic", 6),
    ] {
        let (foon, _) = load(name);
        assert_eq!(foon.len(), expected, "{name}");
        assert_eq!(foon.duplicates_removed(), 0, "{name}");
    }
}

#[test]
fn fixtures_serialize_to_a_canonical_fixed_point() {
    for name in ["sweet_tea", "salad", "cocoa", "pancakes", "cyclic"] {
        let units = parse_subgraph(&read_fixture(&format!("{name}.foon"))).unwrap();
        let canonical = serialize_subgraph(&units);
        let reparsed = parse_subgraph(&canonical).unwrap();
        assert_eq!(units.len(), reparsed.len(), "{name}");
        for (a, b) in units.iter().zip(&reparsed) {
            assert_eq!(a.key(), b.key(), "{name}");
        }
        assert_eq!(serialize_subgraph(&reparsed), canonical, "{name}");
    }
}

/// Frozen per-goal unit counts: (goal index, iddfs, h1, h2, iddfs bound).
fn expected_counts(name: &str) -> Vec<(usize, usize, usize, usize, usize)> {
    match name {
        "salad" => vec![
            (0, 7, 7, 8, 3), // salad (mixed)
            (1, 1, 1, 1, 1), // lemon wedge (sliced)
            (2, 2, 2, 2, 2), // dressing (mixed)
            (3, 1, 1, 1, 1), // tomato (chopped)
            (4, 0, 0, 0, 0), // lemon (whole): already in the kitchen
        ],
        "cocoa" => vec![
            (0, 5, 6, 6, 5), // cocoa (topped)
            (1, 6, 7, 7, 4), // cocoa (frothy)
            (2, 3, 4, 4, 3), // cocoa (stirred)
            (3, 1, 2, 2, 1), // water (hot)
            (4, 0, 0, 0, 0), // milk (cold): already in the kitchen
        ],
        "pancakes" => vec![
            (0, 13, 13, 13, 8), // pancakes (served)
            (1, 4, 4, 4, 3),    // batter (smooth)
            (2, 1, 1, 1, 1),    // stove (hot)
            (3, 0, 0, 0, 0),    // butter (cold): already in the kitchen
        ],
        other => panic!("no expectations for {other}"),
    }
}

#[test]
fn fixture_retrievals_match_frozen_counts() {
    for name in ["salad", "cocoa", "pancakes"] {
        let (foon, kitchen) = load(name);
        let goals = load_goals(name);
        for (goal_idx, iddfs, h1, h2, bound) in expected_counts(name) {
            let goal = &goals[goal_idx];
            for (strategy, expected) in [
                (Strategy::Iddfs, iddfs),
                (Strategy::MaxSuccessRate, h1),
                (Strategy::MinInputCount, h2),
            ] {
                let query = RetrievalQuery::new(goal.clone(), kitchen.clone(), strategy);
                let tree = retrieve(&foon, &query)
                    .unwrap_or_else(|e| panic!("{name} goal {goal_idx} {strategy}: {e}"));
                assert_eq!(
                    tree.unit_count(),
                    expected,
                    "{name} goal {goal_idx} {strategy}"
                );
                assert!(
                    tree.validate(&kitchen).is_valid(),
                    "{name} goal {goal_idx} {strategy}"
                );
                if strategy == Strategy::Iddfs {
                    assert_eq!(
                        tree.depth_bound_used(),
                        Some(bound),
                        "{name} goal {goal_idx}"
                    );
                }
            }
        }
    }
}

#[test]
fn salad_goal_diverges_between_heuristics() {
    let (foon, kitchen) = load("salad");
    let goals = load_goals("salad");
    let oracle = enumerate_trees(&foon, &kitchen, &goals[0], 13, DEFAULT_ENUMERATION_CAP);
    assert!(!oracle.truncated);
    let sizes: BTreeSet<usize> = oracle.trees.iter().map(|t| t.ordinals.len()).collect();
    assert_eq!(sizes, BTreeSet::from([7, 8]));
    assert_eq!(oracle.min_depth(), Some(3));
}

#[test]
fn fixture_results_are_contained_in_the_oracle_set() {
    for name in ["sweet_tea", "salad", "cocoa", "pancakes"] {
        let (foon, kitchen) = load(name);
        let goals = if name == "sweet_tea" {
            vec![
                ObjectNode::new(
                    "tea",
                    foon_core::MotionFlag::Idle,
                    ["sweetened tea"],
                    Vec::<String>::new(),
                )
                .unwrap(),
            ]
        } else {
            load_goals(name)
        };
        for goal in &goals {
            let oracle = enumerate_trees(
                &foon,
                &kitchen,
                goal,
                foon.len() + 1,
                DEFAULT_ENUMERATION_CAP,
            );
            assert!(!oracle.truncated, "{name}");
            for strategy in Strategy::ALL {
                let query = RetrievalQuery::new(goal.clone(), kitchen.clone(), strategy);
                let tree = retrieve(&foon, &query).unwrap();
                let ordinals: BTreeSet<usize> =
                    tree.units().iter().map(|u| u.source_ordinal()).collect();
                assert!(
                    oracle.contains_ordinals(&ordinals),
                    "{name} {strategy} tree {ordinals:?} not in oracle set"
                );
                if strategy == Strategy::Iddfs {
                    let bound = tree.depth_bound_used().unwrap();
                    assert_eq!(Some(bound), oracle.min_depth(), "{name} {strategy}");
                }
            }
        }
    }
}

#[test]
fn cyclic_fixture_terminates_quickly_and_fails_cleanly() {
    let (foon, kitchen) = load("cyclic");
    let goal = ObjectNode::new(
        "bread",
        foon_core::MotionFlag::Idle,
        ["baked"],
        Vec::<String>::new(),
    )
    .unwrap();
    for strategy in Strategy::ALL {
        let started = Instant::now();
        let query = RetrievalQuery::new(goal.clone(), kitchen.clone(), strategy);
        let result = retrieve(&foon, &query);
        assert!(started.elapsed().as_secs_f64() < 1.0, "{strategy} too slow");
        assert!(
            result.is_err(),
            "{strategy} should fail on the cyclic network"
        );
    }
    let oracle = enumerate_trees(&foon, &kitchen, &goal, 10, DEFAULT_ENUMERATION_CAP);
    assert!(oracle.is_empty());
}

#[test]
fn stats_rows_cover_goals_in_order() {
    let (foon, kitchen) = load("salad");
    let goals = load_goals("salad");
    let rows = run_table_seq(&foon, &kitchen, &goals, 2);
    assert_eq!(rows.len(), goals.len() * 3);
    for (idx, chunk) in rows.chunks(3).enumerate() {
        assert_eq!(chunk[0].goal, goals[idx].key(false).to_string());
        assert_eq!(chunk[0].algorithm, Strategy::Iddfs);
        assert_eq!(chunk[1].algorithm, Strategy::MaxSuccessRate);
        assert_eq!(chunk[2].algorithm, Strategy::MinInputCount);
    }
}
