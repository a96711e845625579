//! Exhaustive oracle enumeration and benchmark tables.
//!
//! [`enumerate_trees`] is an independent ground truth for the retrieval
//! strategies: it enumerates every feasible task tree for a goal by brute
//! force, so tests can check that a strategy's answer is one of the feasible
//! answers and that iterative deepening really found a minimum-depth one.
//!
//! [`run_table`] produces the per-goal, per-strategy unit-count and timing
//! rows rendered as an aligned text table and as CSV. With the `parallel`
//! feature (default) the rows are computed concurrently per goal via rayon;
//! [`run_table_seq`] is always available. Both orderings are identical:
//! goal-major, strategy-minor.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::time::{Duration, Instant};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::graph::UniversalFoon;
use crate::model::{FunctionalUnit, KitchenItem, ObjectKey, ObjectNode};
use crate::retrieval::{self, RetrievalQuery, Strategy, finalize};

pub const DEFAULT_ENUMERATION_CAP: usize = 100_000;

/// One feasible task tree found by enumeration.
#[derive(Debug, Clone)]
pub struct OracleTree {
    /// Merge ordinals of the units in the tree.
    pub ordinals: BTreeSet<usize>,
    /// The same units in a finalized execution order.
    pub units: Vec<FunctionalUnit>,
    /// Longest input-dependency chain when executing this tree.
    pub depth: usize,
}

/// Every distinct feasible unit-set for a goal, deterministically ordered.
#[derive(Debug, Clone)]
pub struct OracleSet {
    pub trees: Vec<OracleTree>,
    /// True when the enumeration cap was hit and the set may be incomplete.
    pub truncated: bool,
}

impl OracleSet {
    pub fn contains_ordinals(&self, ordinals: &BTreeSet<usize>) -> bool {
        self.trees.iter().any(|t| &t.ordinals == ordinals)
    }

    pub fn min_depth(&self) -> Option<usize> {
        self.trees.iter().map(|t| t.depth).min()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }
}

struct Enumerator<'a> {
    foon: &'a UniversalFoon,
    kitchen: HashSet<ObjectKey>,
    budget: usize,
    truncated: bool,
}

type DerivationSets = BTreeMap<ObjectKey, BTreeSet<BTreeSet<usize>>>;

impl Enumerator<'_> {
    /// Bottom-up fixpoint over per-key derivation sets: round `i` holds
    /// every unit-set whose derivation tree has height at most `i`. An
    /// object in the kitchen is a leaf, full stop (no unit-derived sets are
    /// recorded for it). Derivations are well-founded by height, so cyclic
    /// networks simply stop producing new sets, and every executable
    /// unit-set appears once its height is reached.
    fn derive_all(&mut self, max_depth: usize) -> DerivationSets {
        let mut derivations = DerivationSets::new();
        let mut dirty: Option<BTreeSet<ObjectKey>> = None; // None: first round
        for _ in 0..max_depth {
            let mut next = derivations.clone();
            let mut changed_keys = BTreeSet::new();
            for (ordinal, unit) in self.foon.units().iter().enumerate() {
                // recombining only pays off when some input gained sets
                if let Some(dirty) = &dirty
                    && !unit.input_keys().iter().any(|k| dirty.contains(k))
                {
                    continue;
                }
                let combos = self.unit_combos(ordinal, unit, &derivations);
                for key in unit.output_keys() {
                    if self.kitchen.contains(&key) {
                        continue;
                    }
                    let entry = next.entry(key.clone()).or_default();
                    for combo in &combos {
                        if entry.insert(combo.clone()) {
                            changed_keys.insert(key.clone());
                        }
                    }
                }
            }
            derivations = next;
            if changed_keys.is_empty() || self.truncated {
                break;
            }
            dirty = Some(changed_keys);
        }
        derivations
    }

    /// Cartesian product of the input derivations of one unit, with the
    /// unit itself added to every combination. Empty when some input has no
    /// derivation yet.
    fn unit_combos(
        &mut self,
        ordinal: usize,
        unit: &FunctionalUnit,
        derivations: &DerivationSets,
    ) -> Vec<BTreeSet<usize>> {
        let empty_set = BTreeSet::new();
        let mut combos: Vec<BTreeSet<usize>> = vec![BTreeSet::from([ordinal])];
        for input in unit.input_keys() {
            let subs: Vec<&BTreeSet<usize>> = if self.kitchen.contains(&input) {
                vec![&empty_set]
            } else {
                match derivations.get(&input) {
                    Some(sets) if !sets.is_empty() => sets.iter().collect(),
                    _ => return Vec::new(),
                }
            };
            let mut next = Vec::with_capacity(combos.len() * subs.len());
            for base in &combos {
                for sub in &subs {
                    if self.budget == 0 {
                        self.truncated = true;
                        return Vec::new();
                    }
                    self.budget -= 1;
                    let mut merged = base.clone();
                    merged.extend(sub.iter().copied());
                    next.push(merged);
                }
            }
            next.sort();
            next.dedup();
            combos = next;
        }
        combos
    }
}

/// Exhaustively enumerate the feasible task trees for `goal`: an object is
/// satisfied by the kitchen or by choosing any creating unit whose inputs
/// are recursively satisfied within `max_depth`. `cap` bounds the number of
/// partial combinations materialized; hitting it sets the `truncated` flag.
pub fn enumerate_trees(
    foon: &UniversalFoon,
    kitchen: &[KitchenItem],
    goal: &ObjectNode,
    max_depth: usize,
    cap: usize,
) -> OracleSet {
    let goal_key = goal.key(false);
    let kitchen_keys: HashSet<ObjectKey> = kitchen.iter().map(KitchenItem::key).collect();
    if kitchen_keys.contains(&goal_key) {
        return OracleSet {
            trees: vec![OracleTree {
                ordinals: BTreeSet::new(),
                units: Vec::new(),
                depth: 0,
            }],
            truncated: false,
        };
    }
    let mut enumerator = Enumerator {
        foon,
        kitchen: kitchen_keys.clone(),
        budget: cap,
        truncated: false,
    };
    let derivations = enumerator.derive_all(max_depth);
    let sets = derivations.get(&goal_key).cloned().unwrap_or_default();
    let trees = sets
        .into_iter()
        .map(|ordinals| {
            let units: Vec<FunctionalUnit> =
                ordinals.iter().map(|&i| foon.unit(i).clone()).collect();
            let depth = tree_depth(foon, &kitchen_keys, &ordinals, &goal_key);
            let (units, _) = finalize(units, kitchen);
            OracleTree {
                ordinals,
                units,
                depth,
            }
        })
        .collect();
    OracleSet {
        trees,
        truncated: enumerator.truncated,
    }
}

/// Minimum achievable dependency depth when executing exactly the units in
/// `ordinals`: kitchen objects cost 0, a unit costs one more than its
/// deepest input, and each object takes the cheapest producer in the set.
fn tree_depth(
    foon: &UniversalFoon,
    kitchen: &HashSet<ObjectKey>,
    ordinals: &BTreeSet<usize>,
    goal: &ObjectKey,
) -> usize {
    let mut depths: HashMap<ObjectKey, usize> = HashMap::new();
    let lookup = |depths: &HashMap<ObjectKey, usize>, key: &ObjectKey| -> Option<usize> {
        if kitchen.contains(key) {
            Some(0)
        } else {
            depths.get(key).copied()
        }
    };
    loop {
        let mut changed = false;
        for &ordinal in ordinals {
            let unit = foon.unit(ordinal);
            let mut deepest = 0;
            let mut ready = true;
            for input in unit.input_keys() {
                match lookup(&depths, &input) {
                    Some(d) => deepest = deepest.max(d),
                    None => {
                        ready = false;
                        break;
                    }
                }
            }
            if !ready {
                continue;
            }
            for output in unit.output_keys() {
                let depth = deepest + 1;
                let entry = depths.entry(output).or_insert(usize::MAX);
                if depth < *entry {
                    *entry = depth;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    lookup(&depths, goal).unwrap_or(usize::MAX)
}

// ---------------------------------------------------------------------------
// Benchmark tables
// ---------------------------------------------------------------------------

/// One table row: a goal retrieved with one strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub goal: String,
    pub algorithm: Strategy,
    pub unit_count: usize,
    /// Median wall-clock seconds over the repeats.
    pub elapsed_seconds: f64,
    pub succeeded: bool,
}

fn rows_for_goal(
    foon: &UniversalFoon,
    kitchen: &[KitchenItem],
    goal: &ObjectNode,
    repeats: usize,
) -> Vec<BenchRow> {
    let repeats = repeats.max(1);
    let label = goal.key(false).to_string();
    Strategy::ALL
        .iter()
        .map(|&strategy| {
            let query = RetrievalQuery::new(goal.clone(), kitchen.to_vec(), strategy);
            let mut times: Vec<Duration> = Vec::with_capacity(repeats);
            let mut outcome = None;
            for _ in 0..repeats {
                let started = Instant::now();
                let result = retrieval::retrieve(foon, &query);
                times.push(started.elapsed());
                outcome.get_or_insert(result);
            }
            times.sort();
            let median = times[times.len() / 2].as_secs_f64();
            let (unit_count, succeeded) = match outcome.unwrap() {
                Ok(tree) => (tree.unit_count(), true),
                Err(_) => (0, false),
            };
            BenchRow {
                goal: label.clone(),
                algorithm: strategy,
                unit_count,
                elapsed_seconds: median,
                succeeded,
            }
        })
        .collect()
}

/// Retrieve every goal with all three strategies `repeats` times and report
/// unit counts and median times, rows in goal-major, strategy-minor order.
/// Per-goal failures become rows with `succeeded = false`; they never abort
/// the table.
pub fn run_table(
    foon: &UniversalFoon,
    kitchen: &[KitchenItem],
    goals: &[ObjectNode],
    repeats: usize,
) -> Vec<BenchRow> {
    #[cfg(feature = "parallel")]
    {
        run_table_par(foon, kitchen, goals, repeats)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_table_seq(foon, kitchen, goals, repeats)
    }
}

/// Single-threaded [`run_table`].
pub fn run_table_seq(
    foon: &UniversalFoon,
    kitchen: &[KitchenItem],
    goals: &[ObjectNode],
    repeats: usize,
) -> Vec<BenchRow> {
    goals
        .iter()
        .flat_map(|goal| rows_for_goal(foon, kitchen, goal, repeats))
        .collect()
}

/// [`run_table`] with the rows computed concurrently per goal. Output order
/// is identical to the sequential version.
#[cfg(feature = "parallel")]
pub fn run_table_par(
    foon: &UniversalFoon,
    kitchen: &[KitchenItem],
    goals: &[ObjectNode],
    repeats: usize,
) -> Vec<BenchRow> {
    goals
        .par_iter()
        .map(|goal| rows_for_goal(foon, kitchen, goal, repeats))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn csv_field(text: &str) -> String {
    if text.contains(',') || text.contains('"') || text.contains('\n') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// CSV with columns `goal,algorithm,unit_count,elapsed_seconds,succeeded`.
pub fn render_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("goal,algorithm,unit_count,elapsed_seconds,succeeded\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{:.6},{}\n",
            csv_field(&row.goal),
            row.algorithm,
            row.unit_count,
            row.elapsed_seconds,
            row.succeeded
        ));
    }
    out
}

const BOLD: &str = "\x1b[1m";
const RED: &str = "\x1b[31m";
const RESET: &str = "\x1b[0m";

/// Aligned text table: one block of unit counts per goal and strategy, one
/// block of median times. Failed retrievals render as `fail`.
pub fn render_text_table(rows: &[BenchRow], color: bool) -> String {
    let mut goals: Vec<&str> = Vec::new();
    let mut by_goal: HashMap<&str, Vec<&BenchRow>> = HashMap::new();
    for row in rows {
        let entry = by_goal.entry(row.goal.as_str()).or_default();
        if entry.is_empty() {
            goals.push(row.goal.as_str());
        }
        entry.push(row);
    }
    let goal_width = goals
        .iter()
        .map(|g| g.len())
        .max()
        .unwrap_or(4)
        .max("goal".len());
    let col_width = 14;

    let paint = |text: &str, code: &str| {
        if color {
            format!("{code}{text}{RESET}")
        } else {
            text.to_string()
        }
    };
    type CellFormatter = fn(&BenchRow) -> String;
    let blocks: [(&str, CellFormatter); 2] = [
        ("task tree size (functional units)", |row| {
            row.unit_count.to_string()
        }),
        ("median retrieval time (seconds)", |row| {
            format!("{:.6}", row.elapsed_seconds)
        }),
    ];
    let mut out = String::new();
    for (title, fmt) in blocks {
        out.push_str(&paint(title, BOLD));
        out.push('\n');
        out.push_str(&paint(
            &format!(
                "{:<goal_width$} {:>col_width$} {:>col_width$} {:>col_width$}",
                "goal", "iddfs", "h1", "h2"
            ),
            BOLD,
        ));
        out.push('\n');
        for goal in &goals {
            out.push_str(&format!("{goal:<goal_width$}"));
            for row in &by_goal[goal] {
                let cell = if row.succeeded {
                    fmt(row)
                } else {
                    paint("fail", RED)
                };
                out.push_str(&format!(" {cell:>col_width$}"));
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MotionFlag, MotionNode};

    fn node(name: &str, state: &str) -> ObjectNode {
        ObjectNode::new(name, MotionFlag::Idle, [state], Vec::<String>::new()).unwrap()
    }

    fn item(name: &str, state: &str) -> KitchenItem {
        KitchenItem::new(name, [state], Vec::<String>::new()).unwrap()
    }

    fn unit(
        inputs: &[(&str, &str)],
        motion: &str,
        rate: f64,
        outputs: &[(&str, &str)],
    ) -> FunctionalUnit {
        let build =
            |specs: &[(&str, &str)]| specs.iter().map(|(n, s)| node(n, s)).collect::<Vec<_>>();
        FunctionalUnit::new(
            build(inputs),
            MotionNode::new(motion, None, rate).unwrap(),
            build(outputs),
            0,
        )
        .unwrap()
    }

    #[test]
    fn single_unit_network_has_exactly_one_tree() {
        let foon = UniversalFoon::merge([vec![unit(
            &[("tea cup", "unsweetened tea"), ("spoon", "clean")],
            "stir",
            1.0,
            &[("tea", "sweetened tea")],
        )]]);
        let kitchen = vec![item("tea cup", "unsweetened tea"), item("spoon", "clean")];
        let oracle = enumerate_trees(&foon, &kitchen, &node("tea", "sweetened tea"), 10, 1000);
        assert!(!oracle.truncated);
        assert_eq!(oracle.trees.len(), 1);
        assert_eq!(oracle.trees[0].ordinals, BTreeSet::from([0]));
        assert_eq!(oracle.trees[0].depth, 1);
    }

    #[test]
    fn goal_in_kitchen_yields_only_the_empty_tree() {
        let foon = UniversalFoon::merge([vec![unit(
            &[("water", "cold")],
            "boil",
            1.0,
            &[("water", "hot")],
        )]]);
        let kitchen = vec![item("water", "hot")];
        let oracle = enumerate_trees(&foon, &kitchen, &node("water", "hot"), 10, 1000);
        assert_eq!(oracle.trees.len(), 1);
        assert!(oracle.trees[0].ordinals.is_empty());
        assert_eq!(oracle.trees[0].depth, 0);
    }

    #[test]
    fn independent_creators_give_two_trees() {
        let foon = UniversalFoon::merge([vec![
            unit(&[("water", "cold")], "boil", 0.9, &[("water", "hot")]),
            unit(
                &[("water", "cold"), ("pan", "clean")],
                "heat",
                0.8,
                &[("water", "hot")],
            ),
        ]]);
        let kitchen = vec![item("water", "cold"), item("pan", "clean")];
        let oracle = enumerate_trees(&foon, &kitchen, &node("water", "hot"), 10, 1000);
        assert_eq!(oracle.trees.len(), 2);
        assert_eq!(oracle.min_depth(), Some(1));
    }

    #[test]
    fn chains_report_their_dependency_depth() {
        let foon = UniversalFoon::merge([vec![
            unit(&[("b", "done")], "finish", 1.0, &[("a", "done")]),
            unit(&[("c", "done")], "assemble", 1.0, &[("b", "done")]),
            unit(&[("raw", "fresh")], "prepare", 1.0, &[("c", "done")]),
        ]]);
        let kitchen = vec![item("raw", "fresh")];
        let oracle = enumerate_trees(&foon, &kitchen, &node("a", "done"), 10, 1000);
        assert_eq!(oracle.trees.len(), 1);
        assert_eq!(oracle.trees[0].depth, 3);
        // finalized execution order: prepare, assemble, finish
        let labels: Vec<&str> = oracle.trees[0]
            .units
            .iter()
            .map(|u| u.motion().label())
            .collect();
        assert_eq!(labels, vec!["prepare", "assemble", "finish"]);
    }

    #[test]
    fn cyclic_networks_terminate_and_unsolvable_goals_yield_no_trees() {
        let foon = UniversalFoon::merge([vec![
            unit(&[("starter", "active")], "feed", 1.0, &[("starter", "fed")]),
            unit(
                &[("starter", "fed")],
                "ferment",
                1.0,
                &[("starter", "active")],
            ),
        ]]);
        let oracle = enumerate_trees(&foon, &[], &node("starter", "active"), 10, 1000);
        assert!(oracle.trees.is_empty());
        assert!(!oracle.truncated);
    }

    #[test]
    fn cap_sets_the_truncated_flag() {
        // two creators per object over a three-level chain: 8 derivations
        let mut units = Vec::new();
        for (from, to) in [("x", "y"), ("y", "z"), ("z", "goal")] {
            units.push(unit(&[(from, "s")], "fast", 0.9, &[(to, "s")]));
            units.push(unit(
                &[(from, "s"), ("tool", "s")],
                "slow",
                0.8,
                &[(to, "s")],
            ));
        }
        let foon = UniversalFoon::merge([units]);
        let kitchen = vec![item("x", "s"), item("tool", "s")];
        let full = enumerate_trees(&foon, &kitchen, &node("goal", "s"), 10, 100_000);
        assert_eq!(full.trees.len(), 8);
        assert!(!full.truncated);
        let capped = enumerate_trees(&foon, &kitchen, &node("goal", "s"), 10, 3);
        assert!(capped.truncated);
        assert!(capped.trees.len() < 8);
    }

    #[test]
    fn run_table_records_failures_without_aborting() {
        let foon = UniversalFoon::merge([vec![unit(
            &[("water", "cold")],
            "boil",
            1.0,
            &[("water", "hot")],
        )]]);
        let kitchen = vec![item("water", "cold")];
        let goals = vec![
            node("water", "hot"),
            node("water", "cold"),
            node("coffee", "brewed"),
        ];
        let rows = run_table_seq(&foon, &kitchen, &goals, 2);
        assert_eq!(rows.len(), 9);
        // solvable goal
        assert!(rows[0..3].iter().all(|r| r.succeeded && r.unit_count == 1));
        // goal already in the kitchen
        assert!(rows[3..6].iter().all(|r| r.succeeded && r.unit_count == 0));
        // unreachable goal
        assert!(rows[6..9].iter().all(|r| !r.succeeded && r.unit_count == 0));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_and_sequential_tables_agree() {
        let foon = UniversalFoon::merge([vec![
            unit(&[("water", "cold")], "boil", 1.0, &[("water", "hot")]),
            unit(
                &[("water", "hot"), ("leaf", "dry")],
                "steep",
                0.9,
                &[("tea", "ready")],
            ),
        ]]);
        let kitchen = vec![item("water", "cold"), item("leaf", "dry")];
        let goals = vec![node("tea", "ready"), node("water", "hot")];
        let seq = run_table_seq(&foon, &kitchen, &goals, 1);
        let par = run_table_par(&foon, &kitchen, &goals, 1);
        assert_eq!(seq.len(), par.len());
        for (s, p) in seq.iter().zip(&par) {
            assert_eq!(
                (s.goal.clone(), s.algorithm, s.unit_count, s.succeeded),
                (p.goal.clone(), p.algorithm, p.unit_count, p.succeeded)
            );
        }
    }

    #[test]
    fn csv_quotes_fields_with_commas() {
        let rows = vec![BenchRow {
            goal: "salad (mixed) {cucumber, tomato}".into(),
            algorithm: Strategy::Iddfs,
            unit_count: 7,
            elapsed_seconds: 0.000123,
            succeeded: true,
        }];
        let csv = render_csv(&rows);
        assert!(csv.starts_with("goal,algorithm,unit_count,elapsed_seconds,succeeded\n"));
        assert!(csv.contains("\"salad (mixed) {cucumber, tomato}\",iddfs,7,0.000123,true"));
    }

    #[test]
    fn text_table_lists_each_goal_once() {
        let foon = UniversalFoon::merge([vec![unit(
            &[("water", "cold")],
            "boil",
            1.0,
            &[("water", "hot")],
        )]]);
        let kitchen = vec![item("water", "cold")];
        let rows = run_table_seq(&foon, &kitchen, &[node("water", "hot")], 1);
        let table = render_text_table(&rows, false);
        assert_eq!(table.matches("water (hot)").count(), 2); // size block + time block
        assert!(table.contains("iddfs"));
        assert!(!table.contains('\x1b'));
        let colored = render_text_table(&rows, true);
        assert!(colored.contains('\x1b'));
    }
}
