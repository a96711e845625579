//! Task tree retrieval: extract an executable sequence of functional units
//! that produces a goal node from a kitchen inventory.
//!
//! Three strategies are provided:
//!
//! * [`Strategy::Iddfs`] — iterative deepening: depth-bounded DFS with
//!   candidate backtracking, repeated with increasing bounds until every
//!   leaf of some derivation is available in the kitchen. Finds a tree of
//!   minimum dependency depth.
//! * [`Strategy::MaxSuccessRate`] — breadth-first outward from the goal,
//!   greedily selecting the creating unit with the highest success rate at
//!   every expansion (earliest merge ordinal on ties).
//! * [`Strategy::MinInputCount`] — same traversal, selecting the unit with
//!   the fewest input objects (earliest merge ordinal on ties).
//!
//! All three return the empty tree immediately when the goal is already in
//! the kitchen. Results are deterministic functions of the network and the
//! query.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::graph::UniversalFoon;
use crate::model::{FunctionalUnit, KitchenItem, ObjectKey, ObjectNode};

/// Upper bound for iterative deepening when the caller does not choose one.
pub const DEFAULT_MAX_DEPTH: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Iddfs,
    MaxSuccessRate,
    MinInputCount,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [
        Strategy::Iddfs,
        Strategy::MaxSuccessRate,
        Strategy::MinInputCount,
    ];

    /// Short stable name used in tables, CSV output, and the CLI.
    pub fn short_name(self) -> &'static str {
        match self {
            Strategy::Iddfs => "iddfs",
            Strategy::MaxSuccessRate => "h1",
            Strategy::MinInputCount => "h2",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// What to retrieve and how.
#[derive(Debug, Clone)]
pub struct RetrievalQuery {
    pub goal: ObjectNode,
    pub kitchen: Vec<KitchenItem>,
    pub strategy: Strategy,
    /// Iterative deepening bound; ignored by the breadth-first strategies.
    pub max_depth: usize,
    /// When true, the breadth-first strategies treat an object with no
    /// creating unit and no kitchen match as assumed-available (recorded as
    /// a warning) instead of failing. Iterative deepening always checks the
    /// kitchen: that check is its leaf test.
    pub lenient: bool,
}

impl RetrievalQuery {
    pub fn new(goal: ObjectNode, kitchen: Vec<KitchenItem>, strategy: Strategy) -> Self {
        RetrievalQuery {
            goal,
            kitchen,
            strategy,
            max_depth: DEFAULT_MAX_DEPTH,
            lenient: false,
        }
    }

    pub fn with_max_depth(mut self, max_depth: usize) -> Self {
        self.max_depth = max_depth.max(1);
        self
    }

    pub fn with_lenient(mut self, lenient: bool) -> Self {
        self.lenient = lenient;
        self
    }
}

/// One greedy selection made by a breadth-first strategy: which object was
/// expanded, which candidate ordinals were on offer, which one was chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub expanded: ObjectKey,
    pub candidates: Vec<usize>,
    pub chosen: usize,
}

/// An ordered list of functional units in execution order, together with
/// how it was obtained.
#[derive(Debug, Clone)]
pub struct TaskTree {
    units: Vec<FunctionalUnit>,
    goal: ObjectNode,
    strategy_used: Strategy,
    depth_bound_used: Option<usize>,
    selections: Vec<Selection>,
    assumed_available: Vec<ObjectKey>,
}

impl TaskTree {
    pub fn units(&self) -> &[FunctionalUnit] {
        &self.units
    }

    pub fn goal(&self) -> &ObjectNode {
        &self.goal
    }

    pub fn strategy_used(&self) -> Strategy {
        self.strategy_used
    }

    /// The iterative-deepening bound the tree was found at; 0 when the goal
    /// was already in the kitchen. `None` for the breadth-first strategies.
    pub fn depth_bound_used(&self) -> Option<usize> {
        self.depth_bound_used
    }

    /// Greedy selection trace (breadth-first strategies only).
    pub fn selections(&self) -> &[Selection] {
        &self.selections
    }

    /// Objects treated as available without a kitchen match (lenient mode).
    pub fn assumed_available(&self) -> &[ObjectKey] {
        &self.assumed_available
    }

    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    pub fn validate(&self, kitchen: &[KitchenItem]) -> ValidationReport {
        validate(&self.units, &self.goal, kitchen)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RetrievalError {
    #[error("unreachable goal: no functional unit creates {goal} and it is not in the kitchen")]
    UnreachableGoal { goal: ObjectKey },
    #[error(
        "no tree within depth bound {max_depth}; unresolved leaves: {}",
        format_keys(.unresolved)
    )]
    NoTreeWithinDepth {
        max_depth: usize,
        unresolved: Vec<ObjectKey>,
    },
    #[error("missing base item: {item} has no creating unit and is not in the kitchen")]
    MissingBaseItem { item: ObjectKey },
    #[error("non-executable tree: no ordering satisfies {}", format_keys(.unsatisfied))]
    NonExecutable { unsatisfied: Vec<ObjectKey> },
}

fn format_keys(keys: &[ObjectKey]) -> String {
    if keys.is_empty() {
        return "(none)".into();
    }
    keys.iter()
        .map(ObjectKey::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// True iff some kitchen item matches the goal exactly: same normalized
/// name, same state set, same ingredient set. The motion flag is ignored.
pub fn in_kitchen(goal: &ObjectNode, kitchen: &[KitchenItem]) -> bool {
    let key = goal.key(false);
    kitchen.iter().any(|item| item.key() == key)
}

/// Run the query's strategy against the network.
pub fn retrieve(foon: &UniversalFoon, query: &RetrievalQuery) -> Result<TaskTree, RetrievalError> {
    match query.strategy {
        Strategy::Iddfs => retrieve_iddfs(foon, query),
        Strategy::MaxSuccessRate => retrieve_bfs(foon, query, select_max_success_rate),
        Strategy::MinInputCount => retrieve_bfs(foon, query, select_min_input_count),
    }
}

fn kitchen_keys(kitchen: &[KitchenItem]) -> HashSet<ObjectKey> {
    kitchen.iter().map(KitchenItem::key).collect()
}

fn empty_tree(query: &RetrievalQuery, depth_bound_used: Option<usize>) -> TaskTree {
    TaskTree {
        units: Vec::new(),
        goal: query.goal.clone(),
        strategy_used: query.strategy,
        depth_bound_used,
        selections: Vec::new(),
        assumed_available: Vec::new(),
    }
}

// ---------------------------------------------------------------------------
// Iterative deepening
// ---------------------------------------------------------------------------

/// A resolved object: the creating units collected in discovery order, the
/// dependency depth of the sub-derivation, and the set of object keys the
/// derivation produces along the way (its support). The support is what
/// makes memo reuse safe: a cached derivation may only be spliced in where
/// none of its keys is currently being derived higher up the path.
#[derive(Debug, Clone)]
struct Resolved {
    units: Vec<usize>,
    depth: usize,
    support: BTreeSet<ObjectKey>,
}

enum Resolution {
    Done(Resolved),
    /// `stack_dependent` failures were caused by the cycle guard somewhere
    /// below and may not be cached: the same object can still resolve on a
    /// different path.
    Failed {
        stack_dependent: bool,
    },
}

struct BoundedSearch<'a> {
    foon: &'a UniversalFoon,
    kitchen: &'a HashSet<ObjectKey>,
    memo_ok: HashMap<ObjectKey, Resolved>,
    /// Highest remaining depth at which the key failed for path-independent
    /// reasons.
    memo_failed: HashMap<ObjectKey, usize>,
    in_stack: HashSet<ObjectKey>,
    unresolved: BTreeSet<ObjectKey>,
    hit_depth_limit: bool,
}

impl<'a> BoundedSearch<'a> {
    fn new(foon: &'a UniversalFoon, kitchen: &'a HashSet<ObjectKey>) -> Self {
        BoundedSearch {
            foon,
            kitchen,
            memo_ok: HashMap::new(),
            memo_failed: HashMap::new(),
            in_stack: HashSet::new(),
            unresolved: BTreeSet::new(),
            hit_depth_limit: false,
        }
    }

    fn resolve(&mut self, key: &ObjectKey, remaining: usize) -> Resolution {
        if self.kitchen.contains(key) {
            return Resolution::Done(Resolved {
                units: Vec::new(),
                depth: 0,
                support: BTreeSet::new(),
            });
        }
        if let Some(cached) = self.memo_ok.get(key)
            && cached.depth <= remaining
            && cached.support.iter().all(|k| !self.in_stack.contains(k))
        {
            return Resolution::Done(cached.clone());
        }
        if let Some(&failed_at) = self.memo_failed.get(key)
            && remaining <= failed_at
        {
            return Resolution::Failed {
                stack_dependent: false,
            };
        }
        if remaining == 0 {
            self.hit_depth_limit = true;
            self.unresolved.insert(key.clone());
            return Resolution::Failed {
                stack_dependent: false,
            };
        }
        let candidates = self.foon.creator_ordinals(key);
        if candidates.is_empty() {
            self.unresolved.insert(key.clone());
            self.memo_failed.insert(key.clone(), usize::MAX);
            return Resolution::Failed {
                stack_dependent: false,
            };
        }
        if self.in_stack.contains(key) {
            self.unresolved.insert(key.clone());
            return Resolution::Failed {
                stack_dependent: true,
            };
        }

        self.in_stack.insert(key.clone());
        let mut stack_dependent = false;
        let mut outcome = None;
        'candidates: for &ordinal in candidates {
            let mut units = vec![ordinal];
            let mut seen: BTreeSet<usize> = units.iter().copied().collect();
            let mut depth = 0;
            let mut support = BTreeSet::new();
            support.insert(key.clone());
            for input in self.foon.unit(ordinal).input_keys() {
                match self.resolve(&input, remaining - 1) {
                    Resolution::Done(sub) => {
                        depth = depth.max(sub.depth);
                        support.extend(sub.support);
                        units.extend(sub.units.into_iter().filter(|u| seen.insert(*u)));
                    }
                    Resolution::Failed {
                        stack_dependent: dep,
                    } => {
                        stack_dependent |= dep;
                        continue 'candidates;
                    }
                }
            }
            outcome = Some(Resolved {
                units,
                depth: depth + 1,
                support,
            });
            break;
        }
        self.in_stack.remove(key);

        match outcome {
            Some(resolved) => {
                let better = self
                    .memo_ok
                    .get(key)
                    .is_none_or(|cached| resolved.depth < cached.depth);
                if better {
                    self.memo_ok.insert(key.clone(), resolved.clone());
                }
                Resolution::Done(resolved)
            }
            None => {
                if !stack_dependent {
                    let entry = self.memo_failed.entry(key.clone()).or_insert(0);
                    *entry = (*entry).max(remaining);
                }
                Resolution::Failed { stack_dependent }
            }
        }
    }
}

fn retrieve_iddfs(
    foon: &UniversalFoon,
    query: &RetrievalQuery,
) -> Result<TaskTree, RetrievalError> {
    if in_kitchen(&query.goal, &query.kitchen) {
        return Ok(empty_tree(query, Some(0)));
    }
    let goal_key = query.goal.key(false);
    if foon.creator_ordinals(&goal_key).is_empty() {
        return Err(RetrievalError::UnreachableGoal { goal: goal_key });
    }
    let kitchen = kitchen_keys(&query.kitchen);
    let mut last_unresolved = Vec::new();
    for bound in 1..=query.max_depth {
        let mut search = BoundedSearch::new(foon, &kitchen);
        match search.resolve(&goal_key, bound) {
            Resolution::Done(resolved) => {
                let mut units: Vec<FunctionalUnit> = resolved
                    .units
                    .iter()
                    .map(|&i| foon.unit(i).clone())
                    .collect();
                units.reverse();
                let (units, _executable) = finalize(units, &query.kitchen);
                return Ok(TaskTree {
                    units,
                    goal: query.goal.clone(),
                    strategy_used: Strategy::Iddfs,
                    depth_bound_used: Some(bound),
                    selections: Vec::new(),
                    assumed_available: Vec::new(),
                });
            }
            Resolution::Failed { .. } => {
                last_unresolved = search.unresolved.into_iter().collect();
                if !search.hit_depth_limit {
                    // nothing bottomed out on the depth bound, so deeper
                    // bounds replay the exact same failure
                    break;
                }
            }
        }
    }
    Err(RetrievalError::NoTreeWithinDepth {
        max_depth: query.max_depth,
        unresolved: last_unresolved,
    })
}

// ---------------------------------------------------------------------------
// Breadth-first heuristics
// ---------------------------------------------------------------------------

fn select_max_success_rate(foon: &UniversalFoon, candidates: &[usize]) -> usize {
    // strict ">" keeps the earliest maximum
    let mut best = candidates[0];
    let mut max = f64::MIN;
    for &ordinal in candidates {
        let rate = foon.unit(ordinal).motion().success_rate();
        if rate > max {
            max = rate;
            best = ordinal;
        }
    }
    best
}

fn select_min_input_count(foon: &UniversalFoon, candidates: &[usize]) -> usize {
    let mut best = candidates[0];
    let mut min = usize::MAX;
    for &ordinal in candidates {
        let count = foon.unit(ordinal).inputs_count();
        if count < min {
            min = count;
            best = ordinal;
        }
    }
    best
}

fn retrieve_bfs(
    foon: &UniversalFoon,
    query: &RetrievalQuery,
    select: fn(&UniversalFoon, &[usize]) -> usize,
) -> Result<TaskTree, RetrievalError> {
    if in_kitchen(&query.goal, &query.kitchen) {
        return Ok(empty_tree(query, None));
    }
    let kitchen = kitchen_keys(&query.kitchen);
    let mut queue: VecDeque<ObjectNode> = VecDeque::new();
    let mut visited: HashSet<ObjectKey> = HashSet::new();
    let mut picked: Vec<usize> = Vec::new();
    let mut in_tree: HashSet<usize> = HashSet::new();
    let mut selections = Vec::new();
    let mut assumed = Vec::new();

    visited.insert(query.goal.key(false));
    queue.push_back(query.goal.clone());

    while let Some(current) = queue.pop_front() {
        let key = current.key(false);
        if kitchen.contains(&key) {
            continue;
        }
        let candidates = foon.creator_ordinals(&key);
        if candidates.is_empty() {
            if query.lenient {
                assumed.push(key);
                continue;
            }
            return Err(RetrievalError::MissingBaseItem { item: key });
        }
        let chosen = select(foon, candidates);
        selections.push(Selection {
            expanded: key,
            candidates: candidates.to_vec(),
            chosen,
        });
        if in_tree.insert(chosen) {
            picked.push(chosen);
        }
        for input in foon.unit(chosen).inputs() {
            if visited.insert(input.key(false)) {
                queue.push_back(input.clone());
            }
        }
    }

    let mut units: Vec<FunctionalUnit> = picked.iter().map(|&i| foon.unit(i).clone()).collect();
    units.reverse();
    let (units, executable) = finalize(units, &query.kitchen);
    if !executable && !query.lenient {
        let report = validate_order(&units, &kitchen);
        let unsatisfied: Vec<ObjectKey> = report
            .into_iter()
            .map(|(_, key)| key)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        return Err(RetrievalError::NonExecutable { unsatisfied });
    }
    Ok(TaskTree {
        units,
        goal: query.goal.clone(),
        strategy_used: query.strategy,
        depth_bound_used: None,
        selections,
        assumed_available: assumed,
    })
}

// ---------------------------------------------------------------------------
// Finalization and validation
// ---------------------------------------------------------------------------

/// Stable topological sort into execution order: repeatedly emit the
/// earliest-listed unit whose inputs are all kitchen-satisfied or already
/// produced. Relative order among simultaneously-ready units is preserved.
///
/// Returns the ordered list and whether it is executable; when some unit can
/// never become ready (possible for lenient-mode trees and cyclic
/// selections) the input list is returned unchanged with `false`.
pub fn finalize(
    units: Vec<FunctionalUnit>,
    kitchen: &[KitchenItem],
) -> (Vec<FunctionalUnit>, bool) {
    let mut available = kitchen_keys(kitchen);
    let mut remaining: Vec<Option<FunctionalUnit>> = units.iter().cloned().map(Some).collect();
    let mut ordered = Vec::with_capacity(units.len());
    let mut left = remaining.len();
    while left > 0 {
        let ready = remaining.iter().position(|slot| {
            slot.as_ref()
                .is_some_and(|unit| unit.input_keys().iter().all(|k| available.contains(k)))
        });
        match ready {
            Some(idx) => {
                let unit = remaining[idx].take().unwrap();
                available.extend(unit.output_keys());
                ordered.push(unit);
                left -= 1;
            }
            None => return (units, false),
        }
    }
    (ordered, true)
}

/// Inputs that are neither kitchen-satisfied nor produced by an earlier
/// unit, as (position, key) pairs.
fn validate_order(
    units: &[FunctionalUnit],
    kitchen: &HashSet<ObjectKey>,
) -> Vec<(usize, ObjectKey)> {
    let mut produced: HashSet<ObjectKey> = HashSet::new();
    let mut violations = Vec::new();
    for (position, unit) in units.iter().enumerate() {
        for key in unit.input_keys() {
            if !kitchen.contains(&key) && !produced.contains(&key) {
                violations.push((position, key));
            }
        }
        produced.extend(unit.output_keys());
    }
    violations
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A unit consumes something no earlier unit produced and the kitchen
    /// does not hold.
    UnsatisfiedInput { position: usize, input: ObjectKey },
    /// The goal is neither in the kitchen nor produced by any unit.
    GoalNotProduced { goal: ObjectKey },
    /// A unit after the goal's final producer consumes the goal again, so
    /// the tree finishes without it.
    GoalConsumedAfterProduction { position: usize, goal: ObjectKey },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnsatisfiedInput { position, input } => {
                write!(f, "unit {position}: input {input} is not satisfied")
            }
            Violation::GoalNotProduced { goal } => {
                write!(f, "goal {goal} is never produced and is not in the kitchen")
            }
            Violation::GoalConsumedAfterProduction { position, goal } => {
                write!(
                    f,
                    "unit {position} consumes the goal {goal} after its last production"
                )
            }
        }
    }
}

/// Soundness report for a task tree against a kitchen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            writeln!(f, "valid")
        } else {
            writeln!(f, "invalid: {} violation(s)", self.violations.len())?;
            for violation in &self.violations {
                writeln!(f, "  {violation}")?;
            }
            Ok(())
        }
    }
}

/// Check a unit list in execution order: every input must be satisfied by
/// the kitchen or an earlier unit, and the goal must come out of the run
/// still available.
pub fn validate(
    units: &[FunctionalUnit],
    goal: &ObjectNode,
    kitchen: &[KitchenItem],
) -> ValidationReport {
    let kitchen_set = kitchen_keys(kitchen);
    let mut violations: Vec<Violation> = validate_order(units, &kitchen_set)
        .into_iter()
        .map(|(position, input)| Violation::UnsatisfiedInput { position, input })
        .collect();

    let goal_key = goal.key(false);
    let last_producer = units
        .iter()
        .enumerate()
        .rev()
        .find(|(_, unit)| unit.output_keys().contains(&goal_key))
        .map(|(position, _)| position);
    match last_producer {
        Some(position) => {
            for (later, unit) in units.iter().enumerate().skip(position + 1) {
                if unit.input_keys().contains(&goal_key) {
                    violations.push(Violation::GoalConsumedAfterProduction {
                        position: later,
                        goal: goal_key.clone(),
                    });
                }
            }
        }
        None => {
            if !kitchen_set.contains(&goal_key) {
                violations.push(Violation::GoalNotProduced { goal: goal_key });
            }
        }
    }
    ValidationReport { violations }
}
