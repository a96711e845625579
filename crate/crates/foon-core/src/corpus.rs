//! Seed-deterministic random network generation for property tests and
//! benchmarks. The same seed always produces the same network within one
//! build, so expected values frozen against a seed stay stable.
//!
//! Generated networks deliberately include duplicate units (to exercise
//! merge deduplication), objects missing from the kitchen, multiple creators
//! per object, and the occasional cycle.

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use crate::model::{FunctionalUnit, KitchenItem, MotionFlag, MotionNode, ObjectNode};

const NAMES: [&str; 10] = [
    "dough", "broth", "noodle", "rice", "egg", "tofu", "carrot", "onion", "stock", "bun",
];
const STATES: [&str; 8] = [
    "raw", "washed", "chopped", "cooked", "seared", "mixed", "rested", "plated",
];
const INGREDIENTS: [&str; 3] = ["salt", "oil", "garlic"];
const MOTIONS: [&str; 8] = [
    "chop", "boil", "mix", "fry", "steam", "pour", "knead", "plate",
];

/// Knobs for [`random_network_with`].
#[derive(Debug, Clone)]
pub struct NetworkSpec {
    pub min_units: usize,
    pub max_units: usize,
    pub min_objects: usize,
    pub max_objects: usize,
    /// Probability that a pool object is stocked in the kitchen.
    pub kitchen_probability: f64,
    /// Probability that a generated unit duplicates an earlier one.
    pub duplicate_probability: f64,
}

impl Default for NetworkSpec {
    fn default() -> Self {
        NetworkSpec {
            min_units: 1,
            max_units: 12,
            min_objects: 3,
            max_objects: 8,
            kitchen_probability: 0.55,
            duplicate_probability: 0.15,
        }
    }
}

/// A generated network split into subgraphs, with a kitchen and the goal
/// nodes worth querying (objects some unit produces).
#[derive(Debug, Clone)]
pub struct GeneratedNetwork {
    pub subgraphs: Vec<Vec<FunctionalUnit>>,
    pub kitchen: Vec<KitchenItem>,
    pub goals: Vec<ObjectNode>,
}

impl GeneratedNetwork {
    pub fn all_units(&self) -> Vec<FunctionalUnit> {
        self.subgraphs.iter().flatten().cloned().collect()
    }
}

pub fn random_network(seed: u64) -> GeneratedNetwork {
    random_network_with(seed, &NetworkSpec::default())
}

pub fn random_network_with(seed: u64, spec: &NetworkSpec) -> GeneratedNetwork {
    let mut rng = StdRng::seed_from_u64(seed);

    // distinct object pool (distinct flag-excluded keys)
    let min_objects = spec.min_objects.max(3);
    let target = rng.random_range(min_objects..=spec.max_objects.max(min_objects));
    let mut pool: Vec<ObjectNode> = Vec::new();
    let mut attempts = 0;
    while pool.len() < target && attempts < target * 20 {
        attempts += 1;
        let name = NAMES[rng.random_range(0..NAMES.len())];
        let state = STATES[rng.random_range(0..STATES.len())];
        let mut states = vec![state.to_string()];
        if rng.random_bool(0.2) {
            states.push(STATES[rng.random_range(0..STATES.len())].to_string());
        }
        let mut ingredients: Vec<String> = Vec::new();
        if rng.random_bool(0.3) {
            ingredients.push(INGREDIENTS[rng.random_range(0..INGREDIENTS.len())].to_string());
        }
        let flag = if rng.random_bool(0.25) {
            MotionFlag::Moving
        } else {
            MotionFlag::Idle
        };
        let node = ObjectNode::new(name, flag, states, ingredients).unwrap();
        if pool.iter().all(|other| other.key(false) != node.key(false)) {
            pool.push(node);
        }
    }

    let min_units = spec.min_units.max(1);
    let n_units = rng.random_range(min_units..=spec.max_units.max(min_units));
    let mut units: Vec<FunctionalUnit> = Vec::new();
    for ordinal in 0..n_units {
        if !units.is_empty() && rng.random_bool(spec.duplicate_probability) {
            let source = rng.random_range(0..units.len());
            units.push(units[source].clone().with_ordinal(ordinal));
            continue;
        }
        let pick_distinct = |rng: &mut StdRng, count: usize| {
            let mut indices: Vec<usize> = Vec::new();
            while indices.len() < count.min(pool.len()) {
                let idx = rng.random_range(0..pool.len());
                if !indices.contains(&idx) {
                    indices.push(idx);
                }
            }
            indices
        };
        let n_inputs = rng.random_range(1..=3);
        let inputs: Vec<ObjectNode> = pick_distinct(&mut rng, n_inputs)
            .into_iter()
            .map(|i| pool[i].clone())
            .collect();
        let n_outputs = rng.random_range(1..=2);
        let outputs: Vec<ObjectNode> = pick_distinct(&mut rng, n_outputs)
            .into_iter()
            .map(|i| pool[i].clone())
            .collect();
        let rate = rng.random_range(0..=20) as f64 / 20.0;
        let provenance = if rng.random_bool(0.2) {
            Some("Assumed")
        } else {
            None
        };
        let motion = MotionNode::new(
            MOTIONS[rng.random_range(0..MOTIONS.len())],
            provenance,
            rate,
        )
        .unwrap();
        units.push(FunctionalUnit::new(inputs, motion, outputs, ordinal).unwrap());
    }

    // split into 1..=3 subgraph files
    let n_subgraphs = rng.random_range(1..=3.min(units.len()));
    let mut subgraphs: Vec<Vec<FunctionalUnit>> = vec![Vec::new(); n_subgraphs];
    for (idx, unit) in units.iter().cloned().enumerate() {
        subgraphs[idx % n_subgraphs].push(unit);
    }

    let kitchen: Vec<KitchenItem> = pool
        .iter()
        .filter(|_| rng.random_bool(spec.kitchen_probability))
        .map(|node| {
            KitchenItem::new(
                node.name(),
                node.states().iter().cloned(),
                node.ingredients().iter().cloned(),
            )
            .unwrap()
        })
        .collect();

    // goals: pool objects some unit produces, in first-production order
    let mut goals: Vec<ObjectNode> = Vec::new();
    for unit in &units {
        for output in unit.outputs() {
            let key = output.key(false);
            if goals.iter().all(|g| g.key(false) != key) {
                goals.push(output.clone());
            }
        }
    }

    GeneratedNetwork {
        subgraphs,
        kitchen,
        goals,
    }
}
