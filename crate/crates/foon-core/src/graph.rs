//! The universal network: a deduplicated union of subgraphs indexed by which
//! units create which objects.

use std::collections::{BTreeMap, HashSet};

use crate::model::{FunctionalUnit, ObjectKey, ObjectNode, UnitKey};

/// Union of subgraphs with duplicate units removed. Units keep their merge
/// order (file order, files in argument order) as `source_ordinal`;
/// `creators` maps each flag-excluded output key to the ordinals of the
/// units that produce it.
///
/// Immutable after `merge`, so concurrent read-only retrievals over one
/// instance are safe.
#[derive(Debug, Clone)]
pub struct UniversalFoon {
    units: Vec<FunctionalUnit>,
    creators: BTreeMap<ObjectKey, Vec<usize>>,
    duplicates_removed: usize,
}

impl UniversalFoon {
    /// Union the given subgraphs in encounter order, skipping any unit whose
    /// key was already seen and renumbering the survivors.
    pub fn merge(subgraphs: impl IntoIterator<Item = Vec<FunctionalUnit>>) -> Self {
        let mut seen: HashSet<UnitKey> = HashSet::new();
        let mut units = Vec::new();
        let mut duplicates_removed = 0;
        for subgraph in subgraphs {
            for unit in subgraph {
                if seen.insert(unit.key()) {
                    let ordinal = units.len();
                    units.push(unit.with_ordinal(ordinal));
                } else {
                    duplicates_removed += 1;
                }
            }
        }
        let creators = build_creators_index(&units);
        UniversalFoon {
            units,
            creators,
            duplicates_removed,
        }
    }

    pub fn units(&self) -> &[FunctionalUnit] {
        &self.units
    }

    pub fn unit(&self, ordinal: usize) -> &FunctionalUnit {
        &self.units[ordinal]
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// How many duplicate units the merge dropped.
    pub fn duplicates_removed(&self) -> usize {
        self.duplicates_removed
    }

    pub fn creators_index(&self) -> &BTreeMap<ObjectKey, Vec<usize>> {
        &self.creators
    }

    /// Ordinals of the units whose outputs contain `key` (flag-excluded),
    /// in merge order. This is the candidate set every retrieval strategy
    /// selects from, so the order here fixes tie-breaking everywhere.
    pub fn creator_ordinals(&self, key: &ObjectKey) -> &[usize] {
        self.creators
            .get(&key.without_flag())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// The units that create `goal`, in merge order; empty if the network
    /// does not know how to make it.
    pub fn creators_of(&self, goal: &ObjectNode) -> Vec<&FunctionalUnit> {
        self.creator_ordinals(&goal.key(false))
            .iter()
            .map(|&i| &self.units[i])
            .collect()
    }
}

fn build_creators_index(units: &[FunctionalUnit]) -> BTreeMap<ObjectKey, Vec<usize>> {
    let mut index: BTreeMap<ObjectKey, Vec<usize>> = BTreeMap::new();
    for (ordinal, unit) in units.iter().enumerate() {
        for key in unit.output_keys() {
            index.entry(key).or_default().push(ordinal);
        }
    }
    index
}
