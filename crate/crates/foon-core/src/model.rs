//! Domain types for functional object-oriented networks: object nodes,
//! motion nodes, functional units, kitchen items, and the canonical keys
//! used for deduplication and availability matching.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("object name is empty")]
    EmptyName,
    #[error("object `{0}` has no states")]
    NoStates(String),
    #[error("object `{0}` has an empty state")]
    EmptyState(String),
    #[error("object `{0}` has an empty ingredient")]
    EmptyIngredient(String),
    #[error("motion label is empty")]
    EmptyMotionLabel,
    #[error("motion label `{0}` must be a single token")]
    MultiTokenMotionLabel(String),
    #[error("provenance tag `{0}` must be a single token")]
    MultiTokenProvenance(String),
    #[error("success rate {0} is outside [0, 1]")]
    SuccessRateOutOfRange(f64),
    #[error("functional unit has no input objects")]
    NoInputs,
    #[error("functional unit has no output objects")]
    NoOutputs,
}

/// Whether the object is being manipulated (`1`) or sits idle (`0`)
/// during the unit's motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MotionFlag {
    Idle = 0,
    Moving = 1,
}

impl MotionFlag {
    pub fn as_digit(self) -> char {
        match self {
            MotionFlag::Idle => '0',
            MotionFlag::Moving => '1',
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "0" => Some(MotionFlag::Idle),
            "1" => Some(MotionFlag::Moving),
            _ => None,
        }
    }
}

/// Trim and collapse internal whitespace runs to single spaces.
pub(crate) fn normalize_text(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn normalize_set(
    items: impl IntoIterator<Item = impl Into<String>>,
    on_empty: impl Fn() -> ModelError,
) -> Result<BTreeSet<String>, ModelError> {
    let mut set = BTreeSet::new();
    for item in items {
        let text = normalize_text(&item.into());
        if text.is_empty() {
            return Err(on_empty());
        }
        set.insert(text);
    }
    Ok(set)
}

/// An object in a particular state, possibly carrying ingredients.
///
/// Construction normalizes whitespace in every text field and keeps states
/// and ingredients as sorted sets, so two nodes describing the same thing
/// compare equal no matter how the annotation spelled them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObjectNode {
    name: String,
    motion_flag: MotionFlag,
    states: BTreeSet<String>,
    ingredients: BTreeSet<String>,
}

impl ObjectNode {
    pub fn new(
        name: &str,
        motion_flag: MotionFlag,
        states: impl IntoIterator<Item = impl Into<String>>,
        ingredients: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self, ModelError> {
        let name = normalize_text(name);
        if name.is_empty() {
            return Err(ModelError::EmptyName);
        }
        let states = normalize_set(states, || ModelError::EmptyState(name.clone()))?;
        if states.is_empty() {
            return Err(ModelError::NoStates(name.clone()));
        }
        let ingredients = normalize_set(ingredients, || ModelError::EmptyIngredient(name.clone()))?;
        Ok(ObjectNode {
            name,
            motion_flag,
            states,
            ingredients,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn motion_flag(&self) -> MotionFlag {
        self.motion_flag
    }

    pub fn states(&self) -> &BTreeSet<String> {
        &self.states
    }

    pub fn ingredients(&self) -> &BTreeSet<String> {
        &self.ingredients
    }

    /// Canonical comparison key. With `include_flag` the motion flag takes
    /// part in equality (union dedup); without it the key only describes
    /// what the object is (availability and goal matching).
    pub fn key(&self, include_flag: bool) -> ObjectKey {
        ObjectKey {
            name: self.name.clone(),
            states: self.states.iter().cloned().collect(),
            ingredients: self.ingredients.iter().cloned().collect(),
            motion_flag: include_flag.then_some(self.motion_flag),
        }
    }
}

/// An item available in the kitchen. Same normalization as [`ObjectNode`];
/// the motion flag is deliberately absent because availability is about what
/// the object is, not whether it is currently moving.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KitchenItem {
    name: String,
    states: BTreeSet<String>,
    ingredients: BTreeSet<String>,
}

impl KitchenItem {
    pub fn new(
        name: &str,
        states: impl IntoIterator<Item = impl Into<String>>,
        ingredients: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self, ModelError> {
        let name = normalize_text(name);
        if name.is_empty() {
            return Err(ModelError::EmptyName);
        }
        let states = normalize_set(states, || ModelError::EmptyState(name.clone()))?;
        if states.is_empty() {
            return Err(ModelError::NoStates(name.clone()));
        }
        let ingredients = normalize_set(ingredients, || ModelError::EmptyIngredient(name.clone()))?;
        Ok(KitchenItem {
            name,
            states,
            ingredients,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &BTreeSet<String> {
        &self.states
    }

    pub fn ingredients(&self) -> &BTreeSet<String> {
        &self.ingredients
    }

    pub fn key(&self) -> ObjectKey {
        ObjectKey {
            name: self.name.clone(),
            states: self.states.iter().cloned().collect(),
            ingredients: self.ingredients.iter().cloned().collect(),
            motion_flag: None,
        }
    }

    /// The same item as a goal node (idle flag; the flag is ignored by
    /// every matching operation anyway).
    pub fn to_object_node(&self) -> ObjectNode {
        ObjectNode {
            name: self.name.clone(),
            motion_flag: MotionFlag::Idle,
            states: self.states.clone(),
            ingredients: self.ingredients.clone(),
        }
    }
}

/// Opaque comparable key for an object node: normalized name, sorted states,
/// sorted ingredients, and optionally the motion flag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectKey {
    name: String,
    states: Vec<String>,
    ingredients: Vec<String>,
    motion_flag: Option<MotionFlag>,
}

impl ObjectKey {
    pub fn name(&self) -> &str {
        &self.name
    }

    /// The same key with the motion flag stripped.
    pub fn without_flag(&self) -> ObjectKey {
        ObjectKey {
            motion_flag: None,
            ..self.clone()
        }
    }
}

impl fmt::Display for ObjectKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.name, self.states.join(", "))?;
        if !self.ingredients.is_empty() {
            write!(f, " {{{}}}", self.ingredients.join(", "))?;
        }
        match self.motion_flag {
            Some(MotionFlag::Moving) => write!(f, " [moving]"),
            Some(MotionFlag::Idle) => write!(f, " [idle]"),
            None => Ok(()),
        }
    }
}

/// A manipulation label with an optional provenance tag and a success rate
/// in [0, 1] (1.0 when the annotation carries no weight).
#[derive(Debug, Clone, PartialEq)]
pub struct MotionNode {
    label: String,
    provenance: Option<String>,
    success_rate: f64,
}

pub const DEFAULT_SUCCESS_RATE: f64 = 1.0;

impl MotionNode {
    pub fn new(
        label: &str,
        provenance: Option<&str>,
        success_rate: f64,
    ) -> Result<Self, ModelError> {
        let label = normalize_text(label);
        if label.is_empty() {
            return Err(ModelError::EmptyMotionLabel);
        }
        // Single-token labels keep the text format unambiguous: the serialized
        // motion line is `M <label> [provenance] [rate]` and multi-word motions
        // are written hyphenated (e.g. "pick-and-place").
        if label.contains(' ') {
            return Err(ModelError::MultiTokenMotionLabel(label));
        }
        let provenance = match provenance {
            Some(tag) => {
                let tag = normalize_text(tag);
                if tag.is_empty() {
                    None
                } else if tag.contains(' ') {
                    return Err(ModelError::MultiTokenProvenance(tag));
                } else {
                    Some(tag)
                }
            }
            None => None,
        };
        if !success_rate.is_finite() || !(0.0..=1.0).contains(&success_rate) {
            return Err(ModelError::SuccessRateOutOfRange(success_rate));
        }
        // Canonicalize -0.0 so the key bits are stable.
        let success_rate = if success_rate == 0.0 {
            0.0
        } else {
            success_rate
        };
        Ok(MotionNode {
            label,
            provenance,
            success_rate,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    pub fn success_rate(&self) -> f64 {
        self.success_rate
    }
}

/// The atomic subtask: input object nodes, one motion node, output object
/// nodes. Objects connect only through the motion node, so the bipartite
/// structure is guaranteed by construction.
#[derive(Debug, Clone)]
pub struct FunctionalUnit {
    inputs: Vec<ObjectNode>,
    motion: MotionNode,
    outputs: Vec<ObjectNode>,
    source_ordinal: usize,
}

impl FunctionalUnit {
    pub fn new(
        inputs: Vec<ObjectNode>,
        motion: MotionNode,
        outputs: Vec<ObjectNode>,
        source_ordinal: usize,
    ) -> Result<Self, ModelError> {
        if inputs.is_empty() {
            return Err(ModelError::NoInputs);
        }
        if outputs.is_empty() {
            return Err(ModelError::NoOutputs);
        }
        Ok(FunctionalUnit {
            inputs,
            motion,
            outputs,
            source_ordinal,
        })
    }

    pub fn inputs(&self) -> &[ObjectNode] {
        &self.inputs
    }

    pub fn motion(&self) -> &MotionNode {
        &self.motion
    }

    pub fn outputs(&self) -> &[ObjectNode] {
        &self.outputs
    }

    /// Position in file or merge order; used for deterministic tie-breaking.
    pub fn source_ordinal(&self) -> usize {
        self.source_ordinal
    }

    pub(crate) fn with_ordinal(mut self, ordinal: usize) -> Self {
        self.source_ordinal = ordinal;
        self
    }

    pub fn inputs_count(&self) -> usize {
        self.inputs.len()
    }

    /// Dedup key for union merging: sorted flagged input keys, motion label,
    /// success rate, sorted flagged output keys. Insensitive to the order
    /// objects were listed in the annotation; the provenance tag does not
    /// take part.
    pub fn key(&self) -> UnitKey {
        let mut inputs: Vec<ObjectKey> = self.inputs.iter().map(|o| o.key(true)).collect();
        let mut outputs: Vec<ObjectKey> = self.outputs.iter().map(|o| o.key(true)).collect();
        inputs.sort();
        outputs.sort();
        UnitKey {
            inputs,
            motion: self.motion.label.clone(),
            rate_bits: self.motion.success_rate.to_bits(),
            outputs,
        }
    }

    /// Flag-excluded keys of the inputs, first occurrence order, deduped.
    pub fn input_keys(&self) -> Vec<ObjectKey> {
        let mut seen = BTreeSet::new();
        self.inputs
            .iter()
            .map(|o| o.key(false))
            .filter(|k| seen.insert(k.clone()))
            .collect()
    }

    /// Flag-excluded keys of the outputs, first occurrence order, deduped.
    pub fn output_keys(&self) -> Vec<ObjectKey> {
        let mut seen = BTreeSet::new();
        self.outputs
            .iter()
            .map(|o| o.key(false))
            .filter(|k| seen.insert(k.clone()))
            .collect()
    }
}

/// Opaque comparable key identifying a functional unit up to object-list
/// reordering.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitKey {
    inputs: Vec<ObjectKey>,
    motion: String,
    rate_bits: u64,
    outputs: Vec<ObjectKey>,
}
