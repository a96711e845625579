//! Graphviz DOT export of a universal network.
//!
//! Object nodes render as ellipses labeled `name\nstate[,state]`, motion
//! nodes as filled red boxes labeled with the motion. Objects consumed by
//! at least one unit fill green, output-only objects fill blue. Edges run
//! object→motion and motion→object only, matching the bipartite structure.

use std::collections::BTreeSet;
use std::collections::HashMap;

use crate::graph::UniversalFoon;
use crate::model::{ObjectKey, ObjectNode};

fn escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}

fn object_label(node: &ObjectNode) -> String {
    let states: Vec<&str> = node.states().iter().map(String::as_str).collect();
    format!("{}\\n{}", escape(node.name()), escape(&states.join(",")))
}

/// Render the whole network as a DOT digraph.
pub fn export_dot(foon: &UniversalFoon) -> String {
    // object nodes are shared across units by flag-excluded key
    let mut object_ids: HashMap<ObjectKey, usize> = HashMap::new();
    let mut object_labels: Vec<String> = Vec::new();
    let mut consumed: BTreeSet<usize> = BTreeSet::new();
    let mut edges: Vec<(String, String)> = Vec::new();

    let intern = |node: &ObjectNode,
                  object_ids: &mut HashMap<ObjectKey, usize>,
                  object_labels: &mut Vec<String>| {
        let key = node.key(false);
        *object_ids.entry(key).or_insert_with(|| {
            object_labels.push(object_label(node));
            object_labels.len() - 1
        })
    };

    for (unit_idx, unit) in foon.units().iter().enumerate() {
        let motion_id = format!("m{unit_idx}");
        let mut seen_in: BTreeSet<usize> = BTreeSet::new();
        for input in unit.inputs() {
            let id = intern(input, &mut object_ids, &mut object_labels);
            consumed.insert(id);
            if seen_in.insert(id) {
                edges.push((format!("o{id}"), motion_id.clone()));
            }
        }
        let mut seen_out: BTreeSet<usize> = BTreeSet::new();
        for output in unit.outputs() {
            let id = intern(output, &mut object_ids, &mut object_labels);
            if seen_out.insert(id) {
                edges.push((motion_id.clone(), format!("o{id}")));
            }
        }
    }

    let mut out = String::from("digraph foon {\n");
    if !foon.is_empty() {
        out.push_str("  rankdir=LR;\n");
    }
    for (id, label) in object_labels.iter().enumerate() {
        let fill = if consumed.contains(&id) {
            "green"
        } else {
            "blue"
        };
        out.push_str(&format!(
            "  o{id} [shape=ellipse, style=filled, fillcolor={fill}, label=\"{label}\"];\n"
        ));
    }
    for (unit_idx, unit) in foon.units().iter().enumerate() {
        out.push_str(&format!(
            "  m{unit_idx} [shape=box, style=filled, fillcolor=red, label=\"{}\"];\n",
            escape(unit.motion().label())
        ));
    }
    for (from, to) in &edges {
        out.push_str(&format!("  {from} -> {to};\n"));
    }
    out.push_str("}\n");
    out
}
