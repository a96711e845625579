//! Line-oriented parser and canonical serializer for the subgraph annotation
//! format and the kitchen inventory format.
//!
//! A subgraph file is a sequence of functional-unit blocks delimited by lines
//! that are exactly `//`. Within a block:
//!
//! ```text
//! O <name tokens> <flag>      object line; flag is 0 (idle) or 1 (moving)
//! S <state> [{ i1, i2, ... }] state of the most recent object, optional
//!                             brace-delimited ingredient list
//! M <label> [tag] [rate]      the motion; the trailing decimal in [0, 1]
//!                             is the success rate, a single extra token
//!                             (e.g. "Assumed") is a provenance tag
//! ```
//!
//! Objects before the `M` line are inputs, objects after it are outputs.
//! Blank lines are ignored and lines starting with `#` are comments. The
//! success-rate slot on the `M` line is a format extension; files without
//! weights parse with every rate defaulted to 1.0.
//!
//! A kitchen file uses the same `O`/`S` grammar with no motion lines; the
//! flag token on `O` lines is optional and ignored.
//!
//! Errors are collected rather than fail-fast so a hand-made file gets all
//! of its diagnostics in one pass; the parse as a whole fails if any
//! error-severity diagnostic was produced.

use std::collections::BTreeSet;
use std::fmt;

use crate::model::{
    DEFAULT_SUCCESS_RATE, FunctionalUnit, KitchenItem, MotionFlag, MotionNode, ObjectNode,
    normalize_text,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => write!(f, "error"),
            Severity::Warning => write!(f, "warning"),
        }
    }
}

/// One problem found while parsing, tagged with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}: {}", self.line, self.severity, self.message)
    }
}

pub type ParseResult<T> = Result<T, Vec<ParseDiagnostic>>;

/// Parse a subgraph annotation into functional units numbered in file order.
pub fn parse_subgraph(text: &str) -> ParseResult<Vec<FunctionalUnit>> {
    Parser::new(Mode::Subgraph)
        .run(text)
        .map(|parsed| parsed.units)
}

/// Parse a kitchen inventory. `//` delimiters are tolerated but not
/// required; each `O` block becomes one item.
pub fn parse_kitchen(text: &str) -> ParseResult<Vec<KitchenItem>> {
    Parser::new(Mode::Kitchen)
        .run(text)
        .map(|parsed| parsed.items)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Subgraph,
    Kitchen,
}

/// An `O` line plus the `S` lines collected under it.
struct ObjectDraft {
    line: usize,
    name: String,
    flag: MotionFlag,
    states: BTreeSet<String>,
    ingredients: BTreeSet<String>,
    // an S line was present but failed to parse; suppresses the
    // cascading "no S lines" diagnostic
    state_error: bool,
}

#[derive(Default)]
struct Parsed {
    units: Vec<FunctionalUnit>,
    items: Vec<KitchenItem>,
}

struct Parser {
    mode: Mode,
    diagnostics: Vec<ParseDiagnostic>,
    parsed: Parsed,
    // state of the block being accumulated
    block_start: Option<usize>,
    inputs: Vec<ObjectNode>,
    motion: Option<MotionNode>,
    // true once an M line was encountered, even if it failed to parse;
    // keeps later objects flowing to the outputs and avoids a second
    // "no M line" diagnostic for a block whose M line was itself bad
    motion_seen: bool,
    outputs: Vec<ObjectNode>,
    open_object: Option<ObjectDraft>,
    // an object in the current block was dropped after a diagnostic;
    // suppresses cascading no-inputs/no-outputs errors for the block
    object_error: bool,
}

impl Parser {
    fn new(mode: Mode) -> Self {
        Parser {
            mode,
            diagnostics: Vec::new(),
            parsed: Parsed::default(),
            block_start: None,
            inputs: Vec::new(),
            motion: None,
            motion_seen: false,
            outputs: Vec::new(),
            open_object: None,
            object_error: false,
        }
    }

    fn error(&mut self, line: usize, message: impl Into<String>) {
        self.diagnostics.push(ParseDiagnostic {
            line,
            severity: Severity::Error,
            message: message.into(),
        });
    }

    fn run(mut self, text: &str) -> ParseResult<Parsed> {
        for (idx, raw) in text.split('\n').enumerate() {
            let line_no = idx + 1;
            // trim_end also strips the \r of CRLF files
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line == "//" {
                self.close_block(line_no);
                continue;
            }
            let (kind, rest) = match line.split_once(char::is_whitespace) {
                Some((kind, rest)) => (kind, rest.trim()),
                None => (line, ""),
            };
            match kind {
                "O" => self.object_line(line_no, rest),
                "S" => self.state_line(line_no, rest),
                "M" => self.motion_line(line_no, rest),
                _ => self.error(line_no, format!("unrecognized line `{line}`")),
            }
            if self.block_start.is_none() {
                self.block_start = Some(line_no);
            }
        }
        self.close_block(text.split('\n').count());
        if self
            .diagnostics
            .iter()
            .any(|d| d.severity == Severity::Error)
        {
            Err(self.diagnostics)
        } else {
            Ok(self.parsed)
        }
    }

    fn object_line(&mut self, line: usize, rest: &str) {
        self.finish_open_object();
        let mut tokens: Vec<&str> = rest.split_whitespace().collect();
        let flag = match self.mode {
            Mode::Subgraph => match tokens.last().and_then(|t| MotionFlag::from_token(t)) {
                Some(flag) => {
                    tokens.pop();
                    flag
                }
                None => {
                    self.object_error = true;
                    self.error(
                        line,
                        format!(
                            "O line must end with motion flag 0 or 1, got `{}`",
                            tokens.last().unwrap_or(&"")
                        ),
                    );
                    return;
                }
            },
            // the kitchen grammar ignores the flag entirely
            Mode::Kitchen => {
                if tokens.len() >= 2
                    && let Some(last) = tokens.last()
                    && MotionFlag::from_token(last).is_some()
                {
                    tokens.pop();
                }
                MotionFlag::Idle
            }
        };
        let name = tokens.join(" ");
        if name.is_empty() {
            self.object_error = true;
            self.error(line, "O line has no object name");
            return;
        }
        self.open_object = Some(ObjectDraft {
            line,
            name,
            flag,
            states: BTreeSet::new(),
            ingredients: BTreeSet::new(),
            state_error: false,
        });
    }

    fn state_line(&mut self, line: usize, rest: &str) {
        let Some(draft) = self.open_object.as_mut() else {
            self.error(line, "S line with no preceding O line");
            return;
        };
        let (state_text, ingredient_text) = match split_braces(rest) {
            Ok(parts) => parts,
            Err(msg) => {
                self.open_object.as_mut().unwrap().state_error = true;
                self.error(line, msg);
                return;
            }
        };
        let state = normalize_text(state_text);
        if state.is_empty() {
            self.open_object.as_mut().unwrap().state_error = true;
            self.error(line, "S line has no state text");
            return;
        }
        draft.states.insert(state);
        if let Some(list) = ingredient_text {
            for item in list.split(',') {
                let item = normalize_text(item);
                if !item.is_empty() {
                    draft.ingredients.insert(item);
                }
            }
        }
    }

    fn motion_line(&mut self, line: usize, rest: &str) {
        if self.mode == Mode::Kitchen {
            self.error(line, "M line is not allowed in a kitchen file");
            return;
        }
        self.finish_open_object();
        if self.motion_seen {
            self.error(line, "unit has more than one M line");
            return;
        }
        self.motion_seen = true;
        let mut tokens: Vec<&str> = rest.split_whitespace().collect();
        if tokens.is_empty() {
            self.error(line, "M line has no motion label");
            return;
        }
        let mut rate = DEFAULT_SUCCESS_RATE;
        if tokens.len() >= 2
            && let Ok(value) = tokens.last().unwrap().parse::<f64>()
        {
            if value.is_finite() && (0.0..=1.0).contains(&value) {
                rate = value;
                tokens.pop();
            } else {
                self.error(line, format!("success rate {value} is outside [0, 1]"));
                return;
            }
        }
        let provenance = if tokens.len() >= 2 {
            tokens.pop()
        } else {
            None
        };
        if tokens.len() > 1 {
            self.error(
                line,
                format!(
                    "M line has extra tokens after the motion label: `{}`",
                    tokens.join(" ")
                ),
            );
            return;
        }
        match MotionNode::new(tokens[0], provenance, rate) {
            Ok(motion) => self.motion = Some(motion),
            Err(err) => self.error(line, err.to_string()),
        }
    }

    /// Move the accumulated O/S draft into the current unit (or the kitchen).
    fn finish_open_object(&mut self) {
        let Some(draft) = self.open_object.take() else {
            return;
        };
        if draft.states.is_empty() {
            self.object_error = true;
            if !draft.state_error {
                self.error(
                    draft.line,
                    format!("object `{}` has no S lines", draft.name),
                );
            }
            return;
        }
        match self.mode {
            Mode::Kitchen => match KitchenItem::new(&draft.name, draft.states, draft.ingredients) {
                Ok(item) => self.parsed.items.push(item),
                Err(err) => self.error(draft.line, err.to_string()),
            },
            Mode::Subgraph => {
                match ObjectNode::new(&draft.name, draft.flag, draft.states, draft.ingredients) {
                    Ok(node) => {
                        if self.motion_seen {
                            self.outputs.push(node);
                        } else {
                            self.inputs.push(node);
                        }
                    }
                    Err(err) => {
                        self.object_error = true;
                        self.error(draft.line, err.to_string());
                    }
                }
            }
        }
    }

    fn close_block(&mut self, line: usize) {
        self.finish_open_object();
        let start = self.block_start.take().unwrap_or(line);
        let inputs = std::mem::take(&mut self.inputs);
        let outputs = std::mem::take(&mut self.outputs);
        let motion = self.motion.take();
        let motion_seen = std::mem::take(&mut self.motion_seen);
        let object_error = std::mem::take(&mut self.object_error);
        if self.mode == Mode::Kitchen {
            return;
        }
        // empty blocks between repeated delimiters are fine, and a block
        // whose objects were all dropped already has its diagnostics
        if inputs.is_empty() && outputs.is_empty() && !motion_seen {
            return;
        }
        if !motion_seen {
            self.error(start, "unit has no M line");
        }
        if inputs.is_empty() && !object_error {
            self.error(start, "unit has no input objects");
        }
        if outputs.is_empty() && !object_error {
            self.error(start, "unit has no output objects");
        }
        let Some(motion) = motion else {
            return; // missing or already-diagnosed M line
        };
        let ordinal = self.parsed.units.len();
        if let Ok(unit) = FunctionalUnit::new(inputs, motion, outputs, ordinal) {
            self.parsed.units.push(unit);
        }
    }
}

/// Split `state text { a, b }` into the state text and the optional
/// ingredient list between the braces.
fn split_braces(rest: &str) -> Result<(&str, Option<&str>), String> {
    let opens = rest.matches('{').count();
    let closes = rest.matches('}').count();
    if opens == 0 && closes == 0 {
        return Ok((rest, None));
    }
    if opens != 1 || closes != 1 {
        return Err("unbalanced braces in ingredient list".into());
    }
    let open = rest.find('{').unwrap();
    let close = rest.find('}').unwrap();
    if close < open {
        return Err("unbalanced braces in ingredient list".into());
    }
    if !rest[close + 1..].trim().is_empty() {
        return Err("text after closing brace of ingredient list".into());
    }
    Ok((&rest[..open], Some(&rest[open + 1..close])))
}

/// Serialize units to the canonical form of the annotation format: one
/// leading `//` per unit, objects in stored order, states sorted with the
/// ingredient list (sorted, `, `-separated) on the first state line, and the
/// success rate printed only when it differs from 1.0. LF line endings;
/// byte-deterministic.
pub fn serialize_subgraph(units: &[FunctionalUnit]) -> String {
    let mut out = String::new();
    for unit in units {
        out.push_str("//\n");
        for obj in unit.inputs() {
            write_object(&mut out, obj);
        }
        out.push_str("M ");
        out.push_str(unit.motion().label());
        if let Some(tag) = unit.motion().provenance() {
            out.push(' ');
            out.push_str(tag);
        }
        if unit.motion().success_rate() != DEFAULT_SUCCESS_RATE {
            out.push(' ');
            out.push_str(&unit.motion().success_rate().to_string());
        }
        out.push('\n');
        for obj in unit.outputs() {
            write_object(&mut out, obj);
        }
    }
    out
}

fn write_object(out: &mut String, obj: &ObjectNode) {
    out.push_str("O ");
    out.push_str(obj.name());
    out.push(' ');
    out.push(obj.motion_flag().as_digit());
    out.push('\n');
    for (idx, state) in obj.states().iter().enumerate() {
        out.push_str("S ");
        out.push_str(state);
        if idx == 0 && !obj.ingredients().is_empty() {
            out.push_str(" { ");
            let list: Vec<&str> = obj.ingredients().iter().map(String::as_str).collect();
            out.push_str(&list.join(", "));
            out.push_str(" }");
        }
        out.push('\n');
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const SWEET_TEA: &str = "//\n\
O tea cup 0\n\
S unsweetened tea { tea, sugar }\n\
O spoon 1\n\
S clean\n\
M stir Assumed\n\
O tea 0\n\
S sweetened tea\n\
O tea cup 0\n\
S sweetened tea { tea, sugar }\n\
O spoon 1\n\
S dirty\n\
//\n";

    #[test]
    fn parses_sweet_tea_annotation() {
        let units = parse_subgraph(SWEET_TEA).unwrap();
        assert_eq!(units.len(), 1);
        let unit = &units[0];
        assert_eq!(unit.inputs().len(), 2);
        assert_eq!(unit.outputs().len(), 3);
        assert_eq!(unit.motion().label(), "stir");
        assert_eq!(unit.motion().provenance(), Some("Assumed"));
        assert_eq!(unit.motion().success_rate(), 1.0);
        assert_eq!(unit.source_ordinal(), 0);

        let cup = &unit.inputs()[0];
        assert_eq!(cup.name(), "tea cup");
        assert_eq!(cup.motion_flag(), MotionFlag::Idle);
        assert!(cup.states().contains("unsweetened tea"));
        assert_eq!(
            cup.ingredients().iter().cloned().collect::<Vec<_>>(),
            vec!["sugar".to_string(), "tea".to_string()]
        );

        let spoon = &unit.inputs()[1];
        assert_eq!(spoon.name(), "spoon");
        assert_eq!(spoon.motion_flag(), MotionFlag::Moving);
        assert!(spoon.states().contains("clean"));

        let names: Vec<&str> = unit.outputs().iter().map(|o| o.name()).collect();
        assert_eq!(names, vec!["tea", "tea cup", "spoon"]);
        assert!(unit.outputs()[2].states().contains("dirty"));
    }

    #[test]
    fn empty_document_gives_empty_unit_list() {
        assert_eq!(parse_subgraph("").unwrap().len(), 0);
        assert_eq!(parse_subgraph("\n\n# comment\n//\n//\n").unwrap().len(), 0);
    }

    #[test]
    fn source_ordinals_follow_file_order_and_keys_match_across_units() {
        let text = "//\nO water 0\nS cold\nM boil\nO water 0\nS hot\n//\nO water 0\nS hot\nO mug 0\nS empty\nM pour\nO drink 0\nS ready\n//\n";
        let units = parse_subgraph(text).unwrap();
        assert_eq!(units.len(), 2);
        assert_eq!(units[0].source_ordinal(), 0);
        assert_eq!(units[1].source_ordinal(), 1);
        assert_eq!(
            units[0].outputs()[0].key(false),
            units[1].inputs()[0].key(false)
        );
    }

    #[test]
    fn roundtrip_is_canonical_fixed_point() {
        let units = parse_subgraph(SWEET_TEA).unwrap();
        let canonical = serialize_subgraph(&units);
        // ingredient sets are emitted sorted
        assert!(canonical.contains("S unsweetened tea { sugar, tea }"));
        let reparsed = parse_subgraph(&canonical).unwrap();
        assert_eq!(reparsed.len(), 1);
        assert_eq!(reparsed[0].key(), units[0].key());
        assert_eq!(serialize_subgraph(&reparsed), canonical);
    }

    #[test]
    fn weight_survives_roundtrip() {
        let text = "//\nO water 0\nS cold\nM boil 0.85\nO water 0\nS hot\n//\n";
        let units = parse_subgraph(text).unwrap();
        assert_eq!(units[0].motion().success_rate(), 0.85);
        let out = serialize_subgraph(&units);
        assert!(out.contains("M boil 0.85\n"));
        let reparsed = parse_subgraph(&out).unwrap();
        assert_eq!(reparsed[0].motion().success_rate(), 0.85);
    }

    #[test]
    fn provenance_and_weight_together() {
        let units = parse_subgraph("//\nO a 0\nS raw\nM chop Assumed 0.5\nO a 0\nS cut\n").unwrap();
        assert_eq!(units[0].motion().label(), "chop");
        assert_eq!(units[0].motion().provenance(), Some("Assumed"));
        assert_eq!(units[0].motion().success_rate(), 0.5);
    }

    #[test]
    fn crlf_and_trailing_whitespace_tolerated() {
        let text = SWEET_TEA.replace('\n', "  \r\n");
        let units = parse_subgraph(&text).unwrap();
        assert_eq!(units[0].key(), parse_subgraph(SWEET_TEA).unwrap()[0].key());
    }

    #[test]
    fn multiple_state_lines_accumulate() {
        let text =
            "//\nO rice 0\nS cooked\nS warm { water }\nM scoop\nO bowl 0\nS filled { rice }\n";
        let units = parse_subgraph(text).unwrap();
        let rice = &units[0].inputs()[0];
        assert_eq!(rice.states().len(), 2);
        assert!(rice.states().contains("cooked") && rice.states().contains("warm"));
        assert!(rice.ingredients().contains("water"));
    }

    fn error_lines(text: &str) -> Vec<usize> {
        parse_subgraph(text)
            .unwrap_err()
            .iter()
            .map(|d| d.line)
            .collect()
    }

    #[test]
    fn errors_carry_line_numbers_and_are_collected() {
        // line 2: S before O; line 5: bad flag
        let text = "//\nS lonely\nO a 0\nS raw\nO b 9\nM go\nO a 0\nS done\n";
        let errs = error_lines(text);
        assert_eq!(errs, vec![2, 5]);
    }

    #[test]
    fn missing_and_duplicate_motion_lines_rejected() {
        let no_motion = "//\nO a 0\nS raw\nO a 0\nS done\n";
        assert!(!error_lines(no_motion).is_empty());

        let two_motions = "//\nO a 0\nS raw\nM go\nM stop\nO a 0\nS done\n";
        assert_eq!(error_lines(two_motions), vec![5]);
    }

    #[test]
    fn units_need_inputs_and_outputs() {
        let no_inputs = "//\nM go\nO a 0\nS done\n";
        assert!(!error_lines(no_inputs).is_empty());
        let no_outputs = "//\nO a 0\nS raw\nM go\n";
        assert!(!error_lines(no_outputs).is_empty());
    }

    #[test]
    fn unbalanced_braces_rejected() {
        assert_eq!(
            error_lines("//\nO a 0\nS raw { x\nM go\nO a 0\nS done\n"),
            vec![3]
        );
        assert_eq!(
            error_lines("//\nO a 0\nS raw x }\nM go\nO a 0\nS done\n"),
            vec![3]
        );
        assert_eq!(
            error_lines("//\nO a 0\nS raw { x } y\nM go\nO a 0\nS done\n"),
            vec![3]
        );
    }

    #[test]
    fn out_of_range_weight_rejected() {
        assert_eq!(
            error_lines("//\nO a 0\nS raw\nM go 1.5\nO a 0\nS done\n"),
            vec![4]
        );
    }

    #[test]
    fn kitchen_grammar() {
        let items = parse_kitchen("O water 0\nS liquid\n").unwrap();
        assert_eq!(items.len(), 1);
        assert_eq!(items[0].name(), "water");
        assert!(items[0].states().contains("liquid"));

        // the flag is optional
        let items = parse_kitchen("O spoon\nS clean\n").unwrap();
        assert_eq!(items[0].name(), "spoon");

        assert_eq!(parse_kitchen("").unwrap().len(), 0);
    }

    #[test]
    fn kitchen_rejects_motion_lines() {
        let errs = parse_kitchen("O water 0\nS liquid\nM boil\n").unwrap_err();
        assert_eq!(errs[0].line, 3);
    }

    #[test]
    fn kitchen_ingredients_and_delimiters() {
        let text = "//\nO tea cup\nS unsweetened tea { sugar, tea }\n//\nO spoon 1\nS clean\n";
        let items = parse_kitchen(text).unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(items[0].ingredients().len(), 2);
        assert_eq!(items[1].name(), "spoon");
    }
}
