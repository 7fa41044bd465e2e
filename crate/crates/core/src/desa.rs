//! The `.desa` text format.
//!
//! ```text
//! # comment
//! event a ctrl obs
//! event u unctrl unobs
//! state 0
//! state 1
//! state 2 marked
//! initial 0
//! trans 0 u 1
//! trans 0 a 2
//! trans 1 a 2
//! ```
//!
//! Product documents name their states `q|a,b,c` (plant state over its
//! ascending estimate) and list the plant's secret states with `secret q`.
//! When several estimate cells carry the same label, cells after the first
//! are tagged `q|a,b,c@k`. A document with events but no states is written
//! `null`.
//!
//! State names that are canonical decimal numbers map to that state id;
//! other names are numbered after the largest numeric id in lexicographic
//! order. Serialization is canonical: events by name, states by id (by
//! payload for products), transitions by source and event.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::automaton::{valid_token, Alphabet, Automaton, Event, EventId, StateId};
use crate::composition::{ProductAutomaton, ProductParts};
use crate::error::AutomatonError;
use crate::observer::EstimateLabel;
use crate::refine::DeltaSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("missing {0}")]
    MissingArgument(&'static str),
    #[error("unexpected `{0}`")]
    UnexpectedArgument(String),
    #[error("expected {expected}, found `{found}`")]
    BadFlag { expected: &'static str, found: String },
    #[error("invalid name `{0}`")]
    InvalidName(String),
    #[error("duplicate event `{0}`")]
    DuplicateEvent(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("state `{state}` already has a transition on `{event}`")]
    Nondeterministic { state: String, event: String },
    #[error("duplicate transition")]
    DuplicateTransition,
    #[error("duplicate initial state")]
    DuplicateInitial,
    #[error("no initial state")]
    MissingInitial,
    #[error("malformed estimate label `{0}`")]
    MalformedLabel(String),
    #[error("plant and product state names mixed in one document")]
    MixedDocument,
    #[error("`null` document declares states")]
    NullWithStates,
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

/// Display names of plant states that are not their own decimal id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StateNames {
    by_id: BTreeMap<StateId, String>,
}

impl StateNames {
    pub fn name(&self, q: StateId) -> String {
        self.by_id.get(&q).cloned().unwrap_or_else(|| q.0.to_string())
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }

    fn label(&self, label: &EstimateLabel) -> String {
        label.states().iter().map(|&q| self.name(q)).collect::<Vec<_>>().join(",")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DesaDocument {
    Plant { automaton: Automaton, names: StateNames },
    Product { product: ProductAutomaton, names: StateNames },
}

impl DesaDocument {
    pub fn to_text(&self) -> String {
        match self {
            DesaDocument::Plant { automaton, names } => serialize_plant(automaton, names),
            DesaDocument::Product { product, names } => serialize_product(product, names),
        }
    }
}

fn canonical_id(name: &str) -> Option<u32> {
    let canonical = name == "0" || (!name.starts_with('0') && name.bytes().all(|b| b.is_ascii_digit()));
    if canonical && name.len() <= 9 {
        name.parse().ok()
    } else {
        None
    }
}

fn assign_ids<'a>(names: impl IntoIterator<Item = &'a str>) -> (HashMap<String, StateId>, StateNames) {
    let all: BTreeSet<&str> = names.into_iter().collect();
    let mut ids = HashMap::new();
    let mut next = 0u32;
    for &n in &all {
        if let Some(id) = canonical_id(n) {
            ids.insert(n.to_string(), StateId(id));
            next = next.max(id + 1);
        }
    }
    let mut table = StateNames::default();
    for &n in all.iter().filter(|n| canonical_id(n).is_none()) {
        ids.insert(n.to_string(), StateId(next));
        table.by_id.insert(StateId(next), n.to_string());
        next += 1;
    }
    (ids, table)
}

struct Token<'a> {
    column: usize,
    text: &'a str,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
}

impl<'a> Line<'a> {
    fn error(&self, index: usize, kind: ParseErrorKind) -> ParseError {
        let column = self.tokens.get(index).or(self.tokens.last()).map_or(1, |t| t.column);
        ParseError { line: self.number, column, kind }
    }

    fn arg(&self, index: usize, what: &'static str) -> Result<&'a str, ParseError> {
        match self.tokens.get(index) {
            Some(t) => Ok(t.text),
            None => {
                let column = self.tokens.last().map_or(1, |t| t.column + t.text.chars().count());
                Err(ParseError { line: self.number, column, kind: ParseErrorKind::MissingArgument(what) })
            }
        }
    }

    fn arity(&self, max: usize) -> Result<(), ParseError> {
        match self.tokens.get(max) {
            Some(t) => Err(self.error(max, ParseErrorKind::UnexpectedArgument(t.text.to_string()))),
            None => Ok(()),
        }
    }
}

fn tokenize(text: &str) -> Vec<Line<'_>> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start: Option<(usize, usize)> = None;
        for (col, (byte, c)) in content.char_indices().enumerate() {
            match (c.is_whitespace(), start) {
                (false, None) => start = Some((byte, col + 1)),
                (true, Some((b, column))) => {
                    tokens.push(Token { column, text: &content[b..byte] });
                    start = None;
                }
                _ => {}
            }
        }
        if let Some((b, column)) = start {
            tokens.push(Token { column, text: &content[b..] });
        }
        if !tokens.is_empty() {
            lines.push(Line { number: i + 1, tokens });
        }
    }
    lines
}

/// Parsed `q|a,b@k` state name.
struct ProductName<'a> {
    plant: &'a str,
    label: Vec<&'a str>,
    tag: u32,
}

fn split_product_name(name: &str) -> Result<ProductName<'_>, ParseErrorKind> {
    let malformed = || ParseErrorKind::MalformedLabel(name.to_string());
    let (plant, rest) = name.split_once('|').ok_or_else(malformed)?;
    let (label, tag) = match rest.split_once('@') {
        Some((label, tag)) => (label, canonical_id(tag).ok_or_else(malformed)?),
        None => (rest, 0),
    };
    if !valid_token(plant) {
        return Err(ParseErrorKind::InvalidName(plant.to_string()));
    }
    let members: Vec<&str> = label.split(',').collect();
    if members.iter().any(|m| !valid_token(m)) || members.iter().collect::<BTreeSet<_>>().len() != members.len() {
        return Err(malformed());
    }
    Ok(ProductName { plant, label: members, tag })
}

pub fn parse_desa(text: &str) -> Result<DesaDocument, ParseError> {
    let lines = tokenize(text);
    let end = || ParseError { line: text.lines().count().max(1), column: 1, kind: ParseErrorKind::MissingInitial };

    let mut events = Vec::new();
    let mut event_names = BTreeSet::new();
    let mut state_lines = Vec::new();
    let mut other = Vec::new();
    let mut null_line = None;
    let mut is_product = false;
    for line in &lines {
        match line.tokens[0].text {
            "event" => {
                let name = line.arg(1, "event name")?;
                if !valid_token(name) {
                    return Err(line.error(1, ParseErrorKind::InvalidName(name.to_string())));
                }
                let controllable = match line.arg(2, "controllability")? {
                    "ctrl" => true,
                    "unctrl" => false,
                    found => return Err(line.error(2, ParseErrorKind::BadFlag { expected: "ctrl or unctrl", found: found.into() })),
                };
                let observable = match line.arg(3, "observability")? {
                    "obs" => true,
                    "unobs" => false,
                    found => return Err(line.error(3, ParseErrorKind::BadFlag { expected: "obs or unobs", found: found.into() })),
                };
                line.arity(4)?;
                if !event_names.insert(name) {
                    return Err(line.error(1, ParseErrorKind::DuplicateEvent(name.to_string())));
                }
                events.push(Event::new(name, controllable, observable));
            }
            "state" => {
                let name = line.arg(1, "state name")?;
                match line.tokens.get(2).map(|t| t.text) {
                    None | Some("marked") => {}
                    Some(found) => return Err(line.error(2, ParseErrorKind::BadFlag { expected: "marked", found: found.into() })),
                }
                line.arity(3)?;
                if name.contains('|') {
                    is_product = true;
                }
                state_lines.push(line);
            }
            "null" => {
                line.arity(1)?;
                null_line = Some(line);
            }
            "secret" => {
                is_product = true;
                other.push(line);
            }
            "initial" | "trans" => other.push(line),
            d => return Err(line.error(0, ParseErrorKind::UnknownDirective(d.to_string()))),
        }
    }
    let last_event_line = lines.iter().rev().find(|l| l.tokens[0].text == "event");
    let alphabet = Alphabet::new(events).map_err(|e| match last_event_line {
        Some(l) => l.error(0, e.into()),
        None => ParseError { line: 1, column: 1, kind: e.into() },
    })?;

    if null_line.is_some() {
        if let Some(s) = state_lines.first() {
            return Err(s.error(1, ParseErrorKind::NullWithStates));
        }
        if let Some(l) = other.iter().find(|l| l.tokens[0].text != "secret") {
            return Err(l.error(0, ParseErrorKind::NullWithStates));
        }
        if is_product {
            let (ids, names) = assign_ids(other.iter().filter_map(|l| l.tokens.get(1).map(|t| t.text)));
            let secrets = secret_set(&other, &ids)?;
            return Ok(DesaDocument::Product { product: ProductAutomaton::null(alphabet, secrets), names });
        }
        return Ok(DesaDocument::Plant { automaton: Automaton::null(alphabet), names: StateNames::default() });
    }

    if is_product {
        parse_product(alphabet, &state_lines, &other, end)
    } else {
        parse_plant(alphabet, &state_lines, &other, end)
    }
}

fn secret_set(other: &[&Line], ids: &HashMap<String, StateId>) -> Result<BTreeSet<StateId>, ParseError> {
    let mut secrets = BTreeSet::new();
    for line in other.iter().filter(|l| l.tokens[0].text == "secret") {
        let name = line.arg(1, "state name")?;
        line.arity(2)?;
        if !valid_token(name) {
            return Err(line.error(1, ParseErrorKind::InvalidName(name.to_string())));
        }
        if !secrets.insert(ids[name]) {
            return Err(line.error(1, ParseErrorKind::DuplicateState(name.to_string())));
        }
    }
    Ok(secrets)
}

fn event_id(alphabet: &Alphabet, line: &Line, index: usize) -> Result<EventId, ParseError> {
    let name = line.arg(index, "event")?;
    alphabet.id(name).ok_or_else(|| line.error(index, ParseErrorKind::UnknownEvent(name.to_string())))
}

fn parse_plant(
    alphabet: Alphabet,
    state_lines: &[&Line],
    other: &[&Line],
    end: impl Fn() -> ParseError,
) -> Result<DesaDocument, ParseError> {
    for line in state_lines {
        let name = line.tokens[1].text;
        if !valid_token(name) {
            return Err(line.error(1, ParseErrorKind::InvalidName(name.to_string())));
        }
    }
    let (ids, names) = assign_ids(state_lines.iter().map(|l| l.tokens[1].text));
    let mut declared = BTreeSet::new();
    let mut marked = Vec::new();
    for line in state_lines {
        let id = ids[line.tokens[1].text];
        if !declared.insert(id) {
            return Err(line.error(1, ParseErrorKind::DuplicateState(line.tokens[1].text.to_string())));
        }
        if line.tokens.len() == 3 {
            marked.push(id);
        }
    }
    let lookup = |line: &Line, index: usize| -> Result<StateId, ParseError> {
        let name = line.arg(index, "state name")?;
        ids.get(name).copied().ok_or_else(|| line.error(index, ParseErrorKind::UnknownState(name.to_string())))
    };

    let mut initial = None;
    for line in other.iter().filter(|l| l.tokens[0].text == "initial") {
        let q = lookup(line, 1)?;
        line.arity(2)?;
        if initial.replace(q).is_some() {
            return Err(line.error(0, ParseErrorKind::DuplicateInitial));
        }
    }
    let initial = initial.ok_or_else(end)?;
    let mut g = Automaton::new(alphabet, declared, initial).expect("initial is declared");
    for line in other.iter().filter(|l| l.tokens[0].text == "trans") {
        let src = lookup(line, 1)?;
        let e = event_id(g.alphabet(), line, 2)?;
        let dst = lookup(line, 3)?;
        line.arity(4)?;
        match g.successor(src, e) {
            Some(d) if d == dst => return Err(line.error(0, ParseErrorKind::DuplicateTransition)),
            Some(_) => {
                let kind = ParseErrorKind::Nondeterministic { state: names.name(src), event: g.alphabet().get(e).name.clone() };
                return Err(line.error(3, kind));
            }
            None => g.add_transition(src, e, dst).expect("checked"),
        }
    }
    g.set_marked(marked).expect("declared");
    Ok(DesaDocument::Plant { automaton: g, names })
}

fn parse_product(
    alphabet: Alphabet,
    state_lines: &[&Line],
    other: &[&Line],
    end: impl Fn() -> ParseError,
) -> Result<DesaDocument, ParseError> {
    let mut parsed = Vec::new();
    for line in state_lines {
        let name = line.tokens[1].text;
        if !name.contains('|') {
            return Err(line.error(1, ParseErrorKind::MixedDocument));
        }
        parsed.push(split_product_name(name).map_err(|k| line.error(1, k))?);
    }
    let plant_names = parsed
        .iter()
        .flat_map(|p| std::iter::once(p.plant).chain(p.label.iter().copied()))
        .chain(other.iter().filter(|l| l.tokens[0].text == "secret").filter_map(|l| l.tokens.get(1).map(|t| t.text)));
    let (ids, names) = assign_ids(plant_names);
    let secrets = secret_set(other, &ids)?;

    let keys: Vec<(StateId, EstimateLabel, u32)> = parsed
        .iter()
        .map(|p| (ids[p.plant], EstimateLabel::new(p.label.iter().map(|m| ids[*m])), p.tag))
        .collect();
    let cell_keys: BTreeSet<(EstimateLabel, u32)> = keys.iter().map(|(_, l, t)| (l.clone(), *t)).collect();
    let cell_index: HashMap<(EstimateLabel, u32), usize> =
        cell_keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();

    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut seen = BTreeSet::new();
    let mut parts = ProductParts { labels: cell_keys.iter().map(|(l, _)| l.clone()).collect(), ..Default::default() };
    for (i, line) in state_lines.iter().enumerate() {
        let (q, label, tag) = &keys[i];
        if !seen.insert(keys[i].clone()) {
            return Err(line.error(1, ParseErrorKind::DuplicateState(line.tokens[1].text.to_string())));
        }
        index.insert(line.tokens[1].text, i);
        parts.states.push((*q, cell_index[&(label.clone(), *tag)]));
        parts.marked.push(line.tokens.len() == 3);
    }
    let lookup = |line: &Line, i: usize| -> Result<usize, ParseError> {
        let name = line.arg(i, "state name")?;
        index.get(name).copied().ok_or_else(|| line.error(i, ParseErrorKind::UnknownState(name.to_string())))
    };

    for line in other.iter().filter(|l| l.tokens[0].text == "initial") {
        let x = lookup(line, 1)?;
        line.arity(2)?;
        if parts.initial.replace(x).is_some() {
            return Err(line.error(0, ParseErrorKind::DuplicateInitial));
        }
    }
    if parts.initial.is_none() {
        return Err(end());
    }
    let mut table: HashMap<(usize, EventId), usize> = HashMap::new();
    for line in other.iter().filter(|l| l.tokens[0].text == "trans") {
        let src = lookup(line, 1)?;
        let e = event_id(&alphabet, line, 2)?;
        let dst = lookup(line, 3)?;
        line.arity(4)?;
        match table.insert((src, e), dst) {
            Some(d) if d == dst => return Err(line.error(0, ParseErrorKind::DuplicateTransition)),
            Some(_) => {
                let kind = ParseErrorKind::Nondeterministic {
                    state: line.tokens[1].text.to_string(),
                    event: alphabet.get(e).name.clone(),
                };
                return Err(line.error(3, kind));
            }
            None => parts.transitions.push((src, e, dst)),
        }
    }
    let product = ProductAutomaton::from_parts(alphabet, secrets, parts)
        .map_err(|e| ParseError { line: 1, column: 1, kind: ParseErrorKind::MalformedLabel(e.to_string()) })?;
    Ok(DesaDocument::Product { product, names })
}

fn write_events(out: &mut String, alphabet: &Alphabet) {
    for (_, e) in alphabet.iter() {
        let c = if e.controllable { "ctrl" } else { "unctrl" };
        let o = if e.observable { "obs" } else { "unobs" };
        let _ = writeln!(out, "event {} {c} {o}", e.name);
    }
}

pub fn serialize_plant(g: &Automaton, names: &StateNames) -> String {
    let mut out = String::new();
    write_events(&mut out, g.alphabet());
    let Some(q0) = g.initial() else {
        out.push_str("null\n");
        return out;
    };
    for &q in g.states() {
        let mark = if g.is_marked(q) { " marked" } else { "" };
        let _ = writeln!(out, "state {}{mark}", names.name(q));
    }
    let _ = writeln!(out, "initial {}", names.name(q0));
    for (s, e, d) in g.transitions() {
        let _ = writeln!(out, "trans {} {} {}", names.name(s), g.alphabet().get(e).name, names.name(d));
    }
    out
}

/// Text name of every product state, by index.
pub fn product_state_names(m: &ProductAutomaton, names: &StateNames) -> Vec<String> {
    let mut tag = vec![0u32; m.num_cells()];
    let mut seen: HashMap<&EstimateLabel, u32> = HashMap::new();
    for c in 0..m.num_cells() {
        let count = seen.entry(m.cell_label(c)).or_insert(0);
        tag[c] = *count;
        *count += 1;
    }
    (0..m.num_states())
        .map(|i| {
            let c = m.cell(i);
            let base = format!("{}|{}", names.name(m.plant_state(i)), names.label(m.cell_label(c)));
            if tag[c] == 0 {
                base
            } else {
                format!("{base}@{}", tag[c])
            }
        })
        .collect()
}

/// Canonical order of product states: by plant state, estimate, then cell
/// tag.
fn product_order(m: &ProductAutomaton) -> Vec<usize> {
    let mut tag = vec![0u32; m.num_cells()];
    let mut seen: HashMap<&EstimateLabel, u32> = HashMap::new();
    for c in 0..m.num_cells() {
        let count = seen.entry(m.cell_label(c)).or_insert(0);
        tag[c] = *count;
        *count += 1;
    }
    let mut order: Vec<usize> = (0..m.num_states()).collect();
    order.sort_by(|&a, &b| {
        (m.plant_state(a), m.estimate(a), tag[m.cell(a)]).cmp(&(m.plant_state(b), m.estimate(b), tag[m.cell(b)]))
    });
    order
}

pub fn serialize_product(m: &ProductAutomaton, names: &StateNames) -> String {
    let mut out = String::new();
    write_events(&mut out, m.alphabet());
    for &q in m.secrets() {
        let _ = writeln!(out, "secret {}", names.name(q));
    }
    let Some(x0) = m.initial() else {
        out.push_str("null\n");
        return out;
    };
    let text = product_state_names(m, names);
    let order = product_order(m);
    for &i in &order {
        let mark = if m.is_marked(i) { " marked" } else { "" };
        let _ = writeln!(out, "state {}{mark}", text[i]);
    }
    let _ = writeln!(out, "initial {}", text[x0]);
    for &i in &order {
        for (e, d) in m.outgoing(i) {
            let _ = writeln!(out, "trans {} {} {}", text[i], m.alphabet().get(e).name, text[d]);
        }
    }
    out
}

/// Split a comma-separated list of product state names. Estimates contain
/// commas too, so a new name starts only at a piece containing `|`.
pub fn split_state_list(list: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for piece in list.split(',') {
        match out.last_mut() {
            Some(last) if !piece.contains('|') => {
                last.push(',');
                last.push_str(piece);
            }
            _ => out.push(piece.to_string()),
        }
    }
    out.retain(|s| !s.is_empty());
    out
}

/// Resolve product state names to a delta set.
pub fn resolve_states(m: &ProductAutomaton, names: &StateNames, states: &[String]) -> Result<DeltaSet, String> {
    let text = product_state_names(m, names);
    let index: HashMap<&str, usize> = text.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    states
        .iter()
        .map(|s| index.get(s.as_str()).copied().ok_or_else(|| format!("unknown product state `{s}`")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::{canonically_equal, compose_with_observer};
    use crate::fixtures;

    const F1: &str = "\
event a ctrl obs
event u unctrl unobs
state 0
state 1
state 2 marked
initial 0
trans 0 a 2
trans 0 u 1
trans 1 a 2
";

    #[test]
    fn f1_round_trip() {
        let doc = parse_desa(F1).unwrap();
        let DesaDocument::Plant { automaton, names } = &doc else { panic!("plant expected") };
        assert_eq!(automaton, &fixtures::f1());
        assert!(names.is_empty());
        assert_eq!(doc.to_text(), F1);
    }

    #[test]
    fn nondeterminism_reported_at_second_line() {
        let text = "event a ctrl obs\nstate 0\nstate 1\nstate 2\ninitial 0\ntrans 0 a 1\ntrans 0 a 2\n";
        let err = parse_desa(text).unwrap_err();
        assert_eq!(err.line, 7);
        assert!(matches!(err.kind, ParseErrorKind::Nondeterministic { .. }));
    }

    #[test]
    fn dangling_initial() {
        let err = parse_desa("event a ctrl obs\nstate 0\ninitial 7\n").unwrap_err();
        assert_eq!((err.line, err.column), (3, 9));
        assert_eq!(err.kind, ParseErrorKind::UnknownState("7".into()));
    }

    #[test]
    fn other_errors() {
        let cases = [
            ("state 0\n", ParseErrorKind::MissingInitial),
            ("state 0\nstate 0\ninitial 0\n", ParseErrorKind::DuplicateState("0".into())),
            ("event a ctrl obs\nevent a ctrl obs\n", ParseErrorKind::DuplicateEvent("a".into())),
            ("event a maybe obs\n", ParseErrorKind::BadFlag { expected: "ctrl or unctrl", found: "maybe".into() }),
            ("frobnicate\n", ParseErrorKind::UnknownDirective("frobnicate".into())),
            ("state 0|\ninitial 0|\n", ParseErrorKind::MalformedLabel("0|".into())),
            ("state 0|1,1\ninitial 0|1,1\n", ParseErrorKind::MalformedLabel("0|1,1".into())),
            ("state 0|0\nstate 1\ninitial 0|0\n", ParseErrorKind::MixedDocument),
            ("state 0\ninitial 0\ntrans 0 a 0\n", ParseErrorKind::UnknownEvent("a".into())),
        ];
        for (text, kind) in cases {
            assert_eq!(parse_desa(text).unwrap_err().kind, kind, "{text}");
        }
    }

    #[test]
    fn comments_and_names() {
        let text = "# plant\nevent go ctrl obs # the only event\nstate idle\nstate busy marked\nstate 3\ninitial idle\ntrans idle go busy\n";
        let DesaDocument::Plant { automaton, names } = parse_desa(text).unwrap() else { panic!() };
        assert_eq!(automaton.num_states(), 3);
        assert_eq!(names.name(StateId(4)), "busy");
        assert_eq!(names.name(StateId(5)), "idle");
        assert_eq!(automaton.initial(), Some(StateId(5)));
        let again = serialize_plant(&automaton, &names);
        assert_eq!(serialize_plant(&automaton, &names), again);
        let DesaDocument::Plant { automaton: back, .. } = parse_desa(&again).unwrap() else { panic!() };
        assert_eq!(back, automaton);
    }

    #[test]
    fn product_round_trip() {
        for g in [fixtures::f1(), fixtures::worked_example(), fixtures::secret_loop()] {
            let m = compose_with_observer(&g);
            let text = serialize_product(&m, &StateNames::default());
            let DesaDocument::Product { product, .. } = parse_desa(&text).unwrap() else { panic!() };
            assert!(canonically_equal(&product, &m));
            assert_eq!(serialize_product(&product, &StateNames::default()), text);
        }
    }

    #[test]
    fn null_documents() {
        let g = Automaton::null(fixtures::f1().alphabet().clone());
        let text = serialize_plant(&g, &StateNames::default());
        assert!(text.ends_with("null\n"));
        assert_eq!(parse_desa(&text).unwrap(), DesaDocument::Plant { automaton: g, names: StateNames::default() });
        assert_eq!(parse_desa("null\nstate 0\n").unwrap_err().kind, ParseErrorKind::NullWithStates);
    }

    #[test]
    fn state_lists() {
        assert_eq!(split_state_list("2|2,3,1|0,1"), vec!["2|2,3".to_string(), "1|0,1".to_string()]);
        let m = compose_with_observer(&fixtures::f1());
        let delta = resolve_states(&m, &StateNames::default(), &["2|2".to_string()]).unwrap();
        assert_eq!(delta.len(), 1);
        assert!(resolve_states(&m, &StateNames::default(), &["9|9".to_string()]).is_err());
    }
}
