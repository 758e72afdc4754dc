//! Plain-text net format and JSON documents.
//!
//! Net text is line based; `#` starts a comment:
//!
//! ```text
//! place <name> [init <n>]
//! trans <name> [pri <n>]
//! arc <src> -> <dst> [* <w>]
//! inhib <place> -o <trans>
//! prio <trans> > <trans>
//! ```
//!
//! Names are declared before use. `prio a > b` states that `a` outranks `b`;
//! the relation is turned into numeric priorities (longest chain below each
//! transition) and may not be mixed with explicit `pri` values. Printing
//! always emits numeric priorities, so printed text is the canonical form.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::net::{Marking, NetError, NetStructure, Step, TransitionId};
use crate::semantics::{enumerate_steps, ExecutionTrace, SemanticsError, SemanticsMode, StepChoicePolicy, Termination};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseNetError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let content = line.split('#').next().unwrap_or_default();
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in content.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Token { text: &content[s..i], column: content[..s].chars().count() + 1 });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &content[s..], column: content[..s].chars().count() + 1 });
    }
    out
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('-')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-' | '\''))
}

/// Parses net text into a structure and its initial marking.
pub fn parse_net(text: &str) -> Result<(NetStructure, Marking), ParseNetError> {
    let mut b = NetStructure::builder();
    let mut init: Vec<u64> = Vec::new();
    let mut explicit_priority: Option<(usize, usize)> = None;
    // (higher, lower, line, column)
    let mut relation: Vec<(TransitionId, TransitionId, usize, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokenize(raw);
        let Some(head) = toks.first() else { continue };
        let err = |tok: &Token, message: String| ParseNetError { line, column: tok.column, message };
        let end_err = |message: String| ParseNetError {
            line,
            column: raw.split('#').next().unwrap_or_default().trim_end().chars().count() + 1,
            message,
        };
        let net_err = |tok: &Token, e: NetError| err(tok, e.to_string());
        let number = |tok: &Token| -> Result<u64, ParseNetError> {
            tok.text
                .parse::<u64>()
                .map_err(|_| err(tok, format!("expected a non-negative integer, found `{}`", tok.text)))
        };
        let name = |i: usize, what: &str| -> Result<&Token, ParseNetError> {
            let tok = toks.get(i).ok_or_else(|| end_err(format!("missing {what} name")))?;
            if !valid_name(tok.text) {
                return Err(err(tok, format!("invalid {what} name `{}`", tok.text)));
            }
            Ok(tok)
        };
        let expect = |i: usize, word: &str| -> Result<(), ParseNetError> {
            match toks.get(i) {
                Some(t) if t.text == word => Ok(()),
                Some(t) => Err(err(t, format!("expected `{word}`, found `{}`", t.text))),
                None => Err(end_err(format!("expected `{word}`"))),
            }
        };
        let no_more = |i: usize| -> Result<(), ParseNetError> {
            match toks.get(i) {
                Some(t) => Err(err(t, format!("unexpected `{}`", t.text))),
                None => Ok(()),
            }
        };

        match head.text {
            "place" => {
                let n = name(1, "place")?;
                let tokens = if toks.len() > 2 {
                    expect(2, "init")?;
                    let v = number(toks.get(3).ok_or_else(|| end_err("missing initial token count".into()))?)?;
                    no_more(4)?;
                    v
                } else {
                    0
                };
                b.add_place(n.text).map_err(|e| net_err(n, e))?;
                init.push(tokens);
            }
            "trans" => {
                let n = name(1, "transition")?;
                let t = b.add_transition(n.text).map_err(|e| net_err(n, e))?;
                if toks.len() > 2 {
                    expect(2, "pri")?;
                    let v = number(toks.get(3).ok_or_else(|| end_err("missing priority value".into()))?)?;
                    no_more(4)?;
                    b.priority(t, v);
                    explicit_priority.get_or_insert((line, toks[2].column));
                }
            }
            "arc" => {
                let src = name(1, "source")?;
                expect(2, "->")?;
                let dst = name(3, "target")?;
                let w = if toks.len() > 4 {
                    expect(4, "*")?;
                    let w = number(toks.get(5).ok_or_else(|| end_err("missing arc weight".into()))?)?;
                    no_more(6)?;
                    w
                } else {
                    1
                };
                if w == 0 {
                    return Err(err(&toks[5], "arc weight must be at least 1".into()));
                }
                match (b.place_id(src.text), b.transition_id(src.text)) {
                    (Some(p), _) => {
                        let t = b
                            .transition_id(dst.text)
                            .ok_or_else(|| err(dst, format!("unknown transition `{}`", dst.text)))?;
                        b.input(p, t, w).map_err(|e| net_err(src, e))?;
                    }
                    (None, Some(t)) => {
                        let p =
                            b.place_id(dst.text).ok_or_else(|| err(dst, format!("unknown place `{}`", dst.text)))?;
                        b.output(t, p, w).map_err(|e| net_err(src, e))?;
                    }
                    (None, None) => return Err(err(src, format!("unknown place or transition `{}`", src.text))),
                }
            }
            "inhib" => {
                let p = name(1, "place")?;
                expect(2, "-o")?;
                let t = name(3, "transition")?;
                no_more(4)?;
                let pid = b.place_id(p.text).ok_or_else(|| err(p, format!("unknown place `{}`", p.text)))?;
                let tid = b.transition_id(t.text).ok_or_else(|| err(t, format!("unknown transition `{}`", t.text)))?;
                b.inhibitor(pid, tid).map_err(|e| net_err(p, e))?;
            }
            "prio" => {
                let hi = name(1, "transition")?;
                expect(2, ">")?;
                let lo = name(3, "transition")?;
                no_more(4)?;
                let find = |tok: &Token| {
                    b.transition_id(tok.text).ok_or_else(|| err(tok, format!("unknown transition `{}`", tok.text)))
                };
                relation.push((find(hi)?, find(lo)?, line, hi.column));
            }
            other => return Err(err(head, format!("unknown directive `{other}`"))),
        }
    }

    if let (Some((line, column)), Some(_)) = (explicit_priority, relation.first()) {
        return Err(ParseNetError {
            line,
            column,
            message: "numeric `pri` values cannot be mixed with `prio` relations".into(),
        });
    }
    if !relation.is_empty() {
        for (t, rank) in rank_relation(&relation)? {
            b.priority(t, rank);
        }
    }
    let net = b.build();
    Ok((net, Marking::from_vec(init)))
}

/// Longest chain of lower-ranked transitions below each transition.
fn rank_relation(
    relation: &[(TransitionId, TransitionId, usize, usize)],
) -> Result<Vec<(TransitionId, u64)>, ParseNetError> {
    let mut below: BTreeMap<TransitionId, Vec<(TransitionId, usize, usize)>> = BTreeMap::new();
    for &(hi, lo, line, col) in relation {
        below.entry(hi).or_default().push((lo, line, col));
        below.entry(lo).or_default();
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done(u64),
    }
    fn visit(
        t: TransitionId,
        below: &BTreeMap<TransitionId, Vec<(TransitionId, usize, usize)>>,
        marks: &mut BTreeMap<TransitionId, Mark>,
        via: (usize, usize),
    ) -> Result<u64, ParseNetError> {
        match marks.get(&t) {
            Some(Mark::Done(r)) => return Ok(*r),
            Some(Mark::Open) => {
                return Err(ParseNetError { line: via.0, column: via.1, message: "priority relation is cyclic".into() })
            }
            None => {}
        }
        marks.insert(t, Mark::Open);
        let mut rank = 0;
        for &(lo, line, col) in &below[&t] {
            rank = rank.max(visit(lo, below, marks, (line, col))? + 1);
        }
        marks.insert(t, Mark::Done(rank));
        Ok(rank)
    }
    let mut marks = BTreeMap::new();
    let mut out = Vec::new();
    for &t in below.keys() {
        let first = relation.iter().find(|r| r.0 == t).map(|r| (r.2, r.3)).unwrap_or((0, 0));
        out.push((t, visit(t, &below, &mut marks, first)?));
    }
    Ok(out)
}

/// Canonical text of `net` with `marking` as the initial tokens.
pub fn print_net(net: &NetStructure, marking: &Marking) -> String {
    let mut out = String::new();
    for p in net.places() {
        out.push_str(&format!("place {} init {}\n", net.place_name(p), marking.get(p)));
    }
    for t in net.transitions() {
        match net.priority(t) {
            0 => out.push_str(&format!("trans {}\n", net.transition_name(t))),
            v => out.push_str(&format!("trans {} pri {}\n", net.transition_name(t), v)),
        }
    }
    let weight = |w: u64| if w == 1 { String::new() } else { format!(" * {w}") };
    for t in net.transitions() {
        let tn = net.transition_name(t);
        for &(p, w) in net.inputs(t) {
            out.push_str(&format!("arc {} -> {}{}\n", net.place_name(p), tn, weight(w)));
        }
        for &(p, w) in net.outputs(t) {
            out.push_str(&format!("arc {} -> {}{}\n", tn, net.place_name(p), weight(w)));
        }
        for &p in net.inhibitor_places(t) {
            out.push_str(&format!("inhib {} -o {}\n", net.place_name(p), tn));
        }
    }
    out
}

/// Ordered `name -> count` pairs, serialized as a JSON object in order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NamedCounts(pub Vec<(String, u64)>);

impl NamedCounts {
    /// Every place of `net`, zero entries included.
    pub fn marking(net: &NetStructure, m: &Marking) -> Self {
        NamedCounts(net.places().map(|p| (net.place_name(p).to_string(), m.get(p))).collect())
    }

    pub fn step(net: &NetStructure, s: &Step) -> Self {
        NamedCounts(s.iter().map(|(t, c)| (net.transition_name(t).to_string(), c)).collect())
    }

    /// Missing places count as zero.
    pub fn to_marking(&self, net: &NetStructure) -> Result<Marking, NetError> {
        net.marking_from(self.0.iter().map(|(n, v)| (n.as_str(), *v)))
    }

    pub fn to_step(&self, net: &NetStructure) -> Result<Step, NetError> {
        net.step_from(self.0.iter().map(|(n, v)| (n.as_str(), *v)))
    }
}

impl Serialize for NamedCounts {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for NamedCounts {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = NamedCounts;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object of name to count")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<NamedCounts, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, u64>()? {
                    out.push((k, v));
                }
                Ok(NamedCounts(out))
            }
        }
        deserializer.deserialize_map(V)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub step: NamedCounts,
    pub marking: NamedCounts,
}

/// JSON record of one execution, replayable against its net.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub mode: String,
    /// `first` or `seeded`.
    pub policy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub initial: NamedCounts,
    pub steps: Vec<TraceEntry>,
    /// `dead` or `budget`.
    pub termination: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("step {index}: {source}")]
    Net { index: usize, source: NetError },
    #[error("step {index}: step is not permitted under `{mode}`")]
    NotPermitted { index: usize, mode: String },
    #[error("step {index}: recorded marking differs from the replayed one")]
    Mismatch { index: usize },
    #[error("bad termination `{0}`")]
    Termination(String),
    #[error("termination `dead` recorded but the final marking still permits steps")]
    NotDead,
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

impl TraceDocument {
    pub fn from_trace(
        net: &NetStructure,
        mode: SemanticsMode,
        policy: StepChoicePolicy,
        trace: &ExecutionTrace,
    ) -> Self {
        let (policy, seed) = match policy {
            StepChoicePolicy::FirstLexicographic => ("first".to_string(), None),
            StepChoicePolicy::SeededRandom(s) => ("seeded".to_string(), Some(s)),
        };
        TraceDocument {
            mode: mode.to_string(),
            policy,
            seed,
            initial: NamedCounts::marking(net, &trace.initial),
            steps: trace
                .steps
                .iter()
                .map(|(s, m)| TraceEntry { step: NamedCounts::step(net, s), marking: NamedCounts::marking(net, m) })
                .collect(),
            termination: trace.termination.to_string(),
        }
    }

    /// Re-fires every recorded step from the recorded initial marking and
    /// checks each step is permitted and each marking matches.
    pub fn replay(&self, net: &NetStructure) -> Result<ExecutionTrace, ReplayError> {
        let mode: SemanticsMode = self.mode.parse()?;
        let initial = self.initial.to_marking(net).map_err(|source| ReplayError::Net { index: 0, source })?;
        let mut current = initial.clone();
        let mut steps = Vec::with_capacity(self.steps.len());
        for (i, entry) in self.steps.iter().enumerate() {
            let index = i + 1;
            let wrap = |source| ReplayError::Net { index, source };
            let step = entry.step.to_step(net).map_err(wrap)?;
            if !enumerate_steps(&current, net, mode)?.contains(&step) {
                return Err(ReplayError::NotPermitted { index, mode: self.mode.clone() });
            }
            let next = net.apply_step(&current, &step).map_err(wrap)?;
            if entry.marking.to_marking(net).map_err(wrap)? != next {
                return Err(ReplayError::Mismatch { index });
            }
            steps.push((step, next.clone()));
            current = next;
        }
        let termination = match self.termination.as_str() {
            "dead" => {
                if !enumerate_steps(&current, net, mode)?.is_empty() {
                    return Err(ReplayError::NotDead);
                }
                Termination::Dead
            }
            "budget" => Termination::Budget,
            other => return Err(ReplayError::Termination(other.to_string())),
        };
        Ok(ExecutionTrace { initial, steps, termination })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::semantics::run;

    #[test]
    fn parses_addition_document() {
        let (net, m) = parse_net(fixtures::ADDITION_NET).unwrap();
        assert_eq!(net.place_count(), 3);
        assert_eq!(net.transition_count(), 2);
        assert_eq!(m.as_slice(), &[2, 3, 0]);
        let (again, m2) = parse_net(&print_net(&net, &m)).unwrap();
        assert_eq!(again, net);
        assert_eq!(m2, m);
    }

    #[test]
    fn empty_document_is_empty_net() {
        let (net, m) = parse_net("").unwrap();
        assert_eq!(net.place_count(), 0);
        assert_eq!(net.transition_count(), 0);
        assert!(m.is_empty());
        let (net, _) = parse_net("# only a comment\n\n").unwrap();
        assert_eq!(net.place_count(), 0);
    }

    #[test]
    fn positioned_errors() {
        let e = parse_net("place p init 1\ntrans t\narc q -> t\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 5));
        let e = parse_net("place p\nplace p\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 7));
        let e = parse_net("place p\ntrans t\narc p -> t\ninhib p -o t\n").unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.message.contains("both"), "{}", e.message);
        let e = parse_net("place p init x\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 14));
        let e = parse_net("bogus\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 1));
        let e = parse_net("place p\ntrans t\narc p -> t * 0\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 14));
        let e = parse_net("place p\ntrans t\narc p -> p\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_net("place p\ntrans t\narc t -> p\narc t -> p * 2\n").unwrap_err();
        assert_eq!(e.line, 4);
    }

    #[test]
    fn relational_priorities() {
        let text = "place p\ntrans a\ntrans b\ntrans c\nprio a > b\nprio b > c\n";
        let (net, _) = parse_net(text).unwrap();
        let pri = |n| net.priority(net.transition(n).unwrap());
        assert!(pri("a") > pri("b") && pri("b") > pri("c"));
        let cyclic = "trans a\ntrans b\nprio a > b\nprio b > a\n";
        assert!(parse_net(cyclic).unwrap_err().message.contains("cyclic"));
        let mixed = "trans a pri 2\ntrans b\nprio a > b\n";
        assert!(parse_net(mixed).is_err());
    }

    #[test]
    fn inhibitor_and_weights_print() {
        let (net, m) = fixtures::addition_inhibitor_net();
        let text = print_net(&net, &m);
        assert!(text.contains("inhib p2 -o t1\n"));
        let (again, _) = parse_net(&text).unwrap();
        assert_eq!(again, net);
    }

    #[test]
    fn trace_document_replays() {
        let (net, m) = fixtures::addition_net();
        let mode: SemanticsMode = "salwicki-sleptsov/weak".parse().unwrap();
        let policy = StepChoicePolicy::SeededRandom(11);
        let trace = run(&m, &net, mode, policy, 100).unwrap();
        let doc = TraceDocument::from_trace(&net, mode, policy, &trace);
        let json = serde_json::to_string_pretty(&doc).unwrap();
        let back: TraceDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.replay(&net).unwrap(), trace);

        let mut forged = doc.clone();
        forged.steps[0].marking.0[2].1 += 1;
        assert!(matches!(forged.replay(&net), Err(ReplayError::Mismatch { index: 1 })));
    }

    #[test]
    fn named_counts_keep_place_order() {
        let (net, m) = fixtures::addition_net();
        let json = serde_json::to_string(&NamedCounts::marking(&net, &m)).unwrap();
        assert_eq!(json, r#"{"p1":2,"p2":3,"p3":0}"#);
    }
}
