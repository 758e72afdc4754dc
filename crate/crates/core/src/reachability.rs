//! Bounded reachability graphs, DOT/JSON export and the machine check of
//! the strong Sleptsov zero-check gadget.

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixtures::{zero_check_entry, zero_check_net};
use crate::format::NamedCounts;
use crate::net::{Marking, NetStructure, Step};
use crate::semantics::{enumerate_steps, SemanticsError, SemanticsMode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReachError {
    #[error("node budget must be at least 1")]
    ZeroBudget,
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgNode {
    pub marking: Marking,
    pub initial: bool,
    /// Expanded and no step is permitted.
    pub dead: bool,
    /// Successors computed and all edges recorded.
    pub expanded: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgEdge {
    pub source: usize,
    pub step: Step,
    pub target: usize,
}

/// Explored markings and step-labelled edges.
///
/// Node `0` is the initial marking. Nodes are numbered in breadth-first
/// discovery order; exports renumber them in canonical marking order.
#[derive(Clone, Debug)]
pub struct ReachGraph {
    pub mode: SemanticsMode,
    pub nodes: Vec<RgNode>,
    pub edges: Vec<RgEdge>,
    /// Some node was left unexpanded because the budget ran out.
    pub truncated: bool,
    pub bound: usize,
    index: HashMap<Marking, usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Exploration {
    Sequential,
    /// Successors of a breadth-first layer are computed on the rayon pool;
    /// insertion stays sequential, so the graph equals the sequential one.
    Parallel,
}

impl ReachGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_of(&self, marking: &Marking) -> Option<usize> {
        self.index.get(marking).copied()
    }

    pub fn dead_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().enumerate().filter(|(_, n)| n.dead).map(|(i, _)| i)
    }

    pub fn out_edges(&self, node: usize) -> impl Iterator<Item = &RgEdge> {
        self.edges.iter().filter(move |e| e.source == node)
    }

    /// Node markings as a set.
    pub fn marking_set(&self) -> BTreeSet<Marking> {
        self.nodes.iter().map(|n| n.marking.clone()).collect()
    }

    /// Edges as `(source marking, step, target marking)` triples.
    pub fn edge_set(&self) -> BTreeSet<(Marking, Step, Marking)> {
        self.edges
            .iter()
            .map(|e| (self.nodes[e.source].marking.clone(), e.step.clone(), self.nodes[e.target].marking.clone()))
            .collect()
    }

    /// Every maximal path from the initial node to a dead node, as step
    /// sequences. Cycles are not followed.
    pub fn paths_to_dead(&self) -> Vec<Vec<Step>> {
        let mut out = Vec::new();
        let mut on_path = vec![false; self.nodes.len()];
        let mut prefix = Vec::new();
        self.walk(0, &mut on_path, &mut prefix, &mut out);
        out
    }

    fn walk(&self, node: usize, on_path: &mut [bool], prefix: &mut Vec<Step>, out: &mut Vec<Vec<Step>>) {
        if self.nodes[node].dead {
            out.push(prefix.clone());
            return;
        }
        on_path[node] = true;
        for e in self.out_edges(node) {
            if !on_path[e.target] {
                prefix.push(e.step.clone());
                self.walk(e.target, on_path, prefix, out);
                prefix.pop();
            }
        }
        on_path[node] = false;
    }

    /// Node indices sorted by canonical marking order.
    fn canonical_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by(|&a, &b| self.nodes[a].marking.cmp(&self.nodes[b].marking));
        order
    }

    fn canonical_edges(&self, rank: &[usize]) -> Vec<(usize, &Step, usize)> {
        let mut edges: Vec<(usize, &Step, usize)> =
            self.edges.iter().map(|e| (rank[e.source], &e.step, rank[e.target])).collect();
        edges.sort();
        edges
    }

    fn ranks(&self) -> (Vec<usize>, Vec<usize>) {
        let order = self.canonical_order();
        let mut rank = vec![0; order.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        (order, rank)
    }

    /// JSON document: nodes in canonical order with place-name markings.
    pub fn to_document(&self, net: &NetStructure) -> RgDocument {
        let (order, rank) = self.ranks();
        RgDocument {
            mode: self.mode.to_string(),
            bound: self.bound,
            truncated: self.truncated,
            nodes: order
                .iter()
                .enumerate()
                .map(|(id, &i)| {
                    let n = &self.nodes[i];
                    RgNodeDoc {
                        id,
                        marking: NamedCounts::marking(net, &n.marking),
                        initial: n.initial,
                        dead: n.dead,
                        expanded: n.expanded,
                    }
                })
                .collect(),
            edges: self
                .canonical_edges(&rank)
                .into_iter()
                .map(|(source, step, target)| RgEdgeDoc { source, target, step: NamedCounts::step(net, step) })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RgDocument {
    pub mode: String,
    pub bound: usize,
    pub truncated: bool,
    pub nodes: Vec<RgNodeDoc>,
    pub edges: Vec<RgEdgeDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RgNodeDoc {
    pub id: usize,
    pub marking: NamedCounts,
    pub initial: bool,
    pub dead: bool,
    pub expanded: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RgEdgeDoc {
    pub source: usize,
    pub target: usize,
    pub step: NamedCounts,
}

/// Breadth-first reachability graph with at most `node_budget` nodes.
pub fn build_rg(
    net: &NetStructure,
    initial: &Marking,
    mode: SemanticsMode,
    node_budget: usize,
) -> Result<ReachGraph, ReachError> {
    build_rg_with(net, initial, mode, node_budget, Exploration::Parallel)
}

/// [`build_rg`] with an explicit exploration strategy.
///
/// A node is expanded only if all of its new successors fit in the budget;
/// otherwise exploration stops and the remaining nodes stay unexpanded.
pub fn build_rg_with(
    net: &NetStructure,
    initial: &Marking,
    mode: SemanticsMode,
    node_budget: usize,
    exploration: Exploration,
) -> Result<ReachGraph, ReachError> {
    if node_budget == 0 {
        return Err(ReachError::ZeroBudget);
    }
    let mut g = ReachGraph {
        mode,
        nodes: vec![RgNode { marking: initial.clone(), initial: true, dead: false, expanded: false }],
        edges: Vec::new(),
        truncated: false,
        bound: node_budget,
        index: HashMap::from([(initial.clone(), 0)]),
    };
    let mut layer = vec![0usize];
    'layers: while !layer.is_empty() {
        let successors = layer_successors(net, mode, &g, &layer, exploration)?;
        let mut next_layer = Vec::new();
        for (&node, succ) in layer.iter().zip(successors) {
            let fresh: BTreeSet<&Marking> = succ.iter().map(|(_, m)| m).filter(|m| !g.index.contains_key(*m)).collect();
            if g.nodes.len() + fresh.len() > node_budget {
                g.truncated = true;
                break 'layers;
            }
            let dead = succ.is_empty();
            for (step, target) in succ {
                let t = match g.index.get(&target) {
                    Some(&t) => t,
                    None => {
                        let t = g.nodes.len();
                        g.index.insert(target.clone(), t);
                        g.nodes.push(RgNode { marking: target, initial: false, dead: false, expanded: false });
                        next_layer.push(t);
                        t
                    }
                };
                g.edges.push(RgEdge { source: node, step, target: t });
            }
            let n = &mut g.nodes[node];
            n.expanded = true;
            n.dead = dead;
        }
        layer = next_layer;
    }
    Ok(g)
}

type Successors = Vec<(Step, Marking)>;

fn successors(net: &NetStructure, mode: SemanticsMode, m: &Marking) -> Result<Successors, ReachError> {
    enumerate_steps(m, net, mode)?
        .into_iter()
        .map(|s| {
            let next = net.apply_step(m, &s).map_err(SemanticsError::from)?;
            Ok((s, next))
        })
        .collect()
}

fn layer_successors(
    net: &NetStructure,
    mode: SemanticsMode,
    g: &ReachGraph,
    layer: &[usize],
    exploration: Exploration,
) -> Result<Vec<Successors>, ReachError> {
    match exploration {
        Exploration::Sequential => layer.iter().map(|&i| successors(net, mode, &g.nodes[i].marking)).collect(),
        Exploration::Parallel => layer.par_iter().map(|&i| successors(net, mode, &g.nodes[i].marking)).collect(),
    }
}

/// Graphviz text; nodes in canonical marking order, labels in multiset
/// notation, the initial node bold and dead nodes double-circled.
pub fn export_dot(graph: &ReachGraph, net: &NetStructure) -> String {
    let (order, rank) = graph.ranks();
    let mut out = String::new();
    let _ = writeln!(out, "digraph rg {{");
    let _ = writeln!(out, "  node [shape=ellipse];");
    for (id, &i) in order.iter().enumerate() {
        let n = &graph.nodes[i];
        let mut attrs = format!("label=\"{}\"", escape(&net.format_marking(&n.marking)));
        if n.initial {
            attrs.push_str(", style=bold");
        }
        if n.dead {
            attrs.push_str(", shape=doublecircle");
        }
        if !n.expanded && !n.dead {
            attrs.push_str(", style=dashed");
        }
        let _ = writeln!(out, "  n{id} [{attrs}];");
    }
    for (s, step, t) in graph.canonical_edges(&rank) {
        let _ = writeln!(out, "  n{s} -> n{t} [label=\"{}\"];", escape(&net.format_step(step)));
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Outcome of the zero-check machine check for one register marking `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroCheckCase {
    pub x: u64,
    pub nodes: usize,
    pub edges: usize,
    pub terminals: Vec<String>,
    pub paths: Vec<Vec<String>>,
    pub failures: Vec<String>,
}

impl ZeroCheckCase {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub cases: Vec<ZeroCheckCase>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(ZeroCheckCase::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ZeroCheckCase> {
        self.cases.iter().filter(|c| !c.passed())
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cases {
            let status = if c.passed() { "ok" } else { "FAIL" };
            let paths: Vec<String> = c.paths.iter().map(|p| p.join(" ")).collect();
            writeln!(
                f,
                "x={:<3} {status:4} nodes={} edges={} terminal={} paths=[{}]",
                c.x,
                c.nodes,
                c.edges,
                c.terminals.join(" | "),
                paths.join("; ")
            )?;
            for msg in &c.failures {
                writeln!(f, "       {msg}")?;
            }
        }
        Ok(())
    }
}

/// Builds the strong Sleptsov RG of the zero-check gadget from
/// `{p1, x·p4, p8}` for every `x` in `0..=x_max` and checks its shape:
///
/// * `x = 0`: the initial marking is dead;
/// * `x = 1`: five nodes, paths `t1 t2 t5` and `t1 t3 t6`, unique terminal
///   `{p3, p4, p8}`;
/// * `x >= 2`: four nodes on the single path `t1, 2·t2, t4` through
///   `{x·p4, 2·p5, p8}` and `{(x-2)·p4, 2·p6, p8}` to `{p2, x·p4, p8}`.
pub fn verify_zero_check(x_max: u64) -> Result<VerificationReport, ReachError> {
    let net = zero_check_net();
    let mode = SemanticsMode::strong_sleptsov();
    let mut cases = Vec::new();
    for x in 0..=x_max {
        let g = build_rg_with(&net, &zero_check_entry(&net, x), mode, 64, Exploration::Sequential)?;
        cases.push(check_case(&net, &g, x));
    }
    Ok(VerificationReport { cases })
}

fn check_case(net: &NetStructure, g: &ReachGraph, x: u64) -> ZeroCheckCase {
    let fmt_m =
        |pairs: &[(&str, u64)]| net.format_marking(&net.marking_from(pairs.iter().copied()).expect("gadget places"));
    let terminals: Vec<String> = g.dead_nodes().map(|i| net.format_marking(&g.nodes[i].marking)).collect();
    let paths: Vec<Vec<String>> =
        g.paths_to_dead().iter().map(|p| p.iter().map(|s| net.format_step(s)).collect()).collect();
    let visited: BTreeSet<String> = g.nodes.iter().map(|n| net.format_marking(&n.marking)).collect();

    let (nodes, edges, terminal, expected_paths, via): (usize, usize, String, Vec<Vec<&str>>, Vec<String>) = match x {
        0 => (1, 0, fmt_m(&[("p1", 1), ("p8", 1)]), vec![vec![]], vec![]),
        1 => (
            5,
            5,
            fmt_m(&[("p3", 1), ("p4", 1), ("p8", 1)]),
            vec![vec!["t1", "t2", "t5"], vec!["t1", "t3", "t6"]],
            vec![
                fmt_m(&[("p4", 1), ("p5", 2), ("p8", 1)]),
                fmt_m(&[("p5", 1), ("p6", 1), ("p8", 1)]),
                fmt_m(&[("p5", 1), ("p7", 1), ("p8", 1)]),
            ],
        ),
        _ => (
            4,
            3,
            fmt_m(&[("p2", 1), ("p4", x), ("p8", 1)]),
            vec![vec!["t1", "2·t2", "t4"]],
            vec![fmt_m(&[("p4", x), ("p5", 2), ("p8", 1)]), fmt_m(&[("p4", x - 2), ("p6", 2), ("p8", 1)])],
        ),
    };

    let mut failures = Vec::new();
    if g.truncated {
        failures.push("graph truncated".to_string());
    }
    if g.node_count() != nodes {
        failures.push(format!("expected {nodes} nodes, found {}", g.node_count()));
    }
    if g.edge_count() != edges {
        failures.push(format!("expected {edges} edges, found {}", g.edge_count()));
    }
    if terminals != [terminal.clone()] {
        failures.push(format!("expected terminal {{{terminal}}}, found {terminals:?}"));
    }
    let mut got = paths.clone();
    got.sort();
    let mut want: Vec<Vec<String>> = expected_paths.iter().map(|p| p.iter().map(|s| s.to_string()).collect()).collect();
    want.sort();
    if got != want {
        failures.push(format!("expected paths {want:?}, found {got:?}"));
    }
    for m in via {
        if !visited.contains(&m) {
            failures.push(format!("intermediate marking {m} not reached"));
        }
    }
    ZeroCheckCase { x, nodes: g.node_count(), edges: g.edge_count(), terminals, paths, failures }
}
