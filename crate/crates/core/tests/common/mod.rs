//! Brute-force reference semantics used as an oracle by the integration
//! tests. It reads the net only through its arc tables and enumerates every
//! count vector up to a bound, so it shares no step-generation code with the
//! library.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use ptnet::semantics::{NetClass, Strength};
use ptnet::{Marking, NetStructure, SemanticsMode, Step, TransitionId};
use rand::Rng;

/// Plain count vector, one entry per transition.
pub type Counts = Vec<u64>;

pub fn counts_of(net: &NetStructure, step: &Step) -> Counts {
    net.transitions().map(|t| step.count(t)).collect()
}

pub fn step_of(counts: &[u64]) -> Step {
    Step::from_counts(counts.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (TransitionId(i), k)))
}

/// Enough tokens for a step to be valid: every place covers the summed
/// demand of all copies, inhibited transitions see an empty place.
pub fn valid(net: &NetStructure, m: &Marking, k: &[u64]) -> bool {
    for p in net.places() {
        let mut demand = 0u64;
        for t in net.transitions() {
            demand += k[t.0] * net.pre_weight(p, t);
            if k[t.0] > 0 && net.is_inhibitor(p, t) && m.get(p) > 0 {
                return false;
            }
        }
        if demand > m.get(p) {
            return false;
        }
    }
    true
}

fn has_input(net: &NetStructure, t: TransitionId) -> bool {
    net.places().any(|p| net.pre_weight(p, t) > 0)
}

/// Largest `k` with `k` copies of `t` alone valid (by counting up).
fn solo_max(net: &NetStructure, m: &Marking, t: TransitionId, bound: u64) -> u64 {
    let mut v = vec![0; net.transition_count()];
    let mut k = 0;
    while k < bound {
        v[t.0] = k + 1;
        if !valid(net, m, &v) {
            break;
        }
        k += 1;
    }
    k
}

/// All count vectors in the box `[0, caps[0]] x ... x [0, caps[T-1]]`.
fn all_vectors(caps: &[u64]) -> Vec<Counts> {
    let mut out = vec![vec![]];
    for &cap in caps {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=cap).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    out
}

/// Step set of `mode` at `m`, or `None` when some transition without input
/// arcs makes the step set unbounded (the library reports an error then).
pub fn oracle_steps(net: &NetStructure, m: &Marking, mode: SemanticsMode) -> Option<BTreeSet<Counts>> {
    let n = net.transition_count();
    let tokens: u64 = m.as_slice().iter().sum();
    let single = |t: TransitionId, k: u64| {
        let mut v = vec![0; n];
        v[t.0] = k;
        v
    };
    let mut out = BTreeSet::new();
    match mode.class() {
        NetClass::Petri => {
            let firable: Vec<TransitionId> = net.transitions().filter(|&t| valid(net, m, &single(t, 1))).collect();
            let top = firable.iter().map(|&t| net.priority(t)).max();
            for t in firable {
                if !mode.priorities() || Some(net.priority(t)) == top {
                    out.insert(single(t, 1));
                }
            }
        }
        NetClass::Sleptsov => {
            let firable: Vec<TransitionId> = net.transitions().filter(|&t| valid(net, m, &single(t, 1))).collect();
            if firable.iter().any(|&t| !has_input(net, t)) {
                return None;
            }
            let c: BTreeMap<TransitionId, u64> = firable.iter().map(|&t| (t, solo_max(net, m, t, tokens))).collect();
            let top = c.values().copied().max().unwrap_or(0);
            for (&t, &ct) in &c {
                match mode.strength() {
                    Strength::Weak => (1..=ct).for_each(|k| {
                        out.insert(single(t, k));
                    }),
                    Strength::General => {
                        out.insert(single(t, ct));
                    }
                    Strength::Strong if ct == top => {
                        out.insert(single(t, ct));
                    }
                    Strength::Strong => {}
                }
            }
        }
        NetClass::Salwicki | NetClass::SalwickiSleptsov => {
            let salwicki = mode.class() == NetClass::Salwicki;
            if !salwicki && net.transitions().any(|t| !has_input(net, t) && valid(net, m, &single(t, 1))) {
                return None;
            }
            let cap = if salwicki { 1 } else { tokens };
            // no valid step uses more copies of `t` than `t` alone could
            let caps: Vec<u64> = net.transitions().map(|t| solo_max(net, m, t, cap)).collect();
            let valid_set: Vec<Counts> =
                all_vectors(&caps).into_iter().filter(|v| v.iter().any(|&k| k > 0) && valid(net, m, v)).collect();
            let maximal = |v: &Counts| {
                (0..n).all(|i| {
                    if v[i] >= cap {
                        return true;
                    }
                    let mut w = v.clone();
                    w[i] += 1;
                    !valid(net, m, &w)
                })
            };
            match mode.strength() {
                Strength::Weak => out.extend(valid_set),
                Strength::General => out.extend(valid_set.into_iter().filter(maximal)),
                Strength::Strong => {
                    let general: Vec<Counts> = valid_set.into_iter().filter(maximal).collect();
                    let top = general.iter().map(|v| v.iter().sum::<u64>()).max().unwrap_or(0);
                    out.extend(general.into_iter().filter(|v| v.iter().sum::<u64>() == top));
                }
            }
        }
    }
    Some(out)
}

/// Successor marking computed from the arc tables.
pub fn oracle_apply(net: &NetStructure, m: &Marking, k: &[u64]) -> Marking {
    let mut v: Vec<i128> = m.as_slice().iter().map(|&x| x as i128).collect();
    for t in net.transitions() {
        for p in net.places() {
            v[p.0] += k[t.0] as i128 * (net.post_weight(t, p) as i128 - net.pre_weight(p, t) as i128);
        }
    }
    Marking::from_vec(v.into_iter().map(|x| u64::try_from(x).expect("non-negative")).collect())
}

/// Reachability graph by plain BFS over the oracle step sets.
pub struct OracleGraph {
    pub nodes: BTreeSet<Marking>,
    pub edges: BTreeSet<(Marking, Counts, Marking)>,
}

pub fn oracle_rg(net: &NetStructure, m0: &Marking, mode: SemanticsMode) -> OracleGraph {
    let mut nodes = BTreeSet::from([m0.clone()]);
    let mut edges = BTreeSet::new();
    let mut queue = VecDeque::from([m0.clone()]);
    while let Some(m) = queue.pop_front() {
        for k in oracle_steps(net, &m, mode).expect("bounded") {
            let next = oracle_apply(net, &m, &k);
            if nodes.insert(next.clone()) {
                queue.push_back(next.clone());
            }
            edges.insert((m.clone(), k, next));
        }
    }
    OracleGraph { nodes, edges }
}

/// Shape parameters for [`random_net`].
#[derive(Copy, Clone, Debug)]
pub struct NetShape {
    pub max_places: usize,
    pub max_transitions: usize,
    pub max_tokens: u64,
    pub max_weight: u64,
    /// Every transition gets at least one input arc.
    pub bounded: bool,
    /// Input and output weights of every transition sum to the same value.
    pub conservative: bool,
    pub inhibitors: bool,
    pub priorities: bool,
}

impl Default for NetShape {
    fn default() -> Self {
        NetShape {
            max_places: 4,
            max_transitions: 4,
            max_tokens: 4,
            max_weight: 2,
            bounded: true,
            conservative: false,
            inhibitors: false,
            priorities: false,
        }
    }
}

/// Random small net and marking.
pub fn random_net<R: Rng>(rng: &mut R, shape: NetShape) -> (NetStructure, Marking) {
    let np = rng.gen_range(1..=shape.max_places);
    let nt = rng.gen_range(1..=shape.max_transitions);
    let mut b = NetStructure::builder();
    let places: Vec<_> = (0..np).map(|i| b.add_place(format!("p{}", i + 1)).unwrap()).collect();
    let trans: Vec<_> = (0..nt).map(|i| b.add_transition(format!("t{}", i + 1)).unwrap()).collect();
    for &t in &trans {
        let mut pre = vec![0u64; np];
        for w in pre.iter_mut() {
            if rng.gen_bool(0.4) {
                *w = rng.gen_range(1..=shape.max_weight);
            }
        }
        if shape.bounded && pre.iter().all(|&w| w == 0) {
            pre[rng.gen_range(0..np)] = rng.gen_range(1..=shape.max_weight);
        }
        let mut post = vec![0u64; np];
        if shape.conservative {
            for _ in 0..pre.iter().sum::<u64>() {
                post[rng.gen_range(0..np)] += 1;
            }
        } else {
            for w in post.iter_mut() {
                if rng.gen_bool(0.4) {
                    *w = rng.gen_range(1..=shape.max_weight);
                }
            }
        }
        for (i, &p) in places.iter().enumerate() {
            if pre[i] > 0 {
                b.input(p, t, pre[i]).unwrap();
            }
            if post[i] > 0 {
                b.output(t, p, post[i]).unwrap();
            }
            if shape.inhibitors && pre[i] == 0 && rng.gen_bool(0.15) {
                b.inhibitor(p, t).unwrap();
            }
        }
        if shape.priorities {
            b.priority(t, rng.gen_range(0..3));
        }
    }
    let net = b.build();
    let marking = Marking::from_vec((0..np).map(|_| rng.gen_range(0..=shape.max_tokens)).collect());
    (net, marking)
}
