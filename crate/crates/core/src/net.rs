//! Net data model: structure, markings, steps and firability multiplicities.
//!
//! A [`NetStructure`] is immutable once built. Arcs are stored sparsely,
//! keyed by `(place, transition)` / `(transition, place)` pairs, with a
//! per-transition adjacency cache so the firing rules never scan the whole
//! arc map.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// Dense index of a place within its net.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaceId(pub usize);

/// Dense index of a transition within its net.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("place index {0} out of range")]
    PlaceOutOfRange(usize),
    #[error("transition index {0} out of range")]
    TransitionOutOfRange(usize),
    #[error("duplicate declaration of `{0}`")]
    DuplicateName(String),
    #[error("arc weight must be at least 1 (arc {0})")]
    ZeroWeight(String),
    #[error("duplicate arc {0}")]
    DuplicateArc(String),
    #[error("place `{place}` has both a regular and an inhibitor arc to `{transition}`")]
    PreInhibitorConflict { place: String, transition: String },
    #[error("`{place}` is not an input place of `{transition}`")]
    NotAnInputArc { place: String, transition: String },
    #[error("marking has {actual} entries but the net has {expected} places")]
    MarkingSize { expected: usize, actual: usize },
    #[error("step with zero count for `{0}`")]
    ZeroCount(String),
    #[error("invalid step: {0}")]
    InvalidStep(String),
    #[error("token count overflow at place `{0}`")]
    Overflow(String),
}

/// Firability multiplicity: how many copies of a transition (or arc) may fire.
///
/// `Unbounded` only arises from an inhibitor arc on an empty place, or from a
/// transition with no input arcs at all. Derived ordering puts every finite
/// value below `Unbounded`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Multiplicity {
    Finite(u64),
    Unbounded,
}

impl Multiplicity {
    pub fn is_positive(self) -> bool {
        !matches!(self, Multiplicity::Finite(0))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Multiplicity::Finite(v) => Some(v),
            Multiplicity::Unbounded => None,
        }
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Finite(v) => write!(f, "{v}"),
            Multiplicity::Unbounded => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Adjacency {
    inputs: Vec<(PlaceId, u64)>,
    outputs: Vec<(PlaceId, u64)>,
    inhibitors: Vec<PlaceId>,
}

/// Place-transition net with weighted arcs, inhibitor arcs and priorities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetStructure {
    places: Vec<String>,
    transitions: Vec<String>,
    place_index: HashMap<String, PlaceId>,
    transition_index: HashMap<String, TransitionId>,
    pre: BTreeMap<(PlaceId, TransitionId), u64>,
    post: BTreeMap<(TransitionId, PlaceId), u64>,
    inhibitors: BTreeSet<(PlaceId, TransitionId)>,
    priorities: Vec<u64>,
    adjacency: Vec<Adjacency>,
}

impl NetStructure {
    pub fn builder() -> NetBuilder {
        NetBuilder::default()
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn places(&self) -> impl ExactSizeIterator<Item = PlaceId> {
        (0..self.places.len()).map(PlaceId)
    }

    pub fn transitions(&self) -> impl ExactSizeIterator<Item = TransitionId> {
        (0..self.transitions.len()).map(TransitionId)
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p.0]
    }

    pub fn transition_name(&self, t: TransitionId) -> &str {
        &self.transitions[t.0]
    }

    pub fn place(&self, name: &str) -> Result<PlaceId, NetError> {
        self.place_index.get(name).copied().ok_or_else(|| NetError::UnknownPlace(name.to_string()))
    }

    pub fn transition(&self, name: &str) -> Result<TransitionId, NetError> {
        self.transition_index.get(name).copied().ok_or_else(|| NetError::UnknownTransition(name.to_string()))
    }

    /// Regular arc weight `a(p,t)`; 0 when absent.
    pub fn pre_weight(&self, p: PlaceId, t: TransitionId) -> u64 {
        self.pre.get(&(p, t)).copied().unwrap_or(0)
    }

    /// Output arc weight `a(t,p)`; 0 when absent.
    pub fn post_weight(&self, t: TransitionId, p: PlaceId) -> u64 {
        self.post.get(&(t, p)).copied().unwrap_or(0)
    }

    pub fn is_inhibitor(&self, p: PlaceId, t: TransitionId) -> bool {
        self.inhibitors.contains(&(p, t))
    }

    pub fn priority(&self, t: TransitionId) -> u64 {
        self.priorities[t.0]
    }

    pub fn has_inhibitors(&self) -> bool {
        !self.inhibitors.is_empty()
    }

    pub fn has_priorities(&self) -> bool {
        self.priorities.iter().any(|&p| p != 0)
    }

    pub fn pre_arcs(&self) -> impl Iterator<Item = (PlaceId, TransitionId, u64)> + '_ {
        self.pre.iter().map(|(&(p, t), &w)| (p, t, w))
    }

    pub fn post_arcs(&self) -> impl Iterator<Item = (TransitionId, PlaceId, u64)> + '_ {
        self.post.iter().map(|(&(t, p), &w)| (t, p, w))
    }

    pub fn inhibitor_arcs(&self) -> impl Iterator<Item = (PlaceId, TransitionId)> + '_ {
        self.inhibitors.iter().copied()
    }

    /// Regular input arcs of `t` in place order.
    pub fn inputs(&self, t: TransitionId) -> &[(PlaceId, u64)] {
        &self.adjacency[t.0].inputs
    }

    /// Output arcs of `t` in place order.
    pub fn outputs(&self, t: TransitionId) -> &[(PlaceId, u64)] {
        &self.adjacency[t.0].outputs
    }

    /// Inhibitor places of `t` in place order.
    pub fn inhibitor_places(&self, t: TransitionId) -> &[PlaceId] {
        &self.adjacency[t.0].inhibitors
    }

    /// A source transition has neither regular nor inhibitor inputs.
    pub fn is_source(&self, t: TransitionId) -> bool {
        let adj = &self.adjacency[t.0];
        adj.inputs.is_empty() && adj.inhibitors.is_empty()
    }

    fn check_place(&self, p: PlaceId) -> Result<(), NetError> {
        if p.0 < self.places.len() {
            Ok(())
        } else {
            Err(NetError::PlaceOutOfRange(p.0))
        }
    }

    fn check_transition(&self, t: TransitionId) -> Result<(), NetError> {
        if t.0 < self.transitions.len() {
            Ok(())
        } else {
            Err(NetError::TransitionOutOfRange(t.0))
        }
    }

    fn check_marking(&self, marking: &Marking) -> Result<(), NetError> {
        if marking.len() == self.places.len() {
            Ok(())
        } else {
            Err(NetError::MarkingSize { expected: self.places.len(), actual: marking.len() })
        }
    }

    /// Firability multiplicity of a single input arc.
    ///
    /// Regular arcs give `floor(μ(p) / a(p,t))`; inhibitor arcs give
    /// `Unbounded` on an empty place and `0` otherwise.
    pub fn arc_multiplicity(&self, marking: &Marking, p: PlaceId, t: TransitionId) -> Result<Multiplicity, NetError> {
        self.check_place(p)?;
        self.check_transition(t)?;
        self.check_marking(marking)?;
        let tokens = marking.get(p);
        if let Some(&w) = self.pre.get(&(p, t)) {
            Ok(Multiplicity::Finite(tokens / w))
        } else if self.inhibitors.contains(&(p, t)) {
            Ok(inhibitor_multiplicity(tokens))
        } else {
            Err(NetError::NotAnInputArc {
                place: self.place_name(p).to_string(),
                transition: self.transition_name(t).to_string(),
            })
        }
    }

    /// Firability multiplicity of a transition: the minimum over its input
    /// arcs (regular and inhibitor). An input-free transition is `Unbounded`.
    pub fn transition_multiplicity(&self, marking: &Marking, t: TransitionId) -> Result<Multiplicity, NetError> {
        self.check_transition(t)?;
        self.check_marking(marking)?;
        Ok(self.multiplicity_unchecked(marking, t))
    }

    pub(crate) fn multiplicity_unchecked(&self, marking: &Marking, t: TransitionId) -> Multiplicity {
        let adj = &self.adjacency[t.0];
        let mut best = Multiplicity::Unbounded;
        for &p in &adj.inhibitors {
            best = best.min(inhibitor_multiplicity(marking.get(p)));
        }
        for &(p, w) in &adj.inputs {
            best = best.min(Multiplicity::Finite(marking.get(p) / w));
        }
        best
    }

    pub fn is_firable(&self, marking: &Marking, t: TransitionId) -> Result<bool, NetError> {
        Ok(self.transition_multiplicity(marking, t)?.is_positive())
    }

    /// Fires `step` atomically and returns the successor marking.
    ///
    /// Fails with [`NetError::InvalidStep`] when the joint consumption exceeds
    /// a place's tokens or an inhibitor place of a fired transition is marked.
    pub fn apply_step(&self, marking: &Marking, step: &Step) -> Result<Marking, NetError> {
        self.check_marking(marking)?;
        for (t, _) in step.iter() {
            self.check_transition(t)?;
        }
        let mut consumed: BTreeMap<PlaceId, u64> = BTreeMap::new();
        for (t, count) in step.iter() {
            for &p in self.inhibitor_places(t) {
                if marking.get(p) != 0 {
                    return Err(NetError::InvalidStep(format!(
                        "inhibitor place `{}` of `{}` holds {} tokens",
                        self.place_name(p),
                        self.transition_name(t),
                        marking.get(p)
                    )));
                }
            }
            for &(p, w) in self.inputs(t) {
                let need = count.checked_mul(w).ok_or_else(|| NetError::Overflow(self.place_name(p).to_string()))?;
                let slot = consumed.entry(p).or_insert(0);
                *slot = slot.checked_add(need).ok_or_else(|| NetError::Overflow(self.place_name(p).to_string()))?;
            }
        }
        let mut next = marking.clone();
        for (p, need) in consumed {
            let have = next.get(p);
            if need > have {
                return Err(NetError::InvalidStep(format!(
                    "place `{}` needs {} tokens but holds {}",
                    self.place_name(p),
                    need,
                    have
                )));
            }
            next.tokens[p.0] = have - need;
        }
        for (t, count) in step.iter() {
            for &(p, w) in self.outputs(t) {
                let add = count
                    .checked_mul(w)
                    .and_then(|a| a.checked_add(next.get(p)))
                    .ok_or_else(|| NetError::Overflow(self.place_name(p).to_string()))?;
                next.tokens[p.0] = add;
            }
        }
        Ok(next)
    }

    /// Jointly valid: the step's total consumption fits the marking and no
    /// fired transition is blocked by an inhibitor arc.
    pub fn is_jointly_valid(&self, marking: &Marking, step: &Step) -> bool {
        self.apply_step(marking, step).is_ok()
    }

    /// Renders `marking` in multiset notation, e.g. `{2·p1, p3}`.
    pub fn format_marking(&self, marking: &Marking) -> String {
        let parts: Vec<String> = self
            .places()
            .filter(|&p| marking.get(p) > 0)
            .map(|p| with_count(marking.get(p), self.place_name(p)))
            .collect();
        format!("{{{}}}", parts.join(", "))
    }

    /// Renders `step` as `3·t2` or `t1, 2·t3`.
    pub fn format_step(&self, step: &Step) -> String {
        step.iter().map(|(t, c)| with_count(c, self.transition_name(t))).collect::<Vec<_>>().join(", ")
    }

    /// Builds a marking from `(place name, tokens)` pairs; unnamed places are 0.
    pub fn marking_from<'a, I>(&self, entries: I) -> Result<Marking, NetError>
    where
        I: IntoIterator<Item = (&'a str, u64)>,
    {
        let mut m = Marking::zero(self.place_count());
        for (name, v) in entries {
            let p = self.place(name)?;
            m.tokens[p.0] = v;
        }
        Ok(m)
    }

    /// Builds a step from `(transition name, count)` pairs.
    pub fn step_from<'a, I>(&self, entries: I) -> Result<Step, NetError>
    where
        I: IntoIterator<Item = (&'a str, u64)>,
    {
        let mut counts = BTreeMap::new();
        for (name, c) in entries {
            let t = self.transition(name)?;
            if c == 0 {
                return Err(NetError::ZeroCount(name.to_string()));
            }
            *counts.entry(t).or_insert(0) += c;
        }
        Ok(Step { counts })
    }
}

fn inhibitor_multiplicity(tokens: u64) -> Multiplicity {
    if tokens == 0 {
        Multiplicity::Unbounded
    } else {
        Multiplicity::Finite(0)
    }
}

fn with_count(count: u64, name: &str) -> String {
    if count == 1 {
        name.to_string()
    } else {
        format!("{count}·{name}")
    }
}

/// Incremental constructor for [`NetStructure`].
#[derive(Debug, Default, Clone)]
pub struct NetBuilder {
    places: Vec<String>,
    transitions: Vec<String>,
    place_index: HashMap<String, PlaceId>,
    transition_index: HashMap<String, TransitionId>,
    pre: BTreeMap<(PlaceId, TransitionId), u64>,
    post: BTreeMap<(TransitionId, PlaceId), u64>,
    inhibitors: BTreeSet<(PlaceId, TransitionId)>,
    priorities: Vec<u64>,
}

impl NetBuilder {
    fn name_taken(&self, name: &str) -> bool {
        self.place_index.contains_key(name) || self.transition_index.contains_key(name)
    }

    pub fn add_place(&mut self, name: impl Into<String>) -> Result<PlaceId, NetError> {
        let name = name.into();
        if self.name_taken(&name) {
            return Err(NetError::DuplicateName(name));
        }
        let id = PlaceId(self.places.len());
        self.place_index.insert(name.clone(), id);
        self.places.push(name);
        Ok(id)
    }

    pub fn add_transition(&mut self, name: impl Into<String>) -> Result<TransitionId, NetError> {
        let name = name.into();
        if self.name_taken(&name) {
            return Err(NetError::DuplicateName(name));
        }
        let id = TransitionId(self.transitions.len());
        self.transition_index.insert(name.clone(), id);
        self.transitions.push(name);
        self.priorities.push(0);
        Ok(id)
    }

    pub fn place_id(&self, name: &str) -> Option<PlaceId> {
        self.place_index.get(name).copied()
    }

    pub fn transition_id(&self, name: &str) -> Option<TransitionId> {
        self.transition_index.get(name).copied()
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    fn arc_label(&self, from: &str, to: &str) -> String {
        format!("{from} -> {to}")
    }

    /// Regular input arc `p -> t` with weight `w`.
    pub fn input(&mut self, p: PlaceId, t: TransitionId, w: u64) -> Result<&mut Self, NetError> {
        let label = self.arc_label(&self.places[p.0], &self.transitions[t.0]);
        if w == 0 {
            return Err(NetError::ZeroWeight(label));
        }
        if self.inhibitors.contains(&(p, t)) {
            return Err(NetError::PreInhibitorConflict {
                place: self.places[p.0].clone(),
                transition: self.transitions[t.0].clone(),
            });
        }
        if self.pre.insert((p, t), w).is_some() {
            return Err(NetError::DuplicateArc(label));
        }
        Ok(self)
    }

    /// Output arc `t -> p` with weight `w`.
    pub fn output(&mut self, t: TransitionId, p: PlaceId, w: u64) -> Result<&mut Self, NetError> {
        let label = self.arc_label(&self.transitions[t.0], &self.places[p.0]);
        if w == 0 {
            return Err(NetError::ZeroWeight(label));
        }
        if self.post.insert((t, p), w).is_some() {
            return Err(NetError::DuplicateArc(label));
        }
        Ok(self)
    }

    pub fn inhibitor(&mut self, p: PlaceId, t: TransitionId) -> Result<&mut Self, NetError> {
        if self.pre.contains_key(&(p, t)) {
            return Err(NetError::PreInhibitorConflict {
                place: self.places[p.0].clone(),
                transition: self.transitions[t.0].clone(),
            });
        }
        if !self.inhibitors.insert((p, t)) {
            return Err(NetError::DuplicateArc(format!("{} -o {}", self.places[p.0], self.transitions[t.0])));
        }
        Ok(self)
    }

    pub fn priority(&mut self, t: TransitionId, value: u64) -> &mut Self {
        self.priorities[t.0] = value;
        self
    }

    pub fn build(self) -> NetStructure {
        let mut adjacency = vec![Adjacency::default(); self.transitions.len()];
        for (&(p, t), &w) in &self.pre {
            adjacency[t.0].inputs.push((p, w));
        }
        for (&(t, p), &w) in &self.post {
            adjacency[t.0].outputs.push((p, w));
        }
        for &(p, t) in &self.inhibitors {
            adjacency[t.0].inhibitors.push(p);
        }
        for adj in &mut adjacency {
            adj.inputs.sort();
            adj.outputs.sort();
            adj.inhibitors.sort();
        }
        NetStructure {
            places: self.places,
            transitions: self.transitions,
            place_index: self.place_index,
            transition_index: self.transition_index,
            pre: self.pre,
            post: self.post,
            inhibitors: self.inhibitors,
            priorities: self.priorities,
            adjacency,
        }
    }
}

/// Token counts, one per place, indexed by [`PlaceId`].
///
/// Ordering is lexicographic over the place-index vector, which is the
/// canonical order used by graph exports.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Marking {
    tokens: Vec<u64>,
}

impl Marking {
    pub fn zero(places: usize) -> Self {
        Marking { tokens: vec![0; places] }
    }

    pub fn from_vec(tokens: Vec<u64>) -> Self {
        Marking { tokens }
    }

    /// Checked constructor: the vector length must match the net.
    pub fn for_net(net: &NetStructure, tokens: Vec<u64>) -> Result<Self, NetError> {
        let m = Marking { tokens };
        net.check_marking(&m)?;
        Ok(m)
    }

    pub fn get(&self, p: PlaceId) -> u64 {
        self.tokens[p.0]
    }

    pub fn set(&mut self, p: PlaceId, value: u64) {
        self.tokens[p.0] = value;
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.tokens
    }

    pub fn total(&self) -> u128 {
        self.tokens.iter().map(|&v| v as u128).sum()
    }
}

/// Multiset of transitions fired together in one tact.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    counts: BTreeMap<TransitionId, u64>,
}

impl Step {
    pub fn single(t: TransitionId, count: u64) -> Self {
        assert!(count > 0, "step counts are positive");
        Step { counts: BTreeMap::from([(t, count)]) }
    }

    /// Builds a step from raw counts, dropping zero entries.
    pub fn from_counts<I: IntoIterator<Item = (TransitionId, u64)>>(counts: I) -> Self {
        let mut map = BTreeMap::new();
        for (t, c) in counts {
            if c > 0 {
                *map.entry(t).or_insert(0) += c;
            }
        }
        Step { counts: map }
    }

    pub fn count(&self, t: TransitionId) -> u64 {
        self.counts.get(&t).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (TransitionId, u64)> + '_ {
        self.counts.iter().map(|(&t, &c)| (t, c))
    }

    pub fn transitions(&self) -> impl Iterator<Item = TransitionId> + '_ {
        self.counts.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Sum of all firing counts.
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Copy of this step with `t`'s count raised by one.
    pub fn incremented(&self, t: TransitionId) -> Step {
        let mut counts = self.counts.clone();
        *counts.entry(t).or_insert(0) += 1;
        Step { counts }
    }
}
