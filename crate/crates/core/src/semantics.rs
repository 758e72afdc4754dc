//! Firing rules: which steps a marking permits under each net class and
//! strength, how one of them is chosen, and tact-by-tact execution.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::net::{Marking, Multiplicity, NetError, NetStructure, Step, TransitionId};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NetClass {
    /// One firable transition fires once.
    Petri,
    /// A set of firable transitions fires, one copy each.
    Salwicki,
    /// One firable transition fires in several copies.
    Sleptsov,
    /// A multiset of firable transitions fires.
    SalwickiSleptsov,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strength {
    Weak,
    General,
    Strong,
}

/// A firing rule: class, strength and the structural extensions honored.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct SemanticsMode {
    class: NetClass,
    strength: Strength,
    inhibitor_arcs: bool,
    priorities: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("invalid semantics mode: {0}")]
    InvalidMode(String),
    #[error("net has inhibitor arcs but mode `{0}` does not enable them")]
    InhibitorsNotEnabled(SemanticsMode),
    #[error("transition `{0}` has unbounded firing multiplicity (no bounding input arc)")]
    UnboundedStep(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

impl SemanticsMode {
    /// Validated constructor.
    ///
    /// Petri admits only `General`; priorities apply to Petri only;
    /// inhibitor arcs apply to Petri and Sleptsov (single-transition steps).
    pub fn new(
        class: NetClass,
        strength: Strength,
        inhibitor_arcs: bool,
        priorities: bool,
    ) -> Result<Self, SemanticsError> {
        if class == NetClass::Petri && strength != Strength::General {
            return Err(SemanticsError::InvalidMode("Petri nets have only the general firing rule".into()));
        }
        if priorities && class != NetClass::Petri {
            return Err(SemanticsError::InvalidMode("priorities are defined for Petri firing only".into()));
        }
        if inhibitor_arcs && matches!(class, NetClass::Salwicki | NetClass::SalwickiSleptsov) {
            return Err(SemanticsError::InvalidMode(
                "inhibitor arcs are not defined for joint (Salwicki-family) steps".into(),
            ));
        }
        Ok(SemanticsMode { class, strength, inhibitor_arcs, priorities })
    }

    pub fn petri() -> Self {
        Self::plain(NetClass::Petri, Strength::General)
    }

    pub fn petri_inhibitor() -> Self {
        SemanticsMode { inhibitor_arcs: true, ..Self::petri() }
    }

    pub fn petri_priority() -> Self {
        SemanticsMode { priorities: true, ..Self::petri() }
    }

    pub fn strong_sleptsov() -> Self {
        Self::plain(NetClass::Sleptsov, Strength::Strong)
    }

    /// Mode without extensions. Panics on the invalid Petri/non-general pairs.
    pub fn plain(class: NetClass, strength: Strength) -> Self {
        Self::new(class, strength, false, false).expect("valid plain mode")
    }

    pub fn with_inhibitors(self) -> Result<Self, SemanticsError> {
        Self::new(self.class, self.strength, true, self.priorities)
    }

    pub fn class(&self) -> NetClass {
        self.class
    }

    pub fn strength(&self) -> Strength {
        self.strength
    }

    pub fn inhibitor_arcs(&self) -> bool {
        self.inhibitor_arcs
    }

    pub fn priorities(&self) -> bool {
        self.priorities
    }

    /// The nine class/strength cells without extensions.
    pub fn all_plain() -> Vec<SemanticsMode> {
        let mut out = vec![Self::petri()];
        for class in [NetClass::Salwicki, NetClass::Sleptsov, NetClass::SalwickiSleptsov] {
            for strength in [Strength::Weak, Strength::General, Strength::Strong] {
                out.push(Self::plain(class, strength));
            }
        }
        out
    }

    fn check_net(&self, net: &NetStructure) -> Result<(), SemanticsError> {
        if net.has_inhibitors() && !self.inhibitor_arcs {
            return Err(SemanticsError::InhibitorsNotEnabled(*self));
        }
        Ok(())
    }
}

impl fmt::Display for SemanticsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let class = match self.class {
            NetClass::Petri => "petri",
            NetClass::Salwicki => "salwicki",
            NetClass::Sleptsov => "sleptsov",
            NetClass::SalwickiSleptsov => "salwicki-sleptsov",
        };
        let mut text = class.to_string();
        if self.class != NetClass::Petri {
            text.push('/');
            text.push_str(match self.strength {
                Strength::Weak => "weak",
                Strength::General => "general",
                Strength::Strong => "strong",
            });
        }
        if self.inhibitor_arcs {
            text.push_str("+inhibitor");
        }
        if self.priorities {
            text.push_str("+priority");
        }
        f.pad(&text)
    }
}

/// Parses `class[/strength][+inhibitor][+priority]`, e.g. `sleptsov/strong`
/// or `petri+inhibitor`. Strength defaults to `general`.
impl FromStr for SemanticsMode {
    type Err = SemanticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let mut parts = lower.split('+');
        let head = parts.next().unwrap_or_default();
        let (class, strength) = match head.split_once('/') {
            Some((c, s)) => (c, Some(s)),
            None => (head, None),
        };
        let class = match class {
            "petri" => NetClass::Petri,
            "salwicki" => NetClass::Salwicki,
            "sleptsov" => NetClass::Sleptsov,
            "salwicki-sleptsov" => NetClass::SalwickiSleptsov,
            other => return Err(SemanticsError::InvalidMode(format!("unknown net class `{other}`"))),
        };
        let strength = match strength {
            None | Some("general") => Strength::General,
            Some("weak") => Strength::Weak,
            Some("strong") => Strength::Strong,
            Some(other) => return Err(SemanticsError::InvalidMode(format!("unknown strength `{other}`"))),
        };
        let mut inhibitor_arcs = false;
        let mut priorities = false;
        for ext in parts {
            match ext {
                "inhibitor" => inhibitor_arcs = true,
                "priority" => priorities = true,
                other => return Err(SemanticsError::InvalidMode(format!("unknown extension `{other}`"))),
            }
        }
        SemanticsMode::new(class, strength, inhibitor_arcs, priorities)
    }
}

/// How [`choose_step`] resolves nondeterminism.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum StepChoicePolicy {
    /// Uniform draw from the enumerated steps using a ChaCha8 stream.
    SeededRandom(u64),
    /// Smallest step in [`Step`] order (transition index, then count).
    FirstLexicographic,
}

/// Every step the mode permits at `marking`, in canonical order.
///
/// The set is empty exactly when the marking is dead for the mode.
pub fn enumerate_steps(
    marking: &Marking,
    net: &NetStructure,
    mode: SemanticsMode,
) -> Result<BTreeSet<Step>, SemanticsError> {
    mode.check_net(net)?;
    if marking.len() != net.place_count() {
        return Err(NetError::MarkingSize { expected: net.place_count(), actual: marking.len() }.into());
    }
    let multiplicities: Vec<Multiplicity> = net.transitions().map(|t| net.multiplicity_unchecked(marking, t)).collect();
    let firable: Vec<TransitionId> = net.transitions().filter(|t| multiplicities[t.0].is_positive()).collect();

    let steps = match mode.class {
        NetClass::Petri => petri_steps(net, &firable, mode.priorities),
        NetClass::Sleptsov => sleptsov_steps(net, &multiplicities, &firable, mode.strength)?,
        NetClass::Salwicki => joint_steps(net, marking, &firable, mode.strength, false)?,
        NetClass::SalwickiSleptsov => joint_steps(net, marking, &firable, mode.strength, true)?,
    };
    debug_assert!(steps.iter().all(|s| !s.is_empty()));
    Ok(steps)
}

fn petri_steps(net: &NetStructure, firable: &[TransitionId], priorities: bool) -> BTreeSet<Step> {
    let top = if priorities { firable.iter().map(|&t| net.priority(t)).max() } else { None };
    firable.iter().filter(|&&t| top.is_none_or(|p| net.priority(t) == p)).map(|&t| Step::single(t, 1)).collect()
}

fn finite_count(net: &NetStructure, t: TransitionId, m: Multiplicity) -> Result<u64, SemanticsError> {
    m.finite().ok_or_else(|| SemanticsError::UnboundedStep(net.transition_name(t).to_string()))
}

fn sleptsov_steps(
    net: &NetStructure,
    multiplicities: &[Multiplicity],
    firable: &[TransitionId],
    strength: Strength,
) -> Result<BTreeSet<Step>, SemanticsError> {
    let mut counted = Vec::with_capacity(firable.len());
    for &t in firable {
        counted.push((t, finite_count(net, t, multiplicities[t.0])?));
    }
    let steps = match strength {
        Strength::General => counted.iter().map(|&(t, c)| Step::single(t, c)).collect(),
        Strength::Weak => counted.iter().flat_map(|&(t, c)| (1..=c).map(move |k| Step::single(t, k))).collect(),
        Strength::Strong => {
            let max = counted.iter().map(|&(_, c)| c).max().unwrap_or(0);
            counted.iter().filter(|&&(_, c)| c == max).map(|&(t, c)| Step::single(t, c)).collect()
        }
    };
    Ok(steps)
}

/// Enumerates jointly valid set-steps (`multi == false`) or multiset-steps
/// and filters them by strength.
///
/// Depth-first over the firable transitions in index order, tracking the
/// remaining marking; each transition's count is bounded by what is left.
fn joint_steps(
    net: &NetStructure,
    marking: &Marking,
    firable: &[TransitionId],
    strength: Strength,
    multi: bool,
) -> Result<BTreeSet<Step>, SemanticsError> {
    if multi {
        for &t in firable {
            if net.is_source(t) {
                return Err(SemanticsError::UnboundedStep(net.transition_name(t).to_string()));
            }
        }
    }
    let mut search =
        JointSearch { net, firable, multi, strength, counts: vec![0; firable.len()], found: Vec::new(), best: 0 };
    let mut remaining = marking.clone();
    search.descend(0, &mut remaining);

    let mut out = BTreeSet::new();
    for (step, measure) in search.found {
        if strength != Strength::Strong || measure == search.best {
            out.insert(step);
        }
    }
    Ok(out)
}

struct JointSearch<'a> {
    net: &'a NetStructure,
    firable: &'a [TransitionId],
    multi: bool,
    strength: Strength,
    counts: Vec<u64>,
    found: Vec<(Step, u64)>,
    best: u64,
}

impl JointSearch<'_> {
    fn descend(&mut self, depth: usize, remaining: &mut Marking) {
        if depth == self.firable.len() {
            self.leaf(remaining);
            return;
        }
        let t = self.firable[depth];
        let room = match self.net.multiplicity_unchecked(remaining, t) {
            Multiplicity::Finite(c) => c,
            // only source transitions are unbounded here, and only in set mode
            Multiplicity::Unbounded => 1,
        };
        let cap = if self.multi { room } else { room.min(1) };
        for k in 0..=cap {
            if k > 0 {
                for &(p, w) in self.net.inputs(t) {
                    remaining.set(p, remaining.get(p) - w);
                }
            }
            self.counts[depth] = k;
            self.descend(depth + 1, remaining);
        }
        for &(p, w) in self.net.inputs(t) {
            remaining.set(p, remaining.get(p) + cap * w);
        }
        self.counts[depth] = 0;
    }

    fn leaf(&mut self, remaining: &Marking) {
        let total: u64 = self.counts.iter().sum();
        if total == 0 {
            return;
        }
        if self.strength != Strength::Weak {
            // maximal: no transition can take one more copy
            let extendable = self.firable.iter().enumerate().any(|(i, &t)| {
                (self.multi || self.counts[i] == 0) && self.net.multiplicity_unchecked(remaining, t).is_positive()
            });
            if extendable {
                return;
            }
        }
        let measure = total;
        if self.strength == Strength::Strong {
            if measure < self.best {
                return;
            }
            self.best = measure;
        }
        let step = Step::from_counts(self.firable.iter().copied().zip(self.counts.iter().copied()));
        self.found.push((step, measure));
    }
}

/// Stateful chooser; one random stream is kept across a whole run.
pub struct StepChooser {
    policy: StepChoicePolicy,
    rng: Option<ChaCha8Rng>,
}

impl StepChooser {
    pub fn new(policy: StepChoicePolicy) -> Self {
        let rng = match policy {
            StepChoicePolicy::SeededRandom(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            StepChoicePolicy::FirstLexicographic => None,
        };
        StepChooser { policy, rng }
    }

    pub fn policy(&self) -> StepChoicePolicy {
        self.policy
    }

    pub fn pick(&mut self, steps: BTreeSet<Step>) -> Option<Step> {
        if steps.is_empty() {
            return None;
        }
        match &mut self.rng {
            None => steps.into_iter().next(),
            Some(rng) => {
                let idx = rng.gen_range(0..steps.len());
                steps.into_iter().nth(idx)
            }
        }
    }
}

/// One step chosen from [`enumerate_steps`] by `policy`; `None` when dead.
pub fn choose_step(
    marking: &Marking,
    net: &NetStructure,
    mode: SemanticsMode,
    policy: StepChoicePolicy,
) -> Result<Option<Step>, SemanticsError> {
    let steps = enumerate_steps(marking, net, mode)?;
    Ok(StepChooser::new(policy).pick(steps))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Termination {
    /// No step is permitted at the final marking.
    Dead,
    /// The step budget ran out.
    Budget,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Dead => "dead",
            Termination::Budget => "budget",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecutionTrace {
    pub initial: Marking,
    pub steps: Vec<(Step, Marking)>,
    pub termination: Termination,
}

impl ExecutionTrace {
    pub fn final_marking(&self) -> &Marking {
        self.steps.last().map(|(_, m)| m).unwrap_or(&self.initial)
    }

    /// Initial marking followed by every successor.
    pub fn markings(&self) -> impl Iterator<Item = &Marking> {
        std::iter::once(&self.initial).chain(self.steps.iter().map(|(_, m)| m))
    }
}

/// Executes up to `max_steps` tacts from `marking`.
pub fn run(
    marking: &Marking,
    net: &NetStructure,
    mode: SemanticsMode,
    policy: StepChoicePolicy,
    max_steps: usize,
) -> Result<ExecutionTrace, SemanticsError> {
    let mut chooser = StepChooser::new(policy);
    let mut current = marking.clone();
    let mut steps = Vec::new();
    let termination = loop {
        if steps.len() >= max_steps {
            break Termination::Budget;
        }
        let Some(step) = chooser.pick(enumerate_steps(&current, net, mode)?) else {
            break Termination::Dead;
        };
        let next = net.apply_step(&current, &step)?;
        steps.push((step, next.clone()));
        current = next;
    };
    Ok(ExecutionTrace { initial: marking.clone(), steps, termination })
}
