//! Register machine to net compilation.
//!
//! Each instruction `j` becomes a gadget whose start place is the control
//! place `q_j` and whose finish place is `q_{j+1}`; a `J(i)[k]` gadget also
//! drops its jump port into `q_k`. Register `i` lives in place `r_i`.
//! Internal gadget places are numbered `q_{m+2}, q_{m+3}, ...` in
//! instruction order and transitions `t1, t2, ...` likewise, so compiling
//! the same program twice yields identical nets.
//!
//! Zero-check gadgets per backend:
//!
//! * `Inhibitor`: `t_jump` takes the start token and is inhibited by the
//!   register; `t_cont` takes start and one register token and returns the
//!   register token together with the finish token.
//! * `Priority`: the same pair without the inhibitor arc, `t_cont` ranked
//!   above `t_jump`.
//! * `StrongSleptsov`: eight places `p1..p8` (start, finish, jump,
//!   register, three internal, one persistent token) and six transitions.
//!   Registers hold `value + 1` tokens; run under the strong Sleptsov rule
//!   the gadget consumes the start token and marks `p2` when the register
//!   place holds at least two tokens, `p3` when it holds exactly one. An
//!   empty register place (no value) blocks the gadget before it starts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{Marking, NetBuilder, NetError, NetStructure, PlaceId, TransitionId};
use crate::rm::{RmInstruction, RmProgram};
use crate::semantics::{ExecutionTrace, SemanticsMode};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Inhibitor,
    Priority,
    StrongSleptsov,
}

impl Backend {
    pub const ALL: [Backend; 3] = [Backend::Inhibitor, Backend::Priority, Backend::StrongSleptsov];

    /// The semantics the compiled net has to run under.
    pub fn mode(self) -> SemanticsMode {
        match self {
            Backend::Inhibitor => SemanticsMode::petri_inhibitor(),
            Backend::Priority => SemanticsMode::petri_priority(),
            Backend::StrongSleptsov => SemanticsMode::strong_sleptsov(),
        }
    }

    /// Tokens stored in a register place on top of the register value.
    pub fn offset(self) -> u64 {
        match self {
            Backend::StrongSleptsov => 1,
            Backend::Inhibitor | Backend::Priority => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Backend::Inhibitor => "inhibitor",
            Backend::Priority => "priority",
            Backend::StrongSleptsov => "strong-sleptsov",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = CompileError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "inhibitor" => Ok(Backend::Inhibitor),
            "priority" => Ok(Backend::Priority),
            "strong-sleptsov" | "sleptsov" | "strong" => Ok(Backend::StrongSleptsov),
            other => Err(CompileError::UnknownBackend(other.to_string())),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("unknown backend `{0}` (expected inhibitor, priority or strong-sleptsov)")]
    UnknownBackend(String),
    #[error("register place `{place}` holds {tokens} tokens, below the encoding offset {offset}")]
    EncodingViolation { place: String, tokens: u64, offset: u64 },
    #[error("manifest does not match the net: {0}")]
    ManifestMismatch(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Hands out transition names `t1, t2, ...` and internal place names.
struct Namer {
    next_transition: usize,
    place_prefix: &'static str,
    next_internal: usize,
}

impl Namer {
    fn transition(&mut self, b: &mut NetBuilder) -> Result<TransitionId, NetError> {
        let t = b.add_transition(format!("t{}", self.next_transition))?;
        self.next_transition += 1;
        Ok(t)
    }

    fn internal(&mut self, b: &mut NetBuilder) -> Result<PlaceId, NetError> {
        let p = b.add_place(format!("{}{}", self.place_prefix, self.next_internal))?;
        self.next_internal += 1;
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Emitted {
    transitions: Vec<TransitionId>,
    internal: Vec<PlaceId>,
    persistent: Option<PlaceId>,
}

fn emit_increment(
    b: &mut NetBuilder,
    names: &mut Namer,
    start: PlaceId,
    finish: PlaceId,
    register: PlaceId,
) -> Result<Emitted, NetError> {
    let t = names.transition(b)?;
    b.input(start, t, 1)?.output(t, finish, 1)?.output(t, register, 1)?;
    Ok(Emitted { transitions: vec![t], internal: vec![], persistent: None })
}

fn emit_decrement(
    b: &mut NetBuilder,
    names: &mut Namer,
    start: PlaceId,
    finish: PlaceId,
    register: PlaceId,
) -> Result<Emitted, NetError> {
    let t = names.transition(b)?;
    b.input(start, t, 1)?.input(register, t, 1)?.output(t, finish, 1)?;
    Ok(Emitted { transitions: vec![t], internal: vec![], persistent: None })
}

/// `finish` and `jump` may coincide (jump to the next instruction).
fn emit_zero_check(
    b: &mut NetBuilder,
    names: &mut Namer,
    backend: Backend,
    start: PlaceId,
    finish: PlaceId,
    jump: PlaceId,
    register: PlaceId,
) -> Result<Emitted, NetError> {
    match backend {
        Backend::Inhibitor | Backend::Priority => {
            let t_jump = names.transition(b)?;
            let t_cont = names.transition(b)?;
            b.input(start, t_jump, 1)?.output(t_jump, jump, 1)?;
            b.input(start, t_cont, 1)?
                .input(register, t_cont, 1)?
                .output(t_cont, register, 1)?
                .output(t_cont, finish, 1)?;
            if backend == Backend::Inhibitor {
                b.inhibitor(register, t_jump)?;
            } else {
                b.priority(t_cont, 1);
            }
            Ok(Emitted { transitions: vec![t_jump, t_cont], internal: vec![], persistent: None })
        }
        Backend::StrongSleptsov => {
            let p5 = names.internal(b)?;
            let p6 = names.internal(b)?;
            let p7 = names.internal(b)?;
            let p8 = names.internal(b)?;
            let ts: Vec<TransitionId> = (0..6).map(|_| names.transition(b)).collect::<Result<_, _>>()?;
            let [t1, t2, t3, t4, t5, t6] = ts[..] else { unreachable!() };
            // start splits into two probes; the register read arc keeps a
            // valueless (empty) register from being probed at all
            b.input(start, t1, 1)?.input(register, t1, 1)?.output(t1, register, 1)?.output(t1, p5, 2)?;
            // each probe removes one register token
            b.input(register, t2, 1)?.input(p5, t2, 1)?.output(t2, p6, 1)?;
            // single-copy probe, capped by the persistent token in p8
            b.input(register, t3, 1)?.input(p5, t3, 1)?.input(p8, t3, 1)?.output(t3, p7, 1)?.output(t3, p8, 1)?;
            // both probes succeeded: register >= 2, restore and finish
            b.input(p6, t4, 2)?.output(t4, finish, 1)?.output(t4, register, 2)?;
            // one probe failed: register == 1, restore and jump
            b.input(p5, t5, 1)?.input(p6, t5, 1)?.output(t5, jump, 1)?.output(t5, register, 1)?;
            b.input(p5, t6, 1)?.input(p7, t6, 1)?.output(t6, jump, 1)?.output(t6, register, 1)?;
            Ok(Emitted { transitions: ts, internal: vec![p5, p6, p7, p8], persistent: Some(p8) })
        }
    }
}

/// A stand-alone gadget net with its ports.
///
/// Places follow the port numbering `p1` start, `p2` finish; for zero checks
/// `p3` is the jump port and `p4` the register, for increments and
/// decrements `p3` is the register.
#[derive(Clone, Debug)]
pub struct Gadget {
    pub net: NetStructure,
    pub start: PlaceId,
    pub finish: PlaceId,
    pub jump: Option<PlaceId>,
    pub register: PlaceId,
    pub internal: Vec<PlaceId>,
    pub persistent: Option<PlaceId>,
}

impl Gadget {
    /// Marking with the start token, `register_tokens` on the register and
    /// the persistent token, if any.
    pub fn entry_marking(&self, register_tokens: u64) -> Marking {
        let mut m = Marking::zero(self.net.place_count());
        m.set(self.start, 1);
        m.set(self.register, register_tokens);
        if let Some(p) = self.persistent {
            m.set(p, 1);
        }
        m
    }
}

fn standalone_names() -> Namer {
    Namer { next_transition: 1, place_prefix: "p", next_internal: 5 }
}

pub fn gadget_increment() -> Gadget {
    let mut b = NetStructure::builder();
    let (start, finish, register) = three_ports(&mut b);
    let e = emit_increment(&mut b, &mut standalone_names(), start, finish, register).expect("fresh net");
    finish_gadget(b, start, finish, None, register, e)
}

pub fn gadget_decrement() -> Gadget {
    let mut b = NetStructure::builder();
    let (start, finish, register) = three_ports(&mut b);
    let e = emit_decrement(&mut b, &mut standalone_names(), start, finish, register).expect("fresh net");
    finish_gadget(b, start, finish, None, register, e)
}

pub fn gadget_zero_check(backend: Backend) -> Gadget {
    let mut b = NetStructure::builder();
    let start = b.add_place("p1").expect("fresh net");
    let finish = b.add_place("p2").expect("fresh net");
    let jump = b.add_place("p3").expect("fresh net");
    let register = b.add_place("p4").expect("fresh net");
    let e =
        emit_zero_check(&mut b, &mut standalone_names(), backend, start, finish, jump, register).expect("fresh net");
    finish_gadget(b, start, finish, Some(jump), register, e)
}

fn three_ports(b: &mut NetBuilder) -> (PlaceId, PlaceId, PlaceId) {
    (
        b.add_place("p1").expect("fresh net"),
        b.add_place("p2").expect("fresh net"),
        b.add_place("p3").expect("fresh net"),
    )
}

fn finish_gadget(
    b: NetBuilder,
    start: PlaceId,
    finish: PlaceId,
    jump: Option<PlaceId>,
    register: PlaceId,
    e: Emitted,
) -> Gadget {
    Gadget { net: b.build(), start, finish, jump, register, internal: e.internal, persistent: e.persistent }
}

/// Places and transitions belonging to instruction `instruction`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetLayout {
    pub instruction: usize,
    pub op: RmInstruction,
    pub start: PlaceId,
    pub finish: PlaceId,
    pub jump: Option<PlaceId>,
    pub internal: Vec<PlaceId>,
    pub persistent: Option<PlaceId>,
    pub transitions: Vec<TransitionId>,
}

#[derive(Clone, Debug)]
pub struct CompiledNet {
    pub net: NetStructure,
    pub initial: Marking,
    pub backend: Backend,
    /// `q_1 ..= q_{m+1}`.
    pub control: Vec<PlaceId>,
    /// `r_1 ..= r_n`.
    pub registers: Vec<PlaceId>,
    pub gadgets: Vec<GadgetLayout>,
}

/// Compiles `program` (with its initial registers) for `backend`.
pub fn compile(program: &RmProgram, backend: Backend) -> Result<CompiledNet, CompileError> {
    let m = program.len();
    let mut b = NetStructure::builder();
    let control: Vec<PlaceId> = (1..=m + 1).map(|j| b.add_place(format!("q{j}"))).collect::<Result<_, _>>()?;
    let registers: Vec<PlaceId> =
        (1..=program.register_count()).map(|i| b.add_place(format!("r{i}"))).collect::<Result<_, _>>()?;
    let mut names = Namer { next_transition: 1, place_prefix: "q", next_internal: m + 2 };

    let mut gadgets = Vec::with_capacity(m);
    for (idx, &op) in program.instructions().iter().enumerate() {
        let j = idx + 1;
        let start = control[j - 1];
        let finish = control[j];
        let reg = registers[op.register() - 1];
        let (emitted, jump) = match op {
            RmInstruction::Inc(_) => (emit_increment(&mut b, &mut names, start, finish, reg)?, None),
            RmInstruction::Dec(_) => (emit_decrement(&mut b, &mut names, start, finish, reg)?, None),
            RmInstruction::JumpIfZero { target, .. } => {
                let jump = control[target - 1];
                (emit_zero_check(&mut b, &mut names, backend, start, finish, jump, reg)?, Some(jump))
            }
        };
        gadgets.push(GadgetLayout {
            instruction: j,
            op,
            start,
            finish,
            jump,
            internal: emitted.internal,
            persistent: emitted.persistent,
            transitions: emitted.transitions,
        });
    }

    let net = b.build();
    let mut initial = Marking::zero(net.place_count());
    initial.set(control[0], 1);
    for (&p, &v) in registers.iter().zip(program.initial_registers()) {
        let tokens =
            v.checked_add(backend.offset()).ok_or_else(|| NetError::Overflow(net.place_name(p).to_string()))?;
        initial.set(p, tokens);
    }
    for g in &gadgets {
        if let Some(p) = g.persistent {
            initial.set(p, 1);
        }
    }
    Ok(CompiledNet { net, initial, backend, control, registers, gadgets })
}

impl CompiledNet {
    pub fn halt_place(&self) -> PlaceId {
        *self.control.last().expect("at least q1")
    }

    /// Register values encoded in `marking`.
    pub fn decode_registers(&self, marking: &Marking) -> Result<Vec<u64>, CompileError> {
        decode(&self.net, &self.registers, self.backend.offset(), marking)
    }

    /// Index `j` of the single marked control place `q_j`, if the marking is
    /// at an instruction boundary.
    pub fn control_position(&self, marking: &Marking) -> Option<usize> {
        control_position(&self.control, marking)
    }

    /// `(instruction, registers)` at every instruction boundary of `trace`.
    pub fn boundaries(&self, trace: &ExecutionTrace) -> Result<Vec<(usize, Vec<u64>)>, CompileError> {
        trace
            .markings()
            .filter_map(|m| self.control_position(m).map(|j| (j, m)))
            .map(|(j, m)| Ok((j, self.decode_registers(m)?)))
            .collect()
    }

    pub fn manifest(&self) -> Manifest {
        let name = |p: PlaceId| self.net.place_name(p).to_string();
        Manifest {
            backend: self.backend,
            mode: self.backend.mode().to_string(),
            offset: self.backend.offset(),
            control: self.control.iter().map(|&p| name(p)).collect(),
            registers: self.registers.iter().map(|&p| name(p)).collect(),
            halt: name(self.halt_place()),
            gadgets: self
                .gadgets
                .iter()
                .map(|g| ManifestGadget {
                    instruction: g.instruction,
                    op: g.op.to_string(),
                    start: name(g.start),
                    finish: name(g.finish),
                    jump: g.jump.map(name),
                    internal: g.internal.iter().map(|&p| name(p)).collect(),
                    transitions: g.transitions.iter().map(|&t| self.net.transition_name(t).to_string()).collect(),
                })
                .collect(),
        }
    }
}

fn decode(net: &NetStructure, registers: &[PlaceId], offset: u64, marking: &Marking) -> Result<Vec<u64>, CompileError> {
    registers
        .iter()
        .map(|&p| {
            let tokens = marking.get(p);
            tokens.checked_sub(offset).ok_or_else(|| CompileError::EncodingViolation {
                place: net.place_name(p).to_string(),
                tokens,
                offset,
            })
        })
        .collect()
}

fn control_position(control: &[PlaceId], marking: &Marking) -> Option<usize> {
    let mut marked = control.iter().enumerate().filter(|(_, &p)| marking.get(p) > 0);
    match (marked.next(), marked.next()) {
        (Some((i, _)), None) => Some(i + 1),
        _ => None,
    }
}

/// Place-role manifest written next to a compiled net.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub backend: Backend,
    pub mode: String,
    pub offset: u64,
    pub control: Vec<String>,
    pub registers: Vec<String>,
    pub halt: String,
    pub gadgets: Vec<ManifestGadget>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestGadget {
    pub instruction: usize,
    pub op: String,
    pub start: String,
    pub finish: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jump: Option<String>,
    pub internal: Vec<String>,
    pub transitions: Vec<String>,
}

impl Manifest {
    fn resolve(&self, net: &NetStructure, names: &[String]) -> Result<Vec<PlaceId>, CompileError> {
        names
            .iter()
            .map(|n| net.place(n).map_err(|_| CompileError::ManifestMismatch(format!("no place `{n}`"))))
            .collect()
    }

    pub fn decode_registers(&self, net: &NetStructure, marking: &Marking) -> Result<Vec<u64>, CompileError> {
        decode(net, &self.resolve(net, &self.registers)?, self.offset, marking)
    }

    pub fn control_position(&self, net: &NetStructure, marking: &Marking) -> Result<Option<usize>, CompileError> {
        Ok(control_position(&self.resolve(net, &self.control)?, marking))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::APSUM_RM;
    use crate::rm::{parse_rm, rm_run};
    use crate::semantics::{enumerate_steps, run, StepChoicePolicy, Termination};

    #[test]
    fn increment_fragment() {
        let g = gadget_increment();
        assert_eq!(g.net.transition_count(), 1);
        let t = g.net.transition("t1").unwrap();
        assert_eq!(g.net.pre_weight(g.start, t), 1);
        assert_eq!(g.net.post_weight(t, g.finish), 1);
        assert_eq!(g.net.post_weight(t, g.register), 1);
        let after = g.net.apply_step(&g.entry_marking(3), &crate::net::Step::single(t, 1)).unwrap();
        assert_eq!(g.net.format_marking(&after), "{p2, 4·p3}");
        let after = g.net.apply_step(&g.entry_marking(0), &crate::net::Step::single(t, 1)).unwrap();
        assert_eq!(g.net.format_marking(&after), "{p2, p3}");
        let mut idle = g.entry_marking(2);
        idle.set(g.start, 0);
        assert!(!g.net.is_firable(&idle, t).unwrap());
    }

    #[test]
    fn decrement_fragment() {
        let g = gadget_decrement();
        let t = g.net.transition("t1").unwrap();
        let after = g.net.apply_step(&g.entry_marking(3), &crate::net::Step::single(t, 1)).unwrap();
        assert_eq!(g.net.format_marking(&after), "{p2, 2·p3}");
        assert!(!g.net.is_firable(&g.entry_marking(0), t).unwrap());
        let mut idle = g.entry_marking(2);
        idle.set(g.start, 0);
        assert!(!g.net.is_firable(&idle, t).unwrap());
    }

    #[test]
    fn inhibitor_zero_check_fragment() {
        let g = gadget_zero_check(Backend::Inhibitor);
        let mode = Backend::Inhibitor.mode();
        let jump = run(&g.entry_marking(0), &g.net, mode, StepChoicePolicy::FirstLexicographic, 10).unwrap();
        assert_eq!(g.net.format_marking(jump.final_marking()), "{p3}");
        let cont = run(&g.entry_marking(4), &g.net, mode, StepChoicePolicy::FirstLexicographic, 10).unwrap();
        assert_eq!(g.net.format_marking(cont.final_marking()), "{p2, 4·p4}");
        let t1 = g.net.transition("t1").unwrap();
        assert!(g.net.is_firable(&g.entry_marking(0), t1).unwrap());
    }

    #[test]
    fn priority_zero_check_fragment() {
        let g = gadget_zero_check(Backend::Priority);
        assert!(!g.net.has_inhibitors());
        let mode = Backend::Priority.mode();
        let steps = enumerate_steps(&g.entry_marking(2), &g.net, mode).unwrap();
        assert_eq!(steps.len(), 1);
        let cont = run(&g.entry_marking(2), &g.net, mode, StepChoicePolicy::SeededRandom(3), 10).unwrap();
        assert_eq!(g.net.format_marking(cont.final_marking()), "{p2, 2·p4}");
        let jump = run(&g.entry_marking(0), &g.net, mode, StepChoicePolicy::SeededRandom(3), 10).unwrap();
        assert_eq!(g.net.format_marking(jump.final_marking()), "{p3}");
    }

    #[test]
    fn strong_sleptsov_zero_check_sequences() {
        let g = gadget_zero_check(Backend::StrongSleptsov);
        let mode = Backend::StrongSleptsov.mode();
        let net = &g.net;
        for seed in 0..8 {
            let tr = run(&g.entry_marking(5), net, mode, StepChoicePolicy::SeededRandom(seed), 10).unwrap();
            let labels: Vec<String> = tr.steps.iter().map(|(s, _)| net.format_step(s)).collect();
            assert_eq!(labels, ["t1", "2·t2", "t4"]);
            assert_eq!(net.format_marking(tr.final_marking()), "{p2, 5·p4, p8}");
        }
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..32 {
            let tr = run(&g.entry_marking(1), net, mode, StepChoicePolicy::SeededRandom(seed), 10).unwrap();
            let labels: Vec<String> = tr.steps.iter().map(|(s, _)| net.format_step(s)).collect();
            assert_eq!(net.format_marking(tr.final_marking()), "{p3, p4, p8}");
            seen.insert(labels.join(" "));
        }
        assert_eq!(seen, ["t1 t2 t5".to_string(), "t1 t3 t6".to_string()].into());
    }

    #[test]
    fn single_instruction_program() {
        let p = parse_rm("registers 1\n1: P 1\n").unwrap();
        for backend in Backend::ALL {
            let c = compile(&p, backend).unwrap();
            assert_eq!(c.net.transition_count(), 1);
            assert_eq!(c.net.place_count(), 3);
            let tr = run(&c.initial, &c.net, backend.mode(), StepChoicePolicy::FirstLexicographic, 10).unwrap();
            assert_eq!(tr.termination, Termination::Dead);
            assert_eq!(c.control_position(tr.final_marking()), Some(2));
            assert_eq!(c.decode_registers(tr.final_marking()).unwrap(), vec![1]);
        }
    }

    #[test]
    fn apsum_compiles_and_sums() {
        let p = parse_rm(APSUM_RM).unwrap().with_inputs(&[(2, 4)]).unwrap();
        for backend in Backend::ALL {
            let c = compile(&p, backend).unwrap();
            let tr = run(&c.initial, &c.net, backend.mode(), StepChoicePolicy::SeededRandom(1), 100_000).unwrap();
            assert_eq!(tr.termination, Termination::Dead, "{backend}");
            let last = tr.final_marking();
            assert_eq!(last.get(c.halt_place()), 1);
            assert_eq!(c.decode_registers(last).unwrap()[0], 10, "{backend}");
            let r1 = c.registers[0];
            assert_eq!(last.get(r1), 10 + backend.offset());
        }
    }

    #[test]
    fn naming_is_instruction_major() {
        let p = parse_rm(APSUM_RM).unwrap();
        let c = compile(&p, Backend::StrongSleptsov).unwrap();
        let names: Vec<&str> = c.net.places().map(|q| c.net.place_name(q)).collect();
        assert_eq!(names[..13], ["q1", "q2", "q3", "q4", "q5", "q6", "q7", "q8", "q9", "q10", "q11", "q12", "q13"]);
        assert_eq!(names[13..17], ["r1", "r2", "r3", "r4"]);
        assert_eq!(names[17], "q14");
        // 6 zero checks * 4 internal places
        assert_eq!(c.net.place_count(), 13 + 4 + 6 * 4);
        assert_eq!(c.net.transition_count(), 6 * 6 + 6);
        let again = compile(&p, Backend::StrongSleptsov).unwrap();
        assert_eq!(c.net, again.net);
        assert_eq!(c.initial, again.initial);
    }

    #[test]
    fn decode_checks_offset() {
        let p = parse_rm("registers 1\n1: P 1\n").unwrap();
        let c = compile(&p, Backend::StrongSleptsov).unwrap();
        let r = c.registers[0];
        let mut m = c.initial.clone();
        m.set(r, 1);
        assert_eq!(c.decode_registers(&m).unwrap(), vec![0]);
        m.set(r, 0);
        assert!(matches!(c.decode_registers(&m), Err(CompileError::EncodingViolation { .. })));
        let c = compile(&p, Backend::Inhibitor).unwrap();
        let mut m = c.initial.clone();
        m.set(c.registers[0], 0);
        assert_eq!(c.decode_registers(&m).unwrap(), vec![0]);
    }

    #[test]
    fn jump_to_next_merges_ports() {
        let p = parse_rm("registers 1\n1: J 1 2\n2: P 1\n").unwrap();
        for backend in Backend::ALL {
            let c = compile(&p, backend).unwrap();
            let g = &c.gadgets[0];
            assert_eq!(g.jump, Some(g.finish));
            let out = rm_run(&p, &[], 100).unwrap();
            let tr = run(&c.initial, &c.net, backend.mode(), StepChoicePolicy::FirstLexicographic, 100).unwrap();
            assert_eq!(c.decode_registers(tr.final_marking()).unwrap(), out.final_state().registers);
        }
    }

    #[test]
    fn manifest_round_trip() {
        let p = parse_rm(APSUM_RM).unwrap().with_inputs(&[(2, 3)]).unwrap();
        let c = compile(&p, Backend::StrongSleptsov).unwrap();
        let json = serde_json::to_string(&c.manifest()).unwrap();
        let back: Manifest = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c.manifest());
        assert_eq!(back.decode_registers(&c.net, &c.initial).unwrap(), vec![0, 3, 0, 0]);
        assert_eq!(back.control_position(&c.net, &c.initial).unwrap(), Some(1));
        assert_eq!(back.halt, "q13");
    }

    #[test]
    fn compilation_is_reproducible() {
        let p = parse_rm(APSUM_RM).unwrap();
        for backend in Backend::ALL {
            let a = compile(&p, backend).unwrap();
            let b = compile(&p, backend).unwrap();
            assert_eq!(crate::format::print_net(&a.net, &a.initial), crate::format::print_net(&b.net, &b.initial));
            assert_eq!(a.manifest(), b.manifest());
        }
    }
}
