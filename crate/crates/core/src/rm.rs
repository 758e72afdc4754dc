//! Register machines: programs of increment, guarded decrement and
//! jump-if-zero instructions over non-negative registers.
//!
//! Text format, one item per line, `#` starts a comment:
//!
//! ```text
//! registers 4
//! init r2 = 4
//! 1: J 2 13
//! 2: P 1
//! 3: Q 2
//! ```
//!
//! The `registers` header comes first, then any `init` lines, then the
//! instructions numbered `1..m` contiguously. A jump to `m+1` halts.

use std::fmt;

use thiserror::Error;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum RmInstruction {
    /// `P(i)`: increment register `i`.
    Inc(usize),
    /// `Q(i)`: decrement register `i`, which must be positive.
    Dec(usize),
    /// `J(i)[k]`: go to instruction `k` when register `i` is zero.
    JumpIfZero { register: usize, target: usize },
}

impl RmInstruction {
    pub fn register(&self) -> usize {
        match *self {
            RmInstruction::Inc(r) | RmInstruction::Dec(r) => r,
            RmInstruction::JumpIfZero { register, .. } => register,
        }
    }

    pub fn mnemonic(&self) -> &'static str {
        match self {
            RmInstruction::Inc(_) => "P",
            RmInstruction::Dec(_) => "Q",
            RmInstruction::JumpIfZero { .. } => "J",
        }
    }
}

impl fmt::Display for RmInstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RmInstruction::Inc(r) => write!(f, "P({r})"),
            RmInstruction::Dec(r) => write!(f, "Q({r})"),
            RmInstruction::JumpIfZero { register, target } => write!(f, "J({register})[{target}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RmProgram {
    registers: usize,
    instructions: Vec<RmInstruction>,
    initial: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RmError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: jump target {target} out of range 1..={max}")]
    TargetOutOfRange { line: usize, target: usize, max: usize },
    #[error("line {line}: register {register} out of range 1..={max}")]
    RegisterOutOfRange { line: usize, register: usize, max: usize },
    #[error("line {line}: duplicate instruction number {index}")]
    DuplicateInstruction { line: usize, index: usize },
    #[error("line {line}: expected instruction {expected}, found {found}")]
    NonContiguous { line: usize, expected: usize, found: usize },
    #[error("register {register} out of range 1..={max}")]
    UnknownRegister { register: usize, max: usize },
    #[error("instruction {pc}: decrement of zero register r{register}")]
    DecrementOfZero { pc: usize, register: usize },
    #[error("program has halted")]
    Halted,
    #[error("register r{0} overflow")]
    Overflow(usize),
}

impl RmProgram {
    /// Checked constructor; `instructions[j-1]` is instruction `j`.
    pub fn new(registers: usize, instructions: Vec<RmInstruction>) -> Result<Self, RmError> {
        let m = instructions.len();
        for ins in &instructions {
            let r = ins.register();
            if r == 0 || r > registers {
                return Err(RmError::UnknownRegister { register: r, max: registers });
            }
            if let RmInstruction::JumpIfZero { target, .. } = *ins {
                if target == 0 || target > m + 1 {
                    return Err(RmError::TargetOutOfRange { line: 0, target, max: m + 1 });
                }
            }
        }
        Ok(RmProgram { registers, instructions, initial: vec![0; registers] })
    }

    pub fn register_count(&self) -> usize {
        self.registers
    }

    /// Number of instructions `m`; the halt address is `m + 1`.
    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn halt_address(&self) -> usize {
        self.instructions.len() + 1
    }

    /// Instruction `j` (1-based).
    pub fn instruction(&self, j: usize) -> Option<RmInstruction> {
        j.checked_sub(1).and_then(|i| self.instructions.get(i)).copied()
    }

    pub fn instructions(&self) -> &[RmInstruction] {
        &self.instructions
    }

    /// Initial register values, `r1` first.
    pub fn initial_registers(&self) -> &[u64] {
        &self.initial
    }

    pub fn set_initial(&mut self, register: usize, value: u64) -> Result<(), RmError> {
        if register == 0 || register > self.registers {
            return Err(RmError::UnknownRegister { register, max: self.registers });
        }
        self.initial[register - 1] = value;
        Ok(())
    }

    /// Copy of the program with some initial registers overridden.
    pub fn with_inputs(&self, inputs: &[(usize, u64)]) -> Result<Self, RmError> {
        let mut out = self.clone();
        for &(r, v) in inputs {
            out.set_initial(r, v)?;
        }
        Ok(out)
    }

    pub fn initial_state(&self) -> RmState {
        RmState { pc: 1, registers: self.initial.clone() }
    }

    /// Canonical text form, accepted back by [`parse_rm`].
    pub fn to_text(&self) -> String {
        let mut out = format!("registers {}\n", self.registers);
        for (i, &v) in self.initial.iter().enumerate() {
            if v != 0 {
                out.push_str(&format!("init r{} = {}\n", i + 1, v));
            }
        }
        for (i, ins) in self.instructions.iter().enumerate() {
            let body = match *ins {
                RmInstruction::Inc(r) => format!("P {r}"),
                RmInstruction::Dec(r) => format!("Q {r}"),
                RmInstruction::JumpIfZero { register, target } => format!("J {register} {target}"),
            };
            out.push_str(&format!("{}: {}\n", i + 1, body));
        }
        out
    }
}

/// Parses the line-based register machine format.
pub fn parse_rm(text: &str) -> Result<RmProgram, RmError> {
    let mut registers: Option<usize> = None;
    let mut inits: Vec<(usize, usize, u64)> = Vec::new();
    // (line, instruction)
    let mut body: Vec<(usize, RmInstruction)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or_default().trim();
        if content.is_empty() {
            continue;
        }
        let syntax = |message: String| RmError::Syntax { line, message };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens[0] {
            "registers" => {
                if registers.is_some() {
                    return Err(syntax("duplicate `registers` header".into()));
                }
                if !inits.is_empty() || !body.is_empty() {
                    return Err(syntax("`registers` must come first".into()));
                }
                let [_, n] = tokens[..] else {
                    return Err(syntax("expected `registers <n>`".into()));
                };
                registers = Some(parse_num(n).ok_or_else(|| syntax(format!("bad register count `{n}`")))?);
            }
            "init" => {
                let n = registers.ok_or_else(|| syntax("`init` before `registers`".into()))?;
                if !body.is_empty() {
                    return Err(syntax("`init` after instructions".into()));
                }
                // accept `init r2 = 4` and `init r2=4`
                let rest = content["init".len()..].replace('=', " = ");
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let [reg, "=", value] = parts[..] else {
                    return Err(syntax("expected `init r<i> = <value>`".into()));
                };
                let r =
                    reg.strip_prefix('r').and_then(parse_num).ok_or_else(|| syntax(format!("bad register `{reg}`")))?;
                if r == 0 || r > n {
                    return Err(RmError::RegisterOutOfRange { line, register: r, max: n });
                }
                if inits.iter().any(|&(_, prev, _)| prev == r) {
                    return Err(syntax(format!("duplicate init for r{r}")));
                }
                let v = value.parse::<u64>().map_err(|_| syntax(format!("bad value `{value}`")))?;
                inits.push((line, r, v));
            }
            _ => {
                let n = registers.ok_or_else(|| syntax("instruction before `registers`".into()))?;
                let (label, rest) =
                    content.split_once(':').ok_or_else(|| syntax(format!("unrecognised line `{content}`")))?;
                let index = parse_num(label.trim())
                    .ok_or_else(|| syntax(format!("bad instruction number `{}`", label.trim())))?;
                let expected = body.len() + 1;
                if index < expected {
                    return Err(RmError::DuplicateInstruction { line, index });
                }
                if index != expected {
                    return Err(RmError::NonContiguous { line, expected, found: index });
                }
                let ops: Vec<&str> = rest.split_whitespace().collect();
                let reg_of = |s: &str| -> Result<usize, RmError> {
                    let r = parse_num(s.strip_prefix('r').unwrap_or(s))
                        .ok_or_else(|| RmError::Syntax { line, message: format!("bad register `{s}`") })?;
                    if r == 0 || r > n {
                        return Err(RmError::RegisterOutOfRange { line, register: r, max: n });
                    }
                    Ok(r)
                };
                let ins = match ops[..] {
                    ["P", r] => RmInstruction::Inc(reg_of(r)?),
                    ["Q", r] => RmInstruction::Dec(reg_of(r)?),
                    ["J", r, k] => RmInstruction::JumpIfZero {
                        register: reg_of(r)?,
                        target: parse_num(k).ok_or_else(|| syntax(format!("bad jump target `{k}`")))?,
                    },
                    _ => return Err(syntax(format!("bad instruction `{}`", rest.trim()))),
                };
                body.push((line, ins));
            }
        }
    }

    let registers = registers.ok_or(RmError::Syntax { line: 0, message: "missing `registers` header".into() })?;
    let max = body.len() + 1;
    for &(line, ins) in &body {
        if let RmInstruction::JumpIfZero { target, .. } = ins {
            if target == 0 || target > max {
                return Err(RmError::TargetOutOfRange { line, target, max });
            }
        }
    }
    let mut program = RmProgram::new(registers, body.into_iter().map(|(_, i)| i).collect())?;
    for (_, r, v) in inits {
        program.set_initial(r, v)?;
    }
    Ok(program)
}

fn parse_num(s: &str) -> Option<usize> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Control position and register contents.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RmState {
    /// Next instruction, 1-based; `m + 1` means halted.
    pub pc: usize,
    /// `registers[i-1]` holds `r_i`.
    pub registers: Vec<u64>,
}

impl RmState {
    pub fn is_halted(&self, program: &RmProgram) -> bool {
        self.pc == program.halt_address()
    }
}

/// Executes the instruction at `state.pc`.
pub fn rm_step(state: &RmState, program: &RmProgram) -> Result<RmState, RmError> {
    let ins = program.instruction(state.pc).ok_or(RmError::Halted)?;
    let mut next = state.clone();
    match ins {
        RmInstruction::Inc(r) => {
            let slot = &mut next.registers[r - 1];
            *slot = slot.checked_add(1).ok_or(RmError::Overflow(r))?;
            next.pc += 1;
        }
        RmInstruction::Dec(r) => {
            let slot = &mut next.registers[r - 1];
            if *slot == 0 {
                return Err(RmError::DecrementOfZero { pc: state.pc, register: r });
            }
            *slot -= 1;
            next.pc += 1;
        }
        RmInstruction::JumpIfZero { register, target } => {
            next.pc = if next.registers[register - 1] == 0 { target } else { state.pc + 1 };
        }
    }
    Ok(next)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RmStop {
    Halted,
    Budget,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RmRun {
    /// Every state visited, the initial one included.
    pub trace: Vec<RmState>,
    pub stop: RmStop,
}

impl RmRun {
    pub fn final_state(&self) -> &RmState {
        self.trace.last().expect("trace holds the initial state")
    }
}

/// Runs from the program's initial registers, overridden by `inputs`
/// (`(register, value)` pairs), for at most `max_steps` instructions.
pub fn rm_run(program: &RmProgram, inputs: &[(usize, u64)], max_steps: usize) -> Result<RmRun, RmError> {
    let program = program.with_inputs(inputs)?;
    let mut trace = vec![program.initial_state()];
    loop {
        let current = trace.last().expect("non-empty");
        if current.is_halted(&program) {
            return Ok(RmRun { trace, stop: RmStop::Halted });
        }
        if trace.len() > max_steps {
            return Ok(RmRun { trace, stop: RmStop::Budget });
        }
        let next = rm_step(current, &program)?;
        trace.push(next);
    }
}
