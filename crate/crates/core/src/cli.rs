//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when a verification or execution fails,
//! 2 on usage, I/O and parse errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::compiler::{compile, Backend, Manifest};
use crate::format::{parse_net, print_net, TraceDocument};
use crate::net::{Marking, NetStructure};
use crate::reachability::{build_rg, export_dot, verify_zero_check};
use crate::rm::{parse_rm, rm_run, RmProgram, RmStop};
use crate::selftest;
use crate::semantics::{run, SemanticsMode, StepChoicePolicy};

#[derive(Parser, Debug)]
#[command(name = "ptnet", version, about = "Place-transition net semantics toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum PolicyArg {
    First,
    Random,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum BackendArg {
    Inhibitor,
    Priority,
    StrongSleptsov,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Inhibitor => Backend::Inhibitor,
            BackendArg::Priority => Backend::Priority,
            BackendArg::StrongSleptsov => Backend::StrongSleptsov,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute a net tact by tact until it is dead or the budget runs out.
    Run {
        net: PathBuf,
        /// e.g. `petri`, `petri+inhibitor`, `sleptsov/strong`, `salwicki-sleptsov/weak`
        #[arg(long)]
        mode: String,
        /// Seed for uniform random choice (implies `--policy random`).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        policy: Option<PolicyArg>,
        #[arg(long, default_value_t = 100_000)]
        max_steps: usize,
        /// Write the JSON trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Decode register values with a compiler manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Build the reachability graph of a net.
    Rg {
        net: PathBuf,
        #[arg(long)]
        mode: String,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Compile a register machine program into a net.
    Compile {
        rm: PathBuf,
        #[arg(long, value_enum)]
        backend: BackendArg,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Override an initial register, `r<i>=<value>`.
        #[arg(long = "set")]
        set: Vec<String>,
    },
    /// Interpret a register machine program.
    RmRun {
        rm: PathBuf,
        #[arg(long = "set")]
        set: Vec<String>,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: usize,
    },
    /// Check the strong Sleptsov zero-check gadget for register markings 0..=x-max.
    VerifyZerocheck {
        #[arg(long, default_value_t = 50)]
        x_max: u64,
    },
    /// Run the bundled fixture checks.
    Selftest,
}

enum Failure {
    Usage(String),
    Failed(String),
}

type Outcome = Result<(), Failure>;

fn usage<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Usage(format!("{context}: {e}"))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(usage(&path.display().to_string()))
}

fn write_file(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(usage(&path.display().to_string()))
}

fn load_net(path: &Path) -> Result<(NetStructure, Marking), Failure> {
    parse_net(&read(path)?).map_err(usage(&path.display().to_string()))
}

fn load_rm(path: &Path, set: &[String]) -> Result<RmProgram, Failure> {
    let program = parse_rm(&read(path)?).map_err(usage(&path.display().to_string()))?;
    let inputs = parse_assignments(set)?;
    program.with_inputs(&inputs).map_err(usage("--set"))
}

fn parse_assignments(set: &[String]) -> Result<Vec<(usize, u64)>, Failure> {
    set.iter()
        .map(|a| {
            let bad = || Failure::Usage(format!("--set expects r<i>=<value>, got `{a}`"));
            let (reg, value) = a.split_once('=').ok_or_else(bad)?;
            let reg = reg.trim().strip_prefix('r').unwrap_or(reg.trim());
            Ok((reg.parse().map_err(|_| bad())?, value.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

fn parse_mode(text: &str) -> Result<SemanticsMode, Failure> {
    text.parse().map_err(usage("--mode"))
}

/// Runs the CLI on `argv` (program name first) and returns the exit status.
pub fn cli_main<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Failed(msg)) => {
            let _ = writeln!(err, "failed: {msg}");
            1
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    let io = |e: std::io::Error| Failure::Usage(format!("output: {e}"));
    match command {
        Command::Run { net, mode, seed, policy, max_steps, trace, manifest } => {
            let (net, initial) = load_net(&net)?;
            let mode = parse_mode(&mode)?;
            let policy = match (policy, seed) {
                (Some(PolicyArg::First), Some(_)) => {
                    return Err(Failure::Usage("--seed conflicts with --policy first".into()))
                }
                (Some(PolicyArg::First), None) => StepChoicePolicy::FirstLexicographic,
                (_, Some(s)) => StepChoicePolicy::SeededRandom(s),
                (Some(PolicyArg::Random), None) => StepChoicePolicy::SeededRandom(0),
                (None, None) => StepChoicePolicy::FirstLexicographic,
            };
            let manifest: Option<Manifest> = match manifest {
                Some(p) => Some(serde_json::from_str(&read(&p)?).map_err(usage(&p.display().to_string()))?),
                None => None,
            };
            let tr = run(&initial, &net, mode, policy, max_steps).map_err(|e| Failure::Failed(e.to_string()))?;
            writeln!(out, "mode: {mode}").map_err(io)?;
            writeln!(out, "steps: {}", tr.steps.len()).map_err(io)?;
            writeln!(out, "termination: {}", tr.termination).map_err(io)?;
            writeln!(out, "final: {}", net.format_marking(tr.final_marking())).map_err(io)?;
            if let Some(m) = manifest {
                let regs = m.decode_registers(&net, tr.final_marking()).map_err(|e| Failure::Failed(e.to_string()))?;
                let pos = m.control_position(&net, tr.final_marking()).map_err(usage("manifest"))?;
                match pos {
                    Some(j) => writeln!(out, "control: q{j}").map_err(io)?,
                    None => writeln!(out, "control: none").map_err(io)?,
                }
                for (i, v) in regs.iter().enumerate() {
                    writeln!(out, "r{} = {}", i + 1, v).map_err(io)?;
                }
            }
            if let Some(path) = trace {
                let doc = TraceDocument::from_trace(&net, mode, policy, &tr);
                let json = serde_json::to_string_pretty(&doc).map_err(usage("trace"))?;
                write_file(&path, &(json + "\n"))?;
            }
            Ok(())
        }
        Command::Rg { net, mode, budget, dot, json } => {
            let (net, initial) = load_net(&net)?;
            let mode = parse_mode(&mode)?;
            let g = build_rg(&net, &initial, mode, budget).map_err(|e| match e {
                crate::reachability::ReachError::ZeroBudget => Failure::Usage(e.to_string()),
                other => Failure::Failed(other.to_string()),
            })?;
            writeln!(out, "mode: {mode}").map_err(io)?;
            writeln!(out, "nodes: {}", g.node_count()).map_err(io)?;
            writeln!(out, "edges: {}", g.edge_count()).map_err(io)?;
            writeln!(out, "dead: {}", g.dead_nodes().count()).map_err(io)?;
            writeln!(out, "truncated: {}", g.truncated).map_err(io)?;
            if let Some(path) = dot {
                write_file(&path, &export_dot(&g, &net))?;
            }
            if let Some(path) = json {
                let text = serde_json::to_string_pretty(&g.to_document(&net)).map_err(usage("json"))?;
                write_file(&path, &(text + "\n"))?;
            }
            Ok(())
        }
        Command::Compile { rm, backend, output, manifest, set } => {
            let program = load_rm(&rm, &set)?;
            let compiled = compile(&program, backend.into()).map_err(usage("compile"))?;
            write_file(&output, &print_net(&compiled.net, &compiled.initial))?;
            if let Some(path) = manifest {
                let text = serde_json::to_string_pretty(&compiled.manifest()).map_err(usage("manifest"))?;
                write_file(&path, &(text + "\n"))?;
            }
            writeln!(
                out,
                "compiled {} instructions for {}: {} places, {} transitions (run with --mode {})",
                program.len(),
                compiled.backend,
                compiled.net.place_count(),
                compiled.net.transition_count(),
                compiled.backend.mode()
            )
            .map_err(io)?;
            Ok(())
        }
        Command::RmRun { rm, set, max_steps } => {
            let program = load_rm(&rm, &set)?;
            let result = rm_run(&program, &[], max_steps).map_err(|e| Failure::Failed(e.to_string()))?;
            let last = result.final_state();
            let stop = match result.stop {
                RmStop::Halted => "halted",
                RmStop::Budget => "budget",
            };
            writeln!(out, "{stop} after {} steps at pc {}", result.trace.len() - 1, last.pc).map_err(io)?;
            for (i, v) in last.registers.iter().enumerate() {
                writeln!(out, "r{} = {}", i + 1, v).map_err(io)?;
            }
            Ok(())
        }
        Command::VerifyZerocheck { x_max } => {
            let report = verify_zero_check(x_max).map_err(|e| Failure::Failed(e.to_string()))?;
            write!(out, "{report}").map_err(io)?;
            if report.passed() {
                writeln!(out, "zero check verified for x in 0..={x_max}").map_err(io)?;
                Ok(())
            } else {
                let bad: Vec<String> = report.failures().map(|c| c.x.to_string()).collect();
                Err(Failure::Failed(format!("zero check failed for x = {}", bad.join(", "))))
            }
        }
        Command::Selftest => {
            let results = selftest::run_all();
            let mut failed = 0;
            for r in &results {
                let status = if r.passed { "PASS" } else { "FAIL" };
                writeln!(out, "{status} {}: {}", r.name, r.detail).map_err(io)?;
                failed += usize::from(!r.passed);
            }
            if failed == 0 {
                Ok(())
            } else {
                Err(Failure::Failed(format!("{failed} selftest check(s) failed")))
            }
        }
    }
}
