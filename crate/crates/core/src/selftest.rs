//! Fixture checks behind the `selftest` subcommand.

use crate::compiler::{compile, Backend};
use crate::fixtures::{self, APSUM_RM};
use crate::reachability::{build_rg, verify_zero_check};
use crate::rm::{parse_rm, rm_run};
use crate::semantics::{enumerate_steps, run, SemanticsMode, StepChoicePolicy, Termination};

pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, outcome: Result<String, String>) -> CheckResult {
    let (passed, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    CheckResult { name: name.to_string(), passed, detail }
}

pub fn run_all() -> Vec<CheckResult> {
    vec![
        check("addition-rg", addition_shapes()),
        check("zero-check", zero_check()),
        check("apsum", apsum_all_backends()),
    ]
}

fn addition_shapes() -> Result<String, String> {
    let (net, m) = fixtures::addition_net();
    let expect = [("petri", 12, 17), ("salwicki", 4, 3), ("sleptsov", 4, 4), ("sleptsov/strong", 3, 2)];
    for (mode, nodes, edges) in expect {
        let mode: SemanticsMode = mode.parse().map_err(|e| format!("{e}"))?;
        let g = build_rg(&net, &m, mode, 1000).map_err(|e| e.to_string())?;
        if (g.node_count(), g.edge_count()) != (nodes, edges) {
            return Err(format!(
                "{mode}: expected {nodes} nodes/{edges} edges, got {}/{}",
                g.node_count(),
                g.edge_count()
            ));
        }
    }
    let weak = enumerate_steps(&m, &net, "sleptsov/weak".parse().expect("mode")).map_err(|e| e.to_string())?;
    if weak.len() != 5 {
        return Err(format!("weak Sleptsov: expected 5 steps, got {}", weak.len()));
    }
    Ok("petri 12, salwicki 4, sleptsov 4, strong 3 nodes; weak fan-out 5".into())
}

fn zero_check() -> Result<String, String> {
    let report = verify_zero_check(20).map_err(|e| e.to_string())?;
    if report.passed() {
        Ok("x in 0..=20".into())
    } else {
        Err(report.to_string())
    }
}

fn apsum_all_backends() -> Result<String, String> {
    let program = parse_rm(APSUM_RM).map_err(|e| e.to_string())?;
    for n in 0..=10u64 {
        let input = program.with_inputs(&[(2, n)]).map_err(|e| e.to_string())?;
        let expected = rm_run(&input, &[], 1_000_000).map_err(|e| e.to_string())?;
        for backend in Backend::ALL {
            let c = compile(&input, backend).map_err(|e| e.to_string())?;
            let tr = run(&c.initial, &c.net, backend.mode(), StepChoicePolicy::SeededRandom(n), 1_000_000)
                .map_err(|e| e.to_string())?;
            if tr.termination != Termination::Dead {
                return Err(format!("{backend}, n={n}: did not halt"));
            }
            let got = c.boundaries(&tr).map_err(|e| e.to_string())?;
            let want: Vec<(usize, Vec<u64>)> = expected.trace.iter().map(|s| (s.pc, s.registers.clone())).collect();
            if got != want {
                return Err(format!("{backend}, n={n}: boundary trace differs from interpreter"));
            }
            if got.last().map(|(_, r)| r[0]) != Some(n * (n + 1) / 2) {
                return Err(format!("{backend}, n={n}: wrong sum"));
            }
        }
    }
    Ok("n in 0..=10, three backends, lock-step with interpreter".into())
}
