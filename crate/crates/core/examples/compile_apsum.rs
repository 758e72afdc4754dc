//! Compiling the sum program into nets with each zero-check backend and
//! checking the nets against the interpreter at instruction boundaries.

use ptnet::compiler::{compile, Backend};
use ptnet::fixtures::APSUM_RM;
use ptnet::rm::{parse_rm, rm_run};
use ptnet::semantics::run;
use ptnet::StepChoicePolicy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let program = parse_rm(APSUM_RM)?.with_inputs(&[(2, 4)])?;
    let reference = rm_run(&program, &[], 1_000_000)?;
    let expected: Vec<(usize, Vec<u64>)> = reference.trace.iter().map(|s| (s.pc, s.registers.clone())).collect();

    for backend in Backend::ALL {
        let c = compile(&program, backend)?;
        let trace = run(&c.initial, &c.net, backend.mode(), StepChoicePolicy::FirstLexicographic, 1_000_000)?;
        let registers = c.decode_registers(trace.final_marking())?;
        let lock_step = c.boundaries(&trace)? == expected;
        println!(
            "{backend:<16} {:>3} places {:>3} transitions, {:>4} tacts, r1 = {}, halted = {}, lock-step = {lock_step}",
            c.net.place_count(),
            c.net.transition_count(),
            trace.steps.len(),
            registers[0],
            trace.final_marking().get(c.halt_place()) == 1,
        );
    }
    Ok(())
}
