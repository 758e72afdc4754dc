//! Interpreting the arithmetic-progression sum program directly.

use ptnet::fixtures::APSUM_RM;
use ptnet::rm::{parse_rm, rm_run, RmStop};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let program = parse_rm(APSUM_RM)?;
    print!("{}", program.to_text());
    for n in [0, 4, 10, 100] {
        let result = rm_run(&program, &[(2, n)], 10_000_000)?;
        let last = result.final_state();
        assert_eq!(result.stop, RmStop::Halted);
        println!("n = {n:>3}: r1 = {:>4} after {} instructions", last.registers[0], result.trace.len() - 1);
    }
    Ok(())
}
