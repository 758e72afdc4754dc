//! The addition net `p1 + p2 -> p3` from `(2, 3, 0)` under every firing
//! rule: the steps permitted at the start and one complete run.

use ptnet::fixtures::addition_net;
use ptnet::semantics::{enumerate_steps, run, SemanticsMode, StepChoicePolicy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (net, initial) = addition_net();
    println!("initial marking {}", net.format_marking(&initial));
    for mode in SemanticsMode::all_plain() {
        let steps: Vec<String> =
            enumerate_steps(&initial, &net, mode)?.iter().map(|s| format!("{{{}}}", net.format_step(s))).collect();
        let trace = run(&initial, &net, mode, StepChoicePolicy::FirstLexicographic, 100)?;
        println!(
            "{mode:<26} {:>2} steps {}; {} tacts to {}",
            steps.len(),
            steps.join(" "),
            trace.steps.len(),
            net.format_marking(trace.final_marking())
        );
    }

    // a seeded random run is reproducible
    let mode: SemanticsMode = "salwicki-sleptsov/weak".parse()?;
    let trace = run(&initial, &net, mode, StepChoicePolicy::SeededRandom(2024), 100)?;
    let fired: Vec<String> = trace.steps.iter().map(|(s, _)| net.format_step(s)).collect();
    println!("{mode}, seed 2024: {}", fired.join(" ; "));
    Ok(())
}
