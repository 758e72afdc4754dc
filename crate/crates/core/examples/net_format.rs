//! Net text round trip, a JSON trace and its replay.

use ptnet::format::{parse_net, print_net, TraceDocument};
use ptnet::semantics::run;
use ptnet::StepChoicePolicy;

const NET: &str = "\
# two producers feed one consumer
place a init 3
place b init 1
place out
trans move pri 1
trans join
arc a -> move * 2
arc move -> b
arc a -> join
arc b -> join
arc join -> out * 2
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (net, initial) = parse_net(NET)?;
    let canonical = print_net(&net, &initial);
    print!("{canonical}");
    assert_eq!(parse_net(&canonical)?, (net.clone(), initial.clone()));

    let mode = "salwicki-sleptsov/general".parse()?;
    let policy = StepChoicePolicy::SeededRandom(9);
    let trace = run(&initial, &net, mode, policy, 50)?;
    let doc = TraceDocument::from_trace(&net, mode, policy, &trace);
    println!("{}", serde_json::to_string_pretty(&doc)?);

    let replayed = doc.replay(&net)?;
    assert_eq!(replayed, trace);
    println!("replayed {} steps to {}", replayed.steps.len(), net.format_marking(replayed.final_marking()));
    Ok(())
}
