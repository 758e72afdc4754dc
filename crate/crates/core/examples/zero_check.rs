//! The strong Sleptsov zero check: explore its reachability graph for a few
//! register markings, then run the full check for x in 0..=50.

use ptnet::fixtures::{zero_check_entry, zero_check_net};
use ptnet::reachability::{build_rg, verify_zero_check};
use ptnet::SemanticsMode;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let net = zero_check_net();
    for x in [0, 1, 2, 7] {
        let g = build_rg(&net, &zero_check_entry(&net, x), SemanticsMode::strong_sleptsov(), 64)?;
        println!("x = {x}: {} nodes", g.node_count());
        for path in g.paths_to_dead() {
            let steps: Vec<String> = path.iter().map(|s| net.format_step(s)).collect();
            println!("  path {}", if steps.is_empty() { "(none)".into() } else { steps.join(", ") });
        }
        for i in g.dead_nodes() {
            println!("  ends in {}", net.format_marking(&g.nodes[i].marking));
        }
    }

    let report = verify_zero_check(50)?;
    let failed = report.failures().count();
    println!("x in 0..=50: {} cases, {failed} failures", report.cases.len());
    Ok(())
}
