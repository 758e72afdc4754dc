//! Reachability graphs of the addition net, with the Sleptsov graph
//! printed as Graphviz DOT.

use ptnet::fixtures::addition_net;
use ptnet::reachability::{build_rg, export_dot};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (net, initial) = addition_net();
    for mode in ["petri", "salwicki", "sleptsov", "sleptsov/strong", "salwicki-sleptsov/weak"] {
        let g = build_rg(&net, &initial, mode.parse()?, 1_000)?;
        println!("{mode:<24} {:>3} nodes {:>3} edges {} dead", g.node_count(), g.edge_count(), g.dead_nodes().count());
    }
    let g = build_rg(&net, &initial, "sleptsov".parse()?, 1_000)?;
    println!();
    print!("{}", export_dot(&g, &net));
    Ok(())
}
