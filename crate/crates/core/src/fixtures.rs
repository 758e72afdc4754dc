//! Small nets and programs used by tests, examples and `selftest`.

use crate::compiler::{gadget_zero_check, Backend};
use crate::format::parse_net;
use crate::net::{Marking, NetStructure};

/// Arithmetic-progression sum program; `r2` is the input, `r1` the result.
pub const APSUM_RM: &str = include_str!("../fixtures/apsum.rm");
pub const ADDITION_NET: &str = include_str!("../fixtures/addition.net");
pub const ADDITION_INHIBITOR_NET: &str = include_str!("../fixtures/addition-inhibitor.net");
pub const ADDITION_PRIORITY_NET: &str = include_str!("../fixtures/addition-priority.net");

fn load(text: &str) -> (NetStructure, Marking) {
    parse_net(text).expect("bundled fixture parses")
}

/// `t1: p1 -> p3`, `t2: p2 -> p3` at `(2, 3, 0)`.
pub fn addition_net() -> (NetStructure, Marking) {
    load(ADDITION_NET)
}

/// Addition net where `p2` inhibits `t1`.
pub fn addition_inhibitor_net() -> (NetStructure, Marking) {
    load(ADDITION_INHIBITOR_NET)
}

/// Addition net where `t2` has priority over `t1`.
pub fn addition_priority_net() -> (NetStructure, Marking) {
    load(ADDITION_PRIORITY_NET)
}

/// Stand-alone strong Sleptsov zero check (`p1..p8`, `t1..t6`).
pub fn zero_check_net() -> NetStructure {
    gadget_zero_check(Backend::StrongSleptsov).net
}

/// Stand-alone inhibitor zero check: `t1` jumps, `t2` falls through.
pub fn zero_check_inhibitor_net() -> NetStructure {
    gadget_zero_check(Backend::Inhibitor).net
}

/// `{p1, x·p4, p8}`.
pub fn zero_check_entry(net: &NetStructure, x: u64) -> Marking {
    net.marking_from([("p1", 1), ("p4", x), ("p8", 1)]).expect("zero check places")
}
