//! Place-transition nets under Petri, Salwicki, Sleptsov and
//! Salwicki-Sleptsov firing rules (weak, general and strong variants, with
//! inhibitor arcs and priorities), register machines, and their compilation
//! into nets with inhibitor, priority or strong Sleptsov zero checks.
//!
//! ```
//! use ptnet::fixtures::addition_net;
//! use ptnet::semantics::{run, SemanticsMode, StepChoicePolicy};
//!
//! let (net, initial) = addition_net();
//! let trace = run(&initial, &net, SemanticsMode::strong_sleptsov(),
//!                 StepChoicePolicy::FirstLexicographic, 10).unwrap();
//! assert_eq!(net.format_marking(trace.final_marking()), "{5·p3}");
//! ```

pub mod cli;
pub mod compiler;
pub mod fixtures;
pub mod format;
pub mod net;
pub mod reachability;
pub mod rm;
pub mod selftest;
pub mod semantics;

pub use net::{Marking, Multiplicity, NetError, NetStructure, PlaceId, Step, TransitionId};
pub use semantics::{SemanticsMode, StepChoicePolicy};
