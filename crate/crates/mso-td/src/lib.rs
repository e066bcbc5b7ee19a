//! Definable tree decompositions and recognizability machinery.
//!
//! Builders for Halin graphs, k-cycle trees and bounded remember-number
//! graphs produce anchored, typed tree decompositions. A terminal-graph gluing
//! algebra and signature automata decide graph properties bottom-up over those
//! decompositions, and an exhaustive MSO evaluator hosts the predicate library
//! describing the same constructions logically.

pub mod cycle_structure;
pub mod feedback_aug;
pub mod graph_core;
pub mod halin_builder;
pub mod kcycle_builder;
pub mod mso;
pub mod orientation;
pub mod property_automata;
pub mod remember_builder;
pub mod terminal_algebra;
pub mod tree_decomposition;
