//! Semantics-preserving CSS rule merging.
//!
//! The crate decides selector intersection with CSS automata and integer
//! arithmetic, builds the ordered CSS graph of a stylesheet and repeatedly
//! applies the most profitable valid rule merge found by weighted partial
//! Max-SAT.

pub mod selector;
pub mod dom;
pub mod properties;
pub mod stylesheet;
pub mod automata;
pub mod emptiness;
pub mod graph;
pub mod biclique;
pub mod maxsat;
pub mod minifier;
