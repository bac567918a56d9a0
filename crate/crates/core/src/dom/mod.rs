//! Document trees, selector matching, the cascade and the brute-force oracle.

pub mod cascade;
pub mod enumerate;
pub mod matching;
pub mod oracle;
pub mod tree;

pub use cascade::{compute_cascade, compute_cascade_over, property_names, ComputedStyle, Winner};
pub use enumerate::{build_tree, enumerate_trees, exhaustive_labels, plain_labels, shapes, Bounds};
pub use matching::{attr_op_match, in_progression, matches, node_matches};
pub use oracle::{oracle_intersection, oracle_labels, tight_labels, witness_label, OracleBounds};
pub use tree::{validate_tree, DocumentTree, Label, Violation, LANG_NS};
