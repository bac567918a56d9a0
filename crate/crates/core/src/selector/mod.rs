//! CSS3 selector syntax: AST, parser, canonical serializer, specificity and
//! normalization.

pub mod ast;
pub mod display;
pub mod normalize;
pub mod parser;
pub mod specificity;

pub use ast::*;
pub use display::{format_anb, selector_text_length, text_weight};
pub use normalize::{normalize, normalize_node};
pub use parser::{parse_selector, parse_selector_list, split_selector_list, ParseError};
pub use specificity::{specificity, Specificity};

/// Parse a comma separated selector group.
pub fn parse_selector_group(text: &str) -> Result<Vec<Selector>, ParseError> {
    parse_selector_list(text)
}
