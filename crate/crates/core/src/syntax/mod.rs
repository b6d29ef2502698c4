pub mod ast;
pub mod ops;
pub mod parse;
pub mod enumerate;
pub mod render;
pub mod st;

pub use ast::*;
pub use ops::{alpha_eq, canonical, free_vars, freshen, node_count, subst, Signature};
pub use parse::{desugar, parse, parse_formula, parse_ord, parse_set, Dialect, ParseError};
pub use render::render;
