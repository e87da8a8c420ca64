//! Signatures, trees over them, and equational theories.

mod builtins;
mod theory;
mod tree;
mod universe;

pub use builtins::{builtin_catalogue, builtin_theory, BuiltinTheory};
pub use theory::{combine, Equation, OpDecl, Origin, Renaming, Theory};
pub use tree::{substitute, substitute_map, OpNode, Tree};
pub use universe::{FiniteUniverse, Value};

pub(crate) use universe::{is_plain_ident, quote};
