//! Text front end: a lexer and parsers for programs and definition files,
//! the subcommands, and an interactive loop.

pub mod commands;
pub mod lexer;
pub mod parser;
pub mod repl;

pub use commands::{
    cmd_check, cmd_normalize, cmd_run, cmd_type, resolve_comodel, resolve_theory, CheckKind, Output,
};
pub use parser::{
    parse_builtin, parse_comodel, parse_model, parse_program, parse_theory, parse_universe,
    parse_value, parse_value_literal,
};
pub use repl::{run_repl, Repl, Reply};
