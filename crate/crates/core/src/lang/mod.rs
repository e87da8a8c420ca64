//! The core language: values, computations, handlers, a type checker that
//! tracks which operations a computation may perform, and an evaluator that
//! produces computation trees.

pub mod ast;
pub mod eval;
pub mod handlers;
pub mod types;

pub use ast::{CompExpr, HandlerExpr, OpClause, ValueExpr};
pub use eval::{eval_pure, first_order, handle, Env, Evaluator, RuntimeValue};
pub use handlers::{check_handler_equations, HandlerReport, HandlerVerdict, Obs};
pub use types::{
    check_comp, typecheck_comp, typecheck_value, universe_type, CompType, Type, TypeEnv,
};
