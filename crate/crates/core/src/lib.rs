//! Algebraic effects and handlers over finite equational theories.
//!
//! Computations are trees of operation calls, quotiented by the equations of
//! a theory. Handlers fold such trees into other computations, and comodels
//! run them against an external world.

pub mod cli;
pub mod comodel;
pub mod error;
pub mod free;
pub mod lang;
pub mod model;
pub mod sigterm;

pub use error::{Error, Result, Span};
