use std::fmt;
use std::sync::Arc;

use crate::error::Span;
use crate::sigterm::quote;

#[derive(Clone, Debug, PartialEq)]
pub enum ValueExpr {
    Var(String, Span),
    Bool(bool, Span),
    Unit(Span),
    Int(u64, Span),
    Str(String, Span),
    Pair(Box<ValueExpr>, Box<ValueExpr>, Span),
    /// Integer addition, wrapping at the width of the integer type.
    Add(Box<ValueExpr>, Box<ValueExpr>, Span),
    Fun(String, Arc<CompExpr>, Span),
    Handler(Arc<HandlerExpr>, Span),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HandlerExpr {
    pub ret_var: String,
    pub ret_body: CompExpr,
    pub clauses: Vec<OpClause>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OpClause {
    pub op: String,
    pub param: String,
    pub kont: String,
    pub body: CompExpr,
    pub span: Span,
}

impl HandlerExpr {
    pub fn clause(&self, op: &str) -> Option<&OpClause> {
        self.clauses.iter().find(|c| c.op == op)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CompExpr {
    Return(ValueExpr, Span),
    OpCall(String, ValueExpr, Span),
    Do(String, Box<CompExpr>, Box<CompExpr>, Span),
    If(ValueExpr, Box<CompExpr>, Box<CompExpr>, Span),
    App(ValueExpr, ValueExpr, Span),
    WithHandle(ValueExpr, Box<CompExpr>, Span),
}

impl ValueExpr {
    pub fn span(&self) -> Span {
        match self {
            ValueExpr::Var(_, s)
            | ValueExpr::Bool(_, s)
            | ValueExpr::Unit(s)
            | ValueExpr::Int(_, s)
            | ValueExpr::Str(_, s)
            | ValueExpr::Pair(_, _, s)
            | ValueExpr::Add(_, _, s)
            | ValueExpr::Fun(_, _, s)
            | ValueExpr::Handler(_, s) => *s,
        }
    }
}

impl CompExpr {
    pub fn span(&self) -> Span {
        match self {
            CompExpr::Return(_, s)
            | CompExpr::OpCall(_, _, s)
            | CompExpr::Do(_, _, _, s)
            | CompExpr::If(_, _, _, s)
            | CompExpr::App(_, _, s)
            | CompExpr::WithHandle(_, _, s) => *s,
        }
    }
}

/// Values that must be parenthesised in operator position.
fn open_ended(v: &ValueExpr) -> bool {
    matches!(
        v,
        ValueExpr::Fun(..) | ValueExpr::Handler(..) | ValueExpr::Add(..)
    )
}

impl fmt::Display for ValueExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueExpr::Var(x, _) => f.write_str(x),
            ValueExpr::Bool(b, _) => write!(f, "{b}"),
            ValueExpr::Unit(_) => f.write_str("()"),
            ValueExpr::Int(n, _) => write!(f, "{n}"),
            ValueExpr::Str(s, _) => f.write_str(&quote(s)),
            ValueExpr::Pair(a, b, _) => write!(f, "({a}, {b})"),
            ValueExpr::Add(a, b, _) => {
                if matches!(**a, ValueExpr::Fun(..) | ValueExpr::Handler(..)) {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                // addition is left-associative
                if open_ended(b) {
                    write!(f, " + ({b})")
                } else {
                    write!(f, " + {b}")
                }
            }
            ValueExpr::Fun(x, body, _) => write!(f, "fun {x} -> {body}"),
            ValueExpr::Handler(h, _) => {
                write!(f, "handler {{ return {} -> {}", h.ret_var, h.ret_body)?;
                for c in &h.clauses {
                    write!(f, " | {}({}; {}) -> {}", c.op, c.param, c.kont, c.body)?;
                }
                f.write_str(" }")
            }
        }
    }
}

impl fmt::Display for CompExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompExpr::Return(v, _) => write!(f, "return {v}"),
            CompExpr::OpCall(op, v, _) => match v {
                ValueExpr::Unit(_) => write!(f, "{op}!()"),
                _ => write!(f, "{op}!({v})"),
            },
            CompExpr::Do(x, c1, c2, _) => write!(f, "do {x} <- {c1} in {c2}"),
            CompExpr::If(v, c1, c2, _) => write!(f, "if {v} then {c1} else {c2}"),
            CompExpr::App(v1, v2, _) => {
                if open_ended(v1) {
                    write!(f, "({v1}) {v2}")
                } else {
                    write!(f, "{v1} {v2}")
                }
            }
            CompExpr::WithHandle(v, c, _) => write!(f, "with {v} handle {c}"),
        }
    }
}
