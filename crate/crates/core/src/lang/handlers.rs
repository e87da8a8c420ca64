//! Bounded checks that a handler's clauses respect the theory's equations.
//!
//! Both sides of every equation instance are pushed through the handler
//! with opaque probes at the leaves. Results are observed extensionally:
//! functions over finite domains are tabulated. A difference is a genuine
//! counterexample; agreement on every probe is evidence, not proof.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::free::{normalize, normalizer, Congruence, Equality};
use crate::lang::eval::{Env, Evaluator, RuntimeValue};
use crate::lang::types::{typecheck_value, Type, TypeEnv};
use crate::lang::ValueExpr;
use crate::sigterm::{Theory, Tree, Value};

/// An observation of a runtime value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Obs {
    Val(Value),
    Probe(usize),
    Pair(Box<Obs>, Box<Obs>),
    /// The results at each element of a finite domain, in enumeration order.
    Fun(Vec<Tree<Obs>>),
}

impl fmt::Display for Obs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Obs::Val(v) => write!(f, "{v}"),
            Obs::Probe(i) => write!(f, "#{i}"),
            Obs::Pair(a, b) => write!(f, "({a}, {b})"),
            Obs::Fun(ts) => {
                f.write_str("fun[")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HandlerVerdict {
    Respected,
    Violated {
        equation: String,
        param: Value,
    },
    Unknown {
        equation: String,
        param: Value,
        reason: String,
    },
}

impl fmt::Display for HandlerVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HandlerVerdict::Respected => f.write_str("Respected (bounded)"),
            HandlerVerdict::Violated { equation, param } => {
                write!(f, "Violated {equation} at param={param}")
            }
            HandlerVerdict::Unknown {
                equation,
                param,
                reason,
            } => {
                write!(f, "Unknown {equation} at param={param}: {reason}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HandlerReport {
    pub verdict: HandlerVerdict,
    /// Operations without a clause; they are forwarded unchanged.
    pub uncovered: Vec<String>,
    /// Number of equation instances pushed through the handler.
    pub probes: usize,
}

struct Observer<'a> {
    ev: &'a Evaluator,
    normalize: bool,
    /// Set when an observation contains a tree compared only syntactically.
    inexact: bool,
}

impl Observer<'_> {
    fn value(&mut self, v: &RuntimeValue, ty: &Type) -> Result<Obs, String> {
        if let Some(x) = v.to_value() {
            return Ok(Obs::Val(x));
        }
        match v {
            RuntimeValue::Probe(i) => Ok(Obs::Probe(*i)),
            RuntimeValue::Pair(a, b) => {
                let (ta, tb) = match ty {
                    Type::Prod(ta, tb) => ((**ta).clone(), (**tb).clone()),
                    _ => (Type::Var(usize::MAX), Type::Var(usize::MAX)),
                };
                Ok(Obs::Pair(
                    Box::new(self.value(a, &ta)?),
                    Box::new(self.value(b, &tb)?),
                ))
            }
            RuntimeValue::Closure(_) | RuntimeValue::Prim(_) | RuntimeValue::Cont(_) => {
                let Type::Arrow(dom, cod) = ty else {
                    return Err(format!("cannot observe a function at type {ty}"));
                };
                let u = dom
                    .universe()
                    .ok_or_else(|| format!("function domain {dom} is not finite"))?;
                let mut table = Vec::with_capacity(u.size());
                for a in u.elements() {
                    let out = self
                        .ev
                        .apply(v, RuntimeValue::from_value(&a, &u))
                        .map_err(|e| e.to_string())?;
                    table.push(self.tree(&out, &cod.ty)?);
                }
                Ok(Obs::Fun(table))
            }
            _ => Err(format!("cannot observe {v}")),
        }
    }

    fn tree(&mut self, t: &Tree<RuntimeValue>, ty: &Type) -> Result<Tree<Obs>, String> {
        let t = t.try_bind(&mut |v| self.value(v, ty).map(Tree::Return))?;
        if t.is_return() {
            return Ok(t);
        }
        if self.normalize {
            return normalize(self.ev.theory(), &t).map_err(|e| e.to_string());
        }
        self.inexact = true;
        Ok(t)
    }
}

/// Pushes every equation instance through the handler `h` and compares the
/// two sides modulo the theory.
pub fn check_handler_equations(
    h: &ValueExpr,
    theory: &Arc<Theory>,
    budget: usize,
) -> Result<HandlerReport> {
    let Type::Handler(_, output) = typecheck_value(&TypeEnv::new(), h, theory)? else {
        return Err(Error::TypeMismatch {
            location: h.span(),
            expected: "a handler".into(),
            found: typecheck_value(&TypeEnv::new(), h, theory)?.to_string(),
        });
    };
    let ev = Evaluator::new(theory.clone());
    let RuntimeValue::Handler(hc) = ev.value(h, &Env::prelude())? else {
        unreachable!("handler types belong to handler values")
    };
    let uncovered = theory
        .ops
        .iter()
        .filter(|op| hc.expr.clause(&op.name).is_none())
        .map(|op| op.name.clone())
        .collect();
    let mut congruence = Congruence::new(theory.clone(), budget);
    let mut first_unknown = None;
    let mut probes = 0;
    for eq in &theory.eqs {
        for (param, l, r) in eq.instances() {
            probes += 1;
            let mut observer = Observer {
                ev: &ev,
                normalize: normalizer(theory).is_some(),
                inexact: false,
            };
            let mut side = |t: &Tree<Value>| -> Result<Tree<Obs>, String> {
                let probed = t.map(&mut |x| {
                    RuntimeValue::Probe(eq.context.index_of(x).unwrap_or(usize::MAX))
                });
                let out = ev.handle(&hc, &probed).map_err(|e| e.to_string())?;
                let obs = out.try_bind(&mut |v| observer.value(v, &output.ty).map(Tree::Return))?;
                Ok(obs)
            };
            let (lo, ro) = match (side(&l), side(&r)) {
                (Ok(lo), Ok(ro)) => (lo, ro),
                (Err(reason), _) | (_, Err(reason)) => {
                    first_unknown.get_or_insert(HandlerVerdict::Unknown {
                        equation: eq.name.clone(),
                        param,
                        reason,
                    });
                    continue;
                }
            };
            match congruence.equal(&lo, &ro) {
                Equality::Equal => {}
                Equality::Distinct if !observer.inexact => {
                    return Ok(HandlerReport {
                        verdict: HandlerVerdict::Violated {
                            equation: eq.name.clone(),
                            param,
                        },
                        uncovered,
                        probes,
                    })
                }
                verdict => {
                    let reason = match verdict {
                        Equality::Distinct => {
                            "results differ only up to unnormalized inner trees".to_string()
                        }
                        _ => "congruence search exhausted its budget".to_string(),
                    };
                    first_unknown.get_or_insert(HandlerVerdict::Unknown {
                        equation: eq.name.clone(),
                        param,
                        reason,
                    });
                }
            }
        }
    }
    Ok(HandlerReport {
        verdict: first_unknown.unwrap_or(HandlerVerdict::Respected),
        uncovered,
        probes,
    })
}
