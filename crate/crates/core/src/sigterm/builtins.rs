//! The standard theories: state, I/O, exceptions, nondeterminism and a few
//! classical algebraic ones.

use std::fmt;

use super::theory::{Equation, OpDecl, Origin, Theory};
use super::tree::Tree;
use super::universe::{FiniteUniverse, Value};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuiltinTheory {
    /// `lookup : L ~> S`, `update : L * S ~> unit`.
    State {
        locations: FiniteUniverse,
        states: FiniteUniverse,
    },
    /// `get : unit ~> S`, `put : S ~> unit`.
    SingleState(FiniteUniverse),
    /// `print : S ~> unit`, `read : unit ~> S`.
    Io(FiniteUniverse),
    Exception,
    Choice,
    Semilattice,
    PointedSet,
    Empty,
    Singleton,
    Group,
}

impl BuiltinTheory {
    pub fn name(&self) -> &'static str {
        match self {
            BuiltinTheory::State { .. } => "state",
            BuiltinTheory::SingleState(_) => "single-state",
            BuiltinTheory::Io(_) => "io",
            BuiltinTheory::Exception => "exception",
            BuiltinTheory::Choice => "choice",
            BuiltinTheory::Semilattice => "semilattice",
            BuiltinTheory::PointedSet => "pointed-set",
            BuiltinTheory::Empty => "empty",
            BuiltinTheory::Singleton => "singleton",
            BuiltinTheory::Group => "group",
        }
    }
}

impl fmt::Display for BuiltinTheory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinTheory::State { locations, states } => write!(f, "state({locations}, {states})"),
            BuiltinTheory::SingleState(s) => write!(f, "single-state({s})"),
            BuiltinTheory::Io(s) => write!(f, "io({s})"),
            other => f.write_str(other.name()),
        }
    }
}

fn ret(v: Value) -> Tree<Value> {
    Tree::ret(v)
}

fn node(op: &str, param: Value, kont: Vec<Tree<Value>>) -> Tree<Value> {
    Tree::node(op, param, kont)
}

fn branch(
    op: &str,
    param: Value,
    arity: &FiniteUniverse,
    k: impl Fn(Value) -> Tree<Value>,
) -> Tree<Value> {
    node(op, param, arity.elements().map(k).collect())
}

fn vars(names: &[&str]) -> FiniteUniverse {
    FiniteUniverse::Enum(names.iter().map(|s| s.to_string()).collect())
}

fn var(name: &str) -> Tree<Value> {
    ret(Value::label(name))
}

fn binary(op: &str, l: Tree<Value>, r: Tree<Value>) -> Tree<Value> {
    node(op, Value::Unit, vec![l, r])
}

fn constant(op: &str) -> Tree<Value> {
    node(op, Value::Unit, vec![])
}

pub fn builtin_theory(key: &BuiltinTheory) -> Result<Theory> {
    let theory = match key {
        BuiltinTheory::SingleState(s) => single_state(s)?,
        BuiltinTheory::State { locations, states } => state(locations, states)?,
        BuiltinTheory::Io(s) => Theory::new(
            "io",
            vec![
                OpDecl::new("print", s.clone(), FiniteUniverse::Unit),
                OpDecl::new("read", FiniteUniverse::Unit, s.clone()),
            ],
            vec![],
        )?,
        BuiltinTheory::Exception => Theory::new(
            "exception",
            vec![OpDecl::new(
                "abort",
                FiniteUniverse::Unit,
                FiniteUniverse::Empty,
            )],
            vec![],
        )?,
        BuiltinTheory::Choice => choice()?,
        BuiltinTheory::Semilattice => semilattice()?,
        BuiltinTheory::PointedSet => Theory::new(
            "pointed-set",
            vec![OpDecl::new(
                "point",
                FiniteUniverse::Unit,
                FiniteUniverse::Empty,
            )],
            vec![],
        )?,
        BuiltinTheory::Empty => Theory::new("empty", vec![], vec![])?,
        BuiltinTheory::Singleton => Theory::new(
            "singleton",
            vec![OpDecl::new(
                "star",
                FiniteUniverse::Unit,
                FiniteUniverse::Empty,
            )],
            vec![Equation::plain(
                "collapse",
                vars(&["x", "y"]),
                var("x"),
                var("y"),
            )],
        )?,
        BuiltinTheory::Group => group()?,
    };
    Ok(theory.with_origin(Origin::Builtin(key.clone())))
}

fn single_state(s: &FiniteUniverse) -> Result<Theory> {
    if s.is_empty() {
        return Err(Error::EmptyStateUniverse);
    }
    let ops = vec![
        OpDecl::new("get", FiniteUniverse::Unit, s.clone()),
        OpDecl::new("put", s.clone(), FiniteUniverse::Unit),
    ];
    let ss = FiniteUniverse::product(s.clone(), s.clone());
    let st = s.clone();
    let get_get = Equation::new("get-get", FiniteUniverse::Unit, ss.clone(), move |_| {
        let lhs = branch("get", Value::Unit, &st, |a| {
            branch("get", Value::Unit, &st, |b| ret(Value::pair(a.clone(), b)))
        });
        let rhs = branch("get", Value::Unit, &st, |a| ret(Value::pair(a.clone(), a)));
        Some((lhs, rhs))
    });
    let st = s.clone();
    let get_put = Equation::new(
        "get-put",
        FiniteUniverse::Unit,
        FiniteUniverse::Unit,
        move |_| {
            let lhs = branch("get", Value::Unit, &st, |a| {
                node("put", a, vec![ret(Value::Unit)])
            });
            Some((lhs, ret(Value::Unit)))
        },
    );
    let st = s.clone();
    let put_get = Equation::new("put-get", s.clone(), s.clone(), move |p| {
        let lhs = node("put", p.clone(), vec![branch("get", Value::Unit, &st, ret)]);
        let rhs = node("put", p.clone(), vec![ret(p.clone())]);
        Some((lhs, rhs))
    });
    let put_put = Equation::new("put-put", ss, FiniteUniverse::Unit, |p| {
        let (s, t) = p.as_pair()?;
        let lhs = node(
            "put",
            s.clone(),
            vec![node("put", t.clone(), vec![ret(Value::Unit)])],
        );
        let rhs = node("put", t.clone(), vec![ret(Value::Unit)]);
        Some((lhs, rhs))
    });
    Theory::new(
        "single-state",
        ops,
        vec![get_get, get_put, put_get, put_put],
    )
}

fn state(l: &FiniteUniverse, s: &FiniteUniverse) -> Result<Theory> {
    if s.is_empty() {
        return Err(Error::EmptyStateUniverse);
    }
    let ls = FiniteUniverse::product(l.clone(), s.clone());
    let ops = vec![
        OpDecl::new("lookup", l.clone(), s.clone()),
        OpDecl::new("update", ls.clone(), FiniteUniverse::Unit),
    ];
    let ss = FiniteUniverse::product(s.clone(), s.clone());
    let unit = || vec![ret(Value::Unit)];
    let upd = |loc: &Value, st: &Value, k: Vec<Tree<Value>>| {
        node("update", Value::pair(loc.clone(), st.clone()), k)
    };
    let mut eqs = Vec::new();

    let st = s.clone();
    eqs.push(Equation::new(
        "lookup-lookup",
        l.clone(),
        ss.clone(),
        move |loc| {
            let lhs = branch("lookup", loc.clone(), &st, |a| {
                branch("lookup", loc.clone(), &st, |b| {
                    ret(Value::pair(a.clone(), b))
                })
            });
            let rhs = branch("lookup", loc.clone(), &st, |a| {
                ret(Value::pair(a.clone(), a))
            });
            Some((lhs, rhs))
        },
    ));
    let st = s.clone();
    eqs.push(Equation::new(
        "lookup-update",
        l.clone(),
        FiniteUniverse::Unit,
        move |loc| {
            let lhs = branch("lookup", loc.clone(), &st, |a| upd(loc, &a, unit()));
            Some((lhs, ret(Value::Unit)))
        },
    ));
    let st = s.clone();
    eqs.push(Equation::new(
        "update-lookup",
        ls.clone(),
        s.clone(),
        move |p| {
            let (loc, v) = p.as_pair()?;
            let lhs = upd(loc, v, vec![branch("lookup", loc.clone(), &st, ret)]);
            let rhs = upd(loc, v, vec![ret(v.clone())]);
            Some((lhs, rhs))
        },
    ));
    eqs.push(Equation::new(
        "update-update",
        FiniteUniverse::product(l.clone(), ss.clone()),
        FiniteUniverse::Unit,
        move |p| {
            let (loc, st) = p.as_pair()?;
            let (a, b) = st.as_pair()?;
            let lhs = upd(loc, a, vec![upd(loc, b, unit())]);
            let rhs = upd(loc, b, unit());
            Some((lhs, rhs))
        },
    ));

    // Distinct locations commute. Only ordered pairs l != l' are instances.
    let ll = FiniteUniverse::product(l.clone(), l.clone());
    let st = s.clone();
    eqs.push(Equation::new("distinct-lookup-lookup", ll, ss, move |p| {
        let (a, b) = p.as_pair()?;
        if a == b {
            return None;
        }
        let lhs = branch("lookup", a.clone(), &st, |s1| {
            branch("lookup", b.clone(), &st, |s2| {
                ret(Value::pair(s1.clone(), s2))
            })
        });
        let rhs = branch("lookup", b.clone(), &st, |s2| {
            branch("lookup", a.clone(), &st, |s1| {
                ret(Value::pair(s1, s2.clone()))
            })
        });
        Some((lhs, rhs))
    }));
    let st = s.clone();
    eqs.push(Equation::new(
        "distinct-update-lookup",
        FiniteUniverse::product(ls.clone(), l.clone()),
        s.clone(),
        move |p| {
            let (first, other) = p.as_pair()?;
            let (loc, v) = first.as_pair()?;
            if loc == other {
                return None;
            }
            let lhs = upd(loc, v, vec![branch("lookup", other.clone(), &st, ret)]);
            let rhs = branch("lookup", other.clone(), &st, |t| upd(loc, v, vec![ret(t)]));
            Some((lhs, rhs))
        },
    ));
    eqs.push(Equation::new(
        "distinct-update-update",
        FiniteUniverse::product(ls.clone(), ls),
        FiniteUniverse::Unit,
        move |p| {
            let (first, second) = p.as_pair()?;
            let (l1, s1) = first.as_pair()?;
            let (l2, s2) = second.as_pair()?;
            if l1 == l2 {
                return None;
            }
            let lhs = upd(l1, s1, vec![upd(l2, s2, unit())]);
            let rhs = upd(l2, s2, vec![upd(l1, s1, unit())]);
            Some((lhs, rhs))
        },
    ));
    Theory::new("state", ops, eqs)
}

/// `choose : unit ~> bool`, the false branch being the left operand.
fn choice() -> Result<Theory> {
    let c = |l, r| binary("choose", l, r);
    let eqs = vec![
        Equation::plain(
            "comm",
            vars(&["x", "y"]),
            c(var("x"), var("y")),
            c(var("y"), var("x")),
        ),
        Equation::plain("idem", vars(&["x"]), c(var("x"), var("x")), var("x")),
        Equation::plain(
            "assoc",
            vars(&["x", "y", "z"]),
            c(c(var("x"), var("y")), var("z")),
            c(var("x"), c(var("y"), var("z"))),
        ),
    ];
    Theory::new(
        "choice",
        vec![OpDecl::new(
            "choose",
            FiniteUniverse::Unit,
            FiniteUniverse::Bool,
        )],
        eqs,
    )
}

fn semilattice() -> Result<Theory> {
    let j = |l, r| binary("join", l, r);
    let eqs = vec![
        Equation::plain(
            "assoc",
            vars(&["x", "y", "z"]),
            j(var("x"), j(var("y"), var("z"))),
            j(j(var("x"), var("y")), var("z")),
        ),
        Equation::plain(
            "comm",
            vars(&["x", "y"]),
            j(var("x"), var("y")),
            j(var("y"), var("x")),
        ),
        Equation::plain("idem", vars(&["x"]), j(var("x"), var("x")), var("x")),
        Equation::plain("unit", vars(&["x"]), j(var("x"), constant("bot")), var("x")),
    ];
    Theory::new(
        "semilattice",
        vec![
            OpDecl::new("bot", FiniteUniverse::Unit, FiniteUniverse::Empty),
            OpDecl::new("join", FiniteUniverse::Unit, FiniteUniverse::Fin(2)),
        ],
        eqs,
    )
}

fn group() -> Result<Theory> {
    let m = |l, r| binary("m", l, r);
    let i = |x| node("i", Value::Unit, vec![x]);
    let u = || constant("u");
    let eqs = vec![
        Equation::plain(
            "assoc",
            vars(&["x", "y", "z"]),
            m(m(var("x"), var("y")), var("z")),
            m(var("x"), m(var("y"), var("z"))),
        ),
        Equation::plain("left-unit", vars(&["x"]), m(u(), var("x")), var("x")),
        Equation::plain("right-unit", vars(&["x"]), m(var("x"), u()), var("x")),
        Equation::plain("right-inverse", vars(&["x"]), m(var("x"), i(var("x"))), u()),
        Equation::plain("left-inverse", vars(&["x"]), m(i(var("x")), var("x")), u()),
    ];
    Theory::new(
        "group",
        vec![
            OpDecl::new("u", FiniteUniverse::Unit, FiniteUniverse::Empty),
            OpDecl::new("m", FiniteUniverse::Unit, FiniteUniverse::Fin(2)),
            OpDecl::new("i", FiniteUniverse::Unit, FiniteUniverse::Unit),
        ],
        eqs,
    )
}

/// One representative of every builtin, with small universes.
pub fn builtin_catalogue() -> Vec<BuiltinTheory> {
    vec![
        BuiltinTheory::State {
            locations: FiniteUniverse::Fin(2),
            states: FiniteUniverse::Fin(2),
        },
        BuiltinTheory::SingleState(FiniteUniverse::Fin(3)),
        BuiltinTheory::Io(FiniteUniverse::Fin(2)),
        BuiltinTheory::Exception,
        BuiltinTheory::Choice,
        BuiltinTheory::Semilattice,
        BuiltinTheory::PointedSet,
        BuiltinTheory::Empty,
        BuiltinTheory::Singleton,
        BuiltinTheory::Group,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_state_shape() {
        let t = builtin_theory(&BuiltinTheory::SingleState(FiniteUniverse::Fin(2))).unwrap();
        assert_eq!(t.ops.len(), 2);
        let names: Vec<_> = t.eqs.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, ["get-get", "get-put", "put-get", "put-put"]);
    }

    #[test]
    fn get_put_law_instance() {
        let t = builtin_theory(&BuiltinTheory::SingleState(FiniteUniverse::Fin(2))).unwrap();
        let (_, lhs, rhs) = &t.equation("get-put").unwrap().instances()[0];
        assert_eq!(
            lhs.to_string(),
            "get((); [put(0; [return ()]), put(1; [return ()])])"
        );
        assert_eq!(rhs.to_string(), "return ()");
    }

    #[test]
    fn io_and_exception_have_no_equations() {
        let io = builtin_theory(&BuiltinTheory::Io(
            FiniteUniverse::enumeration(["a", "b"]).unwrap(),
        ))
        .unwrap();
        assert_eq!((io.ops.len(), io.eqs.len()), (2, 0));
        let ex = builtin_theory(&BuiltinTheory::Exception).unwrap();
        assert_eq!(
            ex.ops,
            vec![OpDecl::new(
                "abort",
                FiniteUniverse::Unit,
                FiniteUniverse::Empty
            )]
        );
        assert!(ex.eqs.is_empty());
    }

    #[test]
    fn empty_state_universe_rejected() {
        assert_eq!(
            builtin_theory(&BuiltinTheory::SingleState(FiniteUniverse::Empty)).unwrap_err(),
            Error::EmptyStateUniverse
        );
        assert_eq!(
            builtin_theory(&BuiltinTheory::State {
                locations: FiniteUniverse::Fin(2),
                states: FiniteUniverse::Empty
            })
            .unwrap_err(),
            Error::EmptyStateUniverse
        );
    }

    #[test]
    fn state_cross_laws_skip_equal_locations() {
        let t = builtin_theory(&BuiltinTheory::State {
            locations: FiniteUniverse::Fin(3),
            states: FiniteUniverse::Fin(2),
        })
        .unwrap();
        assert_eq!(t.eqs.len(), 7);
        // ordered pairs l != l'
        assert_eq!(
            t.equation("distinct-lookup-lookup")
                .unwrap()
                .instances()
                .len(),
            6
        );
        assert_eq!(
            t.equation("distinct-update-lookup")
                .unwrap()
                .instances()
                .len(),
            3 * 2 * 2
        );
        assert_eq!(
            t.equation("distinct-update-update")
                .unwrap()
                .instances()
                .len(),
            6 * 4
        );
    }

    #[test]
    fn catalogue_is_well_formed() {
        for key in builtin_catalogue() {
            let t = builtin_theory(&key).unwrap();
            t.check().unwrap();
            assert_eq!(t.origin, Origin::Builtin(key));
        }
    }
}
