//! Big-step evaluation into trees. A computation evaluates to a tree whose
//! leaves are runtime values; handlers fold such trees.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::free::FreeElement;
use crate::lang::ast::{CompExpr, HandlerExpr, ValueExpr};
use crate::sigterm::{FiniteUniverse, Theory, Tree, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prim {
    Fst,
    Snd,
    Not,
}

#[derive(Clone, Debug)]
pub enum RuntimeValue {
    Unit,
    Bool(bool),
    /// `width` is known once the integer has met an integer universe;
    /// addition wraps at it.
    Int {
        value: u64,
        width: Option<u64>,
    },
    Str(String),
    Pair(Box<RuntimeValue>, Box<RuntimeValue>),
    Closure(Arc<Closure>),
    Handler(Arc<HandlerClosure>),
    Prim(Prim),
    /// `a |-> handle(h, kont[a])`, the continuation inside a handler clause.
    Cont(Arc<Continuation>),
    /// An opaque placeholder, used when probing handlers.
    Probe(usize),
}

#[derive(Debug)]
pub struct Closure {
    pub param: String,
    pub body: Arc<CompExpr>,
    pub env: Env,
}

#[derive(Debug)]
pub struct HandlerClosure {
    pub expr: Arc<HandlerExpr>,
    pub env: Env,
}

#[derive(Debug)]
pub struct Continuation {
    pub handler: Arc<HandlerClosure>,
    pub arity: FiniteUniverse,
    pub kont: Vec<Tree<RuntimeValue>>,
}

impl RuntimeValue {
    pub fn int(value: u64) -> Self {
        RuntimeValue::Int { value, width: None }
    }

    pub fn pair(a: RuntimeValue, b: RuntimeValue) -> Self {
        RuntimeValue::Pair(Box::new(a), Box::new(b))
    }

    /// The first-order value, if this is one.
    pub fn to_value(&self) -> Option<Value> {
        Some(match self {
            RuntimeValue::Unit => Value::Unit,
            RuntimeValue::Bool(b) => Value::Bool(*b),
            RuntimeValue::Int { value, .. } => Value::Int(*value),
            RuntimeValue::Str(s) => Value::Label(s.clone()),
            RuntimeValue::Pair(a, b) => Value::pair(a.to_value()?, b.to_value()?),
            _ => return None,
        })
    }

    /// Reads an element of `u` back as a runtime value.
    pub fn from_value(v: &Value, u: &FiniteUniverse) -> Self {
        match (v, u) {
            (Value::Unit, _) => RuntimeValue::Unit,
            (Value::Bool(b), _) => RuntimeValue::Bool(*b),
            (Value::Int(n), FiniteUniverse::Fin(w)) => RuntimeValue::Int {
                value: *n,
                width: Some(*w),
            },
            (Value::Int(n), _) => RuntimeValue::int(*n),
            (Value::Label(s), _) => RuntimeValue::Str(s.clone()),
            (Value::Pair(a, b), FiniteUniverse::Product(ua, ub)) => RuntimeValue::pair(
                RuntimeValue::from_value(a, ua),
                RuntimeValue::from_value(b, ub),
            ),
            (Value::Pair(a, b), _) => RuntimeValue::pair(
                RuntimeValue::from_value(a, &FiniteUniverse::Unit),
                RuntimeValue::from_value(b, &FiniteUniverse::Unit),
            ),
            (Value::Seq(_), _) => RuntimeValue::Str(v.to_string()),
        }
    }
}

/// Structural equality on first-order parts; functions compare by identity.
impl PartialEq for RuntimeValue {
    fn eq(&self, other: &Self) -> bool {
        use RuntimeValue::*;
        match (self, other) {
            (Unit, Unit) => true,
            (Bool(a), Bool(b)) => a == b,
            (Int { value: a, .. }, Int { value: b, .. }) => a == b,
            (Str(a), Str(b)) => a == b,
            (Pair(a1, b1), Pair(a2, b2)) => a1 == a2 && b1 == b2,
            (Closure(a), Closure(b)) => Arc::ptr_eq(a, b),
            (Handler(a), Handler(b)) => Arc::ptr_eq(a, b),
            (Prim(a), Prim(b)) => a == b,
            (Cont(a), Cont(b)) => Arc::ptr_eq(a, b),
            (Probe(a), Probe(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for RuntimeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuntimeValue::Pair(a, b) => write!(f, "({a}, {b})"),
            RuntimeValue::Closure(_) | RuntimeValue::Prim(_) | RuntimeValue::Cont(_) => {
                f.write_str("<fun>")
            }
            RuntimeValue::Handler(_) => f.write_str("<handler>"),
            RuntimeValue::Probe(i) => write!(f, "<probe {i}>"),
            v => write!(f, "{}", v.to_value().expect("first-order")),
        }
    }
}

/// A persistent environment.
#[derive(Clone, Debug, Default)]
pub struct Env(Option<Arc<EnvNode>>);

#[derive(Debug)]
struct EnvNode {
    name: String,
    value: RuntimeValue,
    next: Env,
}

impl Env {
    /// The environment holding the primitive functions.
    pub fn prelude() -> Env {
        Env::default()
            .bind("fst", RuntimeValue::Prim(Prim::Fst))
            .bind("snd", RuntimeValue::Prim(Prim::Snd))
            .bind("not", RuntimeValue::Prim(Prim::Not))
    }

    pub fn bind(&self, name: impl Into<String>, value: RuntimeValue) -> Env {
        Env(Some(Arc::new(EnvNode {
            name: name.into(),
            value,
            next: self.clone(),
        })))
    }

    pub fn get(&self, name: &str) -> Option<&RuntimeValue> {
        let mut cur = self;
        while let Some(node) = &cur.0 {
            if node.name == name {
                return Some(&node.value);
            }
            cur = &node.next;
        }
        None
    }
}

fn stuck(what: impl Into<String>) -> Error {
    Error::Eval(what.into())
}

/// Evaluates programs over one theory.
#[derive(Clone, Debug)]
pub struct Evaluator {
    theory: Arc<Theory>,
}

impl Evaluator {
    pub fn new(theory: Arc<Theory>) -> Self {
        Evaluator { theory }
    }

    pub fn theory(&self) -> &Arc<Theory> {
        &self.theory
    }

    pub fn value(&self, v: &ValueExpr, env: &Env) -> Result<RuntimeValue> {
        Ok(match v {
            ValueExpr::Var(x, at) => env.get(x).cloned().ok_or_else(|| Error::UnboundVariable {
                name: x.clone(),
                location: *at,
            })?,
            ValueExpr::Bool(b, _) => RuntimeValue::Bool(*b),
            ValueExpr::Unit(_) => RuntimeValue::Unit,
            ValueExpr::Int(n, _) => RuntimeValue::int(*n),
            ValueExpr::Str(s, _) => RuntimeValue::Str(s.clone()),
            ValueExpr::Pair(a, b, _) => {
                RuntimeValue::pair(self.value(a, env)?, self.value(b, env)?)
            }
            ValueExpr::Add(a, b, _) => match (self.value(a, env)?, self.value(b, env)?) {
                (
                    RuntimeValue::Int {
                        value: x,
                        width: wx,
                    },
                    RuntimeValue::Int {
                        value: y,
                        width: wy,
                    },
                ) => {
                    let width = wx.or(wy);
                    let sum = x.wrapping_add(y);
                    RuntimeValue::Int {
                        value: width.map_or(sum, |w| sum % w),
                        width,
                    }
                }
                (x, y) => return Err(stuck(format!("cannot add {x} and {y}"))),
            },
            ValueExpr::Fun(x, body, _) => RuntimeValue::Closure(Arc::new(Closure {
                param: x.clone(),
                body: body.clone(),
                env: env.clone(),
            })),
            ValueExpr::Handler(h, _) => RuntimeValue::Handler(Arc::new(HandlerClosure {
                expr: h.clone(),
                env: env.clone(),
            })),
        })
    }

    /// Evaluates `c` to its tree.
    pub fn comp(&self, c: &CompExpr, env: &Env) -> Result<Tree<RuntimeValue>> {
        match c {
            CompExpr::Return(v, _) => Ok(Tree::Return(self.value(v, env)?)),
            CompExpr::OpCall(op, v, at) => {
                let decl = self
                    .theory
                    .op(op)
                    .ok_or_else(|| Error::UnknownOperationAt {
                        name: op.clone(),
                        location: *at,
                    })?;
                let arg = self.value(v, env)?;
                let p = arg
                    .to_value()
                    .ok_or_else(|| stuck(format!("parameter of {op} is not first-order")))?;
                let arity = decl.arity.clone();
                self.theory
                    .op_with(op, p, |a| Tree::Return(RuntimeValue::from_value(a, &arity)))
            }
            CompExpr::Do(x, c1, c2, _) => {
                let first = self.comp(c1, env)?;
                first.try_bind(&mut |v| self.comp(c2, &env.bind(x.clone(), v.clone())))
            }
            CompExpr::If(v, c1, c2, _) => match self.value(v, env)? {
                RuntimeValue::Bool(true) => self.comp(c1, env),
                RuntimeValue::Bool(false) => self.comp(c2, env),
                other => Err(stuck(format!("condition {other} is not a boolean"))),
            },
            CompExpr::App(f, a, _) => {
                let f = self.value(f, env)?;
                let a = self.value(a, env)?;
                self.apply(&f, a)
            }
            CompExpr::WithHandle(h, body, _) => {
                let h = match self.value(h, env)? {
                    RuntimeValue::Handler(h) => h,
                    other => return Err(stuck(format!("{other} is not a handler"))),
                };
                let t = self.comp(body, env)?;
                self.handle(&h, &t)
            }
        }
    }

    pub fn apply(&self, f: &RuntimeValue, a: RuntimeValue) -> Result<Tree<RuntimeValue>> {
        match f {
            RuntimeValue::Closure(c) => self.comp(&c.body, &c.env.bind(c.param.clone(), a)),
            RuntimeValue::Prim(p) => Ok(Tree::Return(match (p, a) {
                (Prim::Fst, RuntimeValue::Pair(x, _)) => *x,
                (Prim::Snd, RuntimeValue::Pair(_, y)) => *y,
                (Prim::Not, RuntimeValue::Bool(b)) => RuntimeValue::Bool(!b),
                (p, a) => return Err(stuck(format!("{p:?} applied to {a}"))),
            })),
            RuntimeValue::Cont(k) => {
                let v = a
                    .to_value()
                    .ok_or_else(|| stuck("continuation argument is not first-order"))?;
                let i = k
                    .arity
                    .index_of(&v)
                    .ok_or_else(|| stuck(format!("{v} is not in {}", k.arity)))?;
                self.handle(&k.handler, &k.kont[i])
            }
            other => Err(stuck(format!("{other} is not a function"))),
        }
    }

    /// Deep handling: the return clause at leaves, the matching clause at
    /// handled nodes, and re-emission of every other operation.
    pub fn handle(
        &self,
        h: &Arc<HandlerClosure>,
        t: &Tree<RuntimeValue>,
    ) -> Result<Tree<RuntimeValue>> {
        match t {
            Tree::Return(v) => self.comp(
                &h.expr.ret_body,
                &h.env.bind(h.expr.ret_var.clone(), v.clone()),
            ),
            Tree::Op(node) => {
                let decl = self.theory.op_checked(&node.op)?;
                match h.expr.clause(&node.op) {
                    Some(clause) => {
                        let k = RuntimeValue::Cont(Arc::new(Continuation {
                            handler: h.clone(),
                            arity: decl.arity.clone(),
                            kont: node.kont.clone(),
                        }));
                        let env = h
                            .env
                            .bind(
                                clause.param.clone(),
                                RuntimeValue::from_value(&node.param, &decl.param),
                            )
                            .bind(clause.kont.clone(), k);
                        self.comp(&clause.body, &env)
                    }
                    None => {
                        let kont = node
                            .kont
                            .iter()
                            .map(|k| self.handle(h, k))
                            .collect::<Result<Vec<_>>>()?;
                        Ok(Tree::node(node.op.clone(), node.param.clone(), kont))
                    }
                }
            }
        }
    }
}

/// Evaluates a closed computation to an element of the free model.
pub fn eval_pure(
    c: &CompExpr,
    env: &Env,
    theory: &Arc<Theory>,
) -> Result<FreeElement<RuntimeValue>> {
    let tree = Evaluator::new(theory.clone()).comp(c, env)?;
    FreeElement::new(theory.clone(), tree)
}

/// Applies a handler value to a computation tree.
pub fn handle(
    h: &RuntimeValue,
    t: &FreeElement<RuntimeValue>,
) -> Result<FreeElement<RuntimeValue>> {
    let RuntimeValue::Handler(h) = h else {
        return Err(stuck(format!("{h} is not a handler")));
    };
    let tree = Evaluator::new(t.theory.clone()).handle(h, &t.tree)?;
    FreeElement::new(t.theory.clone(), tree)
}

/// The first-order tree, if every leaf is first-order.
pub fn first_order(t: &Tree<RuntimeValue>) -> Result<Tree<Value>> {
    t.try_bind(&mut |v| {
        v.to_value()
            .map(Tree::Return)
            .ok_or_else(|| stuck(format!("result {v} is not first-order")))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::parser::{parse_program, parse_value};
    use crate::sigterm::{builtin_theory, BuiltinTheory};

    fn theory(b: BuiltinTheory) -> Arc<Theory> {
        Arc::new(builtin_theory(&b).unwrap())
    }

    fn run(src: &str, t: &Arc<Theory>) -> Tree<Value> {
        let c = parse_program(src).unwrap();
        first_order(&eval_pure(&c, &Env::prelude(), t).unwrap().tree).unwrap()
    }

    #[test]
    fn sequencing_return() {
        let t = theory(BuiltinTheory::Exception);
        assert_eq!(
            run("do x <- return true in return x", &t),
            Tree::Return(Value::Bool(true))
        );
        assert_eq!(
            run("if true then return 1 else abort!()", &t),
            Tree::Return(Value::Int(1))
        );
    }

    #[test]
    fn increment_tree() {
        let t = theory(BuiltinTheory::SingleState(FiniteUniverse::Fin(10)));
        let got = run("do x <- get!() in do _ <- put!(x+1) in return x", &t);
        let want = Tree::node(
            "get",
            Value::Unit,
            (0..10)
                .map(|s| {
                    Tree::node(
                        "put",
                        Value::Int((s + 1) % 10),
                        vec![Tree::Return(Value::Int(s))],
                    )
                })
                .collect(),
        );
        assert_eq!(got, want);
    }

    #[test]
    fn exception_handler() {
        let t = theory(BuiltinTheory::Exception);
        let got = run(
            "with handler { return x -> return x | abort(_; _) -> return false } handle do _ <- abort!() in return true",
            &t,
        );
        assert_eq!(got, Tree::Return(Value::Bool(false)));
    }

    #[test]
    fn both_branches() {
        let t = theory(BuiltinTheory::Choice);
        let got = run(
            "with handler { return x -> return x | choose(_; k) -> do a <- k true in do b <- k false in return (a, b) } \
             handle do b <- choose!() in return b",
            &t,
        );
        assert_eq!(
            got,
            Tree::Return(Value::pair(Value::Bool(true), Value::Bool(false)))
        );
    }

    #[test]
    fn forwarding() {
        let t = theory(BuiltinTheory::Choice);
        let got = run(
            "with handler { return x -> return (x, x) } handle choose!()",
            &t,
        );
        let want = Tree::node(
            "choose",
            Value::Unit,
            vec![
                Tree::Return(Value::pair(Value::Bool(false), Value::Bool(false))),
                Tree::Return(Value::pair(Value::Bool(true), Value::Bool(true))),
            ],
        );
        assert_eq!(got, want);
    }

    #[test]
    fn state_passing_handler() {
        let t = theory(BuiltinTheory::SingleState(FiniteUniverse::Fin(3)));
        let h = parse_value(
            "handler { return x -> return fun s -> return (x, s) \
             | get(_; k) -> return fun s -> do f <- k s in f s \
             | put(s; k) -> return fun _ -> do f <- k () in f s }",
        )
        .unwrap();
        let ev = Evaluator::new(t.clone());
        let hv = ev.value(&h, &Env::prelude()).unwrap();
        let prog = parse_program("do x <- get!() in do _ <- put!(x+1) in return x").unwrap();
        let tree = ev.comp(&prog, &Env::prelude()).unwrap();
        let RuntimeValue::Handler(hc) = &hv else {
            panic!()
        };
        let Tree::Return(f) = ev.handle(hc, &tree).unwrap() else {
            panic!()
        };
        let out = ev.apply(&f, RuntimeValue::int(2)).unwrap();
        assert_eq!(
            first_order(&out).unwrap(),
            Tree::Return(Value::pair(Value::Int(2), Value::Int(0)))
        );
    }

    #[test]
    fn primitives() {
        let t = theory(BuiltinTheory::Empty);
        assert_eq!(run("fst (1, 2)", &t), Tree::Return(Value::Int(1)));
        assert_eq!(run("not true", &t), Tree::Return(Value::Bool(false)));
        assert_eq!(
            run("(fun x -> return x + 2) 3", &t),
            Tree::Return(Value::Int(5))
        );
    }
}
