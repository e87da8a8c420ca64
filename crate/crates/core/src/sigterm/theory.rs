use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::builtins::BuiltinTheory;
use super::tree::{OpNode, Tree};
use super::universe::{FiniteUniverse, Value};
use crate::error::{Error, Result};

/// `op : P ~> A`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OpDecl {
    pub name: String,
    pub param: FiniteUniverse,
    pub arity: FiniteUniverse,
}

impl OpDecl {
    pub fn new(name: impl Into<String>, param: FiniteUniverse, arity: FiniteUniverse) -> Self {
        OpDecl {
            name: name.into(),
            param,
            arity,
        }
    }
}

impl fmt::Display for OpDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {} ~> {}", self.name, self.param, self.arity)
    }
}

type InstanceFn = dyn Fn(&Value) -> Option<(Tree<Value>, Tree<Value>)> + Send + Sync;

/// A family of equations-in-context indexed by a parameter universe.
///
/// Leaves of both sides range over `context`. The instance function may
/// decline a parameter (return `None`), which excludes it from the family.
#[derive(Clone)]
pub struct Equation {
    pub name: String,
    pub params: FiniteUniverse,
    pub context: FiniteUniverse,
    instance: Arc<InstanceFn>,
}

impl Equation {
    pub fn new<F>(
        name: impl Into<String>,
        params: FiniteUniverse,
        context: FiniteUniverse,
        f: F,
    ) -> Self
    where
        F: Fn(&Value) -> Option<(Tree<Value>, Tree<Value>)> + Send + Sync + 'static,
    {
        Equation {
            name: name.into(),
            params,
            context,
            instance: Arc::new(f),
        }
    }

    /// An unparameterized equation `context | lhs = rhs`.
    pub fn plain(
        name: impl Into<String>,
        context: FiniteUniverse,
        lhs: Tree<Value>,
        rhs: Tree<Value>,
    ) -> Self {
        Equation::new(name, FiniteUniverse::Unit, context, move |_| {
            Some((lhs.clone(), rhs.clone()))
        })
    }

    pub fn instance(&self, param: &Value) -> Option<(Tree<Value>, Tree<Value>)> {
        if !self.params.contains(param) {
            return None;
        }
        (self.instance)(param)
    }

    /// All instances in parameter enumeration order.
    pub fn instances(&self) -> Vec<(Value, Tree<Value>, Tree<Value>)> {
        self.params
            .elements()
            .filter_map(|p| {
                let (l, r) = (self.instance)(&p)?;
                Some((p, l, r))
            })
            .collect()
    }

    fn renamed(&self, name: String, ops: &HashMap<String, String>) -> Equation {
        let inner = self.instance.clone();
        let ops = ops.clone();
        Equation {
            name,
            params: self.params.clone(),
            context: self.context.clone(),
            instance: Arc::new(move |p| {
                let (l, r) = inner(p)?;
                Some((l.rename_ops(&ops), r.rename_ops(&ops)))
            }),
        }
    }
}

impl fmt::Debug for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Equation")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("context", &self.context)
            .finish_non_exhaustive()
    }
}

/// Where a theory came from. Normalizers are keyed on this.
#[derive(Clone, Debug, PartialEq)]
pub enum Origin {
    Builtin(BuiltinTheory),
    Combined,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Renaming {
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug)]
pub struct Theory {
    pub name: String,
    pub ops: Vec<OpDecl>,
    pub eqs: Vec<Equation>,
    pub origin: Origin,
    /// Operation renamings applied while combining theories.
    pub renamings: Vec<Renaming>,
}

impl Theory {
    /// Builds a theory and checks it exhaustively: unique operation names and
    /// well-formed equation instances.
    pub fn new(name: impl Into<String>, ops: Vec<OpDecl>, eqs: Vec<Equation>) -> Result<Self> {
        let theory = Theory {
            name: name.into(),
            ops,
            eqs,
            origin: Origin::Custom,
            renamings: Vec::new(),
        };
        theory.check()?;
        Ok(theory)
    }

    pub(crate) fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }

    pub fn op(&self, name: &str) -> Option<&OpDecl> {
        self.ops.iter().find(|o| o.name == name)
    }

    pub fn op_checked(&self, name: &str) -> Result<&OpDecl> {
        self.op(name)
            .ok_or_else(|| Error::UnknownOperation(name.to_string()))
    }

    pub fn equation(&self, name: &str) -> Option<&Equation> {
        self.eqs.iter().find(|e| e.name == name)
    }

    /// Checked tree formation from a finite continuation map.
    pub fn make_op<X>(
        &self,
        op: &str,
        param: Value,
        kont: impl IntoIterator<Item = (Value, Tree<X>)>,
    ) -> Result<Tree<X>> {
        let decl = self.op_checked(op)?;
        self.check_param(decl, &param)?;
        let mut slots: Vec<Option<Tree<X>>> = (0..decl.arity.size()).map(|_| None).collect();
        for (a, t) in kont {
            let i = decl.arity.check(&a)?;
            slots[i] = Some(t);
        }
        let kont = slots
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                t.ok_or_else(|| Error::IncompleteContinuation {
                    op: op.to_string(),
                    missing: decl
                        .arity
                        .element(i)
                        .map(|v| v.to_string())
                        .unwrap_or_default(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Tree::Op(OpNode {
            op: op.to_string(),
            param,
            kont,
        }))
    }

    /// Tree formation with the continuation given as a function on the arity.
    pub fn op_with<X>(
        &self,
        op: &str,
        param: Value,
        mut kont: impl FnMut(&Value) -> Tree<X>,
    ) -> Result<Tree<X>> {
        let decl = self.op_checked(op)?;
        self.check_param(decl, &param)?;
        Ok(Tree::node(
            op,
            param,
            decl.arity.elements().map(|a| kont(&a)).collect(),
        ))
    }

    fn check_param(&self, decl: &OpDecl, param: &Value) -> Result<()> {
        if decl.param.contains(param) {
            Ok(())
        } else {
            Err(Error::ParameterOutOfUniverse {
                op: decl.name.clone(),
                param: param.to_string(),
                universe: decl.param.to_string(),
            })
        }
    }

    /// Checks that every node of `t` is well formed against this signature.
    pub fn check_tree<X>(&self, t: &Tree<X>) -> Result<()> {
        for node in t.op_nodes() {
            let decl = self.op_checked(&node.op)?;
            self.check_param(decl, &node.param)?;
            if node.kont.len() != decl.arity.size() {
                return Err(Error::IncompleteContinuation {
                    op: node.op.clone(),
                    missing: format!("{} of {} branches", decl.arity.size(), node.kont.len()),
                });
            }
        }
        Ok(())
    }

    /// Well-formedness of the whole theory, enumerating every equation
    /// parameter.
    pub fn check(&self) -> Result<()> {
        for (i, op) in self.ops.iter().enumerate() {
            if self.ops[..i].iter().any(|o| o.name == op.name) {
                return Err(Error::DuplicateOperation(op.name.clone()));
            }
        }
        for eq in &self.eqs {
            for (_, lhs, rhs) in eq.instances() {
                for side in [&lhs, &rhs] {
                    self.check_tree(side)
                        .map_err(|e| Error::IllFormedEquation {
                            equation: eq.name.clone(),
                            reason: e.to_string(),
                        })?;
                    if let Some(x) = side.leaves().into_iter().find(|x| !eq.context.contains(x)) {
                        return Err(Error::IllFormedEquation {
                            equation: eq.name.clone(),
                            reason: format!("generator {x} is not in context {}", eq.context),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "theory {} {{", self.name)?;
        for op in &self.ops {
            writeln!(f, "  op {op};")?;
        }
        for eq in &self.eqs {
            let forall = if eq.params == FiniteUniverse::Unit {
                String::new()
            } else {
                format!(" forall {}", eq.params)
            };
            writeln!(f, "  # equation {}{} ({})", eq.name, forall, eq.context)?;
        }
        f.write_str("}")
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn fresh_name(base: &str, suffix: &str, taken: &dyn Fn(&str) -> bool) -> String {
    let mut candidate = format!("{base}_{}", sanitize(suffix));
    let mut n = 2;
    while taken(&candidate) {
        candidate = format!("{base}_{}{n}", sanitize(suffix));
        n += 1;
    }
    candidate
}

/// Adjoins the signatures and equations of two theories.
///
/// Operations of `t2` whose names collide with `t1` are renamed with the
/// name of `t2` as suffix; the renaming is recorded in the result. With
/// `distribute`, every pair of operations `(o1, o2)` from `t1 x t2` gets a
/// commutation law over `P1 x P2` with a generic continuation over `A1 x A2`.
pub fn combine(t1: &Theory, t2: &Theory, distribute: bool) -> Theory {
    let mut ops = t1.ops.clone();
    let mut renaming = HashMap::new();
    let mut renamings = t1.renamings.clone();
    for op in &t2.ops {
        let mut decl = op.clone();
        if ops.iter().any(|o| o.name == op.name) {
            let taken =
                |n: &str| ops.iter().any(|o| o.name == n) || t2.ops.iter().any(|o| o.name == n);
            decl.name = fresh_name(&op.name, &t2.name, &taken);
            renaming.insert(op.name.clone(), decl.name.clone());
            renamings.push(Renaming {
                from: op.name.clone(),
                to: decl.name.clone(),
            });
        }
        ops.push(decl);
    }

    let mut eqs = t1.eqs.clone();
    for eq in &t2.eqs {
        let name = if eqs.iter().any(|e| e.name == eq.name) {
            let taken = |n: &str| eqs.iter().any(|e| e.name == n);
            fresh_name(&eq.name, &t2.name, &taken)
        } else {
            eq.name.clone()
        };
        eqs.push(eq.renamed(name, &renaming));
    }

    if distribute {
        let first = &ops[..t1.ops.len()];
        let second = &ops[t1.ops.len()..];
        let mut laws = Vec::new();
        for o1 in first {
            for o2 in second {
                laws.push(commutation_law(o1.clone(), o2.clone()));
            }
        }
        eqs.extend(laws);
    }

    Theory {
        name: format!("{}+{}", t1.name, t2.name),
        ops,
        eqs,
        origin: Origin::Combined,
        renamings,
    }
}

fn commutation_law(o1: OpDecl, o2: OpDecl) -> Equation {
    let params = FiniteUniverse::product(o1.param.clone(), o2.param.clone());
    let context = FiniteUniverse::product(o1.arity.clone(), o2.arity.clone());
    let name = format!("{}-{}-commute", o1.name, o2.name);
    Equation::new(name, params, context, move |p| {
        let (p1, p2) = p.as_pair()?;
        let lhs = Tree::node(
            o1.name.clone(),
            p1.clone(),
            o1.arity
                .elements()
                .map(|a1| {
                    Tree::node(
                        o2.name.clone(),
                        p2.clone(),
                        o2.arity
                            .elements()
                            .map(|a2| Tree::ret(Value::pair(a1.clone(), a2)))
                            .collect(),
                    )
                })
                .collect(),
        );
        let rhs = Tree::node(
            o2.name.clone(),
            p2.clone(),
            o2.arity
                .elements()
                .map(|a2| {
                    Tree::node(
                        o1.name.clone(),
                        p1.clone(),
                        o1.arity
                            .elements()
                            .map(|a1| Tree::ret(Value::pair(a1, a2.clone())))
                            .collect(),
                    )
                })
                .collect(),
        );
        Some((lhs, rhs))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigterm::builtins::builtin_theory;

    fn single_state(n: u64) -> Theory {
        builtin_theory(&BuiltinTheory::SingleState(FiniteUniverse::Fin(n))).unwrap()
    }

    #[test]
    fn make_op_builds_generic_choice() {
        let t = builtin_theory(&BuiltinTheory::Choice).unwrap();
        let tree = t
            .make_op(
                "choose",
                Value::Unit,
                [false, true].map(|b| (Value::Bool(b), Tree::ret(Value::Bool(b)))),
            )
            .unwrap();
        assert_eq!(
            tree,
            Tree::node(
                "choose",
                Value::Unit,
                vec![Tree::ret(Value::Bool(false)), Tree::ret(Value::Bool(true))]
            )
        );
    }

    #[test]
    fn make_op_abort_has_no_branches() {
        let t = builtin_theory(&BuiltinTheory::Exception).unwrap();
        let tree: Tree<Value> = t.make_op("abort", Value::Unit, []).unwrap();
        assert_eq!(tree, Tree::node("abort", Value::Unit, vec![]));
    }

    #[test]
    fn make_op_errors() {
        let t = single_state(2);
        assert!(matches!(
            t.make_op::<Value>(
                "get",
                Value::Int(0),
                [(Value::Int(0), Tree::ret(Value::Unit))]
            ),
            Err(Error::ParameterOutOfUniverse { .. })
        ));
        assert!(matches!(
            t.make_op::<Value>("nope", Value::Unit, []),
            Err(Error::UnknownOperation(_))
        ));
        assert!(matches!(
            t.make_op(
                "get",
                Value::Unit,
                [(Value::Int(0), Tree::ret(Value::Unit))]
            ),
            Err(Error::IncompleteContinuation { .. })
        ));
    }

    #[test]
    fn duplicate_ops_rejected() {
        let ops = vec![
            OpDecl::new("a", FiniteUniverse::Unit, FiniteUniverse::Unit),
            OpDecl::new("a", FiniteUniverse::Unit, FiniteUniverse::Bool),
        ];
        assert_eq!(
            Theory::new("t", ops, vec![]).unwrap_err(),
            Error::DuplicateOperation("a".into())
        );
    }

    #[test]
    fn ill_formed_equation_rejected() {
        let ops = vec![OpDecl::new("a", FiniteUniverse::Unit, FiniteUniverse::Unit)];
        let bad = Equation::plain(
            "bad",
            FiniteUniverse::Unit,
            Tree::node("b", Value::Unit, vec![Tree::ret(Value::Unit)]),
            Tree::ret(Value::Unit),
        );
        assert!(matches!(
            Theory::new("t", ops.clone(), vec![bad]),
            Err(Error::IllFormedEquation { .. })
        ));
        let stray = Equation::plain(
            "stray",
            FiniteUniverse::Unit,
            Tree::ret(Value::Bool(true)),
            Tree::ret(Value::Unit),
        );
        assert!(matches!(
            Theory::new("t", ops, vec![stray]),
            Err(Error::IllFormedEquation { .. })
        ));
    }

    #[test]
    fn combine_state_with_io() {
        let s = single_state(2);
        let io = builtin_theory(&BuiltinTheory::Io(FiniteUniverse::Fin(2))).unwrap();
        let c = combine(&s, &io, false);
        assert_eq!(c.ops.len(), 4);
        assert_eq!(c.eqs.len(), 4);
        assert!(c.renamings.is_empty());
        c.check().unwrap();
    }

    #[test]
    fn combine_with_empty_is_neutral() {
        let e = builtin_theory(&BuiltinTheory::Empty).unwrap();
        let s = single_state(3);
        let c = combine(&e, &s, false);
        assert_eq!(c.ops, s.ops);
        assert_eq!(
            c.eqs.iter().map(|e| &e.name).collect::<Vec<_>>(),
            s.eqs.iter().map(|e| &e.name).collect::<Vec<_>>()
        );
        for (a, b) in c.eqs.iter().zip(&s.eqs) {
            assert_eq!(a.instances(), b.instances());
        }
    }

    #[test]
    fn two_state_copies_distribute() {
        let s = single_state(2);
        let c = combine(&s, &s, true);
        let names: Vec<_> = c.ops.iter().map(|o| o.name.as_str()).collect();
        assert_eq!(
            names,
            ["get", "put", "get_single_state", "put_single_state"]
        );
        assert_eq!(c.renamings.len(), 2);
        // 4 + 4 own laws, 2 x 2 commutation laws
        assert_eq!(c.eqs.len(), 12);
        c.check().unwrap();
        // the renamed copy's laws mention only renamed operations
        let (_, l, _) = &c.equation("get-get_single_state").unwrap().instances()[0];
        assert!(l.op_nodes().iter().all(|n| n.op == "get_single_state"));
        // get/get' distributivity: get(\s. get'(\s'. k s s')) = get'(\s'. get(\s. k s s'))
        let law = c.equation("get-get_single_state-commute").unwrap();
        let (_, l, r) = &law.instances()[0];
        assert_eq!(l.op_nodes()[0].op, "get");
        assert_eq!(r.op_nodes()[0].op, "get_single_state");
        assert_eq!(l.leaves().len(), 4);
    }
}
