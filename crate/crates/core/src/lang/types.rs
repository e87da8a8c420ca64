//! Type and dirt inference.
//!
//! Value types are inferred by unification. Dirts are variables with a set
//! of operations they must contain and flow constraints `d1 \ H <= d2`;
//! the least solution is reported. Subsumption only ever enlarges dirt.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result, Span};
use crate::lang::ast::{CompExpr, HandlerExpr, ValueExpr};
use crate::sigterm::{FiniteUniverse, Theory};

/// A resolved value type. `Var` and `IntAny` only appear where inference
/// left something undetermined.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Bool,
    Unit,
    Int(u64),
    Str,
    Empty,
    Prod(Box<Type>, Box<Type>),
    Arrow(Box<Type>, Box<CompType>),
    Handler(Box<CompType>, Box<CompType>),
    Var(usize),
    /// An integer whose width is not determined.
    IntAny,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CompType {
    pub ty: Type,
    pub dirt: BTreeSet<String>,
}

impl CompType {
    pub fn new(ty: Type, dirt: impl IntoIterator<Item = impl Into<String>>) -> Self {
        CompType {
            ty,
            dirt: dirt.into_iter().map(Into::into).collect(),
        }
    }

    pub fn pure(ty: Type) -> Self {
        CompType {
            ty,
            dirt: BTreeSet::new(),
        }
    }
}

/// The value type corresponding to a universe of parameters or results.
pub fn universe_type(u: &FiniteUniverse) -> Type {
    match u {
        FiniteUniverse::Empty => Type::Empty,
        FiniteUniverse::Unit => Type::Unit,
        FiniteUniverse::Bool => Type::Bool,
        FiniteUniverse::Fin(n) => Type::Int(*n),
        FiniteUniverse::Enum(_) => Type::Str,
        FiniteUniverse::Product(a, b) => {
            Type::Prod(Box::new(universe_type(a)), Box::new(universe_type(b)))
        }
    }
}

impl Type {
    pub fn prod(a: Type, b: Type) -> Type {
        Type::Prod(Box::new(a), Box::new(b))
    }

    pub fn arrow(a: Type, c: CompType) -> Type {
        Type::Arrow(Box::new(a), Box::new(c))
    }

    /// The finite set of values of a first-order type, if it has one.
    pub fn universe(&self) -> Option<FiniteUniverse> {
        Some(match self {
            Type::Bool => FiniteUniverse::Bool,
            Type::Unit => FiniteUniverse::Unit,
            Type::Int(n) => FiniteUniverse::Fin(*n),
            Type::Empty => FiniteUniverse::Empty,
            Type::Prod(a, b) => FiniteUniverse::product(a.universe()?, b.universe()?),
            _ => return None,
        })
    }

    fn fmt_prec(
        &self,
        f: &mut fmt::Formatter<'_>,
        prec: u8,
        names: &BTreeMap<usize, usize>,
    ) -> fmt::Result {
        // 0: arrow level, 1: product operand, 2: atom
        match self {
            Type::Bool => f.write_str("bool"),
            Type::Unit => f.write_str("unit"),
            Type::Int(n) => write!(f, "int({n})"),
            Type::IntAny => f.write_str("int"),
            Type::Str => f.write_str("str"),
            Type::Empty => f.write_str("empty"),
            Type::Var(v) => write!(f, "?{}", names.get(v).copied().unwrap_or(*v)),
            Type::Prod(a, b) => {
                if prec > 0 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 1, names)?;
                f.write_str(" * ")?;
                b.fmt_prec(f, 1, names)?;
                if prec > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Type::Arrow(a, c) => {
                if prec > 0 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 1, names)?;
                f.write_str(" -> ")?;
                c.fmt_with(f, names)?;
                if prec > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Type::Handler(c, d) => {
                if prec > 0 {
                    f.write_str("(")?;
                }
                f.write_str("(")?;
                c.fmt_with(f, names)?;
                f.write_str(") => (")?;
                d.fmt_with(f, names)?;
                f.write_str(")")?;
                if prec > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }

    fn collect_vars(&self, out: &mut BTreeMap<usize, usize>) {
        match self {
            Type::Var(v) => {
                let next = out.len();
                out.entry(*v).or_insert(next);
            }
            Type::Prod(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Type::Arrow(a, c) => {
                a.collect_vars(out);
                c.ty.collect_vars(out);
            }
            Type::Handler(c, d) => {
                c.ty.collect_vars(out);
                d.ty.collect_vars(out);
            }
            _ => {}
        }
    }
}

impl CompType {
    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, names: &BTreeMap<usize, usize>) -> fmt::Result {
        // the value type binds tighter than `!`
        self.ty.fmt_prec(f, 1, names)?;
        f.write_str(" ! {")?;
        for (i, op) in self.dirt.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(op)?;
        }
        f.write_str("}")
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names = BTreeMap::new();
        self.collect_vars(&mut names);
        self.fmt_prec(f, 0, &names)
    }
}

impl fmt::Display for CompType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names = BTreeMap::new();
        self.ty.collect_vars(&mut names);
        self.fmt_with(f, &names)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Ty {
    Bool,
    Unit,
    Int(u64),
    Str,
    Empty,
    Prod(Box<Ty>, Box<Ty>),
    Arrow(Box<Ty>, Box<CTy>),
    Handler(Box<CTy>, Box<CTy>),
    Var(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct CTy {
    ty: Ty,
    dirt: usize,
}

#[derive(Clone, Debug)]
enum TyVar {
    /// `min_int` set: the variable stands for an integer type at least this wide.
    Free {
        min_int: Option<u64>,
    },
    Bound(Ty),
}

#[derive(Clone, Debug)]
struct Flow {
    from: usize,
    handled: BTreeSet<String>,
    to: usize,
}

#[derive(Clone, Copy, Debug)]
enum Prim {
    Fst,
    Snd,
    Not,
}

#[derive(Clone, Debug)]
enum Binding {
    Mono(Ty),
    /// A closed type instantiated afresh at every use.
    Poly(Type),
    Prim(Prim),
}

/// Names of the primitive functions available in every program.
pub const PRIMITIVES: [&str; 3] = ["fst", "snd", "not"];

/// A typing environment of closed, possibly polymorphic, types.
#[derive(Clone, Debug, Default)]
pub struct TypeEnv {
    entries: Vec<(String, Type)>,
}

impl TypeEnv {
    pub fn new() -> Self {
        TypeEnv::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, ty: Type) {
        let name = name.into();
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, ty));
    }

    pub fn get(&self, name: &str) -> Option<&Type> {
        self.entries
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }
}

struct Checker<'a> {
    theory: &'a Theory,
    vars: Vec<TyVar>,
    dirt_parent: Vec<usize>,
    dirt_lower: Vec<BTreeSet<String>>,
    flows: Vec<Flow>,
    scope: Vec<(String, Binding)>,
}

fn mismatch(location: Span, expected: impl fmt::Display, found: impl fmt::Display) -> Error {
    Error::TypeMismatch {
        location,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

impl<'a> Checker<'a> {
    fn new(theory: &'a Theory, env: &TypeEnv) -> Self {
        let mut scope: Vec<(String, Binding)> = vec![
            ("fst".into(), Binding::Prim(Prim::Fst)),
            ("snd".into(), Binding::Prim(Prim::Snd)),
            ("not".into(), Binding::Prim(Prim::Not)),
        ];
        scope.extend(
            env.entries
                .iter()
                .map(|(n, t)| (n.clone(), Binding::Poly(t.clone()))),
        );
        Checker {
            theory,
            vars: Vec::new(),
            dirt_parent: Vec::new(),
            dirt_lower: Vec::new(),
            flows: Vec::new(),
            scope,
        }
    }

    fn fresh(&mut self) -> Ty {
        self.vars.push(TyVar::Free { min_int: None });
        Ty::Var(self.vars.len() - 1)
    }

    fn fresh_int(&mut self, min: u64) -> Ty {
        self.vars.push(TyVar::Free { min_int: Some(min) });
        Ty::Var(self.vars.len() - 1)
    }

    fn fresh_dirt(&mut self) -> usize {
        self.dirt_parent.push(self.dirt_parent.len());
        self.dirt_lower.push(BTreeSet::new());
        self.dirt_parent.len() - 1
    }

    fn find(&mut self, d: usize) -> usize {
        let mut r = d;
        while self.dirt_parent[r] != r {
            r = self.dirt_parent[r];
        }
        let mut d = d;
        while self.dirt_parent[d] != r {
            let next = self.dirt_parent[d];
            self.dirt_parent[d] = r;
            d = next;
        }
        r
    }

    fn union_dirt(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.dirt_parent[b] = a;
            let lower = std::mem::take(&mut self.dirt_lower[b]);
            self.dirt_lower[a].extend(lower);
        }
    }

    fn require(&mut self, d: usize, op: &str) {
        let d = self.find(d);
        self.dirt_lower[d].insert(op.to_string());
    }

    fn flow(&mut self, from: usize, to: usize, handled: BTreeSet<String>) {
        self.flows.push(Flow { from, handled, to });
    }

    fn shallow(&self, t: &Ty) -> Ty {
        let mut t = t.clone();
        while let Ty::Var(v) = t {
            match &self.vars[v] {
                TyVar::Bound(b) => t = b.clone(),
                TyVar::Free { .. } => return t,
            }
        }
        t
    }

    fn occurs(&self, v: usize, t: &Ty) -> bool {
        match self.shallow(t) {
            Ty::Var(w) => v == w,
            Ty::Prod(a, b) => self.occurs(v, &a) || self.occurs(v, &b),
            Ty::Arrow(a, c) => self.occurs(v, &a) || self.occurs(v, &c.ty),
            Ty::Handler(c, d) => self.occurs(v, &c.ty) || self.occurs(v, &d.ty),
            _ => false,
        }
    }

    fn unify(&mut self, at: Span, expected: &Ty, found: &Ty) -> Result<()> {
        if self.try_unify(expected, found).is_err() {
            let e = self.snapshot(expected);
            let mut f = self.snapshot(found).to_string();
            if let (Type::Int(_), Ty::Var(v)) = (&e, self.shallow(found)) {
                if let TyVar::Free { min_int: Some(min) } = self.vars[v] {
                    f = format!("a literal needing int({min})");
                }
            }
            return Err(mismatch(at, e, f));
        }
        Ok(())
    }

    fn try_unify(&mut self, a: &Ty, b: &Ty) -> Result<(), ()> {
        let (a, b) = (self.shallow(a), self.shallow(b));
        match (&a, &b) {
            (Ty::Var(x), Ty::Var(y)) if x == y => Ok(()),
            (Ty::Var(x), Ty::Var(y)) => {
                let (TyVar::Free { min_int: mx }, TyVar::Free { min_int: my }) =
                    (&self.vars[*x], &self.vars[*y])
                else {
                    unreachable!("shallow returns free variables")
                };
                let min = match (mx, my) {
                    (Some(p), Some(q)) => Some(*p.max(q)),
                    (p, q) => p.or(*q),
                };
                self.vars[*y] = TyVar::Free { min_int: min };
                self.vars[*x] = TyVar::Bound(Ty::Var(*y));
                Ok(())
            }
            (Ty::Var(x), other) | (other, Ty::Var(x)) => {
                let TyVar::Free { min_int } = self.vars[*x] else {
                    unreachable!("shallow returns free variables")
                };
                if let Some(min) = min_int {
                    match other {
                        Ty::Int(n) if *n >= min => {}
                        _ => return Err(()),
                    }
                }
                if self.occurs(*x, other) {
                    return Err(());
                }
                self.vars[*x] = TyVar::Bound(other.clone());
                Ok(())
            }
            (Ty::Bool, Ty::Bool)
            | (Ty::Unit, Ty::Unit)
            | (Ty::Str, Ty::Str)
            | (Ty::Empty, Ty::Empty) => Ok(()),
            (Ty::Int(m), Ty::Int(n)) if m == n => Ok(()),
            (Ty::Prod(a1, b1), Ty::Prod(a2, b2)) => {
                self.try_unify(a1, a2)?;
                self.try_unify(b1, b2)
            }
            (Ty::Arrow(a1, c1), Ty::Arrow(a2, c2)) => {
                self.try_unify(a1, a2)?;
                self.try_unify_comp(c1, c2)
            }
            (Ty::Handler(c1, d1), Ty::Handler(c2, d2)) => {
                self.try_unify_comp(c1, c2)?;
                self.try_unify_comp(d1, d2)
            }
            _ => Err(()),
        }
    }

    fn try_unify_comp(&mut self, a: &CTy, b: &CTy) -> Result<(), ()> {
        self.try_unify(&a.ty, &b.ty)?;
        self.union_dirt(a.dirt, b.dirt);
        Ok(())
    }

    /// Least solution of the dirt constraints.
    fn solve(&mut self) -> BTreeMap<usize, BTreeSet<String>> {
        let mut sol: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
        for d in 0..self.dirt_parent.len() {
            let r = self.find(d);
            sol.entry(r)
                .or_default()
                .extend(self.dirt_lower[r].iter().cloned());
        }
        let flows: Vec<(usize, usize, BTreeSet<String>)> = self
            .flows
            .clone()
            .into_iter()
            .map(|f| (self.find(f.from), self.find(f.to), f.handled))
            .collect();
        loop {
            let mut changed = false;
            for (from, to, handled) in &flows {
                let add: Vec<String> = sol[from]
                    .iter()
                    .filter(|op| !handled.contains(*op))
                    .cloned()
                    .collect();
                let target = sol.get_mut(to).expect("every root has a solution");
                for op in add {
                    changed |= target.insert(op);
                }
            }
            if !changed {
                return sol;
            }
        }
    }

    fn resolve(&mut self, t: &Ty, sol: &BTreeMap<usize, BTreeSet<String>>) -> Type {
        match self.shallow(t) {
            Ty::Bool => Type::Bool,
            Ty::Unit => Type::Unit,
            Ty::Int(n) => Type::Int(n),
            Ty::Str => Type::Str,
            Ty::Empty => Type::Empty,
            Ty::Var(v) => match self.vars[v] {
                TyVar::Free { min_int: Some(_) } => Type::IntAny,
                _ => Type::Var(v),
            },
            Ty::Prod(a, b) => Type::prod(self.resolve(&a, sol), self.resolve(&b, sol)),
            Ty::Arrow(a, c) => Type::arrow(self.resolve(&a, sol), self.resolve_comp(&c, sol)),
            Ty::Handler(c, d) => Type::Handler(
                Box::new(self.resolve_comp(&c, sol)),
                Box::new(self.resolve_comp(&d, sol)),
            ),
        }
    }

    fn resolve_comp(&mut self, c: &CTy, sol: &BTreeMap<usize, BTreeSet<String>>) -> CompType {
        let d = self.find(c.dirt);
        CompType {
            ty: self.resolve(&c.ty, sol),
            dirt: sol.get(&d).cloned().unwrap_or_default(),
        }
    }

    /// A rendering of `t` for error messages, using the current dirt solution.
    fn snapshot(&mut self, t: &Ty) -> Type {
        let sol = self.solve();
        self.resolve(t, &sol)
    }

    fn instantiate(&mut self, t: &Type, map: &mut BTreeMap<usize, Ty>) -> Ty {
        match t {
            Type::Bool => Ty::Bool,
            Type::Unit => Ty::Unit,
            Type::Int(n) => Ty::Int(*n),
            Type::Str => Ty::Str,
            Type::Empty => Ty::Empty,
            Type::IntAny => self.fresh_int(1),
            Type::Var(v) => {
                if let Some(t) = map.get(v) {
                    return t.clone();
                }
                let t = self.fresh();
                map.insert(*v, t.clone());
                t
            }
            Type::Prod(a, b) => Ty::Prod(
                Box::new(self.instantiate(a, map)),
                Box::new(self.instantiate(b, map)),
            ),
            Type::Arrow(a, c) => {
                let a = self.instantiate(a, map);
                let c = self.instantiate_comp(c, map);
                Ty::Arrow(Box::new(a), Box::new(c))
            }
            Type::Handler(c, d) => {
                let c = self.instantiate_comp(c, map);
                let d = self.instantiate_comp(d, map);
                Ty::Handler(Box::new(c), Box::new(d))
            }
        }
    }

    fn instantiate_comp(&mut self, c: &CompType, map: &mut BTreeMap<usize, Ty>) -> CTy {
        let ty = self.instantiate(&c.ty, map);
        let dirt = self.fresh_dirt();
        for op in &c.dirt {
            self.require(dirt, op);
        }
        CTy { ty, dirt }
    }

    fn from_type(&mut self, t: &Type) -> Ty {
        self.instantiate(t, &mut BTreeMap::new())
    }

    fn lookup(&mut self, name: &str, at: Span) -> Result<Ty> {
        let binding = self
            .scope
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, b)| b.clone())
            .ok_or_else(|| Error::UnboundVariable {
                name: name.to_string(),
                location: at,
            })?;
        Ok(match binding {
            Binding::Mono(t) => t,
            Binding::Poly(t) => self.from_type(&t),
            Binding::Prim(p) => {
                let dirt = self.fresh_dirt();
                let (arg, res) = match p {
                    Prim::Fst | Prim::Snd => {
                        let (a, b) = (self.fresh(), self.fresh());
                        let res = if matches!(p, Prim::Fst) {
                            a.clone()
                        } else {
                            b.clone()
                        };
                        (Ty::Prod(Box::new(a), Box::new(b)), res)
                    }
                    Prim::Not => (Ty::Bool, Ty::Bool),
                };
                Ty::Arrow(Box::new(arg), Box::new(CTy { ty: res, dirt }))
            }
        })
    }

    fn with_binding<T>(
        &mut self,
        name: &str,
        ty: Ty,
        f: impl FnOnce(&mut Self) -> Result<T>,
    ) -> Result<T> {
        self.scope.push((name.to_string(), Binding::Mono(ty)));
        let r = f(self);
        self.scope.pop();
        r
    }

    fn value(&mut self, v: &ValueExpr) -> Result<Ty> {
        match v {
            ValueExpr::Var(x, at) => self.lookup(x, *at),
            ValueExpr::Bool(..) => Ok(Ty::Bool),
            ValueExpr::Unit(_) => Ok(Ty::Unit),
            ValueExpr::Int(n, _) => Ok(self.fresh_int(n.saturating_add(1))),
            ValueExpr::Str(..) => Ok(Ty::Str),
            ValueExpr::Pair(a, b, _) => {
                let a = self.value(a)?;
                let b = self.value(b)?;
                Ok(Ty::Prod(Box::new(a), Box::new(b)))
            }
            ValueExpr::Add(a, b, _) => {
                let int = self.fresh_int(1);
                let ta = self.value(a)?;
                self.unify(a.span(), &int, &ta)?;
                let tb = self.value(b)?;
                self.unify(b.span(), &int, &tb)?;
                Ok(int)
            }
            ValueExpr::Fun(x, body, _) => {
                let arg = self.fresh();
                let c = self.with_binding(x, arg.clone(), |ck| ck.comp(body))?;
                Ok(Ty::Arrow(Box::new(arg), Box::new(c)))
            }
            ValueExpr::Handler(h, _) => self.handler(h),
        }
    }

    fn handler(&mut self, h: &HandlerExpr) -> Result<Ty> {
        let input = CTy {
            ty: self.fresh(),
            dirt: self.fresh_dirt(),
        };
        let output = CTy {
            ty: self.fresh(),
            dirt: self.fresh_dirt(),
        };
        let r = self.with_binding(&h.ret_var, input.ty.clone(), |ck| ck.comp(&h.ret_body))?;
        self.unify(h.ret_body.span(), &output.ty, &r.ty)?;
        self.flow(r.dirt, output.dirt, BTreeSet::new());
        let mut handled = BTreeSet::new();
        for clause in &h.clauses {
            let decl = self
                .theory
                .op(&clause.op)
                .ok_or_else(|| Error::UnknownOperationAt {
                    name: clause.op.clone(),
                    location: clause.span,
                })?;
            let (p, a) = (universe_type(&decl.param), universe_type(&decl.arity));
            let (p, a) = (self.from_type(&p), self.from_type(&a));
            handled.insert(clause.op.clone());
            self.require(input.dirt, &clause.op);
            let k = Ty::Arrow(Box::new(a), Box::new(output.clone()));
            self.scope.push((clause.param.clone(), Binding::Mono(p)));
            let c = self.with_binding(&clause.kont, k, |ck| ck.comp(&clause.body));
            self.scope.pop();
            let c = c?;
            self.unify(clause.body.span(), &output.ty, &c.ty)?;
            self.flow(c.dirt, output.dirt, BTreeSet::new());
        }
        self.flow(input.dirt, output.dirt, handled);
        Ok(Ty::Handler(Box::new(input), Box::new(output)))
    }

    fn comp(&mut self, c: &CompExpr) -> Result<CTy> {
        match c {
            CompExpr::Return(v, _) => {
                let ty = self.value(v)?;
                Ok(CTy {
                    ty,
                    dirt: self.fresh_dirt(),
                })
            }
            CompExpr::OpCall(op, v, at) => {
                let decl = self
                    .theory
                    .op(op)
                    .ok_or_else(|| Error::UnknownOperationAt {
                        name: op.clone(),
                        location: *at,
                    })?;
                let (p, a) = (universe_type(&decl.param), universe_type(&decl.arity));
                let (p, a) = (self.from_type(&p), self.from_type(&a));
                let tv = self.value(v)?;
                self.unify(v.span(), &p, &tv)?;
                let dirt = self.fresh_dirt();
                self.require(dirt, op);
                Ok(CTy { ty: a, dirt })
            }
            CompExpr::Do(x, c1, c2, _) => {
                let first = self.comp(c1)?;
                let second = self.with_binding(x, first.ty.clone(), |ck| ck.comp(c2))?;
                let dirt = self.fresh_dirt();
                self.flow(first.dirt, dirt, BTreeSet::new());
                self.flow(second.dirt, dirt, BTreeSet::new());
                Ok(CTy {
                    ty: second.ty,
                    dirt,
                })
            }
            CompExpr::If(v, c1, c2, _) => {
                let tv = self.value(v)?;
                self.unify(v.span(), &Ty::Bool, &tv)?;
                let a = self.comp(c1)?;
                let b = self.comp(c2)?;
                self.unify(c2.span(), &a.ty, &b.ty)?;
                let dirt = self.fresh_dirt();
                self.flow(a.dirt, dirt, BTreeSet::new());
                self.flow(b.dirt, dirt, BTreeSet::new());
                Ok(CTy { ty: a.ty, dirt })
            }
            CompExpr::App(f, arg, _) => {
                let tf = self.value(f)?;
                let ta = self.value(arg)?;
                let res = CTy {
                    ty: self.fresh(),
                    dirt: self.fresh_dirt(),
                };
                match self.shallow(&tf) {
                    Ty::Arrow(dom, cod) => {
                        self.unify(arg.span(), &dom, &ta)?;
                        self.unify(f.span(), &res.ty, &cod.ty)?;
                        self.flow(cod.dirt, res.dirt, BTreeSet::new());
                    }
                    Ty::Var(_) => {
                        let want = Ty::Arrow(Box::new(ta), Box::new(res.clone()));
                        self.unify(f.span(), &want, &tf)?;
                    }
                    _ => {
                        let found = self.snapshot(&tf);
                        return Err(mismatch(f.span(), "a function", found));
                    }
                }
                Ok(res)
            }
            CompExpr::WithHandle(h, body, _) => {
                let th = self.value(h)?;
                let tc = self.comp(body)?;
                match self.shallow(&th) {
                    Ty::Handler(input, output) => {
                        self.unify(body.span(), &input.ty, &tc.ty)?;
                        self.flow(tc.dirt, input.dirt, BTreeSet::new());
                        Ok(*output)
                    }
                    Ty::Var(_) => {
                        let output = CTy {
                            ty: self.fresh(),
                            dirt: self.fresh_dirt(),
                        };
                        let want = Ty::Handler(Box::new(tc), Box::new(output.clone()));
                        self.unify(h.span(), &want, &th)?;
                        Ok(output)
                    }
                    _ => {
                        let found = self.snapshot(&th);
                        Err(mismatch(h.span(), "a handler", found))
                    }
                }
            }
        }
    }
}

/// Infers the type of a computation under `env`.
pub fn typecheck_comp(env: &TypeEnv, c: &CompExpr, theory: &Theory) -> Result<CompType> {
    let mut ck = Checker::new(theory, env);
    let t = ck.comp(c)?;
    let sol = ck.solve();
    Ok(ck.resolve_comp(&t, &sol))
}

/// Infers the type of a value under `env`.
pub fn typecheck_value(env: &TypeEnv, v: &ValueExpr, theory: &Theory) -> Result<Type> {
    let mut ck = Checker::new(theory, env);
    let t = ck.value(v)?;
    let sol = ck.solve();
    Ok(ck.resolve(&t, &sol))
}

/// Checks `c` against an expected type: the value types must unify and the
/// inferred dirt must fit inside the expected one.
pub fn check_comp(
    env: &TypeEnv,
    c: &CompExpr,
    expected: &CompType,
    theory: &Theory,
) -> Result<CompType> {
    let mut ck = Checker::new(theory, env);
    let t = ck.comp(c)?;
    let want = ck.from_type(&expected.ty);
    ck.unify(c.span(), &want, &t.ty)?;
    let sol = ck.solve();
    let found = ck.resolve_comp(&t, &sol);
    if !found.dirt.is_subset(&expected.dirt) {
        return Err(mismatch(c.span(), expected, &found));
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::parser::{parse_program, parse_value};
    use crate::sigterm::{builtin_theory, BuiltinTheory};

    fn theory(b: BuiltinTheory) -> Theory {
        builtin_theory(&b).unwrap()
    }

    fn ty(src: &str, t: &Theory) -> Result<CompType> {
        typecheck_comp(&TypeEnv::new(), &parse_program(src).unwrap(), t)
    }

    #[test]
    fn return_is_pure() {
        let t = theory(BuiltinTheory::Exception);
        assert_eq!(ty("return true", &t).unwrap().to_string(), "bool ! {}");
    }

    #[test]
    fn op_call_dirt() {
        let io = theory(BuiltinTheory::Io(
            FiniteUniverse::enumeration(["hi"]).unwrap(),
        ));
        let c = parse_program("print!(\"hi\")").unwrap();
        assert_eq!(
            ty("print!(\"hi\")", &io).unwrap().to_string(),
            "unit ! {print}"
        );
        let err = check_comp(&TypeEnv::new(), &c, &CompType::pure(Type::Unit), &io).unwrap_err();
        assert!(matches!(err, Error::TypeMismatch { .. }), "{err}");
    }

    #[test]
    fn exception_handler_type() {
        let ex = theory(BuiltinTheory::Exception);
        let h =
            parse_value("handler { return x -> return x | abort(_; _) -> return false }").unwrap();
        let t = typecheck_value(&TypeEnv::new(), &h, &ex).unwrap();
        assert_eq!(t.to_string(), "(bool ! {abort}) => (bool ! {})");
    }

    #[test]
    fn increment() {
        let st = theory(BuiltinTheory::SingleState(FiniteUniverse::Fin(10)));
        let t = ty("do x <- get!() in do _ <- put!(x+1) in return x", &st).unwrap();
        assert_eq!(t.to_string(), "int(10) ! {get, put}");
    }

    #[test]
    fn literal_width_is_checked() {
        let st = theory(BuiltinTheory::SingleState(FiniteUniverse::Fin(3)));
        assert!(ty("put!(2)", &st).is_ok());
        let err = ty("put!(3)", &st).unwrap_err();
        assert!(matches!(err, Error::TypeMismatch { .. }));
    }

    #[test]
    fn polymorphic_primitives() {
        let ex = theory(BuiltinTheory::Exception);
        assert_eq!(ty("fst (true, ())", &ex).unwrap().to_string(), "bool ! {}");
        assert_eq!(ty("snd (true, ())", &ex).unwrap().to_string(), "unit ! {}");
        assert_eq!(
            ty("return fun x -> return x", &ex).unwrap().to_string(),
            "(?0 -> ?0 ! {}) ! {}"
        );
    }

    #[test]
    fn errors_are_located() {
        let ex = theory(BuiltinTheory::Exception);
        match ty("if () then return 1 else return 2", &ex).unwrap_err() {
            Error::TypeMismatch {
                location,
                expected,
                found,
            } => {
                assert_eq!((location.line, location.column), (1, 4));
                assert_eq!((expected.as_str(), found.as_str()), ("bool", "unit"));
            }
            e => panic!("{e}"),
        }
        assert!(matches!(
            ty("return y", &ex).unwrap_err(),
            Error::UnboundVariable { .. }
        ));
        assert!(matches!(
            ty("get!()", &ex).unwrap_err(),
            Error::UnknownOperationAt { .. }
        ));
    }

    #[test]
    fn handled_ops_leave_the_dirt() {
        let ch = theory(BuiltinTheory::Choice);
        let t = ty(
            "with handler { return x -> return x | choose(_; k) -> do a <- k true in do b <- k false in return (a, b) } handle choose!()",
            &ch,
        );
        assert!(matches!(t.unwrap_err(), Error::TypeMismatch { .. }));
        let t = ty(
            "with handler { return x -> return x | choose(_; k) -> k true } handle do b <- choose!() in return b",
            &ch,
        )
        .unwrap();
        assert_eq!(t.to_string(), "bool ! {}");
    }

    #[test]
    fn forwarding_keeps_unhandled_ops() {
        let ex = theory(BuiltinTheory::Exception);
        let t = ty("with handler { return x -> return x } handle abort!()", &ex).unwrap();
        assert_eq!(t.to_string(), "empty ! {abort}");
    }
}
