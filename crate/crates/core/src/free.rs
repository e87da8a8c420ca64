//! Free models: trees modulo the congruence generated by a theory's
//! equations, with the monad structure (`eta`, `lift`) on top.
//!
//! Equality of classes is decided by a normalizer where one is known. For
//! other theories a bounded bidirectional rewrite search proves equality and
//! small validating models refute it.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{interpret_term, small_models, FiniteModel};
use crate::sigterm::{BuiltinTheory, FiniteUniverse, Origin, Theory, Tree, Value};

/// Default step bound for the congruence search.
pub const DEFAULT_BUDGET: usize = 10_000;

/// A representative of an element of the free model over `X`.
#[derive(Clone, Debug)]
pub struct FreeElement<X> {
    pub theory: Arc<Theory>,
    pub tree: Tree<X>,
}

impl<X> FreeElement<X> {
    pub fn new(theory: Arc<Theory>, tree: Tree<X>) -> Result<Self> {
        theory.check_tree(&tree)?;
        Ok(FreeElement { theory, tree })
    }

    /// Kleisli lifting: replaces each leaf `x` by `phi(x)`.
    pub fn lift<Y>(
        &self,
        mut phi: impl FnMut(&X) -> Result<FreeElement<Y>>,
    ) -> Result<FreeElement<Y>> {
        let tree = self.tree.try_bind(&mut |x| phi(x).map(|e| e.tree))?;
        Ok(FreeElement {
            theory: self.theory.clone(),
            tree,
        })
    }

    /// `do x <- self in h(x)`.
    pub fn sequence<Y>(
        &self,
        h: impl FnMut(&X) -> Result<FreeElement<Y>>,
    ) -> Result<FreeElement<Y>> {
        self.lift(h)
    }
}

pub fn eta<X>(theory: &Arc<Theory>, x: X) -> FreeElement<X> {
    FreeElement {
        theory: theory.clone(),
        tree: Tree::Return(x),
    }
}

/// `lift(phi)` as a function on representatives.
pub fn lift<X, Y>(phi: impl Fn(&X) -> Option<Tree<Y>>) -> impl Fn(&Tree<X>) -> Result<Tree<Y>>
where
    X: fmt::Display,
{
    move |t| t.try_bind(&mut |x| phi(x).ok_or_else(|| Error::UnboundGenerator(x.to_string())))
}

/// `op(p; \a. return a)`: perform the operation and return its result.
pub fn generic_op(theory: &Arc<Theory>, op: &str, param: Value) -> Result<FreeElement<Value>> {
    let tree = theory.op_with(op, param, |a| Tree::Return(a.clone()))?;
    Ok(FreeElement {
        theory: theory.clone(),
        tree,
    })
}

/// The strategies used to pick canonical representatives.
#[derive(Clone, Debug, PartialEq)]
pub enum Normalizer {
    /// No equations: trees are their own normal forms.
    Identity,
    SingleState(FiniteUniverse),
    Semilattice,
    Singleton,
}

pub fn normalizer(theory: &Theory) -> Option<Normalizer> {
    match &theory.origin {
        Origin::Builtin(BuiltinTheory::SingleState(s)) => Some(Normalizer::SingleState(s.clone())),
        Origin::Builtin(BuiltinTheory::Semilattice) => Some(Normalizer::Semilattice),
        Origin::Builtin(BuiltinTheory::Singleton) => Some(Normalizer::Singleton),
        _ if theory.eqs.is_empty() => Some(Normalizer::Identity),
        _ => None,
    }
}

/// The canonical representative of `t`'s class.
pub fn normalize<X: Clone + Ord>(theory: &Theory, t: &Tree<X>) -> Result<Tree<X>> {
    theory.check_tree(t)?;
    match normalizer(theory).ok_or_else(|| Error::NoNormalizer(theory.name.clone()))? {
        Normalizer::Identity => Ok(t.clone()),
        Normalizer::SingleState(states) => Ok(normal_form_in(&states, t)?.to_tree()),
        Normalizer::Semilattice => {
            let mut leaves = BTreeSet::new();
            for node in t.op_nodes() {
                if node.op != "bot" && node.op != "join" {
                    return Err(Error::UnknownOperation(node.op.clone()));
                }
            }
            leaves.extend(t.leaves().into_iter().cloned());
            let mut it = leaves.into_iter().rev();
            Ok(match it.next() {
                None => Tree::node("bot", Value::Unit, vec![]),
                Some(last) => it.fold(Tree::Return(last), |acc, x| {
                    Tree::node("join", Value::Unit, vec![Tree::Return(x), acc])
                }),
            })
        }
        Normalizer::Singleton => Ok(Tree::node("star", Value::Unit, vec![])),
    }
}

/// `get((); \s. put(f(s); \_. return g(s)))`, stored as tables over the
/// enumeration of `S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateNormalForm<X> {
    pub states: FiniteUniverse,
    pub f: Vec<Value>,
    pub g: Vec<X>,
}

impl<X: Clone> StateNormalForm<X> {
    /// `(f(s), g(s))`.
    pub fn at(&self, s: &Value) -> Option<(Value, X)> {
        let i = self.states.index_of(s)?;
        Some((self.f[i].clone(), self.g[i].clone()))
    }

    pub fn to_tree(&self) -> Tree<X> {
        Tree::node(
            "get",
            Value::Unit,
            self.f
                .iter()
                .zip(&self.g)
                .map(|(f, g)| Tree::node("put", f.clone(), vec![Tree::Return(g.clone())]))
                .collect(),
        )
    }
}

/// Runs a single-state tree from `s`, i.e. its image in `S -> S x X`.
fn run_state<'t, X>(states: &FiniteUniverse, t: &'t Tree<X>, s: Value) -> Result<(Value, &'t X)> {
    let mut state = s;
    let mut cur = t;
    loop {
        match cur {
            Tree::Return(x) => return Ok((state, x)),
            Tree::Op(node) => match node.op.as_str() {
                "get" => {
                    let i = states.check(&state)?;
                    cur = node
                        .kont
                        .get(i)
                        .ok_or_else(|| Error::IncompleteContinuation {
                            op: "get".into(),
                            missing: state.to_string(),
                        })?;
                }
                "put" => {
                    states.check(&node.param)?;
                    state = node.param.clone();
                    cur = node
                        .kont
                        .first()
                        .ok_or_else(|| Error::IncompleteContinuation {
                            op: "put".into(),
                            missing: "()".into(),
                        })?;
                }
                other => return Err(Error::UnknownOperation(other.to_string())),
            },
        }
    }
}

fn normal_form_in<X: Clone>(states: &FiniteUniverse, t: &Tree<X>) -> Result<StateNormalForm<X>> {
    if states.is_empty() {
        return Err(Error::EmptyStateUniverse);
    }
    let mut f = Vec::with_capacity(states.size());
    let mut g = Vec::with_capacity(states.size());
    for s in states.elements() {
        let (s2, x) = run_state(states, t, s)?;
        f.push(s2);
        g.push(x.clone());
    }
    Ok(StateNormalForm {
        states: states.clone(),
        f,
        g,
    })
}

/// The unique `(f, g)` with `t ~ get((); \s. put(f(s); \_. return g(s)))`.
pub fn state_normal_form<X: Clone>(theory: &Theory, t: &Tree<X>) -> Result<StateNormalForm<X>> {
    match &theory.origin {
        Origin::Builtin(BuiltinTheory::SingleState(s)) => {
            theory.check_tree(t)?;
            normal_form_in(s, t)
        }
        _ => Err(Error::TheoryMismatch(
            "single-state".into(),
            theory.name.clone(),
        )),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equality {
    Equal,
    Distinct,
    Unknown,
}

impl fmt::Display for Equality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Equality::Equal => "Equal",
            Equality::Distinct => "Distinct",
            Equality::Unknown => "Unknown",
        })
    }
}

/// One orientation of an equation instance. Leaves are pattern variables.
#[derive(Clone, Debug)]
struct Rule {
    pattern: Tree<Value>,
    replacement: Tree<Value>,
    /// Variables of the replacement that the pattern does not bind.
    unbound: Vec<Value>,
}

/// Decides `~_T` for one theory. Caches rewrite rules and the stable of
/// refuting models so repeated queries stay cheap.
pub struct Congruence {
    theory: Arc<Theory>,
    budget: usize,
    normalizer: Option<Normalizer>,
    rules: Vec<Rule>,
    refuters: Option<Vec<FiniteModel>>,
}

/// Carrier bound and candidate-space cap for the refuting model stable.
const REFUTER_CARRIER: u64 = 3;
const REFUTER_CAP: usize = 5_000;
const MAX_VALUATIONS: usize = 50_000;

impl Congruence {
    pub fn new(theory: Arc<Theory>, budget: usize) -> Self {
        let normalizer = normalizer(&theory);
        let rules = if normalizer.is_some() {
            Vec::new()
        } else {
            rules_of(&theory)
        };
        Congruence {
            theory,
            budget,
            normalizer,
            rules,
            refuters: None,
        }
    }

    pub fn theory(&self) -> &Arc<Theory> {
        &self.theory
    }

    pub fn equal<X>(&mut self, t1: &Tree<X>, t2: &Tree<X>) -> Equality
    where
        X: Clone + Ord + Hash + fmt::Display,
    {
        if t1 == t2 {
            return Equality::Equal;
        }
        if self.normalizer.is_some() {
            return match (normalize(&self.theory, t1), normalize(&self.theory, t2)) {
                (Ok(a), Ok(b)) if a == b => Equality::Equal,
                (Ok(_), Ok(_)) => Equality::Distinct,
                _ => Equality::Unknown,
            };
        }
        if self.refutes(t1, t2) {
            return Equality::Distinct;
        }
        self.search(t1, t2)
    }

    fn refutes<X>(&mut self, t1: &Tree<X>, t2: &Tree<X>) -> bool
    where
        X: Clone + Ord + fmt::Display,
    {
        let theory = self.theory.clone();
        let models = self
            .refuters
            .get_or_insert_with(|| small_models(&theory, REFUTER_CARRIER, REFUTER_CAP));
        let gens: Vec<X> = t1
            .leaves()
            .into_iter()
            .chain(t2.leaves())
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        for m in models.iter() {
            let elems = m.carrier().enumerate();
            let n = elems.len();
            let Some(total) = (0..gens.len()).try_fold(1usize, |acc, _| acc.checked_mul(n)) else {
                continue;
            };
            if total > MAX_VALUATIONS {
                continue;
            }
            for row in 0..total {
                let mut rest = row;
                let mut assign = vec![0usize; gens.len()];
                for slot in assign.iter_mut().rev() {
                    *slot = rest % n;
                    rest /= n;
                }
                let val = |x: &X| {
                    let i = gens.binary_search(x).ok()?;
                    Some(elems[assign[i]].clone())
                };
                match (interpret_term(m, t1, &val), interpret_term(m, t2, &val)) {
                    (Ok(a), Ok(b)) if a != b => return true,
                    _ => {}
                }
            }
        }
        false
    }

    fn search<X>(&self, t1: &Tree<X>, t2: &Tree<X>) -> Equality
    where
        X: Clone + Hash + Eq,
    {
        let mut fillers: Vec<Tree<X>> = Vec::new();
        for x in t1.leaves().into_iter().chain(t2.leaves()) {
            let leaf = Tree::Return(x.clone());
            if !fillers.contains(&leaf) {
                fillers.push(leaf);
            }
        }
        let max_size = 4 * t1.size().max(t2.size()) + 16;
        let mut seen: [HashMap<Tree<X>, ()>; 2] = [HashMap::new(), HashMap::new()];
        let mut frontier: [VecDeque<Tree<X>>; 2] = [VecDeque::new(), VecDeque::new()];
        seen[0].insert(t1.clone(), ());
        seen[1].insert(t2.clone(), ());
        frontier[0].push_back(t1.clone());
        frontier[1].push_back(t2.clone());
        let mut steps = 0;
        let mut neighbours = Vec::new();
        while steps < self.budget {
            let side = match (frontier[0].is_empty(), frontier[1].is_empty()) {
                (true, true) => break,
                (false, true) => 0,
                (true, false) => 1,
                (false, false) => usize::from(frontier[1].len() < frontier[0].len()),
            };
            let t = frontier[side].pop_front().expect("nonempty frontier");
            steps += 1;
            neighbours.clear();
            self.rewrites(&t, &fillers, &mut neighbours);
            for n in neighbours.drain(..) {
                if n.size() > max_size {
                    continue;
                }
                if seen[1 - side].contains_key(&n) {
                    return Equality::Equal;
                }
                if seen[side].insert(n.clone(), ()).is_none() {
                    frontier[side].push_back(n);
                }
            }
        }
        Equality::Unknown
    }

    /// Every tree reachable from `t` by one rule application at one position.
    fn rewrites<X: Clone + Eq>(&self, t: &Tree<X>, fillers: &[Tree<X>], out: &mut Vec<Tree<X>>) {
        for rule in &self.rules {
            let mut binds = Vec::new();
            if match_pattern(&rule.pattern, t, &mut binds) {
                instantiate_all(rule, &binds, fillers, out);
            }
        }
        if let Tree::Op(node) = t {
            for (i, child) in node.kont.iter().enumerate() {
                let mut sub = Vec::new();
                self.rewrites(child, fillers, &mut sub);
                for c in sub {
                    let mut kont = node.kont.clone();
                    kont[i] = c;
                    out.push(Tree::node(node.op.clone(), node.param.clone(), kont));
                }
            }
        }
    }
}

fn pattern_vars(t: &Tree<Value>) -> BTreeSet<Value> {
    t.leaves().into_iter().cloned().collect()
}

fn rules_of(theory: &Theory) -> Vec<Rule> {
    let mut rules = Vec::new();
    for eq in &theory.eqs {
        for (_, lhs, rhs) in eq.instances() {
            for (pattern, replacement) in [(lhs.clone(), rhs.clone()), (rhs, lhs)] {
                if pattern == replacement {
                    continue;
                }
                let bound = pattern_vars(&pattern);
                let unbound = pattern_vars(&replacement)
                    .difference(&bound)
                    .cloned()
                    .collect();
                rules.push(Rule {
                    pattern,
                    replacement,
                    unbound,
                });
            }
        }
    }
    rules
}

fn match_pattern<X: Clone + Eq>(
    pattern: &Tree<Value>,
    t: &Tree<X>,
    binds: &mut Vec<(Value, Tree<X>)>,
) -> bool {
    match pattern {
        Tree::Return(v) => match binds.iter().find(|(k, _)| k == v) {
            Some((_, bound)) => bound == t,
            None => {
                binds.push((v.clone(), t.clone()));
                true
            }
        },
        Tree::Op(p) => match t {
            Tree::Op(n) if n.op == p.op && n.param == p.param && n.kont.len() == p.kont.len() => p
                .kont
                .iter()
                .zip(&n.kont)
                .all(|(pk, nk)| match_pattern(pk, nk, binds)),
            _ => false,
        },
    }
}

/// Instantiates the replacement; unbound variables range over `fillers`.
fn instantiate_all<X: Clone + Eq>(
    rule: &Rule,
    binds: &[(Value, Tree<X>)],
    fillers: &[Tree<X>],
    out: &mut Vec<Tree<X>>,
) {
    let choices = if rule.unbound.is_empty() {
        1
    } else {
        fillers.len().pow(rule.unbound.len() as u32)
    };
    for row in 0..choices {
        let mut env: Vec<(Value, Tree<X>)> = binds.to_vec();
        let mut rest = row;
        for v in &rule.unbound {
            env.push((v.clone(), fillers[rest % fillers.len()].clone()));
            rest /= fillers.len();
        }
        let t = rule.replacement.try_bind(&mut |v| {
            env.iter()
                .find(|(k, _)| k == v)
                .map(|(_, t)| t.clone())
                .ok_or(())
        });
        if let Ok(t) = t {
            out.push(t);
        }
    }
}

/// `tree_equal_modulo` as a one-shot query.
pub fn tree_equal_modulo<X>(
    theory: &Arc<Theory>,
    t1: &Tree<X>,
    t2: &Tree<X>,
    budget: usize,
) -> Equality
where
    X: Clone + Ord + Hash + fmt::Display,
{
    Congruence::new(theory.clone(), budget).equal(t1, t2)
}

/// All trees of depth at most `depth` over `generators`, every parameter of
/// every operation included. Grows very fast; keep the inputs tiny.
pub fn all_trees<X: Clone>(theory: &Theory, generators: &[X], depth: usize) -> Vec<Tree<X>> {
    let mut level: Vec<Tree<X>> = generators.iter().cloned().map(Tree::Return).collect();
    for _ in 0..depth {
        let mut next: Vec<Tree<X>> = generators.iter().cloned().map(Tree::Return).collect();
        for op in &theory.ops {
            let k = op.arity.size();
            let Some(combos) = (0..k).try_fold(1usize, |acc, _| acc.checked_mul(level.len()))
            else {
                continue;
            };
            for p in op.param.elements() {
                for row in 0..combos {
                    let mut rest = row;
                    let mut kont = Vec::with_capacity(k);
                    let mut picks = vec![0; k];
                    for slot in picks.iter_mut().rev() {
                        *slot = rest % level.len();
                        rest /= level.len();
                    }
                    kont.extend(picks.iter().map(|&i| level[i].clone()));
                    next.push(Tree::node(op.name.clone(), p.clone(), kont));
                }
            }
        }
        level = next;
    }
    level
}
