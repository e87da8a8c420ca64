//! Comodels: the outside world as a cointerpretation. Each operation
//! becomes a map `P x W -> A x W`, and running a tree threads one world value
//! through the cooperations along a single path.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::free::FreeElement;
use crate::sigterm::{FiniteUniverse, Theory, Tree, Value};

/// The set of worlds. Only enumerable spaces can be validated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WorldSpace {
    Universe(FiniteUniverse),
    /// Sequences over `alphabet` of length at most `max_len`.
    Transcripts {
        alphabet: FiniteUniverse,
        max_len: usize,
    },
    Product(Box<WorldSpace>, Box<WorldSpace>),
    /// Membership is unchecked and enumeration unavailable.
    Unbounded(String),
}

const MAX_WORLDS: usize = 1 << 20;

impl WorldSpace {
    pub fn contains(&self, w: &Value) -> bool {
        match (self, w) {
            (WorldSpace::Universe(u), w) => u.contains(w),
            (WorldSpace::Transcripts { alphabet, max_len }, Value::Seq(items)) => {
                items.len() <= *max_len && items.iter().all(|v| alphabet.contains(v))
            }
            (WorldSpace::Product(l, r), Value::Pair(a, b)) => l.contains(a) && r.contains(b),
            (WorldSpace::Unbounded(_), _) => true,
            _ => false,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            WorldSpace::Universe(u) => u.is_empty(),
            WorldSpace::Transcripts { .. } | WorldSpace::Unbounded(_) => false,
            WorldSpace::Product(l, r) => l.is_empty() || r.is_empty(),
        }
    }

    pub fn enumerate(&self) -> Result<Vec<Value>> {
        let worlds = match self {
            WorldSpace::Universe(u) => {
                if u.size() > MAX_WORLDS {
                    return Err(Error::NonEnumerableWorld);
                }
                u.enumerate()
            }
            WorldSpace::Transcripts { alphabet, max_len } => {
                let letters = alphabet.enumerate();
                let mut all = vec![Vec::new()];
                let mut layer = vec![Vec::new()];
                for _ in 0..*max_len {
                    let mut next = Vec::new();
                    for prefix in &layer {
                        for l in &letters {
                            let mut w: Vec<Value> = prefix.clone();
                            w.push(l.clone());
                            next.push(w);
                        }
                    }
                    all.extend(next.iter().cloned());
                    if all.len() > MAX_WORLDS {
                        return Err(Error::NonEnumerableWorld);
                    }
                    layer = next;
                }
                all.into_iter().map(Value::Seq).collect()
            }
            WorldSpace::Product(l, r) => {
                let (ls, rs) = (l.enumerate()?, r.enumerate()?);
                if ls.len().saturating_mul(rs.len()) > MAX_WORLDS {
                    return Err(Error::NonEnumerableWorld);
                }
                ls.iter()
                    .flat_map(|a| rs.iter().map(move |b| Value::pair(a.clone(), b.clone())))
                    .collect()
            }
            WorldSpace::Unbounded(_) => return Err(Error::NonEnumerableWorld),
        };
        Ok(worlds)
    }
}

impl fmt::Display for WorldSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorldSpace::Universe(u) => write!(f, "{u}"),
            WorldSpace::Transcripts { alphabet, max_len } => {
                write!(f, "[{alphabet}; <= {max_len}]")
            }
            WorldSpace::Product(l, r) => write!(f, "({l}) * ({r})"),
            WorldSpace::Unbounded(d) => f.write_str(d),
        }
    }
}

type CoopFn = Arc<dyn Fn(&Value, &Value) -> Option<(Value, Value)> + Send + Sync>;

/// A cointerpretation covering some of the theory's operations.
#[derive(Clone)]
pub struct Cointerpretation {
    theory: Arc<Theory>,
    world: WorldSpace,
    coops: Vec<(String, CoopFn)>,
}

impl fmt::Debug for Cointerpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Cointerpretation")
            .field("theory", &self.theory.name)
            .field("world", &self.world)
            .field(
                "coops",
                &self.coops.iter().map(|(n, _)| n).collect::<Vec<_>>(),
            )
            .finish()
    }
}

impl Cointerpretation {
    pub fn new(theory: Arc<Theory>, world: WorldSpace) -> Self {
        Cointerpretation {
            theory,
            world,
            coops: Vec::new(),
        }
    }

    pub fn theory(&self) -> &Arc<Theory> {
        &self.theory
    }

    pub fn world(&self) -> &WorldSpace {
        &self.world
    }

    /// Adds a cooperation. On an enumerable world it is checked total over
    /// `P x W` with results in `A x W`.
    pub fn with_coop<F>(mut self, op: &str, f: F) -> Result<Self>
    where
        F: Fn(&Value, &Value) -> Option<(Value, Value)> + Send + Sync + 'static,
    {
        let decl = self.theory.op_checked(op)?.clone();
        if decl.arity.is_empty() && !self.world.is_empty() {
            return Err(Error::ImpossibleCooperation(op.to_string()));
        }
        if self.coops.iter().any(|(n, _)| n == op) {
            return Err(Error::Invalid(format!("duplicate cooperation for {op}")));
        }
        if let Ok(worlds) = self.world.enumerate() {
            for p in decl.param.elements() {
                for w in &worlds {
                    match f(&p, w) {
                        Some((a, w2)) if decl.arity.contains(&a) && self.world.contains(&w2) => {}
                        _ => {
                            return Err(Error::IncompleteTable {
                                op: op.to_string(),
                                entry: format!("({p}; {w})"),
                            })
                        }
                    }
                }
            }
        }
        let world = self.world.clone();
        let checked: CoopFn = Arc::new(move |p: &Value, w: &Value| {
            let (a, w2) = f(p, w)?;
            (decl.arity.contains(&a) && world.contains(&w2)).then_some((a, w2))
        });
        self.coops.push((op.to_string(), checked));
        Ok(self)
    }

    /// Builds cooperations from explicit rows `(op, param, world, result, world')`.
    pub fn from_table(
        theory: Arc<Theory>,
        world: WorldSpace,
        rows: impl IntoIterator<Item = (String, Value, Value, Value, Value)>,
    ) -> Result<Self> {
        let mut by_op: Vec<(String, Vec<(Value, Value, Value, Value)>)> = Vec::new();
        for (op, p, w, a, w2) in rows {
            let decl = theory.op_checked(&op)?;
            if !decl.param.contains(&p) {
                return Err(Error::ParameterOutOfUniverse {
                    op,
                    param: p.to_string(),
                    universe: decl.param.to_string(),
                });
            }
            match by_op.iter_mut().find(|(n, _)| *n == op) {
                Some((_, entries)) => {
                    if let Some(prev) = entries.iter().find(|e| e.0 == p && e.1 == w) {
                        if (&prev.2, &prev.3) != (&a, &w2) {
                            return Err(Error::Invalid(format!(
                                "conflicting entries for {op}({p}; {w})"
                            )));
                        }
                        continue;
                    }
                    entries.push((p, w, a, w2));
                }
                None => by_op.push((op, vec![(p, w, a, w2)])),
            }
        }
        let mut c = Cointerpretation::new(theory, world);
        for (op, entries) in by_op {
            c = c.with_coop(&op, move |p, w| {
                entries
                    .iter()
                    .find(|e| &e.0 == p && &e.1 == w)
                    .map(|e| (e.2.clone(), e.3.clone()))
            })?;
        }
        Ok(c)
    }

    pub fn covers(&self, op: &str) -> bool {
        self.coops.iter().any(|(n, _)| n == op)
    }

    pub fn covered(&self) -> impl Iterator<Item = &str> {
        self.coops.iter().map(|(n, _)| n.as_str())
    }

    fn coop(&self, op: &str) -> Option<&CoopFn> {
        self.coops.iter().find(|(n, _)| n == op).map(|(_, f)| f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome<X> {
    Done {
        value: X,
        world: Value,
    },
    /// The world has no cooperation for `op` (or could not answer it).
    Stuck {
        op: String,
        param: Value,
        world: Value,
    },
}

impl<X: fmt::Display> fmt::Display for RunOutcome<X> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunOutcome::Done { value, world } => write!(f, "{value} @ {world}"),
            RunOutcome::Stuck { op, .. } => write!(f, "unhandled toplevel operation: {op}"),
        }
    }
}

/// Runs `t` from world `w0`, also returning the number of cooperation steps.
pub fn run_counted<X: Clone>(
    w0: &Value,
    t: &Tree<X>,
    c: &Cointerpretation,
) -> (RunOutcome<X>, usize) {
    let mut world = w0.clone();
    let mut cur = t;
    let mut steps = 0;
    loop {
        match cur {
            Tree::Return(x) => {
                return (
                    RunOutcome::Done {
                        value: x.clone(),
                        world,
                    },
                    steps,
                )
            }
            Tree::Op(node) => {
                let stuck = || RunOutcome::Stuck {
                    op: node.op.clone(),
                    param: node.param.clone(),
                    world: world.clone(),
                };
                let Some(coop) = c.coop(&node.op) else {
                    return (stuck(), steps);
                };
                let Some((a, w2)) = coop(&node.param, &world) else {
                    return (stuck(), steps);
                };
                let Some(next) = c
                    .theory
                    .op(&node.op)
                    .and_then(|d| d.arity.index_of(&a))
                    .and_then(|i| node.kont.get(i))
                else {
                    return (stuck(), steps);
                };
                steps += 1;
                world = w2;
                cur = next;
            }
        }
    }
}

pub fn cointerpret_tree<X: Clone>(w0: &Value, t: &Tree<X>, c: &Cointerpretation) -> RunOutcome<X> {
    run_counted(w0, t, c).0
}

/// Runs a computation in the world `w0`: the tensor of the free model with
/// the comodel, read operationally.
pub fn tensor_run<X: Clone>(m: &FreeElement<X>, w0: &Value, c: &Cointerpretation) -> RunOutcome<X> {
    cointerpret_tree(w0, &m.tree, c)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComodelVerdict {
    Valid,
    Violated {
        equation: String,
        param: Value,
        world: Value,
    },
}

impl fmt::Display for ComodelVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComodelVerdict::Valid => f.write_str("Valid"),
            ComodelVerdict::Violated {
                equation,
                param,
                world,
            } => {
                write!(f, "Violated {equation} at param={param}, world={world}")
            }
        }
    }
}

/// Checks every equation instance at every world; both sides must produce
/// the same generator and the same final world.
pub fn validate_comodel(c: &Cointerpretation) -> Result<ComodelVerdict> {
    let instances: Vec<_> = c
        .theory
        .eqs
        .iter()
        .map(|eq| (eq.name.clone(), eq.instances()))
        .collect();
    for (_, insts) in &instances {
        for (_, l, r) in insts {
            for node in l.op_nodes().into_iter().chain(r.op_nodes()) {
                if !c.covers(&node.op) {
                    return Err(Error::UncoveredOperation(node.op.clone()));
                }
            }
        }
    }
    let worlds = c.world.enumerate()?;
    for (name, insts) in instances {
        for (p, l, r) in insts {
            for w in &worlds {
                if cointerpret_tree(w, &l, c) != cointerpret_tree(w, &r, c) {
                    return Ok(ComodelVerdict::Violated {
                        equation: name,
                        param: p,
                        world: w.clone(),
                    });
                }
            }
        }
    }
    Ok(ComodelVerdict::Valid)
}

/// The state set of a theory with `get : unit ~> S` and `put : S ~> unit`.
fn single_state_universe(theory: &Theory) -> Result<FiniteUniverse> {
    match (theory.op("get"), theory.op("put")) {
        (Some(get), Some(put))
            if get.param == FiniteUniverse::Unit
                && put.arity == FiniteUniverse::Unit
                && get.arity == put.param =>
        {
            Ok(get.arity.clone())
        }
        _ => Err(Error::TheoryMismatch(
            "single-state".into(),
            theory.name.clone(),
        )),
    }
}

/// The alphabet of a theory with `print : S ~> unit`.
fn io_alphabet(theory: &Theory) -> Result<FiniteUniverse> {
    match theory.op("print") {
        Some(print) if print.arity == FiniteUniverse::Unit => Ok(print.param.clone()),
        _ => Err(Error::TheoryMismatch("io".into(), theory.name.clone())),
    }
}

/// The memory cell itself: `W = S`, `get w = (w, w)`, `put (s, w) = ((), s)`.
pub fn state_comodel(theory: Arc<Theory>) -> Result<Cointerpretation> {
    let s = single_state_universe(&theory)?;
    Cointerpretation::new(theory, WorldSpace::Universe(s))
        .with_coop("get", |_, w| Some((w.clone(), w.clone())))?
        .with_coop("put", |s, _| Some((Value::Unit, s.clone())))
}

fn append(w: &Value, s: &Value, max_len: usize) -> Option<Value> {
    let Value::Seq(items) = w else { return None };
    let mut items = items.clone();
    // output past the bound is dropped
    if items.len() < max_len {
        items.push(s.clone());
    }
    Some(Value::Seq(items))
}

/// Printing appends to a transcript of at most `max_len` entries. `read`
/// is not covered.
pub fn transcript_comodel(theory: Arc<Theory>, max_len: usize) -> Result<Cointerpretation> {
    let alphabet = io_alphabet(&theory)?;
    Cointerpretation::new(theory, WorldSpace::Transcripts { alphabet, max_len })
        .with_coop("print", move |s, w| {
            Some((Value::Unit, append(w, s, max_len)?))
        })
}

/// Full I/O: the world is `(transcript, cursor)`; `read` returns
/// `input[cursor]` and advances the cursor, wrapping around at the end.
pub fn io_comodel(
    theory: Arc<Theory>,
    max_len: usize,
    input: Vec<Value>,
) -> Result<Cointerpretation> {
    let alphabet = io_alphabet(&theory)?;
    match theory.op("read") {
        Some(read) if read.param == FiniteUniverse::Unit && read.arity == alphabet => {}
        _ => return Err(Error::TheoryMismatch("io".into(), theory.name.clone())),
    }
    if input.is_empty() {
        return Err(Error::Invalid("input sequence must be nonempty".into()));
    }
    if let Some(v) = input.iter().find(|v| !alphabet.contains(v)) {
        return Err(Error::NotInUniverse(v.to_string(), alphabet.to_string()));
    }
    let world = WorldSpace::Product(
        Box::new(WorldSpace::Transcripts { alphabet, max_len }),
        Box::new(WorldSpace::Universe(
            FiniteUniverse::Fin(input.len() as u64),
        )),
    );
    let len = input.len() as u64;
    Cointerpretation::new(theory, world)
        .with_coop("print", move |s, w| {
            let (out, cursor) = w.as_pair()?;
            Some((
                Value::Unit,
                Value::pair(append(out, s, max_len)?, cursor.clone()),
            ))
        })?
        .with_coop("read", move |_, w| {
            let (out, cursor) = w.as_pair()?;
            let i = cursor.as_int()?;
            let v = input.get(i as usize)?.clone();
            Some((v, Value::pair(out.clone(), Value::Int((i + 1) % len))))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigterm::{builtin_theory, BuiltinTheory};

    fn theory(key: BuiltinTheory) -> Arc<Theory> {
        Arc::new(builtin_theory(&key).unwrap())
    }

    fn state(n: u64) -> Arc<Theory> {
        theory(BuiltinTheory::SingleState(FiniteUniverse::Fin(n)))
    }

    #[test]
    fn leaf_rule() {
        let c = state_comodel(state(2)).unwrap();
        assert_eq!(
            cointerpret_tree(&Value::Int(1), &Tree::Return(true), &c),
            RunOutcome::Done {
                value: true,
                world: Value::Int(1)
            }
        );
    }

    #[test]
    fn increment_runs_to_five_at_six() {
        let c = state_comodel(state(10)).unwrap();
        let t = Tree::node(
            "get",
            Value::Unit,
            (0..10)
                .map(|s| Tree::node("put", Value::Int((s + 1) % 10), vec![Tree::Return(s)]))
                .collect(),
        );
        assert_eq!(
            cointerpret_tree(&Value::Int(5), &t, &c),
            RunOutcome::Done {
                value: 5,
                world: Value::Int(6)
            }
        );
        assert_eq!(run_counted(&Value::Int(5), &t, &c).1, 2);
    }

    #[test]
    fn abort_gets_stuck() {
        let ex = theory(BuiltinTheory::Exception);
        let c = Cointerpretation::new(ex.clone(), WorldSpace::Universe(FiniteUniverse::Fin(2)));
        let t: Tree<Value> = Tree::node("abort", Value::Unit, vec![]);
        let out = cointerpret_tree(&Value::Int(1), &t, &c);
        assert_eq!(
            out,
            RunOutcome::Stuck {
                op: "abort".into(),
                param: Value::Unit,
                world: Value::Int(1)
            }
        );
        assert_eq!(out.to_string(), "unhandled toplevel operation: abort");
    }

    #[test]
    fn no_cooperation_for_abort() {
        let ex = theory(BuiltinTheory::Exception);
        let c = Cointerpretation::new(ex.clone(), WorldSpace::Universe(FiniteUniverse::Fin(1)));
        assert_eq!(
            c.with_coop("abort", |_, w| Some((Value::Unit, w.clone())))
                .unwrap_err(),
            Error::ImpossibleCooperation("abort".into())
        );
        // the empty world is the one exception
        let c = Cointerpretation::new(ex, WorldSpace::Universe(FiniteUniverse::Empty));
        assert!(c.with_coop("abort", |_, _| None).is_ok());
    }

    #[test]
    fn state_comodel_is_valid() {
        for n in 1..=3 {
            let c = state_comodel(state(n)).unwrap();
            assert_eq!(validate_comodel(&c).unwrap(), ComodelVerdict::Valid);
        }
    }

    #[test]
    fn broken_get_violates_get_put() {
        let c = Cointerpretation::new(state(2), WorldSpace::Universe(FiniteUniverse::Fin(2)))
            .with_coop("get", |_, w| Some((Value::Int(0), w.clone())))
            .unwrap()
            .with_coop("put", |s, _| Some((Value::Unit, s.clone())))
            .unwrap();
        assert_eq!(
            validate_comodel(&c).unwrap(),
            ComodelVerdict::Violated {
                equation: "get-put".into(),
                param: Value::Unit,
                world: Value::Int(1)
            }
        );
    }

    #[test]
    fn alternating_choice_stream() {
        let c = Cointerpretation::new(
            theory(BuiltinTheory::Choice),
            WorldSpace::Universe(FiniteUniverse::Fin(2)),
        )
        .with_coop("choose", |_, w| {
            let i = w.as_int()?;
            Some((Value::Bool(i == 1), Value::Int(1 - i)))
        })
        .unwrap();
        match validate_comodel(&c).unwrap() {
            ComodelVerdict::Violated {
                equation, world, ..
            } => {
                assert_eq!(equation, "comm");
                assert_eq!(world, Value::Int(0));
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn uncovered_and_unbounded() {
        let c = Cointerpretation::new(state(2), WorldSpace::Universe(FiniteUniverse::Fin(2)))
            .with_coop("get", |_, w| Some((w.clone(), w.clone())))
            .unwrap();
        assert_eq!(
            validate_comodel(&c).unwrap_err(),
            Error::UncoveredOperation("put".into())
        );
        let c = Cointerpretation::new(state(2), WorldSpace::Unbounded("naturals".into()))
            .with_coop("get", |_, _| Some((Value::Int(0), Value::Int(7))))
            .unwrap()
            .with_coop("put", |_, w| Some((Value::Unit, w.clone())))
            .unwrap();
        assert_eq!(validate_comodel(&c).unwrap_err(), Error::NonEnumerableWorld);
    }

    #[test]
    fn partial_table_rejected() {
        let rows = vec![(
            "get".to_string(),
            Value::Unit,
            Value::Int(0),
            Value::Int(0),
            Value::Int(0),
        )];
        let err = Cointerpretation::from_table(
            state(2),
            WorldSpace::Universe(FiniteUniverse::Fin(2)),
            rows,
        )
        .unwrap_err();
        assert!(matches!(err, Error::IncompleteTable { .. }));
    }

    #[test]
    fn hello_world_transcript() {
        let io = theory(BuiltinTheory::Io(
            FiniteUniverse::enumeration(["Hello world!"]).unwrap(),
        ));
        let c = transcript_comodel(io, 2).unwrap();
        let t = Tree::node(
            "print",
            Value::label("Hello world!"),
            vec![Tree::Return(Value::Unit)],
        );
        let out = cointerpret_tree(&Value::Seq(vec![]), &t, &c);
        assert_eq!(out.to_string(), "() @ [\"Hello world!\"]");
        assert_eq!(validate_comodel(&c).unwrap(), ComodelVerdict::Valid);
    }

    #[test]
    fn cyclic_input() {
        let io = theory(BuiltinTheory::Io(FiniteUniverse::Fin(3)));
        let c = io_comodel(io, 1, vec![Value::Int(2), Value::Int(0)]).unwrap();
        let read = |k: Vec<Tree<Value>>| Tree::node("read", Value::Unit, k);
        // read twice, echo the second
        let t = read(
            (0..3)
                .map(|_| {
                    read(
                        (0..3)
                            .map(|b| {
                                Tree::node(
                                    "print",
                                    Value::Int(b),
                                    vec![Tree::Return(Value::Int(b))],
                                )
                            })
                            .collect(),
                    )
                })
                .collect(),
        );
        let w0 = Value::pair(Value::Seq(vec![]), Value::Int(0));
        assert_eq!(
            cointerpret_tree(&w0, &t, &c),
            RunOutcome::Done {
                value: Value::Int(0),
                world: Value::pair(Value::Seq(vec![Value::Int(0)]), Value::Int(0))
            }
        );
    }
}
