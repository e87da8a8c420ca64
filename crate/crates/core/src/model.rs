//! Set-theoretic interpretations of a signature and models of a theory over
//! finite carriers.
//!
//! Operation tables are indexed by the canonical enumeration of the
//! parameter universe and of the carrier, so validation is plain
//! enumeration: an equation over context `X` is checked at every parameter
//! and every one of the `|carrier|^|X|` valuations.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sigterm::{is_plain_ident, Equation, FiniteUniverse, Theory, Tree, Value};

/// Anything that gives each operation a meaning on some carrier.
pub trait Interpretation {
    type Carrier: Clone;

    fn apply(&self, op: &str, param: &Value, args: &[Self::Carrier]) -> Result<Self::Carrier>;
}

/// Interprets `t`, sending generators through `valuation`.
pub fn interpret_term<I, X>(
    interp: &I,
    t: &Tree<X>,
    valuation: &impl Fn(&X) -> Option<I::Carrier>,
) -> Result<I::Carrier>
where
    I: Interpretation,
    X: fmt::Display,
{
    match t {
        Tree::Return(x) => valuation(x).ok_or_else(|| Error::UnboundGenerator(x.to_string())),
        Tree::Op(n) => {
            let args = n
                .kont
                .iter()
                .map(|k| interpret_term(interp, k, valuation))
                .collect::<Result<Vec<_>>>()?;
            interp.apply(&n.op, &n.param, &args)
        }
    }
}

type RawOp<C> = Box<dyn Fn(&Value, &[C]) -> C + Send + Sync>;

/// An interpretation over an arbitrary carrier, e.g. the reals. Terms can be
/// evaluated but equations cannot be decided.
pub struct RawInterpretation<C> {
    ops: HashMap<String, RawOp<C>>,
}

impl<C> Default for RawInterpretation<C> {
    fn default() -> Self {
        RawInterpretation {
            ops: HashMap::new(),
        }
    }
}

impl<C> RawInterpretation<C> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_op(
        mut self,
        name: impl Into<String>,
        f: impl Fn(&Value, &[C]) -> C + Send + Sync + 'static,
    ) -> Self {
        self.ops.insert(name.into(), Box::new(f));
        self
    }

    /// Always fails: a raw carrier cannot be enumerated.
    pub fn validate_equation(&self, _eq: &Equation) -> Result<Validity> {
        Err(Error::NonEnumerableCarrier)
    }
}

impl<C: Clone> Interpretation for RawInterpretation<C> {
    type Carrier = C;

    fn apply(&self, op: &str, param: &Value, args: &[C]) -> Result<C> {
        let f = self
            .ops
            .get(op)
            .ok_or_else(|| Error::UnknownOperation(op.to_string()))?;
        Ok(f(param, args))
    }
}

#[derive(Clone, Debug)]
struct OpTable {
    op: String,
    param: FiniteUniverse,
    arity: usize,
    /// Carrier indices, row-major over (param, arg_0, .., arg_{k-1}).
    results: Vec<u32>,
}

/// A model candidate over a finite carrier.
#[derive(Clone, Debug)]
pub struct FiniteModel {
    theory: Arc<Theory>,
    carrier: FiniteUniverse,
    tables: Vec<OpTable>,
}

const MAX_TABLE: usize = 1 << 22;

fn table_len(param: &FiniteUniverse, carrier: usize, arity: usize) -> Result<usize> {
    let mut len = param.size();
    for _ in 0..arity {
        len = len
            .checked_mul(carrier)
            .ok_or(Error::NonEnumerableCarrier)?;
    }
    if len > MAX_TABLE {
        return Err(Error::NonEnumerableCarrier);
    }
    Ok(len)
}

/// Mixed-radix decoding, most significant digit first.
fn digits(mut index: usize, base: usize, len: usize, out: &mut Vec<usize>) {
    out.clear();
    out.resize(len, 0);
    for slot in out.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
}

impl FiniteModel {
    /// Tabulates `f` over every operation, parameter and argument tuple.
    pub fn from_fn(
        theory: Arc<Theory>,
        carrier: FiniteUniverse,
        f: impl Fn(&str, &Value, &[Value]) -> Value,
    ) -> Result<Self> {
        let n = carrier.size();
        let elems = carrier.enumerate();
        let mut tables = Vec::with_capacity(theory.ops.len());
        let mut idx = Vec::new();
        for op in &theory.ops {
            let arity = op.arity.size();
            let len = table_len(&op.param, n, arity)?;
            let per_param = if op.param.is_empty() {
                0
            } else {
                len / op.param.size()
            };
            let mut results = Vec::with_capacity(len);
            for p in op.param.elements() {
                for row in 0..per_param {
                    digits(row, n, arity, &mut idx);
                    let args: Vec<Value> = idx.iter().map(|&i| elems[i].clone()).collect();
                    let r = f(&op.name, &p, &args);
                    results.push(carrier.check(&r)? as u32);
                }
            }
            tables.push(OpTable {
                op: op.name.clone(),
                param: op.param.clone(),
                arity,
                results,
            });
        }
        Ok(FiniteModel {
            theory,
            carrier,
            tables,
        })
    }

    /// Builds a model from explicit table entries `(op, param, args, result)`.
    /// Every row of every operation must be given exactly once.
    pub fn from_entries(
        theory: Arc<Theory>,
        carrier: FiniteUniverse,
        entries: impl IntoIterator<Item = (String, Value, Vec<Value>, Value)>,
    ) -> Result<Self> {
        let n = carrier.size();
        let mut tables: Vec<(OpTable, Vec<Option<u32>>)> = Vec::new();
        for op in &theory.ops {
            let arity = op.arity.size();
            let len = table_len(&op.param, n, arity)?;
            tables.push((
                OpTable {
                    op: op.name.clone(),
                    param: op.param.clone(),
                    arity,
                    results: Vec::new(),
                },
                vec![None; len],
            ));
        }
        for (op, param, args, result) in entries {
            let (table, slots) = tables
                .iter_mut()
                .find(|(t, _)| t.op == op)
                .ok_or_else(|| Error::UnknownOperation(op.clone()))?;
            if args.len() != table.arity {
                return Err(Error::Invalid(format!(
                    "{op} takes {} arguments, got {}",
                    table.arity,
                    args.len()
                )));
            }
            let mut index =
                table
                    .param
                    .index_of(&param)
                    .ok_or_else(|| Error::ParameterOutOfUniverse {
                        op: op.clone(),
                        param: param.to_string(),
                        universe: table.param.to_string(),
                    })?;
            for a in &args {
                index = index * n + carrier.check(a)?;
            }
            let r = carrier.check(&result)? as u32;
            match slots[index] {
                Some(prev) if prev != r => {
                    return Err(Error::Invalid(format!(
                        "conflicting entries for {op}({param}; ..)"
                    )))
                }
                _ => slots[index] = Some(r),
            }
        }
        let elems = carrier.enumerate();
        let mut out = Vec::new();
        let mut idx = Vec::new();
        for (mut table, slots) in tables {
            let per_param = if table.param.is_empty() {
                0
            } else {
                slots.len() / table.param.size()
            };
            for (i, slot) in slots.iter().enumerate() {
                match slot {
                    Some(r) => table.results.push(*r),
                    None => {
                        let p = table
                            .param
                            .element(i / per_param.max(1))
                            .unwrap_or(Value::Unit);
                        digits(i % per_param.max(1), n, table.arity, &mut idx);
                        let args: Vec<String> = idx.iter().map(|&k| elems[k].to_string()).collect();
                        return Err(Error::IncompleteTable {
                            op: table.op.clone(),
                            entry: format!("({p}; {})", args.join(", ")),
                        });
                    }
                }
            }
            out.push(table);
        }
        Ok(FiniteModel {
            theory,
            carrier,
            tables: out,
        })
    }

    /// The one-element model; it validates every equation.
    pub fn trivial(theory: Arc<Theory>) -> Self {
        FiniteModel::from_fn(theory, FiniteUniverse::Unit, |_, _, _| Value::Unit)
            .expect("unit carrier tables are small")
    }

    pub fn theory(&self) -> &Arc<Theory> {
        &self.theory
    }

    pub fn carrier(&self) -> &FiniteUniverse {
        &self.carrier
    }

    fn table(&self, op: &str) -> Result<&OpTable> {
        self.tables
            .iter()
            .find(|t| t.op == op)
            .ok_or_else(|| Error::UnknownOperation(op.to_string()))
    }

    fn apply_idx(&self, table: &OpTable, param: &Value, args: &[usize]) -> Result<usize> {
        let n = self.carrier.size();
        let mut index =
            table
                .param
                .index_of(param)
                .ok_or_else(|| Error::ParameterOutOfUniverse {
                    op: table.op.clone(),
                    param: param.to_string(),
                    universe: table.param.to_string(),
                })?;
        for &a in args {
            index = index * n + a;
        }
        Ok(table.results[index] as usize)
    }

    /// Interprets an equation-side tree with generators given by carrier
    /// indices, one per context element.
    fn interpret_idx(
        &self,
        t: &Tree<Value>,
        context: &FiniteUniverse,
        valuation: &[usize],
    ) -> Result<usize> {
        match t {
            Tree::Return(x) => {
                let i = context.check(x)?;
                Ok(valuation[i])
            }
            Tree::Op(node) => {
                let table = self.table(&node.op)?;
                if node.kont.len() != table.arity {
                    return Err(Error::IncompleteContinuation {
                        op: node.op.clone(),
                        missing: format!("{} of {} branches", table.arity, node.kont.len()),
                    });
                }
                let mut args = Vec::with_capacity(node.kont.len());
                for k in &node.kont {
                    args.push(self.interpret_idx(k, context, valuation)?);
                }
                self.apply_idx(table, &node.param, &args)
            }
        }
    }
}

impl Interpretation for FiniteModel {
    type Carrier = Value;

    fn apply(&self, op: &str, param: &Value, args: &[Value]) -> Result<Value> {
        let table = self.table(op)?;
        if args.len() != table.arity {
            return Err(Error::IncompleteContinuation {
                op: op.to_string(),
                missing: format!("{} of {} arguments", table.arity, args.len()),
            });
        }
        let idx = args
            .iter()
            .map(|a| self.carrier.check(a))
            .collect::<Result<Vec<_>>>()?;
        let r = self.apply_idx(table, param, &idx)?;
        Ok(self
            .carrier
            .element(r)
            .expect("table entries lie in the carrier"))
    }
}

/// A total assignment of carrier elements to the generators of a context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Valuation {
    pub context: FiniteUniverse,
    pub values: Vec<Value>,
}

impl Valuation {
    pub fn get(&self, x: &Value) -> Option<&Value> {
        self.values.get(self.context.index_of(x)?)
    }
}

/// Renders a generator: plain labels print bare, everything else as a value.
pub fn render_generator(x: &Value) -> String {
    match x {
        Value::Label(s) if is_plain_ident(s) => s.clone(),
        other => other.to_string(),
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, v)) in self.context.elements().zip(&self.values).enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}={v}", render_generator(&x))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub param: Value,
    pub valuation: Valuation,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "param={}", self.param)?;
        if !self.valuation.values.is_empty() {
            write!(f, ", {}", self.valuation)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Violated(Witness),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationCheck {
    pub verdict: Validity,
    /// Number of (parameter, valuation) pairs evaluated.
    pub inspected: usize,
}

/// Checks an equation family at every parameter and valuation, reporting
/// the first counterexample in enumeration order.
pub fn validate_equation(m: &FiniteModel, e: &Equation) -> Result<EquationCheck> {
    let n = m.carrier.size();
    let ctx = e.context.size();
    let total = (0..ctx)
        .try_fold(1usize, |acc, _| acc.checked_mul(n))
        .ok_or(Error::NonEnumerableCarrier)?;
    let elems = m.carrier.enumerate();
    let mut inspected = 0;
    let mut valuation = Vec::new();
    for (p, lhs, rhs) in e.instances() {
        for row in 0..total {
            digits(row, n, ctx, &mut valuation);
            inspected += 1;
            let l = m.interpret_idx(&lhs, &e.context, &valuation)?;
            let r = m.interpret_idx(&rhs, &e.context, &valuation)?;
            if l != r {
                let witness = Witness {
                    param: p,
                    valuation: Valuation {
                        context: e.context.clone(),
                        values: valuation.iter().map(|&i| elems[i].clone()).collect(),
                    },
                };
                return Ok(EquationCheck {
                    verdict: Validity::Violated(witness),
                    inspected,
                });
            }
        }
    }
    Ok(EquationCheck {
        verdict: Validity::Valid,
        inspected,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelVerdict {
    Valid,
    Violated { equation: String, witness: Witness },
}

impl fmt::Display for ModelVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelVerdict::Valid => f.write_str("Valid"),
            ModelVerdict::Violated { equation, witness } => {
                write!(f, "Violated {equation} at {witness}")
            }
        }
    }
}

pub fn validate_model(m: &FiniteModel) -> Result<ModelVerdict> {
    for eq in &m.theory.eqs {
        if let Validity::Violated(witness) = validate_equation(m, eq)?.verdict {
            return Ok(ModelVerdict::Violated {
                equation: eq.name.clone(),
                witness,
            });
        }
    }
    Ok(ModelVerdict::Valid)
}

fn same_theory(a: &Theory, b: &Theory) -> bool {
    a.name == b.name
        && a.ops == b.ops
        && a.eqs.len() == b.eqs.len()
        && a.eqs.iter().zip(&b.eqs).all(|(x, y)| x.name == y.name)
}

fn ensure_same_theory(a: &FiniteModel, b: &FiniteModel) -> Result<()> {
    if Arc::ptr_eq(&a.theory, &b.theory) || same_theory(&a.theory, &b.theory) {
        Ok(())
    } else {
        Err(Error::TheoryMismatch(
            a.theory.name.clone(),
            b.theory.name.clone(),
        ))
    }
}

/// The product model with pointwise operations.
pub fn product_model(l: &FiniteModel, m: &FiniteModel) -> Result<FiniteModel> {
    ensure_same_theory(l, m)?;
    let carrier = FiniteUniverse::product(l.carrier.clone(), m.carrier.clone());
    FiniteModel::from_fn(l.theory.clone(), carrier, |op, p, args| {
        let (firsts, seconds): (Vec<Value>, Vec<Value>) = args
            .iter()
            .map(|a| {
                let (x, y) = a.as_pair().expect("product carrier");
                (x.clone(), y.clone())
            })
            .unzip();
        let x = l.apply(op, p, &firsts).expect("left factor is total");
        let y = m.apply(op, p, &seconds).expect("right factor is total");
        Value::pair(x, y)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Homomorphism {
    Yes,
    No {
        op: String,
        param: Value,
        args: Vec<Value>,
    },
}

/// Checks `phi(op_L(p, args)) = op_M(p, phi . args)` everywhere.
pub fn is_homomorphism(
    phi: impl Fn(&Value) -> Option<Value>,
    l: &FiniteModel,
    m: &FiniteModel,
) -> Result<Homomorphism> {
    ensure_same_theory(l, m)?;
    let n = l.carrier.size();
    let elems = l.carrier.enumerate();
    let image = elems
        .iter()
        .map(|x| {
            let y = phi(x).ok_or_else(|| Error::UnboundGenerator(x.to_string()))?;
            m.carrier.check(&y)
        })
        .collect::<Result<Vec<usize>>>()?;
    let mut idx = Vec::new();
    for (lt, mt) in l.tables.iter().zip(&m.tables) {
        let per_param = if lt.param.is_empty() {
            0
        } else {
            lt.results.len() / lt.param.size()
        };
        for p in lt.param.elements() {
            for row in 0..per_param {
                digits(row, n, lt.arity, &mut idx);
                let lhs = image[l.apply_idx(lt, &p, &idx)?];
                let mapped: Vec<usize> = idx.iter().map(|&i| image[i]).collect();
                let rhs = m.apply_idx(mt, &p, &mapped)?;
                if lhs != rhs {
                    return Ok(Homomorphism::No {
                        op: lt.op.clone(),
                        param: p,
                        args: idx.iter().map(|&i| elems[i].clone()).collect(),
                    });
                }
            }
        }
    }
    Ok(Homomorphism::Yes)
}

/// Every model of `theory` with carrier `fin k`, `1 <= k <= max_carrier`,
/// skipping carriers whose candidate space exceeds `cap`.
pub fn small_models(theory: &Arc<Theory>, max_carrier: u64, cap: usize) -> Vec<FiniteModel> {
    let mut out = Vec::new();
    for k in 1..=max_carrier {
        let n = k as usize;
        let lens: Option<Vec<usize>> = theory
            .ops
            .iter()
            .map(|op| table_len(&op.param, n, op.arity.size()).ok())
            .collect();
        let Some(lens) = lens else { continue };
        let cells: usize = lens.iter().sum();
        let space = (0..cells).try_fold(1usize, |acc, _| acc.checked_mul(n).filter(|&s| s <= cap));
        if space.is_none() {
            continue;
        }
        let mut counter = vec![0u32; cells];
        loop {
            let mut offset = 0;
            let tables = theory
                .ops
                .iter()
                .zip(&lens)
                .map(|(op, &len)| {
                    let t = OpTable {
                        op: op.name.clone(),
                        param: op.param.clone(),
                        arity: op.arity.size(),
                        results: counter[offset..offset + len].to_vec(),
                    };
                    offset += len;
                    t
                })
                .collect();
            let m = FiniteModel {
                theory: theory.clone(),
                carrier: FiniteUniverse::Fin(k),
                tables,
            };
            if matches!(validate_model(&m), Ok(ModelVerdict::Valid)) {
                out.push(m);
            }
            // odometer increment
            let mut i = cells;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                counter[i] += 1;
                if (counter[i] as usize) < n {
                    break;
                }
                counter[i] = 0;
            }
            if counter.iter().all(|&c| c == 0) {
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigterm::{builtin_catalogue, builtin_theory, BuiltinTheory};

    fn theory(key: BuiltinTheory) -> Arc<Theory> {
        Arc::new(builtin_theory(&key).unwrap())
    }

    fn bool_lattice(join: fn(bool, bool) -> bool) -> FiniteModel {
        FiniteModel::from_fn(
            theory(BuiltinTheory::Semilattice),
            FiniteUniverse::Bool,
            move |op, _, args| {
                let b = |v: &Value| matches!(v, Value::Bool(true));
                match op {
                    "bot" => Value::Bool(false),
                    _ => Value::Bool(join(b(&args[0]), b(&args[1]))),
                }
            },
        )
        .unwrap()
    }

    fn x(name: &str) -> Value {
        Value::label(name)
    }

    #[test]
    fn projection_leaf() {
        let m = bool_lattice(|a, b| a || b);
        let t = Tree::ret(x("x"));
        let v = interpret_term(&m, &t, &|_| Some(Value::Bool(true))).unwrap();
        assert_eq!(v, Value::Bool(true));
    }

    #[test]
    fn real_valued_interpretation() {
        let sqrt5 = 5f64.sqrt();
        let interp = RawInterpretation::new()
            .with_op("u", move |_, _: &[f64]| 1.0 + sqrt5)
            .with_op("m", |_, a: &[f64]| a[0].powi(2) + a[1].powi(3));
        let m = |l, r| Tree::node("m", Value::Unit, vec![l, r]);
        let t = m(
            Tree::node("u", Value::Unit, vec![]),
            m(Tree::ret("x"), Tree::ret("x")),
        );
        for a in [0.0f64, 1.0, 2.0] {
            let got = interpret_term(&interp, &t, &|_| Some(a)).unwrap();
            let expected = (a + 1.0).powi(3) * a.powi(6) + 2.0 * (3.0 + sqrt5);
            assert!((got - expected).abs() < 1e-9, "a={a}: {got} vs {expected}");
        }
        let eq = theory(BuiltinTheory::Group).eqs[0].clone();
        assert_eq!(
            interp.validate_equation(&eq),
            Err(Error::NonEnumerableCarrier)
        );
    }

    #[test]
    fn semilattice_term_truth_table() {
        let m = bool_lattice(|a, b| a || b);
        let j = |l, r| Tree::node("join", Value::Unit, vec![l, r]);
        let t = j(Tree::ret(x("x")), j(Tree::ret(x("y")), Tree::ret(x("x"))));
        let v = interpret_term(&m, &t, &|g: &Value| Some(Value::Bool(*g == x("x")))).unwrap();
        assert_eq!(v, Value::Bool(true));
    }

    #[test]
    fn trivial_model_validates_everything() {
        for key in builtin_catalogue() {
            let m = FiniteModel::trivial(theory(key));
            assert_eq!(validate_model(&m).unwrap(), ModelVerdict::Valid);
        }
    }

    #[test]
    fn commutativity_and_left_projection() {
        let or = bool_lattice(|a, b| a || b);
        let comm = or.theory().equation("comm").unwrap().clone();
        assert_eq!(
            validate_equation(&or, &comm).unwrap().verdict,
            Validity::Valid
        );
        let left = bool_lattice(|a, _| a);
        let check = validate_equation(&left, &comm).unwrap();
        assert_eq!(
            check.verdict,
            Validity::Violated(Witness {
                param: Value::Unit,
                valuation: Valuation {
                    context: comm.context.clone(),
                    values: vec![Value::Bool(false), Value::Bool(true)],
                }
            })
        );
        assert_eq!(check.inspected, 2);
        match validate_model(&left).unwrap() {
            ModelVerdict::Violated { equation, witness } => {
                assert_eq!(equation, "comm");
                assert_eq!(witness.to_string(), "param=(), x=false, y=true");
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn inspected_count_is_exhaustive() {
        let or = bool_lattice(|a, b| a || b);
        for eq in &or.theory().eqs {
            let check = validate_equation(&or, eq).unwrap();
            assert_eq!(
                check.inspected,
                eq.params.size() * 2usize.pow(eq.context.size() as u32)
            );
        }
    }

    fn cyclic(n: u64) -> FiniteModel {
        FiniteModel::from_fn(
            theory(BuiltinTheory::Group),
            FiniteUniverse::Fin(n),
            move |op, _, args| {
                let a = |i: usize| args[i].as_int().unwrap();
                Value::Int(match op {
                    "u" => 0,
                    "m" => (a(0) + a(1)) % n,
                    _ => (n - a(0)) % n,
                })
            },
        )
        .unwrap()
    }

    #[test]
    fn cyclic_group_tables() {
        assert_eq!(validate_model(&cyclic(2)).unwrap(), ModelVerdict::Valid);
        // xor with identity inverse is still a group on two elements
        let xor = FiniteModel::from_fn(
            theory(BuiltinTheory::Group),
            FiniteUniverse::Bool,
            |op, _, args| match op {
                "u" => Value::Bool(false),
                "m" => Value::Bool(args[0] != args[1]),
                _ => args[0].clone(),
            },
        )
        .unwrap();
        assert_eq!(validate_model(&xor).unwrap(), ModelVerdict::Valid);
        let constant = FiniteModel::from_fn(
            theory(BuiltinTheory::Group),
            FiniteUniverse::Bool,
            |op, _, args| match op {
                "u" => Value::Bool(false),
                "m" => Value::Bool(false),
                _ => args[0].clone(),
            },
        )
        .unwrap();
        match validate_model(&constant).unwrap() {
            // assoc holds for a constant operation; the unit law is the first to fail
            ModelVerdict::Violated { equation, .. } => assert_eq!(equation, "left-unit"),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn products() {
        let t = FiniteModel::trivial(theory(BuiltinTheory::Group));
        let tt = product_model(&t, &t).unwrap();
        assert_eq!(tt.carrier().size(), 1);
        let z6 = product_model(&cyclic(2), &cyclic(3)).unwrap();
        assert_eq!(z6.carrier().size(), 6);
        assert_eq!(validate_model(&z6).unwrap(), ModelVerdict::Valid);
        let other = FiniteModel::trivial(theory(BuiltinTheory::Semilattice));
        assert!(matches!(
            product_model(&t, &other),
            Err(Error::TheoryMismatch(..))
        ));
    }

    #[test]
    fn homomorphisms() {
        let z2 = cyclic(2);
        let z4 = cyclic(4);
        assert_eq!(
            is_homomorphism(|v| Some(v.clone()), &z2, &z2).unwrap(),
            Homomorphism::Yes
        );
        let one = FiniteModel::trivial(theory(BuiltinTheory::Group));
        assert_eq!(
            is_homomorphism(|_| Some(Value::Unit), &z4, &one).unwrap(),
            Homomorphism::Yes
        );
        let reduce = |v: &Value| Some(Value::Int(v.as_int()? % 2));
        assert_eq!(
            is_homomorphism(reduce, &z4, &z2).unwrap(),
            Homomorphism::Yes
        );
        let shift = |v: &Value| Some(Value::Int((v.as_int()? + 1) % 2));
        assert_eq!(
            is_homomorphism(shift, &z2, &z2).unwrap(),
            Homomorphism::No {
                op: "u".into(),
                param: Value::Unit,
                args: vec![]
            }
        );
    }

    #[test]
    fn from_entries_reports_missing_rows() {
        let th = theory(BuiltinTheory::Semilattice);
        let entries = vec![("bot".to_string(), Value::Unit, vec![], Value::Bool(false))];
        match FiniteModel::from_entries(th, FiniteUniverse::Bool, entries) {
            Err(Error::IncompleteTable { op, entry }) => {
                assert_eq!(op, "join");
                assert_eq!(entry, "((); false, false)");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_models_of_choice() {
        let th = theory(BuiltinTheory::Choice);
        let models = small_models(&th, 2, 10_000);
        // carrier 1: the trivial model; carrier 2: or and and
        assert_eq!(models.len(), 3);
        for m in &models {
            assert_eq!(validate_model(m).unwrap(), ModelVerdict::Valid);
        }
    }
}
