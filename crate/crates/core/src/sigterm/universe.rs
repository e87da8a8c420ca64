//! Finite value universes, used both as parameter sets and as arities.

use std::fmt;

use crate::error::{Error, Result};

/// An element of some universe. Also used for world states and generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Unit,
    Bool(bool),
    Int(u64),
    Label(String),
    Pair(Box<Value>, Box<Value>),
    /// Finite sequences; only world spaces produce these.
    Seq(Vec<Value>),
}

impl Value {
    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn label(s: impl Into<String>) -> Value {
        Value::Label(s.into())
    }

    pub fn as_pair(&self) -> Option<(&Value, &Value)> {
        match self {
            Value::Pair(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<u64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }
}

pub(crate) fn is_plain_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => f.write_str("()"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Label(s) => f.write_str(&quote(s)),
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
            Value::Seq(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// A finite, canonically enumerated set of values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FiniteUniverse {
    Empty,
    Unit,
    Bool,
    /// `{0, .., n-1}`; `n` is positive.
    Fin(u64),
    /// Distinct labels in declaration order.
    Enum(Vec<String>),
    Product(Box<FiniteUniverse>, Box<FiniteUniverse>),
}

impl FiniteUniverse {
    pub fn fin(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("fin universe must be positive".into()));
        }
        Ok(FiniteUniverse::Fin(n))
    }

    pub fn enumeration<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Invalid(format!("duplicate label {}", quote(l))));
            }
        }
        Ok(FiniteUniverse::Enum(labels))
    }

    pub fn product(l: FiniteUniverse, r: FiniteUniverse) -> Self {
        FiniteUniverse::Product(Box::new(l), Box::new(r))
    }

    /// Cardinality. Saturates at `usize::MAX` for absurdly large products.
    pub fn size(&self) -> usize {
        match self {
            FiniteUniverse::Empty => 0,
            FiniteUniverse::Unit => 1,
            FiniteUniverse::Bool => 2,
            FiniteUniverse::Fin(n) => usize::try_from(*n).unwrap_or(usize::MAX),
            FiniteUniverse::Enum(ls) => ls.len(),
            FiniteUniverse::Product(l, r) => l.size().saturating_mul(r.size()),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.size() == 0
    }

    /// The `i`-th element of the canonical enumeration.
    pub fn element(&self, i: usize) -> Option<Value> {
        if i >= self.size() {
            return None;
        }
        Some(match self {
            FiniteUniverse::Empty => unreachable!(),
            FiniteUniverse::Unit => Value::Unit,
            FiniteUniverse::Bool => Value::Bool(i == 1),
            FiniteUniverse::Fin(_) => Value::Int(i as u64),
            FiniteUniverse::Enum(ls) => Value::Label(ls[i].clone()),
            FiniteUniverse::Product(l, r) => {
                let rs = r.size();
                Value::pair(l.element(i / rs)?, r.element(i % rs)?)
            }
        })
    }

    /// Position of `v` in the canonical enumeration.
    pub fn index_of(&self, v: &Value) -> Option<usize> {
        match (self, v) {
            (FiniteUniverse::Unit, Value::Unit) => Some(0),
            (FiniteUniverse::Bool, Value::Bool(b)) => Some(usize::from(*b)),
            (FiniteUniverse::Fin(n), Value::Int(k)) if k < n => usize::try_from(*k).ok(),
            (FiniteUniverse::Enum(ls), Value::Label(s)) => ls.iter().position(|l| l == s),
            (FiniteUniverse::Product(l, r), Value::Pair(a, b)) => {
                Some(l.index_of(a)? * r.size() + r.index_of(b)?)
            }
            _ => None,
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.index_of(v).is_some()
    }

    pub fn elements(&self) -> Elements<'_> {
        Elements {
            universe: self,
            next: 0,
            len: self.size(),
        }
    }

    pub fn enumerate(&self) -> Vec<Value> {
        self.elements().collect()
    }

    pub(crate) fn check(&self, v: &Value) -> Result<usize> {
        self.index_of(v)
            .ok_or_else(|| Error::NotInUniverse(v.to_string(), self.to_string()))
    }
}

pub struct Elements<'a> {
    universe: &'a FiniteUniverse,
    next: usize,
    len: usize,
}

impl Iterator for Elements<'_> {
    type Item = Value;

    fn next(&mut self) -> Option<Value> {
        if self.next >= self.len {
            return None;
        }
        let v = self.universe.element(self.next);
        self.next += 1;
        v
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = self.len - self.next;
        (rest, Some(rest))
    }
}

impl ExactSizeIterator for Elements<'_> {}

impl fmt::Display for FiniteUniverse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiniteUniverse::Empty => f.write_str("empty"),
            FiniteUniverse::Unit => f.write_str("unit"),
            FiniteUniverse::Bool => f.write_str("bool"),
            FiniteUniverse::Fin(n) => write!(f, "fin {n}"),
            FiniteUniverse::Enum(ls) => {
                f.write_str("enum {")?;
                for (i, l) in ls.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    if is_plain_ident(l) && !crate::cli::lexer::is_keyword(l) {
                        f.write_str(l)?;
                    } else {
                        f.write_str(&quote(l))?;
                    }
                }
                f.write_str("}")
            }
            FiniteUniverse::Product(l, r) => {
                write!(f, "{l} * ")?;
                if matches!(**r, FiniteUniverse::Product(..)) {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
        }
    }
}
