//! Well-founded effect trees: return leaves over generators and operation
//! nodes whose continuation is a total map out of the operation's arity.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use super::universe::Value;
use crate::error::{Error, Result};

/// A tree over generators `X`.
///
/// `Op` continuations are stored positionally, one subtree per element of the
/// operation's arity in canonical enumeration order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tree<X> {
    Return(X),
    Op(OpNode<X>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpNode<X> {
    pub op: String,
    pub param: Value,
    pub kont: Vec<Tree<X>>,
}

impl<X> Tree<X> {
    pub fn ret(x: X) -> Self {
        Tree::Return(x)
    }

    /// Builds a node without consulting a signature. Use
    /// [`Signature::make_op`](super::Signature::make_op) for checked construction.
    pub fn node(op: impl Into<String>, param: Value, kont: Vec<Tree<X>>) -> Self {
        Tree::Op(OpNode {
            op: op.into(),
            param,
            kont,
        })
    }

    pub fn is_return(&self) -> bool {
        matches!(self, Tree::Return(_))
    }

    pub fn depth(&self) -> usize {
        match self {
            Tree::Return(_) => 0,
            Tree::Op(n) => 1 + n.kont.iter().map(Tree::depth).max().unwrap_or(0),
        }
    }

    /// Number of nodes, leaves included.
    pub fn size(&self) -> usize {
        match self {
            Tree::Return(_) => 1,
            Tree::Op(n) => 1 + n.kont.iter().map(Tree::size).sum::<usize>(),
        }
    }

    pub fn leaves(&self) -> Vec<&X> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a X>) {
        match self {
            Tree::Return(x) => out.push(x),
            Tree::Op(n) => n.kont.iter().for_each(|k| k.collect_leaves(out)),
        }
    }

    /// Every operation node, preorder.
    pub fn op_nodes(&self) -> Vec<&OpNode<X>> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if let Tree::Op(n) = t {
                out.push(n);
                stack.extend(n.kont.iter().rev());
            }
        }
        out
    }

    pub fn map<Y>(&self, f: &mut impl FnMut(&X) -> Y) -> Tree<Y> {
        match self {
            Tree::Return(x) => Tree::Return(f(x)),
            Tree::Op(n) => Tree::Op(OpNode {
                op: n.op.clone(),
                param: n.param.clone(),
                kont: n.kont.iter().map(|k| k.map(f)).collect(),
            }),
        }
    }

    /// Replaces every leaf by a tree. This is the structural core of both
    /// substitution and Kleisli lifting.
    pub fn try_bind<Y, E>(
        &self,
        f: &mut impl FnMut(&X) -> Result<Tree<Y>, E>,
    ) -> Result<Tree<Y>, E> {
        Ok(match self {
            Tree::Return(x) => f(x)?,
            Tree::Op(n) => Tree::Op(OpNode {
                op: n.op.clone(),
                param: n.param.clone(),
                kont: n
                    .kont
                    .iter()
                    .map(|k| k.try_bind(f))
                    .collect::<Result<_, E>>()?,
            }),
        })
    }

    pub fn rename_ops(&self, renaming: &HashMap<String, String>) -> Tree<X>
    where
        X: Clone,
    {
        match self {
            Tree::Return(x) => Tree::Return(x.clone()),
            Tree::Op(n) => Tree::Op(OpNode {
                op: renaming.get(&n.op).cloned().unwrap_or_else(|| n.op.clone()),
                param: n.param.clone(),
                kont: n.kont.iter().map(|k| k.rename_ops(renaming)).collect(),
            }),
        }
    }
}

/// Replaces each generator `x` with `sigma(x)`.
pub fn substitute<X, Y>(t: &Tree<X>, sigma: impl Fn(&X) -> Option<Tree<Y>>) -> Result<Tree<Y>>
where
    X: fmt::Display,
{
    t.try_bind(&mut |x| sigma(x).ok_or_else(|| Error::UnboundGenerator(x.to_string())))
}

/// [`substitute`] with the assignment given as a finite map.
pub fn substitute_map<X, Y>(t: &Tree<X>, sigma: &HashMap<X, Tree<Y>>) -> Result<Tree<Y>>
where
    X: fmt::Display + Eq + Hash,
    Y: Clone,
{
    substitute(t, |x| sigma.get(x).cloned())
}

impl<X: fmt::Display> fmt::Display for Tree<X> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Return(x) => write!(f, "return {x}"),
            Tree::Op(n) => {
                write!(f, "{}({}; [", n.op, n.param)?;
                for (i, k) in n.kont.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k}")?;
                }
                f.write_str("])")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vee(l: Tree<&'static str>, r: Tree<&'static str>) -> Tree<&'static str> {
        Tree::node("vee", Value::Unit, vec![l, r])
    }

    #[test]
    fn leaf_substitution() {
        let t: Tree<&str> = Tree::ret("x");
        let s = substitute(&t, |_| Some(Tree::<u64>::ret(7))).unwrap();
        assert_eq!(s, Tree::ret(7));
    }

    #[test]
    fn nested_substitution_by_hand() {
        let t = vee(Tree::ret("x"), Tree::ret("y"));
        let s = substitute(&t, |x| match *x {
            "x" => Some(vee(Tree::ret("z"), Tree::ret("z"))),
            "y" => Some(Tree::ret("z")),
            _ => None,
        })
        .unwrap();
        assert_eq!(s, vee(vee(Tree::ret("z"), Tree::ret("z")), Tree::ret("z")));
    }

    #[test]
    fn identity_substitution() {
        let t = vee(vee(Tree::ret("a"), Tree::ret("b")), Tree::ret("a"));
        assert_eq!(substitute(&t, |x| Some(Tree::ret(*x))).unwrap(), t);
    }

    #[test]
    fn unbound_generator() {
        let t = vee(Tree::ret("x"), Tree::ret("y"));
        let err = substitute(&t, |x| (*x == "x").then(|| Tree::<&str>::ret("z"))).unwrap_err();
        assert_eq!(err, Error::UnboundGenerator("y".into()));
    }

    #[test]
    fn rendering_follows_arity_order() {
        let t = Tree::node(
            "choose",
            Value::Unit,
            vec![Tree::ret(Value::Bool(false)), Tree::ret(Value::Bool(true))],
        );
        assert_eq!(t.to_string(), "choose((); [return false, return true])");
        let abort: Tree<Value> = Tree::node("abort", Value::Unit, vec![]);
        assert_eq!(abort.to_string(), "abort((); [])");
    }

    #[test]
    fn depth_and_size() {
        let t = vee(vee(Tree::ret("a"), Tree::ret("b")), Tree::ret("a"));
        assert_eq!(t.depth(), 2);
        assert_eq!(t.size(), 5);
        assert_eq!(t.leaves(), vec![&"a", &"b", &"a"]);
    }
}
