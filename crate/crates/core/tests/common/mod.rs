#![allow(dead_code)]

use std::path::PathBuf;

use algeff::sigterm::{FiniteUniverse, Theory, Tree, Value};
use rand::Rng;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(data(name)).unwrap()
}

/// A random tree of depth at most `depth`; leaves come from `leaf`.
pub fn random_tree<R: Rng>(
    theory: &Theory,
    rng: &mut R,
    depth: usize,
    leaf: &mut impl FnMut(&mut R) -> Value,
) -> Tree<Value> {
    if depth == 0 || theory.ops.is_empty() || rng.gen_bool(0.3) {
        return Tree::Return(leaf(rng));
    }
    let op = &theory.ops[rng.gen_range(0..theory.ops.len())];
    let param = pick(&op.param, rng);
    let kont = (0..op.arity.size())
        .map(|_| random_tree(theory, rng, depth - 1, leaf))
        .collect();
    Tree::node(op.name.clone(), param, kont)
}

pub fn pick<R: Rng>(u: &FiniteUniverse, rng: &mut R) -> Value {
    u.element(rng.gen_range(0..u.size())).unwrap()
}

/// Runs a get/put tree from state `s`, independently of the library.
pub fn run_state(t: &Tree<Value>, s: u64) -> (u64, Value) {
    match t {
        Tree::Return(x) => (s, x.clone()),
        Tree::Op(n) if n.op == "get" => run_state(&n.kont[s as usize], s),
        Tree::Op(n) if n.op == "put" => run_state(&n.kont[0], n.param.as_int().unwrap()),
        Tree::Op(n) => panic!("not a state operation: {}", n.op),
    }
}

/// Every subtree, root first.
pub fn subtrees<X>(t: &Tree<X>) -> Vec<&Tree<X>> {
    let mut out = vec![t];
    if let Tree::Op(n) = t {
        for k in &n.kont {
            out.extend(subtrees(k));
        }
    }
    out
}
