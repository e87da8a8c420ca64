//! Recursive-descent parsers for programs and definition files.

use std::sync::Arc;

use crate::cli::lexer::{lex, Tok, Token, RESERVED};
use crate::comodel::{Cointerpretation, WorldSpace};
use crate::error::{Error, Result, Span};
use crate::lang::ast::{CompExpr, HandlerExpr, OpClause, ValueExpr};
use crate::model::FiniteModel;
use crate::sigterm::{BuiltinTheory, Equation, FiniteUniverse, OpDecl, Theory, Tree, Value};

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(src: &str) -> Result<Self> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Str(_) => "a string".into(),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn error<T>(&self, expected: &str) -> Result<T> {
        Err(Error::syntax(
            self.span(),
            format!("expected {expected}, found {}", self.describe()),
        ))
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn at_kw(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == w)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.at_sym(s);
        if hit {
            self.bump();
        }
        hit
    }

    fn expect_sym(&mut self, s: &str) -> Result<Span> {
        if self.at_sym(s) {
            Ok(self.bump().span)
        } else {
            self.error(&format!("`{s}`"))
        }
    }

    fn expect_kw(&mut self, w: &str) -> Result<Span> {
        if self.at_kw(w) {
            Ok(self.bump().span)
        } else {
            self.error(&format!("`{w}`"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error(what),
        }
    }

    /// A program variable: any identifier except the reserved words.
    fn binder(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.error("a variable name"),
        }
    }

    fn int(&mut self) -> Result<u64> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.error("an integer"),
        }
    }

    pub(crate) fn expect_eof(&self) -> Result<()> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => self.error("end of input"),
        }
    }

    pub(crate) fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    // ---- programs ----

    pub(crate) fn comp(&mut self) -> Result<CompExpr> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Ident(w) if w == "return" => {
                self.bump();
                Ok(CompExpr::Return(self.value()?, start))
            }
            Tok::Ident(w) if w == "do" => {
                self.bump();
                let x = self.binder()?;
                self.expect_sym("<-")?;
                let c1 = self.comp()?;
                self.expect_kw("in")?;
                let c2 = self.comp()?;
                Ok(CompExpr::Do(x, Box::new(c1), Box::new(c2), start))
            }
            Tok::Ident(w) if w == "if" => {
                self.bump();
                let v = self.value()?;
                self.expect_kw("then")?;
                let c1 = self.comp()?;
                self.expect_kw("else")?;
                let c2 = self.comp()?;
                Ok(CompExpr::If(v, Box::new(c1), Box::new(c2), start))
            }
            Tok::Ident(w) if w == "with" => {
                self.bump();
                let v = self.value()?;
                self.expect_kw("handle")?;
                let c = self.comp()?;
                Ok(CompExpr::WithHandle(v, Box::new(c), start))
            }
            Tok::Ident(op) if matches!(self.peek_at(1), Tok::Sym("!")) => {
                self.bump();
                self.bump();
                if !self.at_sym("(") {
                    return self.error("`(`");
                }
                let v = self.value()?;
                Ok(CompExpr::OpCall(op, v, start))
            }
            Tok::Sym("(") => {
                let saved = self.pos;
                self.bump();
                let first = self.comp().and_then(|c| self.expect_sym(")").map(|_| c));
                match first {
                    Ok(c) => Ok(c),
                    Err(e1) => {
                        self.pos = saved;
                        self.application(start).map_err(|e2| furthest(e1, e2))
                    }
                }
            }
            _ => self.application(start),
        }
    }

    fn application(&mut self, start: Span) -> Result<CompExpr> {
        let f = self.value()?;
        let a = self.value()?;
        Ok(CompExpr::App(f, a, start))
    }

    pub(crate) fn value(&mut self) -> Result<ValueExpr> {
        let start = self.span();
        let mut v = self.value_atom()?;
        while self.eat_sym("+") {
            let w = self.value_atom()?;
            v = ValueExpr::Add(Box::new(v), Box::new(w), start);
        }
        Ok(v)
    }

    fn value_atom(&mut self) -> Result<ValueExpr> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Ident(w) if w == "true" || w == "false" => {
                self.bump();
                Ok(ValueExpr::Bool(w == "true", start))
            }
            Tok::Ident(w) if w == "fun" => {
                self.bump();
                let x = self.binder()?;
                self.expect_sym("->")?;
                let body = self.comp()?;
                Ok(ValueExpr::Fun(x, Arc::new(body), start))
            }
            Tok::Ident(w) if w == "handler" => {
                self.bump();
                let h = self.handler_body()?;
                Ok(ValueExpr::Handler(Arc::new(h), start))
            }
            Tok::Ident(w) if !RESERVED.contains(&w.as_str()) => {
                self.bump();
                Ok(ValueExpr::Var(w, start))
            }
            Tok::Int(n) => {
                self.bump();
                Ok(ValueExpr::Int(n, start))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(ValueExpr::Str(s, start))
            }
            Tok::Sym("(") => {
                self.bump();
                if self.eat_sym(")") {
                    return Ok(ValueExpr::Unit(start));
                }
                let v = self.value()?;
                if self.eat_sym(",") {
                    let w = self.value()?;
                    self.expect_sym(")")?;
                    return Ok(ValueExpr::Pair(Box::new(v), Box::new(w), start));
                }
                self.expect_sym(")")?;
                Ok(v)
            }
            _ => self.error("a value"),
        }
    }

    fn handler_body(&mut self) -> Result<HandlerExpr> {
        self.expect_sym("{")?;
        self.expect_kw("return")?;
        let ret_var = self.binder()?;
        self.expect_sym("->")?;
        let ret_body = self.comp()?;
        let mut clauses: Vec<OpClause> = Vec::new();
        while self.at_sym("|") {
            self.bump();
            let span = self.span();
            let op = self.ident("an operation name")?;
            if clauses.iter().any(|c| c.op == op) {
                return Err(Error::syntax(span, format!("duplicate clause for {op}")));
            }
            self.expect_sym("(")?;
            let param = self.binder()?;
            self.expect_sym(";")?;
            let kspan = self.span();
            let kont = self.binder()?;
            if kont == param && kont != "_" {
                return Err(Error::syntax(kspan, format!("{kont} is bound twice")));
            }
            self.expect_sym(")")?;
            self.expect_sym("->")?;
            let body = self.comp()?;
            clauses.push(OpClause {
                op,
                param,
                kont,
                body,
                span,
            });
        }
        self.expect_sym("}")?;
        Ok(HandlerExpr {
            ret_var,
            ret_body,
            clauses,
        })
    }

    // ---- universes and plain values ----

    pub(crate) fn universe(&mut self) -> Result<FiniteUniverse> {
        let mut u = self.universe_atom()?;
        while self.eat_sym("*") {
            let v = self.universe_atom()?;
            u = FiniteUniverse::product(u, v);
        }
        Ok(u)
    }

    fn universe_atom(&mut self) -> Result<FiniteUniverse> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Ident(w) if w == "empty" => {
                self.bump();
                Ok(FiniteUniverse::Empty)
            }
            Tok::Ident(w) if w == "unit" => {
                self.bump();
                Ok(FiniteUniverse::Unit)
            }
            Tok::Ident(w) if w == "bool" => {
                self.bump();
                Ok(FiniteUniverse::Bool)
            }
            Tok::Ident(w) if w == "fin" => {
                self.bump();
                let n = self.int()?;
                FiniteUniverse::fin(n).map_err(|e| Error::syntax(span, e.to_string()))
            }
            Tok::Ident(w) if w == "enum" => {
                self.bump();
                self.expect_sym("{")?;
                let mut labels = Vec::new();
                if !self.at_sym("}") {
                    loop {
                        labels.push(self.label()?);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                self.expect_sym("}")?;
                FiniteUniverse::enumeration(labels).map_err(|e| Error::syntax(span, e.to_string()))
            }
            Tok::Sym("(") => {
                self.bump();
                let u = self.universe()?;
                self.expect_sym(")")?;
                Ok(u)
            }
            _ => self.error("a universe"),
        }
    }

    fn label(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error("a label"),
        }
    }

    /// Parameter expressions inside definition files.
    fn pexpr(&mut self) -> Result<PExpr> {
        match self.peek().clone() {
            Tok::Ident(w) if w == "true" || w == "false" => {
                self.bump();
                Ok(PExpr::Lit(Value::Bool(w == "true")))
            }
            Tok::Ident(w)
                if (w == "fst" || w == "snd") && matches!(self.peek_at(1), Tok::Sym("(")) =>
            {
                self.bump();
                self.bump();
                let e = self.pexpr()?;
                self.expect_sym(")")?;
                Ok(if w == "fst" {
                    PExpr::Fst(Box::new(e))
                } else {
                    PExpr::Snd(Box::new(e))
                })
            }
            Tok::Ident(w) => {
                self.bump();
                Ok(PExpr::Name(w))
            }
            Tok::Int(n) => {
                self.bump();
                Ok(PExpr::Lit(Value::Int(n)))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(PExpr::Lit(Value::Label(s)))
            }
            Tok::Sym("(") => {
                self.bump();
                if self.eat_sym(")") {
                    return Ok(PExpr::Lit(Value::Unit));
                }
                let a = self.pexpr()?;
                if self.eat_sym(",") {
                    let b = self.pexpr()?;
                    self.expect_sym(")")?;
                    return Ok(PExpr::Pair(Box::new(a), Box::new(b)));
                }
                self.expect_sym(")")?;
                Ok(a)
            }
            Tok::Sym("[") => {
                self.bump();
                let mut items = Vec::new();
                if !self.at_sym("]") {
                    loop {
                        items.push(self.pexpr()?);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                self.expect_sym("]")?;
                Ok(PExpr::Seq(items))
            }
            _ => self.error("a value"),
        }
    }

    fn closed_value(&mut self) -> Result<Value> {
        let span = self.span();
        self.pexpr()?.eval(&[]).map_err(|m| Error::syntax(span, m))
    }

    // ---- theory files ----

    fn tree(&mut self) -> Result<TreeExpr> {
        let span = self.span();
        if self.at_kw("return") {
            self.bump();
            return Ok(TreeExpr::Return(self.pexpr()?, span));
        }
        let op = self.ident("an operation or `return`")?;
        self.expect_sym("(")?;
        let param = self.pexpr()?;
        let kont = if self.eat_sym(";") {
            if self.eat_sym("[") {
                let mut ts = Vec::new();
                if !self.at_sym("]") {
                    loop {
                        ts.push(self.tree()?);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                self.expect_sym("]")?;
                Kont::List(ts)
            } else if self.eat_sym("\\") {
                let a = self.ident("a binder")?;
                self.expect_sym(".")?;
                Kont::Binder(a, Box::new(self.tree()?))
            } else {
                return self.error("`[` or `\\`");
            }
        } else {
            Kont::List(Vec::new())
        };
        self.expect_sym(")")?;
        Ok(TreeExpr::Op {
            op,
            param,
            kont,
            span,
        })
    }

    fn theory(&mut self) -> Result<Theory> {
        let start = self.span();
        self.expect_kw("theory")?;
        let name = self.ident("a theory name")?;
        self.expect_sym("{")?;
        let mut ops: Vec<OpDecl> = Vec::new();
        let mut eqs = Vec::new();
        while !self.at_sym("}") {
            if self.at_kw("op") {
                self.bump();
                let span = self.span();
                let name = self.ident("an operation name")?;
                if ops.iter().any(|o| o.name == name) {
                    return Err(Error::syntax(span, format!("duplicate operation {name}")));
                }
                self.expect_sym(":")?;
                let p = self.universe()?;
                self.expect_sym("~>")?;
                let a = self.universe()?;
                self.expect_sym(";")?;
                ops.push(OpDecl::new(name, p, a));
            } else if self.at_kw("equation") {
                self.bump();
                eqs.push(self.equation_decl()?);
            } else {
                return self.error("`op`, `equation` or `}`");
            }
        }
        self.expect_sym("}")?;
        let mut equations = Vec::new();
        for e in eqs {
            equations.push(e.build(&ops)?);
        }
        Theory::new(name, ops, equations).map_err(|e| match e {
            Error::Syntax { .. } => e,
            other => Error::syntax(start, other.to_string()),
        })
    }

    fn equation_decl(&mut self) -> Result<EquationDecl> {
        let span = self.span();
        let name = self.ident("an equation name")?;
        let mut params = FiniteUniverse::Unit;
        let mut guard = None;
        if self.at_kw("forall") {
            self.bump();
            params = self.universe()?;
            if self.at_kw("where") {
                self.bump();
                let a = self.pexpr()?;
                let equal = if self.eat_sym("=") {
                    true
                } else {
                    self.expect_sym("!=")?;
                    false
                };
                let b = self.pexpr()?;
                guard = Some((a, equal, b));
            }
        }
        self.expect_sym("(")?;
        let context = self.universe()?;
        self.expect_sym(")")?;
        self.expect_sym(":")?;
        let lhs = self.tree()?;
        self.expect_sym("=")?;
        let rhs = self.tree()?;
        self.expect_sym(";")?;
        Ok(EquationDecl {
            name,
            params,
            guard,
            context,
            lhs,
            rhs,
            span,
        })
    }
}

fn furthest(e1: Error, e2: Error) -> Error {
    let pos = |e: &Error| match e {
        Error::Syntax { line, column, .. } => (*line, *column),
        _ => (0, 0),
    };
    if pos(&e1) > pos(&e2) {
        e1
    } else {
        e2
    }
}

#[derive(Clone, Debug)]
enum PExpr {
    Lit(Value),
    /// A bound name, or else a label.
    Name(String),
    Pair(Box<PExpr>, Box<PExpr>),
    Fst(Box<PExpr>),
    Snd(Box<PExpr>),
    Seq(Vec<PExpr>),
}

impl PExpr {
    fn eval(&self, env: &[(String, Value)]) -> Result<Value, String> {
        Ok(match self {
            PExpr::Lit(v) => v.clone(),
            PExpr::Name(n) => env
                .iter()
                .rev()
                .find(|(m, _)| m == n)
                .map(|(_, v)| v.clone())
                .unwrap_or_else(|| Value::Label(n.clone())),
            PExpr::Pair(a, b) => Value::pair(a.eval(env)?, b.eval(env)?),
            PExpr::Fst(e) | PExpr::Snd(e) => {
                let v = e.eval(env)?;
                let (a, b) = v.as_pair().ok_or_else(|| format!("{v} is not a pair"))?;
                if matches!(self, PExpr::Fst(..)) {
                    a.clone()
                } else {
                    b.clone()
                }
            }
            PExpr::Seq(items) => Value::Seq(
                items
                    .iter()
                    .map(|e| e.eval(env))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }
}

#[derive(Clone, Debug)]
enum Kont {
    List(Vec<TreeExpr>),
    Binder(String, Box<TreeExpr>),
}

#[derive(Clone, Debug)]
enum TreeExpr {
    Return(PExpr, Span),
    Op {
        op: String,
        param: PExpr,
        kont: Kont,
        span: Span,
    },
}

impl TreeExpr {
    fn instantiate(
        &self,
        ops: &[OpDecl],
        env: &mut Vec<(String, Value)>,
    ) -> Result<Tree<Value>, (Span, String)> {
        match self {
            TreeExpr::Return(e, span) => Ok(Tree::Return(e.eval(env).map_err(|m| (*span, m))?)),
            TreeExpr::Op {
                op,
                param,
                kont,
                span,
            } => {
                let decl = ops
                    .iter()
                    .find(|o| o.name == *op)
                    .ok_or_else(|| (*span, format!("unknown operation {op}")))?;
                let p = param.eval(env).map_err(|m| (*span, m))?;
                let children = match kont {
                    Kont::List(ts) => {
                        if ts.len() != decl.arity.size() {
                            return Err((
                                *span,
                                format!(
                                    "{op} needs {} continuations, got {}",
                                    decl.arity.size(),
                                    ts.len()
                                ),
                            ));
                        }
                        ts.iter()
                            .map(|t| t.instantiate(ops, env))
                            .collect::<Result<Vec<_>, _>>()?
                    }
                    Kont::Binder(a, t) => {
                        let mut out = Vec::with_capacity(decl.arity.size());
                        for v in decl.arity.elements() {
                            env.push((a.clone(), v));
                            let r = t.instantiate(ops, env);
                            env.pop();
                            out.push(r?);
                        }
                        out
                    }
                };
                Ok(Tree::node(op.clone(), p, children))
            }
        }
    }
}

struct EquationDecl {
    name: String,
    params: FiniteUniverse,
    guard: Option<(PExpr, bool, PExpr)>,
    context: FiniteUniverse,
    lhs: TreeExpr,
    rhs: TreeExpr,
    span: Span,
}

impl EquationDecl {
    /// Instantiates every parameter up front so mistakes surface as syntax
    /// errors with a position.
    fn build(self, ops: &[OpDecl]) -> Result<Equation> {
        let mut table = Vec::new();
        for p in self.params.elements() {
            let mut env = vec![("p".to_string(), p.clone())];
            if let Some((a, equal, b)) = &self.guard {
                let (x, y) = (
                    a.eval(&env).map_err(|m| Error::syntax(self.span, m))?,
                    b.eval(&env).map_err(|m| Error::syntax(self.span, m))?,
                );
                if (x == y) != *equal {
                    continue;
                }
            }
            let l = self
                .lhs
                .instantiate(ops, &mut env)
                .map_err(|(s, m)| Error::syntax(s, m))?;
            let r = self
                .rhs
                .instantiate(ops, &mut env)
                .map_err(|(s, m)| Error::syntax(s, m))?;
            table.push((p, l, r));
        }
        Ok(Equation::new(
            self.name,
            self.params,
            self.context,
            move |p| {
                table
                    .iter()
                    .find(|(q, _, _)| q == p)
                    .map(|(_, l, r)| (l.clone(), r.clone()))
            },
        ))
    }
}

fn whole<T>(src: &str, f: impl FnOnce(&mut Parser) -> Result<T>) -> Result<T> {
    let mut p = Parser::new(src)?;
    let out = f(&mut p)?;
    p.expect_eof()?;
    Ok(out)
}

pub fn parse_program(src: &str) -> Result<CompExpr> {
    whole(src, |p| p.comp())
}

pub fn parse_value(src: &str) -> Result<ValueExpr> {
    whole(src, |p| p.value())
}

pub fn parse_universe(src: &str) -> Result<FiniteUniverse> {
    whole(src, |p| p.universe())
}

/// A closed value literal such as `5`, `("a", true)` or `["x", "y"]`.
pub fn parse_value_literal(src: &str) -> Result<Value> {
    whole(src, |p| p.closed_value())
}

pub fn parse_theory(src: &str) -> Result<Theory> {
    whole(src, |p| p.theory())
}

/// A built-in theory key: `single-state(fin 10)`, `state(fin 2, bool)`,
/// `io(enum {a, b})`, or a bare name.
pub fn parse_builtin(src: &str) -> Result<BuiltinTheory> {
    whole(src, |p| {
        let span = p.span();
        let name = p.ident("a theory name")?;
        let mut args = Vec::new();
        if p.eat_sym("(") {
            loop {
                args.push(p.universe()?);
                if !p.eat_sym(",") {
                    break;
                }
            }
            p.expect_sym(")")?;
        }
        let arity_error =
            |n: usize| Error::syntax(span, format!("{name} takes {n} universe argument(s)"));
        let mut args = args.into_iter();
        let mut take = |n: usize| -> Result<Vec<FiniteUniverse>> {
            let v: Vec<_> = args.by_ref().collect();
            if v.len() == n {
                Ok(v)
            } else {
                Err(arity_error(n))
            }
        };
        Ok(match name.as_str() {
            "single-state" => BuiltinTheory::SingleState(take(1)?.remove(0)),
            "state" => {
                let mut v = take(2)?;
                let states = v.remove(1);
                BuiltinTheory::State {
                    locations: v.remove(0),
                    states,
                }
            }
            "io" => BuiltinTheory::Io(take(1)?.remove(0)),
            "exception" => {
                take(0)?;
                BuiltinTheory::Exception
            }
            "choice" => {
                take(0)?;
                BuiltinTheory::Choice
            }
            "semilattice" => {
                take(0)?;
                BuiltinTheory::Semilattice
            }
            "pointed-set" => {
                take(0)?;
                BuiltinTheory::PointedSet
            }
            "empty" => {
                take(0)?;
                BuiltinTheory::Empty
            }
            "singleton" => {
                take(0)?;
                BuiltinTheory::Singleton
            }
            "group" => {
                take(0)?;
                BuiltinTheory::Group
            }
            _ => {
                return Err(Error::syntax(
                    span,
                    format!("unknown built-in theory {name}"),
                ))
            }
        })
    })
}

/// `model <name> : <carrier>` followed by entries `op(param; a1, .., an) = r`.
pub fn parse_model(src: &str, theory: Arc<Theory>) -> Result<FiniteModel> {
    let mut p = Parser::new(src)?;
    p.expect_kw("model")?;
    p.ident("a model name")?;
    p.expect_sym(":")?;
    let carrier = p.universe()?;
    let mut entries = Vec::new();
    while !p.at_eof() {
        let span = p.span();
        let op = p.ident("an operation name")?;
        p.expect_sym("(")?;
        let param = p.closed_value()?;
        let mut args = Vec::new();
        if p.eat_sym(";") {
            loop {
                args.push(p.closed_value()?);
                if !p.eat_sym(",") {
                    break;
                }
            }
        }
        p.expect_sym(")")?;
        p.expect_sym("=")?;
        let result = p.closed_value()?;
        if theory.op(&op).is_none() {
            return Err(Error::syntax(span, format!("unknown operation {op}")));
        }
        entries.push((op, param, args, result));
    }
    FiniteModel::from_entries(theory, carrier, entries)
}

/// `comodel <name> : <world>` followed by entries `op(param; w) = (a, w')`.
pub fn parse_comodel(src: &str, theory: Arc<Theory>) -> Result<Cointerpretation> {
    let mut p = Parser::new(src)?;
    p.expect_kw("comodel")?;
    p.ident("a comodel name")?;
    p.expect_sym(":")?;
    let world = p.universe()?;
    let mut rows = Vec::new();
    while !p.at_eof() {
        let span = p.span();
        let op = p.ident("an operation name")?;
        p.expect_sym("(")?;
        let param = p.closed_value()?;
        p.expect_sym(";")?;
        let w = p.closed_value()?;
        p.expect_sym(")")?;
        p.expect_sym("=")?;
        let rspan = p.span();
        let result = p.closed_value()?;
        if theory.op(&op).is_none() {
            return Err(Error::syntax(span, format!("unknown operation {op}")));
        }
        let (a, w2) = result
            .as_pair()
            .ok_or_else(|| Error::syntax(rspan, "expected a pair (result, world)"))?;
        rows.push((op, param, w, a.clone(), w2.clone()));
    }
    Cointerpretation::from_table(theory, WorldSpace::Universe(world), rows)
}

/// Parses a world literal followed by a computation, as in `5 do x <- ..`.
pub(crate) fn parse_value_then_program(src: &str) -> Result<(Value, CompExpr)> {
    whole(src, |p| {
        let v = p.closed_value()?;
        let c = p.comp()?;
        Ok((v, c))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(line: usize, column: usize) -> Span {
        Span::new(line, column)
    }

    #[test]
    fn increment_ast() {
        let c = parse_program("do x <- get!() in do _ <- put!(x+1) in return x").unwrap();
        let want = CompExpr::Do(
            "x".into(),
            Box::new(CompExpr::OpCall(
                "get".into(),
                ValueExpr::Unit(s(1, 13)),
                s(1, 9),
            )),
            Box::new(CompExpr::Do(
                "_".into(),
                Box::new(CompExpr::OpCall(
                    "put".into(),
                    ValueExpr::Add(
                        Box::new(ValueExpr::Var("x".into(), s(1, 32))),
                        Box::new(ValueExpr::Int(1, s(1, 34))),
                        s(1, 32),
                    ),
                    s(1, 27),
                )),
                Box::new(CompExpr::Return(
                    ValueExpr::Var("x".into(), s(1, 48)),
                    s(1, 41),
                )),
                s(1, 19),
            )),
            s(1, 1),
        );
        assert_eq!(c, want);
    }

    #[test]
    fn with_handle() {
        assert!(matches!(
            parse_program("with h handle return true").unwrap(),
            CompExpr::WithHandle(ValueExpr::Var(..), _, _)
        ));
    }

    #[test]
    fn bare_return_is_an_error() {
        match parse_program("return").unwrap_err() {
            Error::Syntax {
                line,
                column,
                message,
            } => {
                assert_eq!((line, column), (1, 7));
                assert_eq!(message, "expected a value, found end of input");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn parenthesised_forms() {
        assert!(matches!(
            parse_program("(return 1)").unwrap(),
            CompExpr::Return(..)
        ));
        assert!(matches!(parse_program("(f x)").unwrap(), CompExpr::App(..)));
        assert!(matches!(
            parse_program("(fun x -> return x) true").unwrap(),
            CompExpr::App(ValueExpr::Fun(..), ValueExpr::Bool(true, _), _)
        ));
        assert!(matches!(parse_program("(f) x").unwrap(), CompExpr::App(..)));
    }

    #[test]
    fn round_trip() {
        for src in [
            "do x <- get!() in do _ <- put!(x + 1) in return x",
            "with handler { return x -> return x | abort(_; _) -> return false } handle abort!()",
            "(fun x -> return x) (1, \"a b\")",
            "if not then return 1 + 2 + (3 + 4) else f fun y -> return y",
            "do a <- do b <- return 1 in return b in return a",
            "update!((0, 1))",
        ] {
            let c = parse_program(src).unwrap();
            let again = parse_program(&c.to_string()).unwrap();
            assert_eq!(c, again, "{src} printed as {c}");
        }
    }

    #[test]
    fn universes() {
        assert_eq!(
            parse_universe("fin 2 * bool * enum {a, \"b c\"}")
                .unwrap()
                .to_string(),
            "fin 2 * bool * enum {a, \"b c\"}"
        );
        assert_eq!(
            parse_universe("unit * (bool * empty)").unwrap(),
            FiniteUniverse::product(
                FiniteUniverse::Unit,
                FiniteUniverse::product(FiniteUniverse::Bool, FiniteUniverse::Empty)
            )
        );
    }

    #[test]
    fn builtin_keys() {
        for key in [
            "single-state(fin 10)",
            "state(fin 2, fin 3)",
            "io(enum {\"Hello world!\"})",
            "exception",
            "group",
        ] {
            assert_eq!(parse_builtin(key).unwrap().to_string(), key);
        }
        assert!(parse_builtin("state(fin 2)").is_err());
        assert!(parse_builtin("monoid").is_err());
    }

    #[test]
    fn theory_file_matches_builtin() {
        let src = "
            theory cell {
              op get : unit ~> fin 2;
              op put : fin 2 ~> unit;
              equation get-put (enum {x}) : get((); \\s. put(s; \\_. return x)) = return x;
              equation put-get forall fin 2 (fin 2) :
                put(p; \\_. get((); \\s. return s)) = put(p; [return p]);
              equation distinct forall fin 2 * fin 2 where fst(p) != snd(p) (unit) :
                put(fst(p); [return ()]) = put(fst(p); [return ()]);
            }";
        let t = parse_theory(src).unwrap();
        assert_eq!(t.ops.len(), 2);
        assert_eq!(t.eqs[1].instances().len(), 2);
        assert_eq!(t.eqs[2].instances().len(), 2);
        let (l, r) = t.eqs[0].instance(&Value::Unit).unwrap();
        assert_eq!(
            l.to_string(),
            "get((); [put(0; [return \"x\"]), put(1; [return \"x\"])])"
        );
        assert_eq!(r, Tree::Return(Value::label("x")));
    }

    #[test]
    fn theory_errors_are_located() {
        let src = "theory t {\n  op a : unit ~> bool;\n  equation e (unit) : a((); [return ()]) = return ();\n}";
        match parse_theory(src).unwrap_err() {
            Error::Syntax { line, column, .. } => assert_eq!((line, column), (3, 23)),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn literals() {
        assert_eq!(parse_value_literal("[]").unwrap(), Value::Seq(vec![]));
        assert_eq!(
            parse_value_literal("([\"a\"], 0)").unwrap(),
            Value::pair(Value::Seq(vec![Value::label("a")]), Value::Int(0))
        );
    }
}
