use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::cli::commands::{normal_form_text, resolve_comodel, resolve_theory};
use crate::cli::parser::{parse_program, parse_value, parse_value_then_program};
use crate::comodel::cointerpret_tree;
use crate::error::{Error, Result};
use crate::free::{normalize, normalizer};
use crate::lang::{
    eval_pure, first_order, typecheck_comp, typecheck_value, Env, Evaluator, TypeEnv,
};
use crate::sigterm::Theory;

const HELP: &str = "\
<computation>                   evaluate and print the tree with its type
:type <computation>             print the inferred type
:normalize <computation>        print the canonical tree
:run <comodel> <world> <comp>   run against a comodel (state, transcript[:k], or a file)
:def <name> = <value>           bind a value for later lines
:load <theory>                  switch theory (built-in key or file)
:theory                         print the current theory
:q                              quit";

/// Interactive state: the current theory and the definitions made so far.
pub struct Repl {
    theory: Arc<Theory>,
    types: TypeEnv,
    env: Env,
}

/// What one input line produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reply {
    Text(String),
    Quit,
}

impl Repl {
    pub fn new(theory: Arc<Theory>) -> Self {
        Repl {
            theory,
            types: TypeEnv::new(),
            env: Env::prelude(),
        }
    }

    pub fn theory(&self) -> &Arc<Theory> {
        &self.theory
    }

    /// Handles one line. Errors are rendered, never propagated.
    pub fn line(&mut self, input: &str) -> Reply {
        let input = input.trim();
        if input == ":q" || input == ":quit" {
            return Reply::Quit;
        }
        Reply::Text(match self.dispatch(input) {
            Ok(s) => s,
            Err(e) => format!("error: {e}"),
        })
    }

    fn dispatch(&mut self, input: &str) -> Result<String> {
        if input.is_empty() {
            return Ok(String::new());
        }
        let (cmd, rest) = match input.strip_prefix(':') {
            Some(s) => {
                let (c, r) = s.split_once(char::is_whitespace).unwrap_or((s, ""));
                (Some(c), r.trim())
            }
            None => (None, input),
        };
        match cmd {
            None => self.evaluate(rest),
            Some("help") => Ok(HELP.to_string()),
            Some("type") => {
                let c = parse_program(rest)?;
                Ok(typecheck_comp(&self.types, &c, &self.theory)?.to_string())
            }
            Some("normalize") => {
                Ok(normal_form_text(rest, &self.theory, &self.env, &self.types)?.0)
            }
            Some("run") => self.run(rest),
            Some("def") => self.define(rest),
            Some("load") => {
                self.theory = resolve_theory(rest)?;
                self.types = TypeEnv::new();
                self.env = Env::prelude();
                Ok(format!("loaded {}", self.theory.name))
            }
            Some("theory") => Ok(self.theory.to_string().trim_end().to_string()),
            Some(other) => Err(Error::Invalid(format!(
                "unknown command :{other} (try :help)"
            ))),
        }
    }

    fn evaluate(&self, src: &str) -> Result<String> {
        let c = parse_program(src)?;
        let ty = typecheck_comp(&self.types, &c, &self.theory)?;
        let tree = eval_pure(&c, &self.env, &self.theory)?.tree;
        let shown = match first_order(&tree) {
            Ok(t) if normalizer(&self.theory).is_some() => normalize(&self.theory, &t)?.to_string(),
            Ok(t) => t.to_string(),
            Err(_) => tree.to_string(),
        };
        Ok(format!("{shown} : {ty}"))
    }

    fn run(&self, rest: &str) -> Result<String> {
        let (spec, rest) = rest
            .split_once(char::is_whitespace)
            .ok_or_else(|| Error::Invalid("usage: :run <comodel> <world> <computation>".into()))?;
        let (w0, c) = parse_value_then_program(rest)?;
        typecheck_comp(&self.types, &c, &self.theory)?;
        let co = resolve_comodel(spec, &self.theory)?;
        if !co.world().contains(&w0) {
            return Err(Error::Invalid(format!(
                "{w0} is not a world of {}",
                co.world()
            )));
        }
        let tree = eval_pure(&c, &self.env, &self.theory)?.tree;
        Ok(cointerpret_tree(&w0, &tree, &co).to_string())
    }

    fn define(&mut self, rest: &str) -> Result<String> {
        let (name, value) = rest
            .split_once('=')
            .ok_or_else(|| Error::Invalid("usage: :def <name> = <value>".into()))?;
        let name = name.trim();
        if !crate::sigterm::is_plain_ident(name) || crate::cli::lexer::RESERVED.contains(&name) {
            return Err(Error::Invalid(format!("{name} is not a valid name")));
        }
        let v = parse_value(value)?;
        let ty = typecheck_value(&self.types, &v, &self.theory)?;
        let rv = Evaluator::new(self.theory.clone()).value(&v, &self.env)?;
        self.types.insert(name, ty.clone());
        self.env = self.env.bind(name, rv);
        Ok(format!("{name} : {ty}"))
    }
}

/// Reads lines from `input` until end of input or `:q`.
pub fn run_repl(
    theory: Arc<Theory>,
    input: impl BufRead,
    mut output: impl Write,
    prompt: bool,
) -> std::io::Result<()> {
    let mut repl = Repl::new(theory);
    let mut lines = input.lines();
    loop {
        if prompt {
            write!(output, "algeff> ")?;
            output.flush()?;
        }
        let Some(line) = lines.next() else {
            return Ok(());
        };
        match repl.line(&line?) {
            Reply::Quit => return Ok(()),
            Reply::Text(t) if t.is_empty() => {}
            Reply::Text(t) => writeln!(output, "{t}")?,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn repl(theory: &str) -> Repl {
        Repl::new(resolve_theory(theory).unwrap())
    }

    fn text(r: Reply) -> String {
        match r {
            Reply::Text(t) => t,
            Reply::Quit => panic!("unexpected quit"),
        }
    }

    #[test]
    fn type_of_print() {
        let mut r = repl("io(enum {hi})");
        assert_eq!(text(r.line(":type print!(\"hi\")")), "unit ! {print}");
    }

    #[test]
    fn normalize_two_gets() {
        let mut r = repl("single-state(fin 2)");
        assert_eq!(
            text(r.line(":normalize do x <- get!() in do y <- get!() in return (x,y)")),
            "get((); [put(0; [return (0, 0)]), put(1; [return (1, 1)])])"
        );
    }

    #[test]
    fn definitions_and_run() {
        let mut r = repl("single-state(fin 10)");
        assert_eq!(
            text(r.line(
                ":def inc = fun b -> if b then do x <- get!() in put!(x + 1) else return ()"
            )),
            "inc : bool -> unit ! {get, put}"
        );
        assert_eq!(text(r.line(":run state 9 inc true")), "() @ 0");
        assert!(text(r.line(":type inc 3")).starts_with("error: type error"));
    }

    #[test]
    fn errors_do_not_end_the_session() {
        let mut r = repl("exception");
        assert!(text(r.line("return")).starts_with("error: syntax error at 1:7"));
        assert!(text(r.line(":bogus")).starts_with("error: unknown command"));
        assert_eq!(text(r.line("return 1")), "return 1 : int ! {}");
        assert_eq!(r.line(":q"), Reply::Quit);
    }

    #[test]
    fn session_over_a_reader() {
        let theory = resolve_theory("choice").unwrap();
        let mut out = Vec::new();
        run_repl(
            theory,
            "choose!()\n:q\nreturn 1\n".as_bytes(),
            &mut out,
            false,
        )
        .unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "choose((); [return false, return true]) : bool ! {choose}\n"
        );
    }
}
