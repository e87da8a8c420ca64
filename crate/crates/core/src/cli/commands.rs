//! Subcommand implementations. Each returns what should be printed and the
//! process exit code; the binary only does I/O.

use std::path::Path;
use std::sync::Arc;

use crate::cli::parser::{
    parse_builtin, parse_comodel, parse_model, parse_program, parse_theory, parse_value,
    parse_value_literal,
};
use crate::comodel::ComodelVerdict;
use crate::comodel::{
    state_comodel, tensor_run, transcript_comodel, validate_comodel, Cointerpretation, RunOutcome,
};
use crate::error::{Error, Result};
use crate::free::{normalize, normalizer};
use crate::lang::{
    check_handler_equations, eval_pure, first_order, typecheck_comp, Env, HandlerVerdict, TypeEnv,
};
use crate::model::{validate_model, ModelVerdict};
use crate::sigterm::{builtin_theory, combine, Theory, Value};

pub const EXIT_OK: i32 = 0;
/// Type errors, violated checks, evaluation failures.
pub const EXIT_FAILURE: i32 = 1;
/// The program performed an operation the world cannot answer.
pub const EXIT_STUCK: i32 = 2;
/// Syntax errors and unresolvable references.
pub const EXIT_INPUT: i32 = 3;

/// Default transcript bound for `transcript` without an explicit length.
pub const DEFAULT_TRANSCRIPT: usize = 16;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Output {
    fn ok(stdout: impl Into<String>) -> Self {
        Output {
            stdout: line(stdout.into()),
            stderr: String::new(),
            code: EXIT_OK,
        }
    }

    fn with_code(stdout: impl Into<String>, code: i32) -> Self {
        Output {
            stdout: line(stdout.into()),
            stderr: String::new(),
            code,
        }
    }

    fn error(e: &Error) -> Self {
        Output {
            stdout: String::new(),
            stderr: line(format!("error: {e}")),
            code: exit_code(e),
        }
    }
}

fn line(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

/// Exit code for a failure: input problems are 3, everything else 1.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. } | Error::Invalid(_) => EXIT_INPUT,
        _ => EXIT_FAILURE,
    }
}

/// A built-in key such as `single-state(fin 10)`, a theory file path, or
/// several of these joined by ` + ` (their sum, without commutation laws).
pub fn resolve_theory(spec: &str) -> Result<Arc<Theory>> {
    let parts: Vec<&str> = spec.split(" + ").collect();
    if parts.len() > 1 {
        let mut acc = (*resolve_theory(parts[0].trim())?).clone();
        for part in &parts[1..] {
            acc = combine(&acc, &*resolve_theory(part.trim())?, false);
        }
        return Ok(Arc::new(acc));
    }
    let path = Path::new(spec);
    if path.is_file() {
        let src =
            std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{spec}: {e}")))?;
        return Ok(Arc::new(parse_theory(&src)?));
    }
    let key = parse_builtin(spec).map_err(|e| {
        Error::Invalid(format!(
            "{spec} is neither a file nor a built-in theory ({e})"
        ))
    })?;
    Ok(Arc::new(builtin_theory(&key)?))
}

/// `state`, `transcript`, `transcript:<k>`, or a comodel file path.
pub fn resolve_comodel(spec: &str, theory: &Arc<Theory>) -> Result<Cointerpretation> {
    if spec == "state" {
        return state_comodel(theory.clone());
    }
    if spec == "transcript" {
        return transcript_comodel(theory.clone(), DEFAULT_TRANSCRIPT);
    }
    if let Some(k) = spec.strip_prefix("transcript:") {
        let k = k
            .parse()
            .map_err(|_| Error::Invalid(format!("bad transcript length {k}")))?;
        return transcript_comodel(theory.clone(), k);
    }
    let src = std::fs::read_to_string(spec).map_err(|e| Error::Invalid(format!("{spec}: {e}")))?;
    parse_comodel(&src, theory.clone())
}

fn default_world(spec: &str) -> Option<Value> {
    spec.starts_with("transcript")
        .then(|| Value::Seq(Vec::new()))
}

fn run_inner(
    program: &str,
    theory: &Arc<Theory>,
    comodel: &str,
    world: Option<&str>,
) -> Result<Output> {
    let c = parse_program(program)?;
    typecheck_comp(&TypeEnv::new(), &c, theory)?;
    let co = resolve_comodel(comodel, theory)?;
    let w0 = match world {
        Some(w) => parse_value_literal(w)?,
        None => default_world(comodel)
            .ok_or_else(|| Error::Invalid("--world is required for this comodel".into()))?,
    };
    if !co.world().contains(&w0) {
        return Err(Error::Invalid(format!(
            "{w0} is not a world of {}",
            co.world()
        )));
    }
    let m = eval_pure(&c, &Env::prelude(), theory)?;
    Ok(match tensor_run(&m, &w0, &co) {
        out @ RunOutcome::Done { .. } => Output::ok(out.to_string()),
        out @ RunOutcome::Stuck { .. } => Output::with_code(out.to_string(), EXIT_STUCK),
    })
}

/// Evaluates a program and runs it against a comodel from world `world`.
pub fn cmd_run(program: &str, theory: &Arc<Theory>, comodel: &str, world: Option<&str>) -> Output {
    run_inner(program, theory, comodel, world).unwrap_or_else(|e| Output::error(&e))
}

/// Prints the inferred type of a program.
pub fn cmd_type(program: &str, theory: &Arc<Theory>) -> Output {
    parse_program(program)
        .and_then(|c| typecheck_comp(&TypeEnv::new(), &c, theory))
        .map(|t| Output::ok(t.to_string()))
        .unwrap_or_else(|e| Output::error(&e))
}

/// The canonical tree of a computation, or its raw tree when the theory
/// has no normalizer.
pub fn normal_form_text(
    program: &str,
    theory: &Arc<Theory>,
    env: &Env,
    tenv: &TypeEnv,
) -> Result<(String, bool)> {
    let c = parse_program(program)?;
    typecheck_comp(tenv, &c, theory)?;
    let tree = first_order(&eval_pure(&c, env, theory)?.tree)?;
    if normalizer(theory).is_some() {
        Ok((normalize(theory, &tree)?.to_string(), true))
    } else {
        Ok((tree.to_string(), false))
    }
}

pub fn cmd_normalize(program: &str, theory: &Arc<Theory>) -> Output {
    match normal_form_text(program, theory, &Env::prelude(), &TypeEnv::new()) {
        Ok((text, true)) => Output::ok(text),
        Ok((text, false)) => Output {
            stdout: line(text),
            stderr: format!(
                "note: {} has no normalizer; the tree is shown as evaluated\n",
                theory.name
            ),
            code: EXIT_OK,
        },
        Err(e) => Output::error(&e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    Model,
    Comodel,
    Handler,
}

fn check_inner(kind: CheckKind, src: &str, theory: &Arc<Theory>, budget: usize) -> Result<Output> {
    Ok(match kind {
        CheckKind::Model => {
            let m = parse_model(src, theory.clone()).map_err(as_input)?;
            let v = validate_model(&m)?;
            let code = if v == ModelVerdict::Valid {
                EXIT_OK
            } else {
                EXIT_FAILURE
            };
            Output::with_code(v.to_string(), code)
        }
        CheckKind::Comodel => {
            let c = parse_comodel(src, theory.clone()).map_err(as_input)?;
            let v = validate_comodel(&c)?;
            let code = if v == ComodelVerdict::Valid {
                EXIT_OK
            } else {
                EXIT_FAILURE
            };
            Output::with_code(v.to_string(), code)
        }
        CheckKind::Handler => {
            let h = parse_value(src)?;
            let report = check_handler_equations(&h, theory, budget)?;
            let mut text = report.verdict.to_string();
            if !report.uncovered.is_empty() {
                text.push_str(&format!("\nforwarded: {}", report.uncovered.join(", ")));
            }
            let code = if report.verdict == HandlerVerdict::Respected {
                EXIT_OK
            } else {
                EXIT_FAILURE
            };
            Output::with_code(text, code)
        }
    })
}

/// Table and reference errors in definition files are input errors.
fn as_input(e: Error) -> Error {
    match e {
        Error::Syntax { .. } => e,
        other => Error::Invalid(other.to_string()),
    }
}

/// Validates a model, comodel or handler definition.
pub fn cmd_check(kind: CheckKind, src: &str, theory: &Arc<Theory>, budget: usize) -> Output {
    check_inner(kind, src, theory, budget).unwrap_or_else(|e| Output::error(&e))
}
