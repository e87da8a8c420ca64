use std::io::{self, IsTerminal, Read, Write};
use std::process::ExitCode;

use algeff::cli::commands::{EXIT_INPUT, EXIT_OK};
use algeff::cli::{
    cmd_check, cmd_normalize, cmd_run, cmd_type, resolve_theory, run_repl, CheckKind, Output,
};
use algeff::free::DEFAULT_BUDGET;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "algeff", version, about = "Algebraic effects and handlers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Program file, `-` for stdin, or the program itself with `-e`
    prog: String,
    /// Treat PROG as program text rather than a path
    #[arg(short = 'e', long = "expr")]
    inline: bool,
    /// Built-in key, theory file, or `a + b`
    #[arg(long)]
    theory: String,
}

#[derive(Subcommand)]
enum Command {
    /// Run a program against a comodel
    Run {
        #[command(flatten)]
        source: Source,
        /// `state`, `transcript`, `transcript:<k>`, or a comodel file
        #[arg(long, default_value = "state")]
        comodel: String,
        /// Initial world, e.g. `5` or `["a"]`
        #[arg(long)]
        world: Option<String>,
    },
    /// Validate a model, comodel or handler definition
    Check {
        kind: Kind,
        file: String,
        #[arg(long)]
        theory: String,
    },
    /// Print the canonical form of a program's tree
    Normalize {
        #[command(flatten)]
        source: Source,
    },
    /// Print a program's inferred type
    Type {
        #[command(flatten)]
        source: Source,
    },
    /// Interactive session
    Repl {
        #[arg(long, default_value = "empty")]
        theory: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Model,
    Comodel,
    Handler,
}

fn read_input(path: &str) -> Result<String, String> {
    if path == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| format!("stdin: {e}"))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))
}

fn budget() -> Result<usize, String> {
    match std::env::var("ALGEFF_BUDGET") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| format!("ALGEFF_BUDGET must be a number, got {s:?}")),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn input_error(msg: impl std::fmt::Display) -> Output {
    Output {
        stdout: String::new(),
        stderr: format!("error: {msg}\n"),
        code: EXIT_INPUT,
    }
}

fn execute(cmd: Command) -> Output {
    let (source, theory) = match &cmd {
        Command::Run { source, .. } | Command::Normalize { source } | Command::Type { source } => {
            let text = if source.inline {
                source.prog.clone()
            } else {
                match read_input(&source.prog) {
                    Ok(t) => t,
                    Err(e) => return input_error(e),
                }
            };
            (text, source.theory.as_str())
        }
        Command::Check { file, theory, .. } => match read_input(file) {
            Ok(t) => (t, theory.as_str()),
            Err(e) => return input_error(e),
        },
        Command::Repl { theory } => (String::new(), theory.as_str()),
    };
    let theory = match resolve_theory(theory) {
        Ok(t) => t,
        Err(e) => return input_error(e),
    };
    match cmd {
        Command::Run { comodel, world, .. } => {
            cmd_run(&source, &theory, &comodel, world.as_deref())
        }
        Command::Normalize { .. } => cmd_normalize(&source, &theory),
        Command::Type { .. } => cmd_type(&source, &theory),
        Command::Check { kind, .. } => {
            let budget = match budget() {
                Ok(b) => b,
                Err(e) => return input_error(e),
            };
            let kind = match kind {
                Kind::Model => CheckKind::Model,
                Kind::Comodel => CheckKind::Comodel,
                Kind::Handler => CheckKind::Handler,
            };
            cmd_check(kind, &source, &theory, budget)
        }
        Command::Repl { .. } => {
            let stdin = io::stdin();
            let prompt = stdin.is_terminal();
            match run_repl(theory, stdin.lock(), io::stdout().lock(), prompt) {
                Ok(()) => Output::default(),
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Output::default(),
                Err(e) => Output {
                    stderr: format!("error: {e}\n"),
                    code: 1,
                    ..Output::default()
                },
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are input errors; 2 is reserved for stuck runs
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let out = execute(cli.command);
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let mut stdout = io::stdout().lock();
    let _ = stdout.write_all(out.stdout.as_bytes());
    let _ = stdout.flush();
    let _ = io::stderr().write_all(out.stderr.as_bytes());
    if out.code == EXIT_OK {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(out.code as u8)
    }
}
