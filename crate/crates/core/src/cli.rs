//! The `wtl` command line: argument handling, dispatch and output encoding.
//!
//! Structured results go to stdout as JSON, diagnostics to stderr. Exit codes:
//! 0 positive answer, 1 negative answer, 2 usage or input error, 3 a
//! satisfiable verdict whose extracted model failed verification.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::axioms::{run_suite, Schema, SuiteConfig};
use crate::bisim::{bisimilarity, quotient_model, Distinguisher, Flavor};
use crate::check::sat_set;
use crate::formula::{parse_formula, Formula};
use crate::tableau::{Engine, RuleOrder, Verdict};
use crate::wts::{parse_wts, serialize_wts, Wts};

pub const EXIT_POSITIVE: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_EXTRACTION_GAP: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "wtl",
    version,
    about = "Model checking, bisimulation and satisfiability for weighted transition systems"
)]
struct Cli {
    /// Pretty-print JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct FormulaInput {
    /// Formula text.
    #[arg(long)]
    formula: Option<String>,
    /// File containing the formula (`-` for stdin).
    #[arg(long)]
    formula_file: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a formula at a state.
    Mc {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        state: String,
        #[command(flatten)]
        input: FormulaInput,
    },
    /// Decide satisfiability with the tableau procedure.
    Sat {
        #[command(flatten)]
        input: FormulaInput,
        /// Write the extracted model here.
        #[arg(long)]
        emit_model: Option<PathBuf>,
        /// Write the tableau as JSON here.
        #[arg(long)]
        dump_tableau: Option<PathBuf>,
    },
    /// Decide validity.
    Valid {
        #[command(flatten)]
        input: FormulaInput,
    },
    /// Compute bisimilarity classes, or compare two states.
    Bisim {
        #[arg(long)]
        model: PathBuf,
        /// Use classical weighted bisimilarity instead of the generalized one.
        #[arg(long)]
        weighted: bool,
        #[arg(long = "state")]
        states: Vec<String>,
    },
    /// Find a formula telling two states apart.
    Distinguish {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "state", num_args = 1, required = true)]
        states: Vec<String>,
    },
    /// Quotient a model by generalized bisimilarity.
    Quotient {
        #[arg(long)]
        model: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Check the axiom schemes on random models.
    Axioms {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        schema: Option<String>,
    },
    /// Reprint a model or formula in canonical form.
    Fmt {
        #[arg(long, conflicts_with_all = ["formula", "formula_file"])]
        model: Option<PathBuf>,
        #[arg(long)]
        formula: Option<String>,
        #[arg(long)]
        formula_file: Option<PathBuf>,
    },
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
}

struct Failure {
    kind: &'static str,
    message: String,
}

impl Failure {
    fn new(kind: &'static str, message: impl ToString) -> Self {
        Failure {
            kind,
            message: message.to_string(),
        }
    }
}

struct Context<'a> {
    stdin: &'a [u8],
    pretty: bool,
    stdout: Vec<u8>,
    stderr: Vec<u8>,
}

impl Context<'_> {
    fn read(&self, path: &Path) -> Result<Vec<u8>, Failure> {
        if path == Path::new("-") {
            return Ok(self.stdin.to_vec());
        }
        fs::read(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))
    }

    fn write(&self, path: &Path, bytes: &[u8]) -> Result<(), Failure> {
        fs::write(path, bytes).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))
    }

    fn model(&self, path: &Path) -> Result<Wts, Failure> {
        parse_wts(&self.read(path)?).map_err(|e| Failure::new("model", e))
    }

    fn formula(&self, text: Option<&str>, file: Option<&Path>) -> Result<Formula, Failure> {
        let text = match (text, file) {
            (Some(t), None) => t.to_string(),
            (None, Some(f)) => {
                String::from_utf8(self.read(f)?).map_err(|e| Failure::new("io", e))?
            }
            _ => {
                return Err(Failure::new(
                    "usage",
                    "give exactly one of --formula and --formula-file",
                ))
            }
        };
        parse_formula(text.trim()).map_err(|e| Failure::new("formula", e))
    }

    fn emit(&mut self, value: Value) {
        let text = if self.pretty {
            serde_json::to_string_pretty(&value)
        } else {
            serde_json::to_string(&value)
        }
        .expect("json");
        self.stdout.extend_from_slice(text.as_bytes());
        self.stdout.push(b'\n');
    }

    fn note(&mut self, message: &str) {
        self.stderr.extend_from_slice(message.as_bytes());
        self.stderr.push(b'\n');
    }
}

fn exit_for(positive: bool) -> i32 {
    if positive {
        EXIT_POSITIVE
    } else {
        EXIT_NEGATIVE
    }
}

fn model_json(model: &Wts) -> Value {
    serde_json::from_slice(&serialize_wts(model)).expect("model json")
}

fn dispatch(command: Command, ctx: &mut Context<'_>) -> Result<i32, Failure> {
    match command {
        Command::Mc {
            model,
            state,
            input,
        } => {
            let model = ctx.model(&model)?;
            let f = ctx.formula(input.formula.as_deref(), input.formula_file.as_deref())?;
            let s = model
                .state_index(&state)
                .map_err(|e| Failure::new("model", e))?;
            let holds = sat_set(&model, &f).contains(s);
            ctx.emit(json!({ "holds": holds }));
            Ok(exit_for(holds))
        }
        Command::Sat {
            input,
            emit_model,
            dump_tableau,
        } => {
            let f = ctx.formula(input.formula.as_deref(), input.formula_file.as_deref())?;
            let decision = Engine::new().decide(&f, RuleOrder::Canonical);
            if let Some(path) = &dump_tableau {
                let mut bytes =
                    serde_json::to_vec_pretty(&decision.tableau.to_json()).expect("json");
                bytes.push(b'\n');
                ctx.write(path, &bytes)?;
            }
            match &decision.verdict {
                Verdict::Unsat => {
                    ctx.emit(json!({ "satisfiable": false }));
                    Ok(EXIT_NEGATIVE)
                }
                Verdict::Sat {
                    model,
                    state,
                    verified,
                } => {
                    if let Some(path) = &emit_model {
                        ctx.write(path, &serialize_wts(model))?;
                    }
                    ctx.emit(json!({
                        "satisfiable": true,
                        "verified": verified,
                        "state": state,
                        "model": model_json(model),
                    }));
                    if *verified {
                        Ok(EXIT_POSITIVE)
                    } else {
                        ctx.note(&format!(
                            "extraction gap: the extracted model does not satisfy {f} at {state}"
                        ));
                        Ok(EXIT_EXTRACTION_GAP)
                    }
                }
            }
        }
        Command::Valid { input } => {
            let f = ctx.formula(input.formula.as_deref(), input.formula_file.as_deref())?;
            let valid = crate::tableau::is_valid(&f);
            ctx.emit(json!({ "valid": valid }));
            Ok(exit_for(valid))
        }
        Command::Bisim {
            model,
            weighted,
            states,
        } => {
            let model = ctx.model(&model)?;
            let flavor = if weighted {
                Flavor::Weighted
            } else {
                Flavor::Generalized
            };
            let partition = bisimilarity(&model, flavor);
            match states.as_slice() {
                [] => {
                    ctx.emit(json!({
                        "flavor": if weighted { "weighted" } else { "generalized" },
                        "blocks": partition.to_names(&model),
                    }));
                    Ok(EXIT_POSITIVE)
                }
                [a, b] => {
                    let a = model.state_index(a).map_err(|e| Failure::new("model", e))?;
                    let b = model.state_index(b).map_err(|e| Failure::new("model", e))?;
                    let same = partition.same_block(a, b);
                    ctx.emit(json!({ "bisimilar": same }));
                    Ok(exit_for(same))
                }
                _ => Err(Failure::new(
                    "usage",
                    "--state must be given exactly twice or not at all",
                )),
            }
        }
        Command::Distinguish { model, states } => {
            let model = ctx.model(&model)?;
            let [a, b] = states.as_slice() else {
                return Err(Failure::new("usage", "--state must be given exactly twice"));
            };
            let a = model.state_index(a).map_err(|e| Failure::new("model", e))?;
            let b = model.state_index(b).map_err(|e| Failure::new("model", e))?;
            match Distinguisher::new(&model).distinguish(a, b) {
                Some(f) => {
                    ctx.emit(json!({ "distinguishable": true, "formula": f.to_string() }));
                    Ok(EXIT_POSITIVE)
                }
                None => {
                    ctx.emit(json!({ "distinguishable": false, "bisimilar": true }));
                    Ok(EXIT_NEGATIVE)
                }
            }
        }
        Command::Quotient { model, output } => {
            let model = ctx.model(&model)?;
            let partition = bisimilarity(&model, Flavor::Generalized);
            let quotient =
                quotient_model(&model, &partition).map_err(|e| Failure::new("contract", e))?;
            match output {
                Some(path) => {
                    ctx.write(&path, &serialize_wts(&quotient))?;
                    ctx.emit(json!({
                        "states": quotient.num_states(),
                        "transitions": quotient.num_transitions(),
                        "blocks": partition.to_names(&model),
                        "output": path.display().to_string(),
                    }));
                }
                None => ctx.stdout.extend_from_slice(&serialize_wts(&quotient)),
            }
            Ok(EXIT_POSITIVE)
        }
        Command::Axioms {
            seed,
            trials,
            schema,
        } => {
            if trials == 0 {
                return Err(Failure::new("usage", "--trials must be at least 1"));
            }
            let mut config = SuiteConfig::default();
            if let Some(name) = schema {
                config.schemas = vec![name
                    .parse::<Schema>()
                    .map_err(|e| Failure::new("usage", e))?];
            }
            let report = run_suite(seed, trials, &config);
            let passed = report.sound_violations() == 0;
            let mut value = serde_json::to_value(&report).expect("json");
            value["passed"] = json!(passed);
            ctx.emit(value);
            Ok(exit_for(passed))
        }
        Command::Fmt {
            model,
            formula,
            formula_file,
        } => {
            if let Some(path) = model {
                let m = ctx.model(&path)?;
                ctx.stdout.extend_from_slice(&serialize_wts(&m));
            } else {
                let f = ctx.formula(formula.as_deref(), formula_file.as_deref())?;
                ctx.stdout.extend_from_slice(f.to_string().as_bytes());
                ctx.stdout.push(b'\n');
            }
            Ok(EXIT_POSITIVE)
        }
    }
}

fn error_line(kind: &str, message: &str) -> Vec<u8> {
    let mut line = serde_json::to_vec(&json!({ "error": kind, "message": message })).expect("json");
    line.push(b'\n');
    line
}

/// Runs one invocation. `args` excludes the program name.
pub fn run<S: AsRef<str>>(args: &[S], stdin: &[u8]) -> CliOutput {
    let argv = std::iter::once("wtl").chain(args.iter().map(AsRef::as_ref));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return CliOutput {
                    code: EXIT_POSITIVE,
                    stdout: e.to_string().into_bytes(),
                    stderr: Vec::new(),
                };
            }
            let message = e.to_string();
            let first = message
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            return CliOutput {
                code: EXIT_ERROR,
                stdout: Vec::new(),
                stderr: error_line("usage", first),
            };
        }
    };
    let mut ctx = Context {
        stdin,
        pretty: cli.pretty,
        stdout: Vec::new(),
        stderr: Vec::new(),
    };
    match dispatch(cli.command, &mut ctx) {
        Ok(code) => CliOutput {
            code,
            stdout: ctx.stdout,
            stderr: ctx.stderr,
        },
        Err(f) => {
            let mut stderr = ctx.stderr;
            stderr.extend(error_line(f.kind, &f.message));
            CliOutput {
                code: EXIT_ERROR,
                stdout: Vec::new(),
                stderr,
            }
        }
    }
}
