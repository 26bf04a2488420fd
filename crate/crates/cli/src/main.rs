//! Command-line interface for exact Laurent-ring computations.
//!
//! Every subcommand reads a session file of declarations (`ring`, `torus`,
//! `subalgebra`, `grading`, `auto`, `hom`, `cmd`) and runs one operation
//! against it. Selectors can be given as flags, inherited from a matching
//! `cmd` line in the file, or — where unambiguous — defaulted to the only
//! declared object. `laurel run` executes every `cmd` line in order.
//!
//! Exit codes: 0 success (including a negative verdict), 1 computation
//! rejected well-formed input (also: a failed `selfcheck`), 2 a theorem
//! hypothesis failed, 3 the file or flags could not be interpreted.

mod exec;
mod lower;
mod selfcheck;
mod session;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use exec::{execute, Outcome};
use lower::CliError;
use session::{parse_session, Request, SessionFile};

#[derive(Parser)]
#[command(
    name = "laurel",
    version,
    about = "Exact computations in Laurent polynomial rings",
    after_help = "Exit codes: 0 success, 1 rejected input or failed selfcheck, \
                  2 hypothesis failure, 3 unreadable file or flags."
)]
struct Cli {
    /// Emit a JSON report envelope instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Include step-by-step detail and the full check ledger.
    #[arg(long, global = true)]
    trace: bool,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide whether an element is a unit of a ring, torus, or subalgebra.
    Units {
        file: PathBuf,
        /// Object to work in (defaults to the file's `cmd units` line).
        #[arg(long)]
        object: Option<String>,
        /// Element, in the object's variables.
        #[arg(long)]
        expr: Option<String>,
    },
    /// Decompose an element into homogeneous components under a grading.
    Grade {
        file: PathBuf,
        #[arg(long)]
        object: Option<String>,
        #[arg(long)]
        grading: Option<String>,
        #[arg(long)]
        expr: Option<String>,
    },
    /// Compute the lattice of gradings a presented ring admits.
    Gradings {
        file: PathBuf,
        #[arg(long)]
        ring: Option<String>,
    },
    /// Test whether every declared unit is neutral for all admitted gradings.
    Neutral {
        file: PathBuf,
        #[arg(long)]
        ring: Option<String>,
    },
    /// Apply a monomial automorphism (optionally composed with a second).
    Auto {
        file: PathBuf,
        #[arg(long)]
        auto: Option<String>,
        /// Automorphism applied after the first.
        #[arg(long)]
        then: Option<String>,
        #[arg(long)]
        object: Option<String>,
        #[arg(long)]
        expr: Option<String>,
    },
    /// Reconstruct a ring isomorphism from a hom of Laurent extensions.
    Reconstruct {
        file: PathBuf,
        #[arg(long)]
        hom: Option<String>,
    },
    /// Normalize a rank-one unit group onto a single generator.
    Normalize {
        file: PathBuf,
        #[arg(long)]
        algebra: Option<String>,
        #[arg(long)]
        grading: Option<String>,
        /// Presented ring to localize along the way.
        #[arg(long)]
        localize: Option<String>,
    },
    /// Decide whether an algebra is a Laurent line over its base.
    Characterize {
        file: PathBuf,
        #[arg(long)]
        object: Option<String>,
    },
    /// Peel adjoined coordinates off a unit-torus extension automorphism.
    #[command(name = "bg-cancel")]
    BgCancel {
        file: PathBuf,
        #[arg(long)]
        algebra: Option<String>,
        /// Number of adjoined coordinates.
        #[arg(long)]
        adjoin: Option<usize>,
        #[arg(long)]
        auto: Option<String>,
    },
    /// Run the cancellation dispatcher on a hom and/or monomial instance.
    Cancel {
        file: PathBuf,
        #[arg(long)]
        hom: Option<String>,
        #[arg(long)]
        source: Option<String>,
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        adjoin: Option<usize>,
        #[arg(long)]
        auto: Option<String>,
    },
    /// Execute every `cmd` line of the file in order.
    Run { file: PathBuf },
    /// Run the built-in randomized self-checks.
    Selfcheck {
        /// Seed for the random generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code: u8 = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json = cli.json;
    let trace = cli.trace;
    let code = match cli.command {
        Cmd::Units { file, object, expr } => one(&file, json, trace, "units", |f| {
            let c = sole_cmd(f, "units")?;
            let object = pick(object, c.as_ref().map(units_object), || sole_object(f))?;
            let expr = pick_expr(expr, c.as_ref().map(units_expr))?;
            Ok(Request::Units { object, expr })
        }),
        Cmd::Grade { file, object, grading, expr } => one(&file, json, trace, "grade", |f| {
            let c = sole_cmd(f, "grade")?;
            let object = pick(object, c.as_ref().map(grade_object), || sole_object(f))?;
            let grading =
                pick(grading, c.as_ref().map(grade_grading), || sole_grading(f))?;
            let expr = pick_expr(expr, c.as_ref().map(grade_expr))?;
            Ok(Request::Grade { object, grading, expr })
        }),
        Cmd::Gradings { file, ring } => one(&file, json, trace, "gradings", |f| {
            let c = sole_cmd(f, "gradings")?;
            let ring = pick(ring, c.map(|r| ring_of(&r)), || sole_ring(f))?;
            Ok(Request::Gradings { ring })
        }),
        Cmd::Neutral { file, ring } => one(&file, json, trace, "neutral", |f| {
            let c = sole_cmd(f, "neutral")?;
            let ring = pick(ring, c.map(|r| ring_of(&r)), || sole_ring(f))?;
            Ok(Request::Neutral { ring })
        }),
        Cmd::Auto { file, auto, then, object, expr } => {
            one(&file, json, trace, "auto", |f| {
                let c = sole_cmd(f, "auto")?;
                let then = if auto.is_some() {
                    then.clone()
                } else {
                    then.clone().or_else(|| c.as_ref().and_then(auto_then))
                };
                let auto =
                    pick(auto.clone(), c.as_ref().map(auto_auto), || sole_auto(f))?;
                let object = pick(object.clone(), c.as_ref().map(auto_object), || {
                    sole_object(f)
                })?;
                let expr = pick_expr(expr.clone(), c.as_ref().map(auto_expr))?;
                Ok(Request::Auto { auto, object, expr, then })
            })
        }
        Cmd::Reconstruct { file, hom } => one(&file, json, trace, "reconstruct", |f| {
            let c = sole_cmd(f, "reconstruct")?;
            let hom = pick(hom, c.map(|r| hom_of(&r)), || sole_hom(f))?;
            Ok(Request::Reconstruct { hom })
        }),
        Cmd::Normalize { file, algebra, grading, localize } => {
            one(&file, json, trace, "normalize", |f| {
                let c = sole_cmd(f, "normalize")?;
                let algebra = pick(algebra.clone(), c.as_ref().map(norm_algebra), || {
                    sole_subalgebra(f)
                })?;
                let grading = pick(grading.clone(), c.as_ref().map(norm_grading), || {
                    sole_grading(f)
                })?;
                let localize =
                    localize.clone().or_else(|| c.as_ref().and_then(norm_localize));
                Ok(Request::Normalize { algebra, grading, localize })
            })
        }
        Cmd::Characterize { file, object } => {
            one(&file, json, trace, "characterize", |f| {
                let c = sole_cmd(f, "characterize")?;
                let object = pick(object, c.map(|r| object_of(&r)), || sole_object(f))?;
                Ok(Request::Characterize { object })
            })
        }
        Cmd::BgCancel { file, algebra, adjoin, auto } => {
            one(&file, json, trace, "bg-cancel", |f| {
                let c = sole_cmd(f, "bg-cancel")?;
                let algebra = pick(algebra.clone(), c.as_ref().map(bg_algebra), || {
                    sole_subalgebra(f)
                })?;
                let auto = pick(auto.clone(), c.as_ref().map(bg_auto), || sole_auto(f))?;
                let adjoin = match adjoin.or_else(|| c.as_ref().map(bg_adjoin)) {
                    Some(n) => n,
                    None => {
                        return Err(CliError::session(
                            "no adjoined count given; add --adjoin",
                        ))
                    }
                };
                Ok(Request::BgCancel { algebra, adjoin, auto })
            })
        }
        Cmd::Cancel { file, hom, source, target, adjoin, auto } => {
            one(&file, json, trace, "cancel", |f| {
                let any_flag = hom.is_some()
                    || source.is_some()
                    || target.is_some()
                    || adjoin.is_some()
                    || auto.is_some();
                if any_flag {
                    Ok(Request::Cancel {
                        hom: hom.clone(),
                        source: source.clone(),
                        target: target.clone(),
                        adjoin: adjoin.unwrap_or(0),
                        auto: auto.clone(),
                    })
                } else {
                    match sole_cmd(f, "cancel")? {
                        Some(req) => Ok(req),
                        None => Err(CliError::session(
                            "no cancellation instance: pass flags or add a cmd line",
                        )),
                    }
                }
            })
        }
        Cmd::Run { file } => run_all(&file, json, trace),
        Cmd::Selfcheck { seed } => {
            let (out, code) = selfcheck::run_selfcheck(seed);
            emit("selfcheck", json, Ok(out)).max(code)
        }
    };
    ExitCode::from(code)
}

// ---------------------------------------------------------------------------
// Selector resolution.

/// Field accessors for inheriting selectors from a `cmd` line.
fn units_object(r: &Request) -> String {
    match r {
        Request::Units { object, .. } => object.clone(),
        _ => unreachable!(),
    }
}

fn units_expr(r: &Request) -> String {
    match r {
        Request::Units { expr, .. } => expr.clone(),
        _ => unreachable!(),
    }
}

fn grade_object(r: &Request) -> String {
    match r {
        Request::Grade { object, .. } => object.clone(),
        _ => unreachable!(),
    }
}

fn grade_grading(r: &Request) -> String {
    match r {
        Request::Grade { grading, .. } => grading.clone(),
        _ => unreachable!(),
    }
}

fn grade_expr(r: &Request) -> String {
    match r {
        Request::Grade { expr, .. } => expr.clone(),
        _ => unreachable!(),
    }
}

fn ring_of(r: &Request) -> String {
    match r {
        Request::Gradings { ring } | Request::Neutral { ring } => ring.clone(),
        _ => unreachable!(),
    }
}

fn auto_auto(r: &Request) -> String {
    match r {
        Request::Auto { auto, .. } => auto.clone(),
        _ => unreachable!(),
    }
}

fn auto_then(r: &Request) -> Option<String> {
    match r {
        Request::Auto { then, .. } => then.clone(),
        _ => unreachable!(),
    }
}

fn auto_object(r: &Request) -> String {
    match r {
        Request::Auto { object, .. } => object.clone(),
        _ => unreachable!(),
    }
}

fn auto_expr(r: &Request) -> String {
    match r {
        Request::Auto { expr, .. } => expr.clone(),
        _ => unreachable!(),
    }
}

fn hom_of(r: &Request) -> String {
    match r {
        Request::Reconstruct { hom } => hom.clone(),
        _ => unreachable!(),
    }
}

fn norm_algebra(r: &Request) -> String {
    match r {
        Request::Normalize { algebra, .. } => algebra.clone(),
        _ => unreachable!(),
    }
}

fn norm_grading(r: &Request) -> String {
    match r {
        Request::Normalize { grading, .. } => grading.clone(),
        _ => unreachable!(),
    }
}

fn norm_localize(r: &Request) -> Option<String> {
    match r {
        Request::Normalize { localize, .. } => localize.clone(),
        _ => unreachable!(),
    }
}

fn object_of(r: &Request) -> String {
    match r {
        Request::Characterize { object } => object.clone(),
        _ => unreachable!(),
    }
}

fn bg_algebra(r: &Request) -> String {
    match r {
        Request::BgCancel { algebra, .. } => algebra.clone(),
        _ => unreachable!(),
    }
}

fn bg_adjoin(r: &Request) -> usize {
    match r {
        Request::BgCancel { adjoin, .. } => *adjoin,
        _ => unreachable!(),
    }
}

fn bg_auto(r: &Request) -> String {
    match r {
        Request::BgCancel { auto, .. } => auto.clone(),
        _ => unreachable!(),
    }
}

/// The file's only `cmd` line of the given kind, if any.
fn sole_cmd(file: &SessionFile, kind: &str) -> Result<Option<Request>, CliError> {
    let mut found: Vec<&Request> = file
        .cmds
        .iter()
        .map(|c| &c.request)
        .filter(|r| r.command() == kind)
        .collect();
    match found.len() {
        0 => Ok(None),
        1 => Ok(Some(found.pop().unwrap().clone())),
        _ => Err(CliError::session(format!(
            "several 'cmd {kind}' lines; pass flags or use 'laurel run'"
        ))),
    }
}

/// Resolves a selector: explicit flag, then the `cmd` line, then a fallback.
fn pick(
    flag: Option<String>,
    from_cmd: Option<String>,
    fallback: impl FnOnce() -> Result<String, CliError>,
) -> Result<String, CliError> {
    match flag.or(from_cmd) {
        Some(v) => Ok(v),
        None => fallback(),
    }
}

/// Expressions are never guessed: they come from a flag or a `cmd` line.
fn pick_expr(flag: Option<String>, from_cmd: Option<String>) -> Result<String, CliError> {
    flag.or(from_cmd)
        .ok_or_else(|| CliError::session("no expression given; add --expr or a cmd line"))
}

fn sole_name<'a, I>(mut names: I, what: &str, flag: &str) -> Result<String, CliError>
where
    I: Iterator<Item = &'a str>,
{
    match (names.next(), names.next()) {
        (Some(n), None) => Ok(n.to_string()),
        (None, _) => Err(CliError::session(format!("no {what} declared in the session"))),
        (Some(_), Some(_)) => Err(CliError::session(format!(
            "several {what}s declared; pass {flag}"
        ))),
    }
}

fn sole_ring(f: &SessionFile) -> Result<String, CliError> {
    sole_name(f.rings.iter().map(|r| r.name.as_str()), "ring", "--ring")
}

fn sole_subalgebra(f: &SessionFile) -> Result<String, CliError> {
    sole_name(f.subalgebras.iter().map(|s| s.name.as_str()), "subalgebra", "--algebra")
}

fn sole_grading(f: &SessionFile) -> Result<String, CliError> {
    sole_name(f.gradings.iter().map(|g| g.name.as_str()), "grading", "--grading")
}

fn sole_auto(f: &SessionFile) -> Result<String, CliError> {
    sole_name(f.autos.iter().map(|a| a.name.as_str()), "automorphism", "--auto")
}

fn sole_hom(f: &SessionFile) -> Result<String, CliError> {
    sole_name(f.homs.iter().map(|h| h.name.as_str()), "hom", "--hom")
}

/// The only element-carrying object: a ring, a subalgebra, or a bare torus.
fn sole_object(f: &SessionFile) -> Result<String, CliError> {
    let hosted: Vec<&str> = f.subalgebras.iter().map(|s| s.torus.as_str()).collect();
    let names: Vec<&str> = f
        .rings
        .iter()
        .map(|r| r.name.as_str())
        .chain(f.subalgebras.iter().map(|s| s.name.as_str()))
        .chain(
            f.tori
                .iter()
                .map(|t| t.name.as_str())
                .filter(|n| !hosted.contains(n)),
        )
        .collect();
    sole_name(names.into_iter(), "object", "--object")
}

// ---------------------------------------------------------------------------
// Envelopes.

fn load_session(path: &Path) -> Result<SessionFile, CliError> {
    let src = std::fs::read_to_string(path).map_err(|e| {
        CliError::session(format!("cannot read {}: {e}", path.display()))
    })?;
    parse_session(&src).map_err(|e| CliError::session(e.to_string()))
}

fn one(
    path: &Path,
    json: bool,
    trace: bool,
    name: &'static str,
    resolve: impl FnOnce(&SessionFile) -> Result<Request, CliError>,
) -> u8 {
    let res = load_session(path).and_then(|file| {
        let req = resolve(&file)?;
        execute(&file, &req, trace)
    });
    emit(name, json, res)
}

fn ok_envelope(command: &str, report: &Value) -> Value {
    json!({
        "schema_version": 1,
        "command": command,
        "status": "ok",
        "report": report,
    })
}

fn error_value(e: &CliError) -> Value {
    json!({
        "kind": e.kind(),
        "message": e.to_string(),
        "exit_code": e.exit_code(),
    })
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("reports serialize"));
}

fn emit(command: &str, json_mode: bool, res: Result<Outcome, CliError>) -> u8 {
    match res {
        Ok(out) => {
            if json_mode {
                print_json(&ok_envelope(command, &out.report));
            } else {
                print!("{}", out.human);
            }
            0
        }
        Err(e) => {
            let code = e.exit_code();
            if json_mode {
                print_json(&json!({
                    "schema_version": 1,
                    "command": command,
                    "status": "error",
                    "error": error_value(&e),
                }));
            } else {
                eprintln!("laurel {command}: {e}");
            }
            code
        }
    }
}

/// Executes every `cmd` line, continuing past failures; exits with the
/// first nonzero code.
fn run_all(path: &Path, json_mode: bool, trace: bool) -> u8 {
    let file = match load_session(path) {
        Ok(f) => f,
        Err(e) => return emit("run", json_mode, Err(e)),
    };
    if file.cmds.is_empty() {
        return emit(
            "run",
            json_mode,
            Err(CliError::session("the session has no cmd lines")),
        );
    }
    let mut results: Vec<Value> = Vec::new();
    let mut human: Vec<String> = Vec::new();
    let mut first_error: Option<CliError> = None;
    for (i, c) in file.cmds.iter().enumerate() {
        let name = c.request.command();
        let res = execute(&file, &c.request, trace);
        match res {
            Ok(out) => {
                results.push(ok_envelope(name, &out.report));
                human.push(format!("== cmd {} ({name}) ==", i + 1));
                human.push(out.human.trim_end().to_string());
            }
            Err(e) => {
                results.push(json!({
                    "schema_version": 1,
                    "command": name,
                    "status": "error",
                    "error": error_value(&e),
                }));
                human.push(format!("== cmd {} ({name}) ==", i + 1));
                human.push(format!("laurel {name}: {e}"));
                if first_error.is_none() {
                    first_error = Some(e);
                }
            }
        }
    }
    let code = first_error.as_ref().map(|e| e.exit_code()).unwrap_or(0);
    if json_mode {
        let mut envelope = json!({
            "schema_version": 1,
            "command": "run",
            "status": if first_error.is_some() { "error" } else { "ok" },
            "report": { "results": results },
        });
        if let Some(e) = &first_error {
            envelope["error"] = error_value(e);
        }
        print_json(&envelope);
    } else {
        for line in &human {
            println!("{line}");
        }
    }
    code
}
