//! Command-line driver: reads JSON inputs, runs one job, and writes a JSON
//! result with provenance plus a short text report.
//!
//! Exit codes: 0 when the job ran (and any check passed), 2 when a check
//! failed, 1 on bad input or a computation that could not complete.

pub mod args;
pub mod commands;
pub mod context;
pub mod job;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Command, VerifyCommand};
use commands::{Outcome, Status};
use context::{write_text, CliError, Context};
use job::JobSpec;

fn command_name(c: &Command) -> String {
    match c {
        Command::Trace(_) => "trace".into(),
        Command::Radon(_) => "radon".into(),
        Command::Reconstruct(_) => "reconstruct".into(),
        Command::Verify(v) => format!(
            "verify {}",
            match v {
                VerifyCommand::Shock { .. } => "shock",
                VerifyCommand::Holomorphy { .. } => "holomorphy",
                VerifyCommand::Match { .. } => "match",
                VerifyCommand::Reparam { .. } => "reparam",
            }
        ),
        Command::Extend(_) => "extend".into(),
        Command::Run { .. } => "run".into(),
    }
}

fn provenance(ctx: &Context) -> Value {
    json!({
        "tool": concat!("abel-radon ", env!("CARGO_PKG_VERSION")),
        "inputs": ctx.inputs,
        "params": ctx.params,
        "seed": ctx.seed,
    })
}

fn execute(ctx: &mut Context, command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Trace(a) => commands::trace(ctx, a),
        Command::Radon(a) => commands::radon(ctx, a),
        Command::Reconstruct(a) => commands::reconstruct_cmd(ctx, a),
        Command::Verify(v) => commands::verify(ctx, v),
        Command::Extend(a) => commands::extend(ctx, a),
        Command::Run { .. } => unreachable!("jobs are expanded before execution"),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn emit(cli: &Cli, name: &str, ctx: &Context, outcome: Result<Outcome, CliError>) -> i32 {
    let (doc, report, code) = match outcome {
        Ok(o) => {
            let code = if o.status == Status::Fail { 2 } else { 0 };
            let doc = json!({
                "command": name,
                "status": o.status.as_str(),
                "provenance": provenance(ctx),
                "summary": o.summary,
                "result": o.result,
            });
            let mut report = format!("abel-radon {name}\n");
            for input in &ctx.inputs {
                report += &format!("  {} {} (sha256 {})\n", input.role, input.path, &input.sha256[..16]);
            }
            for line in &o.lines {
                report += &format!("  {line}\n");
            }
            report += &format!("{}\n", o.status.as_str().to_uppercase());
            (doc, report, code)
        }
        Err(e) => {
            let doc = json!({
                "command": name,
                "status": "error",
                "provenance": provenance(ctx),
                "error": {"kind": e.kind, "message": e.message},
            });
            let report = format!("abel-radon {name}\nERROR ({}): {}\n", e.kind, e.message);
            (doc, report, e.exit_code())
        }
    };
    if let Err(e) = write_text(cli.output.as_ref(), &pretty(&doc)) {
        eprintln!("{}", e.message);
        return 1;
    }
    match &cli.report {
        Some(_) => {
            if let Err(e) = write_text(cli.report.as_ref(), &report) {
                eprintln!("{}", e.message);
                return 1;
            }
        }
        None => eprint!("{report}"),
    }
    code
}

fn load_job(path: &Path, output: Option<&PathBuf>) -> Result<Vec<OsString>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let mut job: JobSpec =
        serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let base = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let mut args = job.to_args(&base)?;
    if let (Some(o), None) = (output, job.output.take()) {
        args.extend(["--output".into(), o.clone().into()]);
    }
    Ok(args)
}

/// Parses `args` (including the program name), runs the job and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Command::Run { job } = &cli.command {
        return match load_job(job, cli.output.as_ref()) {
            Ok(argv) => run(argv),
            Err(e) => emit(&cli, "run", &Context::new(cli.seed), Err(e)),
        };
    }
    let name = command_name(&cli.command);
    let mut ctx = Context::new(cli.seed);
    let outcome = execute(&mut ctx, &cli.command);
    emit(&cli, &name, &ctx, outcome)
}
