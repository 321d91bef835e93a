//! `epddl`: validate, ground, translate, solve and profile E-PDDL problems.
//!
//! Exit codes: 0 success, 1 errors in the input or translation, 2 I/O or
//! usage failure, 3 search resource limit reached.

mod commands;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use epddl::oracle::SearchLimits;
use epddl::{MarOptions, PdkbOptions};
use rayon::prelude::*;
use serde_json::json;

use commands::{Command, Inputs, Target, TranslateArgs};
use report::{Exit, Report, Style};

#[derive(Debug, Parser)]
#[command(
    name = "epddl",
    version,
    about = "E-PDDL toolkit: validate, ground, translate, solve"
)]
struct Cli {
    /// Emit JSON lines (one record per line, each with a `kind` field).
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Args)]
struct Problem {
    /// Domain file.
    #[arg(required_unless_present = "batch")]
    domain: Option<PathBuf>,
    /// Instance file.
    #[arg(required_unless_present = "batch")]
    instance: Option<PathBuf>,
    /// File listing `domain instance` path pairs, one per line; processed concurrently.
    #[arg(long, conflicts_with_all = ["domain", "instance"])]
    batch: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Check a domain/instance pair and report diagnostics.
    Validate(Problem),
    /// Print one JSON record per ground action.
    Ground(Problem),
    /// Write planner inputs for one or more targets.
    Translate {
        #[command(flatten)]
        problem: Problem,
        /// Output language; repeat for several.
        #[arg(long, value_enum, required = true)]
        target: Vec<Target>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Reproduce the published PDKB example layout.
        #[arg(long)]
        listing_faithful: bool,
        /// Drop duplicate knowledge chains in PDKB effects.
        #[arg(long)]
        dedupe_chains: bool,
        /// Translate ontic actions with unusual observers into explicit PDKB effects.
        #[arg(long)]
        explicit_fallback: bool,
        /// Rename a predicate in mAρ output, as `from=to`; repeatable.
        #[arg(long, value_parser = parse_rename)]
        rename: Vec<(String, String)>,
    },
    /// Search for a shortest plan with the reference semantics.
    Solve {
        #[command(flatten)]
        problem: Problem,
        /// Longest plan considered.
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        /// Distinct states explored before giving up (exit 3).
        #[arg(long, default_value_t = 200_000)]
        max_states: usize,
    },
    /// Report problem features and a planner recommendation.
    Features(Problem),
}

fn parse_rename(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((from, to)) if !from.is_empty() && !to.is_empty() => {
            Ok((from.to_owned(), to.to_owned()))
        }
        _ => Err(format!("expected `from=to`, got `{s}`")),
    }
}

fn split(cmd: Cmd) -> (Problem, Command) {
    match cmd {
        Cmd::Validate(p) => (p, Command::Validate),
        Cmd::Ground(p) => (p, Command::Ground),
        Cmd::Features(p) => (p, Command::Features),
        Cmd::Solve {
            problem,
            max_len,
            max_states,
        } => (
            problem,
            Command::Solve {
                limits: SearchLimits {
                    max_len,
                    max_states,
                },
            },
        ),
        Cmd::Translate {
            problem,
            target,
            out,
            listing_faithful,
            dedupe_chains,
            explicit_fallback,
            rename,
        } => (
            problem,
            Command::Translate(TranslateArgs {
                targets: target,
                out,
                pdkb: PdkbOptions {
                    listing_faithful,
                    dedupe_chains,
                    explicit_fallback,
                },
                mar: MarOptions {
                    rename: rename.into_iter().collect(),
                },
            }),
        ),
    }
}

/// Reads a batch list; relative paths resolve against the list's directory.
fn read_batch(list: &Path) -> Result<Vec<Inputs>, String> {
    let text = std::fs::read_to_string(list).map_err(|e| e.to_string())?;
    let base = list.parent().unwrap_or(Path::new(""));
    text.lines()
        .enumerate()
        .map(|(n, l)| (n, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(
            |(n, l)| match l.split_whitespace().collect::<Vec<_>>().as_slice() {
                [d, i] => Ok(Inputs {
                    domain: base.join(d),
                    instance: base.join(i),
                }),
                _ => Err(format!("line {}: expected `domain instance`", n + 1)),
            },
        )
        .collect()
}

fn emit(report: &Report) {
    // output errors (closed pipes) are not worth a panic
    let _ = std::io::stdout().lock().write_all(report.out.as_bytes());
    let _ = std::io::stderr().lock().write_all(report.err.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let style = Style::from_env(cli.json);
    let (problem, command) = split(cli.command);

    let Some(list) = problem.batch else {
        let inputs = Inputs {
            domain: problem.domain.expect("required by clap"),
            instance: problem.instance.expect("required by clap"),
        };
        let mut report = Report::new(style);
        commands::run(&command, &inputs, &mut report);
        emit(&report);
        return ExitCode::from(report.exit as u8);
    };

    let jobs = match read_batch(&list) {
        Ok(jobs) => jobs,
        Err(e) => {
            let mut report = Report::new(style);
            report.io_error(&list.display().to_string(), e);
            emit(&report);
            return ExitCode::from(report.exit as u8);
        }
    };
    let reports: Vec<Report> = jobs
        .par_iter()
        .map(|inputs| {
            let mut report = Report::new(style);
            commands::run(&command, inputs, &mut report);
            report
        })
        .collect();
    let mut exit = Exit::Ok;
    for (index, (inputs, report)) in jobs.iter().zip(&reports).enumerate() {
        let mut header = Report::new(style);
        header.record(json!({
            "kind": "problem",
            "index": index,
            "domain": inputs.domain.display().to_string(),
            "instance": inputs.instance.display().to_string(),
            "exit": report.exit as u8,
        }));
        header.text(format!(
            "== {} {}",
            inputs.domain.display(),
            inputs.instance.display()
        ));
        emit(&header);
        emit(report);
        exit = exit.max(report.exit);
    }
    ExitCode::from(exit as u8)
}
