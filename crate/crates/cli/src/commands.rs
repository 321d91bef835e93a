//! Subcommand implementations. Each renders into a [`Report`]; nothing is
//! printed directly so batch runs stay ordered.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use epddl::backend::{MarArtifact, PdkbArtifact};
use epddl::grounder::GroundedProblem;
use epddl::oracle::{bfs_plan_with, OracleError, SearchLimits};
use epddl::parser::{parse_domain_bytes, parse_instance_bytes};
use epddl::{
    emit_mar, emit_pdkb, extract_features, ground, validate, Code, Diagnostic, MarOptions,
    PdkbOptions, SearchOutcome, SourceMap, ValidatedProblem,
};
use serde_json::json;

use crate::report::{Exit, Report};

#[derive(Debug, Clone)]
pub struct Inputs {
    pub domain: PathBuf,
    pub instance: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Target {
    Pdkb,
    Mar,
}

#[derive(Debug, Clone)]
pub struct TranslateArgs {
    pub targets: Vec<Target>,
    pub out: PathBuf,
    pub pdkb: PdkbOptions,
    pub mar: MarOptions,
}

#[derive(Debug, Clone)]
pub enum Command {
    Validate,
    Ground,
    Translate(TranslateArgs),
    Solve { limits: SearchLimits },
    Features,
}

/// Reads, parses and validates both files. `None` means the report already
/// carries the failure.
fn load(inputs: &Inputs, report: &mut Report) -> Option<(ValidatedProblem, SourceMap)> {
    let mut files = SourceMap::new();
    let mut read = |path: &Path, report: &mut Report| match fs::read(path) {
        Ok(bytes) => Some((files.add(path.display().to_string()), bytes)),
        Err(e) => {
            report.io_error(&path.display().to_string(), e);
            None
        }
    };
    let domain = read(&inputs.domain, report);
    let instance = read(&inputs.instance, report);
    let ((dom_id, dom_bytes), (inst_id, inst_bytes)) = (domain?, instance?);
    let d = parse_domain_bytes(dom_id, &dom_bytes);
    let i = parse_instance_bytes(inst_id, &inst_bytes);
    let (d, i) = match (d, i) {
        (Ok(d), Ok(i)) => (d, i),
        (d, i) => {
            let mut errs = d.err().unwrap_or_default();
            errs.extend(i.err().unwrap_or_default());
            report.diagnostics(&files, &errs);
            return None;
        }
    };
    match validate(&d, &i) {
        Ok(v) => {
            report.diagnostics(&files, v.warnings());
            Some((v, files))
        }
        Err(errs) => {
            report.diagnostics(&files, &errs);
            None
        }
    }
}

pub fn run(cmd: &Command, inputs: &Inputs, report: &mut Report) {
    let Some((problem, files)) = load(inputs, report) else {
        return;
    };
    match cmd {
        Command::Validate => {
            let warnings = problem.warnings().len();
            report.record(json!({"kind": "validation", "valid": true, "warnings": warnings}));
            report.text(format!(
                "valid ({warnings} warning{})",
                if warnings == 1 { "" } else { "s" }
            ));
        }
        Command::Ground => {
            // the dump is already one JSON record per line in both modes
            for rec in ground(&problem).debug_records() {
                report.out.push_str(&format!("{rec}\n"));
            }
        }
        Command::Features => {
            let features = extract_features(&problem);
            let mut rec = serde_json::to_value(&features).expect("report serializes");
            rec["kind"] = json!("features");
            report.record(rec);
            report.text(features.to_string().trim_end());
        }
        Command::Solve { limits } => solve(&ground(&problem), *limits, &files, report),
        Command::Translate(args) => translate(&problem, args, &files, report),
    }
}

fn oracle_diagnostic(g: &GroundedProblem, e: &OracleError) -> Diagnostic {
    let span = match e {
        OracleError::InconsistentInit(_) | OracleError::NotConstructible(_) => {
            g.init_belief_spans.first().copied().unwrap_or(g.goal_span)
        }
        _ => g.goal_span,
    };
    Diagnostic::error(e.code(), span, e.to_string())
}

fn solve(g: &GroundedProblem, limits: SearchLimits, files: &SourceMap, report: &mut Report) {
    match bfs_plan_with(g, limits) {
        Ok(SearchOutcome::Plan(plan)) => {
            report.record(
                json!({"kind": "plan", "found": true, "length": plan.len(), "actions": plan}),
            );
            for step in &plan {
                report.text(step);
            }
        }
        Ok(SearchOutcome::NotFound { max_len }) => {
            report.record(json!({"kind": "plan", "found": false, "max_len": max_len}));
            report.text(format!("NO PLAN within {max_len}"));
        }
        Ok(SearchOutcome::ResourceExhausted { states }) => {
            report.record(
                json!({"kind": "plan", "found": false, "exhausted": true, "states": states}),
            );
            let d = Diagnostic::error(
                Code::E_RESOURCE_EXHAUSTED,
                g.goal_span,
                format!("search stopped after {states} states (raise --max-states)"),
            );
            report.diagnostics(files, &[d]);
            report.fail(Exit::Exhausted);
        }
        Err(e) => report.diagnostics(files, &[oracle_diagnostic(g, &e)]),
    }
}

/// Artifact texts keyed by file name, built before anything touches disk.
fn render_artifacts(
    problem: &ValidatedProblem,
    args: &TranslateArgs,
) -> Result<(BTreeMap<String, String>, serde_json::Value), Vec<Diagnostic>> {
    let name = problem.instance().name.node.clone();
    let mut texts = BTreeMap::new();
    let mut manifest =
        json!({"kind": "manifest", "problem": name, "domain": problem.domain().name.node});
    let mut errors = Vec::new();
    let mut targets = args.targets.clone();
    targets.sort();
    targets.dedup();
    for target in targets {
        match target {
            Target::Pdkb => match emit_pdkb(problem, args.pdkb) {
                Ok(PdkbArtifact {
                    domain_text,
                    instance_text,
                    manifest: m,
                }) => {
                    texts.insert(format!("{name}.pdkb-domain.pddl"), domain_text);
                    texts.insert(format!("{name}.pdkb-problem.pddl"), instance_text);
                    manifest["pdkb"] = serde_json::to_value(m).expect("manifest serializes");
                }
                Err(e) => errors.extend(e),
            },
            Target::Mar => match emit_mar(&ground(problem), &args.mar) {
                Ok(MarArtifact { text, manifest: m }) => {
                    texts.insert(format!("{name}.mar"), text);
                    manifest["mar"] = serde_json::to_value(m).expect("manifest serializes");
                }
                Err(e) => errors.extend(e),
            },
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    manifest["files"] = json!(texts.keys().collect::<Vec<_>>());
    Ok((texts, manifest))
}

/// Writes every file to a temporary sibling first and renames only once all
/// writes succeeded.
fn write_all(dir: &Path, files: &BTreeMap<String, String>) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut staged = Vec::new();
    for (name, text) in files {
        let mut tmp = tempfile::NamedTempFile::new_in(dir)
            .with_context(|| format!("cannot write in {}", dir.display()))?;
        tmp.write_all(text.as_bytes())?;
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, path) in staged {
        tmp.persist(&path)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn translate(
    problem: &ValidatedProblem,
    args: &TranslateArgs,
    files: &SourceMap,
    report: &mut Report,
) {
    let (mut texts, manifest) = match render_artifacts(problem, args) {
        Ok(x) => x,
        Err(errs) => {
            report.diagnostics(files, &errs);
            return;
        }
    };
    let name = problem.instance().name.node.clone();
    let manifest_name = format!("{name}.manifest.json");
    let mut manifest_text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    manifest_text.push('\n');
    texts.insert(manifest_name, manifest_text);
    if let Err(e) = write_all(&args.out, &texts) {
        report.io_error(&args.out.display().to_string(), format!("{e:#}"));
        return;
    }
    report.record(manifest);
    for file in texts.keys() {
        report.text(args.out.join(file).display().to_string());
    }
}
