//! Toolkit for E-PDDL, a PDDL dialect for multi-agent epistemic planning.
//!
//! The pipeline is `parser` → `validator` → `grounder` → backends (`backend::pdkb`,
//! `backend::mar`), with `expansion` deriving explicit knowledge updates and
//! `oracle` providing Kripke semantics to check the translations.

pub mod ast;
pub mod backend;
pub mod diagnostic;
pub mod expansion;
pub mod features;
pub mod grounder;
pub mod oracle;
pub mod parser;
pub mod span;
pub mod validator;

pub use ast::{
    depth_of, free_variables, ActionType, Agent, BeliefFormula, EpddlAction, EpddlDomain,
    EpddlInstance, Fluent, GroundFluent, ObserverClause, ObserverScope, ObserverSpec, Term, Var,
};
pub use backend::{emit_mar, emit_pdkb, MarOptions, PdkbOptions};
pub use diagnostic::{Code, Diagnostic, Severity};
pub use expansion::{derive_explicit_updates, expand_common, ChainFormula};
pub use features::{extract_features, FeatureReport, Recommendation};
pub use grounder::{ground, GroundAction, GroundedProblem};
pub use oracle::{apply, bfs_plan, entails, initial_state, KripkeState, SearchOutcome};
pub use parser::{parse_domain, parse_instance, print_domain, print_instance};
pub use span::{FileId, SourceMap, Span};
pub use validator::{validate, ValidatedProblem};

/// Parses, validates and grounds a domain/instance pair. On success the
/// validator's warnings are returned alongside the grounded problem.
pub fn load_problem(
    domain: &str,
    instance: &str,
) -> Result<(grounder::GroundedProblem, Vec<Diagnostic>), Vec<Diagnostic>> {
    let d = parse_domain(domain);
    let i = parse_instance(instance);
    let (d, i) = match (d, i) {
        (Ok(d), Ok(i)) => (d, i),
        (d, i) => {
            let mut errs = d.err().unwrap_or_default();
            errs.extend(i.err().unwrap_or_default());
            return Err(errs);
        }
    };
    let v = validator::validate(&d, &i)?;
    let warnings = v.warnings().to_vec();
    Ok((grounder::ground(&v), warnings))
}
