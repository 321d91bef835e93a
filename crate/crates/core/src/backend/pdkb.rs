//! PDKB-PDDL output: a domain with `:derive` conditions or explicit
//! knowledge effects per action, and an instance whose common knowledge is
//! unrolled into quantified chains.

use std::fmt::Write;

use itertools::Itertools;
use serde::Serialize;

use crate::ast::*;
use crate::diagnostic::{Code, Diagnostic};
use crate::expansion::{
    derive_updates, expand_formula, ChainFormula, ChainKind, ExpansionOptions, UpdateSpec,
};
use crate::validator::ValidatedProblem;

const AGENT_PLACEHOLDER: &str = "$agent$";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PdkbOptions {
    /// Reproduce the published example layout: bare observer template as
    /// `:derive`, positive-only sensing chains, `(action: name` headers.
    pub listing_faithful: bool,
    pub dedupe_chains: bool,
    /// Emit explicit effects for ontic actions whose observers fit no template.
    pub explicit_fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    DeriveCondition,
    ExplicitEffects,
    ExpEffectOverride,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ChainCounts {
    pub world: usize,
    pub full: usize,
    pub partial_prefixed: usize,
    pub outer_prefixed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PdkbActionRecord {
    pub name: String,
    pub strategy: Strategy,
    /// The derive condition got an executor disjunct.
    pub derive_widened: bool,
    pub chains: ChainCounts,
    /// Partial-observability effects, beyond what plain PDKB-PDDL accepts.
    pub partial_observability_extension: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PdkbManifest {
    pub depth: usize,
    pub actions: Vec<PdkbActionRecord>,
    pub init_chain_blocks: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdkbArtifact {
    pub domain_text: String,
    pub instance_text: String,
    pub manifest: PdkbManifest,
}

/// Formula rendering. `wrap` puts outermost modal literals in parentheses,
/// as preconditions and guards need.
fn render(f: &BeliefFormula, wrap: bool) -> String {
    let mut s = String::new();
    write_formula(&mut s, f, wrap, false);
    s
}

fn write_formula(out: &mut String, f: &BeliefFormula, wrap: bool, in_modal: bool) {
    use BeliefFormula as BF;
    match f {
        BF::Atom(fl) => write!(out, "{fl}").unwrap(),
        BF::Not(inner) => match &**inner {
            BF::Atom(fl) if in_modal => {
                let text = fl.to_string();
                write!(out, "(!{}", &text[1..]).unwrap();
            }
            _ => {
                out.push_str("(not ");
                write_formula(out, inner, wrap, in_modal);
                out.push(')');
            }
        },
        BF::And(parts) | BF::Or(parts) => {
            out.push_str(if matches!(f, BF::And(_)) {
                "(and"
            } else {
                "(or"
            });
            for p in parts {
                out.push(' ');
                write_formula(out, p, wrap, in_modal);
            }
            out.push(')');
        }
        BF::Implies(a, b) => {
            out.push_str("(imply ");
            write_formula(out, a, wrap, in_modal);
            out.push(' ');
            write_formula(out, b, wrap, in_modal);
            out.push(')');
        }
        BF::Believes(..) | BF::Common(..) => {
            if wrap {
                out.push('(');
            }
            let mut cur = f;
            loop {
                match cur {
                    BF::Believes(t, g) => {
                        write!(out, "[{t}]").unwrap();
                        cur = g;
                    }
                    BF::Common(group, g) => {
                        write!(out, "[{}]", group.iter().join(" ")).unwrap();
                        cur = g;
                    }
                    _ => break,
                }
            }
            write_formula(out, cur, false, true);
            if wrap {
                out.push(')');
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Derive {
    Always,
    Never,
    ExecutorOnly(Var),
    Condition {
        template: BeliefFormula,
        at_executor: Option<(Var, BeliefFormula)>,
    },
}

/// A single `:derive` template for the action's observers, if one exists.
fn derive_template(act: &EpddlAction) -> Option<Derive> {
    if act.p_observers.as_ref().is_some_and(|p| !p.is_empty()) {
        return None;
    }
    let exec = act.executor().cloned();
    let exec_term = exec.clone().map(Term::Var);
    let others: Vec<&ObserverClause> = act
        .observers
        .clauses
        .iter()
        .filter(|c| !(c.scope == ObserverScope::Plain && Some(&c.agent) == exec_term.as_ref()))
        .collect();
    match others.as_slice() {
        [] => Some(match exec {
            Some(v) => Derive::ExecutorOnly(v),
            None => Derive::Never,
        }),
        [clause] => {
            let ObserverScope::ForallDiff { var, excluded } = &clause.scope else {
                return None;
            };
            if excluded.iter().any(|t| Some(t) != exec_term.as_ref()) {
                return None;
            }
            match &clause.condition {
                None => Some(Derive::Always),
                Some(cond) => {
                    let placeholder = Term::Const(Agent(AGENT_PLACEHOLDER.into()));
                    let template = cond.subst(&Substitution::from([(var.clone(), placeholder)]));
                    let at_executor = exec.map(|e| {
                        let at =
                            cond.subst(&Substitution::from([(var.clone(), Term::Var(e.clone()))]));
                        (e, at)
                    });
                    Some(Derive::Condition {
                        template,
                        at_executor,
                    })
                }
            }
        }
        _ => None,
    }
}

/// Whether the precondition syntactically guarantees `cond` (or the
/// executor's belief in it).
fn implied_by(precondition: &BeliefFormula, executor: &Var, cond: &BeliefFormula) -> bool {
    let believed = BeliefFormula::believes(Term::Var(executor.clone()), cond.clone());
    precondition
        .conjuncts()
        .iter()
        .any(|c| c == cond || *c == believed)
}

fn render_chain(c: &ChainFormula, executor: Option<&Var>, faithful: bool) -> String {
    let mut text = match c.kind {
        ChainKind::World | ChainKind::Override => render(&c.body, false),
        _ => render(&c.formula(), false),
    };
    let mut guard = c.guard.conjuncts().to_vec();
    for q in &c.quantified {
        for t in &q.excluded {
            let is_executor = matches!((t, executor), (Term::Var(v), Some(e)) if v == e);
            if !is_executor && !faithful {
                guard.push(BeliefFormula::not(BeliefFormula::Atom(Fluent::new(
                    "=",
                    vec![Term::Var(q.var.clone()), t.clone()],
                ))));
            }
        }
    }
    let guard = BeliefFormula::and(guard);
    if !guard.is_top() {
        text = format!("(when {} {text})", render(&guard, true));
    }
    for q in c.quantified.iter().rev() {
        text = format!("(forall ({} - agent) {text})", q.var);
    }
    text
}

fn count_chains(chains: &[ChainFormula]) -> ChainCounts {
    let mut counts = ChainCounts::default();
    for c in chains {
        match c.kind {
            ChainKind::World => counts.world += 1,
            ChainKind::FullChain => counts.full += 1,
            ChainKind::PartialPrefixed => counts.partial_prefixed += 1,
            ChainKind::OuterPrefixed => counts.outer_prefixed += 1,
            ChainKind::Common | ChainKind::Override => {}
        }
    }
    counts
}

struct ActionText {
    derive: String,
    effects: String,
    record: PdkbActionRecord,
}

fn translate_action(
    act: &Spanned<EpddlAction>,
    depth: usize,
    opts: PdkbOptions,
) -> Result<ActionText, Diagnostic> {
    let faithful = opts.listing_faithful;
    let has_partial = act.p_observers.as_ref().is_some_and(|p| !p.is_empty());
    let world_effects = || {
        format!(
            "(and {})",
            act.effect
                .conjuncts()
                .iter()
                .map(|e| render(e, false))
                .join(" ")
        )
    };
    let mut record = PdkbActionRecord {
        name: act.name.clone(),
        strategy: Strategy::DeriveCondition,
        derive_widened: false,
        chains: ChainCounts::default(),
        partial_observability_extension: false,
    };

    if let Some(e) = &act.exp_effect {
        record.strategy = Strategy::ExpEffectOverride;
        return Ok(ActionText {
            derive: "(never)".into(),
            effects: render(&expand_formula(e, depth), false),
            record,
        });
    }

    let template = if act.act_type == ActionType::Sensing {
        None
    } else {
        derive_template(act)
    };
    if let Some(t) = template {
        let derive = match t {
            Derive::Always => "(always)".to_owned(),
            Derive::Never => "(never)".to_owned(),
            Derive::ExecutorOnly(e) => format!("(= {AGENT_PLACEHOLDER} {e})"),
            Derive::Condition {
                template,
                at_executor,
            } => {
                let plain = render(&template, true);
                match at_executor {
                    Some((e, at)) if !faithful && !implied_by(&act.precondition, &e, &at) => {
                        record.derive_widened = true;
                        format!("(or {plain} (= {AGENT_PLACEHOLDER} {e}))")
                    }
                    _ => plain,
                }
            }
        };
        return Ok(ActionText {
            derive,
            effects: world_effects(),
            record,
        });
    }

    if act.act_type == ActionType::Ontic && !opts.explicit_fallback {
        return Err(Diagnostic::error(
            Code::E_UNREPRESENTABLE,
            act.span,
            format!(
                "observers of ontic action `{}` do not fit a single :derive template; \
                 request the explicit-effects fallback to translate it",
                act.name
            ),
        ));
    }
    let spec = UpdateSpec::from_schema(act);
    let exp = ExpansionOptions {
        dedupe_chains: opts.dedupe_chains || faithful,
        sensing_positive_only: faithful,
    };
    let chains = derive_updates(&spec, depth, exp);
    record.strategy = Strategy::ExplicitEffects;
    record.chains = count_chains(&chains);
    record.partial_observability_extension = has_partial;
    let executor = act.executor();
    let effects = format!(
        "(and {})",
        chains
            .iter()
            .map(|c| render_chain(c, executor, faithful))
            .join("\n                ")
    );
    Ok(ActionText {
        derive: "(never)".into(),
        effects,
        record,
    })
}

fn typed_params(params: &[TypedVar]) -> String {
    params
        .iter()
        .map(|p| format!("{} - {}", p.var, p.ty))
        .join(" ")
}

fn emit_domain(
    p: &ValidatedProblem,
    opts: PdkbOptions,
) -> Result<(String, Vec<PdkbActionRecord>), Vec<Diagnostic>> {
    let domain = p.domain();
    let depth = p.depth();
    let mut out = String::new();
    writeln!(out, "(define (domain {})", domain.name.node).unwrap();
    writeln!(out, " (:agents {})", p.agents().iter().join(" ")).unwrap();
    out.push_str(" (:constants)\n (:types)\n");
    let preds = domain
        .predicates
        .iter()
        .map(|d| {
            if d.params.is_empty() {
                format!("({})", d.name)
            } else {
                format!("({} {})", d.name, typed_params(&d.params))
            }
        })
        .join(" ");
    writeln!(out, " (:predicates {preds})").unwrap();

    let mut records = Vec::new();
    let mut errors = Vec::new();
    for act in &domain.actions {
        let text = match translate_action(act, depth, opts) {
            Ok(t) => t,
            Err(d) => {
                errors.push(d);
                continue;
            }
        };
        let precondition = if act.precondition.is_top() {
            "(and)".to_owned()
        } else {
            render(&expand_formula(&act.precondition, depth), true)
        };
        out.push('\n');
        if opts.listing_faithful {
            writeln!(out, " (action: {}", act.name).unwrap();
        } else {
            writeln!(out, " (:action {}", act.name).unwrap();
        }
        writeln!(out, "  :parameters   ({})", typed_params(&act.parameters)).unwrap();
        writeln!(out, "  :derive       {}", text.derive).unwrap();
        writeln!(out, "  :precondition {precondition}").unwrap();
        writeln!(out, "  :effects      {}", text.effects).unwrap();
        out.push_str(" )\n");
        records.push(text.record);
    }
    out.push_str(")\n");
    if errors.is_empty() {
        Ok((out, records))
    } else {
        Err(errors)
    }
}

/// Quantified chain block of one common-knowledge entry over every agent.
fn quantified_block(out: &mut String, body: &BeliefFormula, len: usize) {
    writeln!(out, "  ;Length {len}").unwrap();
    for k in 1..=len {
        writeln!(out, "{}(forall ?ag{k} - agent", "  ".repeat(k)).unwrap();
    }
    let prefix: String = (1..=len).rev().map(|k| format!("[?ag{k}]")).collect();
    let mut inner = String::new();
    write_formula(&mut inner, body, false, true);
    writeln!(
        out,
        "{}{prefix}{inner}{}",
        "  ".repeat(len + 1),
        ")".repeat(len)
    )
    .unwrap();
}

fn emit_instance(p: &ValidatedProblem) -> (String, usize) {
    let instance = p.instance();
    let depth = p.depth();
    let all_agents: Vec<Agent> = p.agents().to_vec();
    let mut out = String::new();
    writeln!(out, "(define (problem {})", instance.name.node).unwrap();
    writeln!(out, " (:domain {})", instance.domain_name.node).unwrap();
    writeln!(out, " (:depth {depth})").unwrap();
    out.push_str(" (:projection )\n (:task valid_generation)\n (:init-type complete)\n\n (:init\n");

    let (world, beliefs): (Vec<_>, Vec<_>) =
        instance.init.iter().partition(|f| f.is_fluent_formula());
    for f in world {
        // closed world: only true atoms are listed
        if let BeliefFormula::Atom(_) = &f.node {
            writeln!(out, "  {}", render(f, false)).unwrap();
        }
    }
    let mut blocks = 0;
    for entry in beliefs {
        out.push('\n');
        match &entry.node {
            BeliefFormula::Common(group, body)
                if !body.contains_common() && covers(group, &all_agents) =>
            {
                let max_len = depth.saturating_sub(body.depth());
                for len in 1..=max_len {
                    if len > 1 {
                        out.push('\n');
                    }
                    quantified_block(&mut out, body, len);
                    blocks += 1;
                }
            }
            other => {
                for part in expand_formula(other, depth).conjuncts() {
                    writeln!(out, "  {}", render(part, false)).unwrap();
                }
            }
        }
    }
    out.push_str("\n )\n\n (:goal\n");
    for part in expand_formula(&instance.goal, depth).conjuncts() {
        writeln!(out, "  {}", render(part, false)).unwrap();
    }
    out.push_str(" )\n)\n");
    (out, blocks)
}

fn covers(group: &[Term], agents: &[Agent]) -> bool {
    agents
        .iter()
        .all(|a| group.iter().any(|t| t.as_agent() == Some(a)))
}

/// Translates a validated problem into PDKB-PDDL domain and instance texts.
pub fn emit_pdkb(p: &ValidatedProblem, opts: PdkbOptions) -> Result<PdkbArtifact, Vec<Diagnostic>> {
    let (domain_text, actions) = emit_domain(p, opts)?;
    let (instance_text, init_chain_blocks) = emit_instance(p);
    Ok(PdkbArtifact {
        domain_text,
        instance_text,
        manifest: PdkbManifest {
            depth: p.depth(),
            actions,
            init_chain_blocks,
        },
    })
}
