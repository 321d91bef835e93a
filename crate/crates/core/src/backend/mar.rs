//! mAρ output: a flat, fully ground problem file of `;`-terminated statements.

use std::collections::BTreeMap;
use std::fmt::Write;

use itertools::Itertools;
use serde::Serialize;

use crate::ast::*;
use crate::diagnostic::{Code, Diagnostic};
use crate::grounder::{GroundAction, GroundedProblem};
use crate::span::Span;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MarOptions {
    /// Predicate renames applied to fluent names (`looking` → `look`).
    pub rename: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarManifest {
    pub fluents: usize,
    pub actions: usize,
    pub agents: usize,
    pub statements: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarArtifact {
    pub text: String,
    pub manifest: MarManifest,
}

struct Renderer<'a> {
    opts: &'a MarOptions,
}

impl Renderer<'_> {
    fn fluent_name(&self, predicate: &str, args: impl Iterator<Item = String>) -> String {
        let base = self
            .opts
            .rename
            .get(predicate)
            .map(String::as_str)
            .unwrap_or(predicate);
        std::iter::once(base.to_owned()).chain(args).join("_")
    }

    fn ground_name(&self, g: &GroundFluent) -> String {
        self.fluent_name(&g.predicate, g.args.iter().map(|a| a.name().to_owned()))
    }

    /// A single condition; `None` for shapes mAρ statements cannot carry.
    fn formula(&self, f: &BeliefFormula) -> Option<String> {
        use BeliefFormula as BF;
        match f {
            BF::Atom(fl) => {
                Some(self.fluent_name(&fl.predicate, fl.args.iter().map(|t| t.to_string())))
            }
            BF::Not(inner) => match &**inner {
                BF::Atom(_) => Some(format!("-{}", self.formula(inner)?)),
                _ => None,
            },
            BF::Believes(t, g) => Some(format!("B({t},{})", self.formula(g)?)),
            BF::Common(group, g) => Some(format!(
                "C([{}],{})",
                group.iter().join(","),
                self.formula(g)?
            )),
            BF::And(_) | BF::Or(_) | BF::Implies(..) => None,
        }
    }

    /// A top-level conjunction as a comma-separated list.
    fn condition_list(&self, f: &BeliefFormula) -> Option<String> {
        f.conjuncts()
            .iter()
            .map(|c| self.formula(c))
            .collect::<Option<Vec<_>>>()
            .map(|v| v.join(","))
    }
}

fn unsupported(code: Code, span: Span, what: &str, f: &BeliefFormula) -> Diagnostic {
    Diagnostic::error(
        code,
        span,
        format!(
            "{what} `{}` has no mAρ rendering (only literals, B, C and top-level conjunction)",
            crate::parser::print_formula(f)
        ),
    )
}

/// Statement blocks go argument tuple by argument tuple (all of `a`'s
/// actions, then `b`'s, ...), keeping schema order within a tuple.
fn statement_order(g: &GroundedProblem) -> Vec<&GroundAction> {
    let rank = |a: &Agent| g.agents.iter().position(|x| x == a);
    let mut order: Vec<&GroundAction> = g.actions.iter().collect();
    order.sort_by_key(|a| a.args.iter().map(rank).collect::<Vec<_>>());
    order
}

fn action_block(r: &Renderer, act: &GroundAction, out: &mut String) -> Result<usize, Diagnostic> {
    let name = &act.name;
    let mut lines = Vec::new();
    if act.precondition.is_top() {
        lines.push(format!("executable {name};"));
    } else {
        let cond = r.condition_list(&act.precondition).ok_or_else(|| {
            unsupported(
                Code::E_UNSUPPORTED_FORMULA,
                act.span,
                "precondition",
                &act.precondition,
            )
        })?;
        lines.push(format!("executable {name} if {cond};"));
    }
    let effect_list = || {
        act.effects
            .iter()
            .map(|e| {
                r.formula(e)
                    .ok_or_else(|| unsupported(Code::E_UNSUPPORTED_FORMULA, act.span, "effect", e))
            })
            .collect::<Result<Vec<_>, _>>()
    };
    match act.act_type {
        ActionType::Ontic => {
            for e in effect_list()? {
                lines.push(format!("{name} causes {e};"));
            }
        }
        ActionType::Sensing => {
            let fluents = effect_list()?.join(",");
            match &act.executor_condition {
                Some(c) => {
                    let cond = r.condition_list(c).ok_or_else(|| {
                        unsupported(
                            Code::E_UNSUPPORTED_FORMULA,
                            act.span,
                            "observer condition",
                            c,
                        )
                    })?;
                    lines.push(format!("{name} determines {fluents} if {cond};"));
                }
                None => lines.push(format!("{name} determines {fluents};")),
            }
        }
        ActionType::Announcement => {
            lines.push(format!("{name} announces {};", effect_list()?.join(",")));
        }
    }
    let observer = |agent: &Agent,
                    cond: &Option<BeliefFormula>,
                    keyword: &str|
     -> Result<String, Diagnostic> {
        Ok(match cond {
            None => format!("{agent} {keyword} {name};"),
            Some(c) => {
                let text = r.condition_list(c).ok_or_else(|| {
                    unsupported(
                        Code::E_UNSUPPORTED_FORMULA,
                        act.span,
                        "observer condition",
                        c,
                    )
                })?;
                format!("{agent} {keyword} {name} if {text};")
            }
        })
    };
    let (conditional, unconditional): (Vec<_>, Vec<_>) = act
        .full_observers
        .iter()
        .partition(|o| o.condition.is_some());
    for o in conditional.into_iter().chain(unconditional) {
        lines.push(observer(&o.agent, &o.condition, "observes")?);
    }
    for o in &act.partial_observers {
        lines.push(observer(&o.agent, &o.condition, "aware_of")?);
    }
    for l in &lines {
        writeln!(out, "{l}").unwrap();
    }
    Ok(lines.len())
}

/// Translates a grounded problem into mAρ. `:exp_effect` is ignored.
pub fn emit_mar(g: &GroundedProblem, opts: &MarOptions) -> Result<MarArtifact, Vec<Diagnostic>> {
    let r = Renderer { opts };
    let mut out = String::new();
    let mut statements = 3;
    writeln!(
        out,
        "fluent {};\n",
        g.fluents.iter().map(|f| r.ground_name(f)).join(", ")
    )
    .unwrap();
    writeln!(
        out,
        "action {};\n",
        g.actions.iter().map(|a| a.name.as_str()).join(", ")
    )
    .unwrap();
    writeln!(out, "agent {};", g.agents.iter().join(", ")).unwrap();

    let mut errors = Vec::new();
    for act in statement_order(g) {
        out.push('\n');
        match action_block(&r, act, &mut out) {
            Ok(n) => statements += n,
            Err(d) => errors.push(d),
        }
    }

    out.push('\n');
    let truths: Vec<String> = g
        .init_literals
        .iter()
        .filter(|(_, positive)| *positive)
        .map(|(f, _)| r.ground_name(f))
        .dedup()
        .collect();
    if !truths.is_empty() {
        writeln!(out, "initially {};", truths.join(", ")).unwrap();
        statements += 1;
    }
    let falsities: Vec<String> = g
        .fluents
        .iter()
        .filter(|f| !g.init_world.contains(f))
        .map(|f| format!("-{}", r.ground_name(f)))
        .collect();
    if !falsities.is_empty() {
        writeln!(out, "initially {};", falsities.join(", ")).unwrap();
        statements += 1;
    }
    if !g.init_beliefs.is_empty() {
        out.push('\n');
    }
    for (entry, span) in g.init_beliefs.iter().zip(&g.init_belief_spans) {
        match r.condition_list(entry) {
            Some(text) => {
                writeln!(out, "initially {text};").unwrap();
                statements += 1;
            }
            None => errors.push(unsupported(
                Code::E_UNSUPPORTED_FORMULA,
                *span,
                "initial formula",
                entry,
            )),
        }
    }

    out.push('\n');
    for part in g.goal.conjuncts() {
        match r.formula(part) {
            Some(text) => {
                writeln!(out, "goal {text};").unwrap();
                statements += 1;
            }
            None => errors.push(unsupported(
                Code::E_UNSUPPORTED_GOAL,
                g.goal_span,
                "goal",
                part,
            )),
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(MarArtifact {
        text: out,
        manifest: MarManifest {
            fluents: g.fluents.len(),
            actions: g.actions.len(),
            agents: g.agents.len(),
            statements,
        },
    })
}
