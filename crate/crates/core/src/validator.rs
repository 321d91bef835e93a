//! Static semantic checks over a linked (domain, instance) pair.

use std::collections::{BTreeSet, HashSet};

use crate::ast::*;
use crate::diagnostic::{has_errors, Code, Diagnostic};
use crate::span::Span;

/// A domain/instance pair that passed validation. Only [`validate`] builds one.
#[derive(Debug, Clone)]
pub struct ValidatedProblem {
    domain: EpddlDomain,
    instance: EpddlInstance,
    warnings: Vec<Diagnostic>,
}

impl ValidatedProblem {
    pub fn domain(&self) -> &EpddlDomain {
        &self.domain
    }

    pub fn instance(&self) -> &EpddlInstance {
        &self.instance
    }

    pub fn warnings(&self) -> &[Diagnostic] {
        &self.warnings
    }

    pub fn agents(&self) -> Vec<Agent> {
        self.instance.agent_list()
    }

    pub fn depth(&self) -> usize {
        self.instance.depth.node as usize
    }
}

/// Runs every check and returns either the validated pair (with warnings) or
/// all diagnostics in check order.
pub fn validate(
    domain: &EpddlDomain,
    instance: &EpddlInstance,
) -> Result<ValidatedProblem, Vec<Diagnostic>> {
    let mut v = Validator {
        domain,
        agents: instance.agent_list().into_iter().collect(),
        diags: Vec::new(),
    };
    v.run(instance);
    if has_errors(&v.diags) {
        Err(v.diags)
    } else {
        Ok(ValidatedProblem {
            domain: domain.clone(),
            instance: instance.clone(),
            warnings: v.diags,
        })
    }
}

/// Effect shape rule: ontic effects are non-empty conjunctions of fluent
/// literals, sensing and announcement effects are a single fluent.
pub fn effect_shape_ok(act_type: ActionType, effect: &BeliefFormula) -> bool {
    match act_type {
        ActionType::Ontic => {
            let parts = effect.conjuncts();
            !parts.is_empty() && parts.iter().all(|p| p.as_literal().is_some())
        }
        ActionType::Sensing | ActionType::Announcement => {
            matches!(effect.conjuncts(), [BeliefFormula::Atom(_)])
        }
    }
}

/// True when `f` is a world literal or `C_AG(literal)` over every agent
/// (`B_a(literal)` when `a` is the only agent).
pub fn is_finitary_s5_entry(f: &BeliefFormula, agents: &[Agent]) -> bool {
    if f.as_literal().is_some() {
        return true;
    }
    let everyone: BTreeSet<&Agent> = agents.iter().collect();
    let (group, body): (BTreeSet<&Agent>, &BeliefFormula) = match f {
        BeliefFormula::Common(g, body) => (g.iter().filter_map(Term::as_agent).collect(), body),
        BeliefFormula::Believes(t, body) => (t.as_agent().into_iter().collect(), body),
        _ => return false,
    };
    group == everyone && body.as_literal().is_some()
}

struct Validator<'a> {
    domain: &'a EpddlDomain,
    agents: BTreeSet<Agent>,
    diags: Vec<Diagnostic>,
}

impl Validator<'_> {
    fn error(&mut self, code: Code, span: Span, msg: String) {
        self.diags.push(Diagnostic::error(code, span, msg));
    }

    fn warn(&mut self, code: Code, span: Span, msg: String) {
        self.diags.push(Diagnostic::warning(code, span, msg));
    }

    fn run(&mut self, instance: &EpddlInstance) {
        let d = self.domain;
        if !d.requirements.contains(":mep") {
            self.error(
                Code::E_MISSING_MEP,
                d.requirements.span,
                "domain requirements must include `:mep`".into(),
            );
        }
        if instance.domain_name.node != d.name.node {
            self.error(
                Code::E_DOMAIN_MISMATCH,
                instance.domain_name.span,
                format!(
                    "instance refers to domain `{}` but the domain is `{}`",
                    instance.domain_name.node, d.name.node
                ),
            );
        }
        if instance.agents.is_empty() {
            self.error(
                Code::E_MISSING_SECTION,
                instance.name.span,
                "instance declares no agents".into(),
            );
        }
        let mut seen = HashSet::new();
        for a in &instance.agents {
            if !seen.insert(&a.node) {
                self.error(
                    Code::E_DUPLICATE_AGENT,
                    a.span,
                    format!("agent `{}` declared twice", a.node),
                );
            }
        }

        let mut preds = HashSet::new();
        for p in &d.predicates {
            if !preds.insert(&p.name) {
                self.error(
                    Code::E_DUPLICATE_PREDICATE,
                    p.span,
                    format!("predicate `{}` declared twice", p.name),
                );
            }
            for tv in &p.params {
                self.check_type(tv, p.span);
            }
        }

        for action in &d.actions {
            self.check_action(action);
        }

        let depth = instance.depth.node as usize;
        let agent_list = instance.agent_list();
        for entry in &instance.init {
            self.check_formula(entry, entry.span, &HashSet::new(), "init entry");
            if !is_finitary_s5_entry(entry, &agent_list) {
                self.warn(
                    Code::W_NOT_FINITARY_S5,
                    entry.span,
                    "init entry is neither a world literal nor common knowledge of a literal among all agents; \
                     initial-state construction may fail"
                        .into(),
                );
            }
            self.check_depth(entry, entry.span, depth, "init entry");
        }
        let goal = &instance.goal;
        self.check_formula(goal, goal.span, &HashSet::new(), "goal");
        self.check_depth(goal, goal.span, depth, "goal");
    }

    fn check_type(&mut self, tv: &TypedVar, span: Span) {
        if tv.ty != "agent" {
            self.error(
                Code::E_UNKNOWN_TYPE,
                span,
                format!(
                    "unknown type `{}` for {} (only `agent` exists)",
                    tv.ty, tv.var
                ),
            );
        }
    }

    fn check_depth(&mut self, f: &BeliefFormula, span: Span, depth: usize, what: &str) {
        if f.depth() > depth {
            self.warn(
                Code::W_DEPTH_EXCEEDED,
                span,
                format!(
                    "{what} has depth {} which exceeds the instance depth {depth}",
                    f.depth()
                ),
            );
        }
    }

    fn check_action(&mut self, action: &Spanned<EpddlAction>) {
        let name = &action.name;
        for tv in &action.parameters {
            self.check_type(tv, action.span);
        }
        let params: HashSet<Var> = action.parameters.iter().map(|p| p.var.clone()).collect();

        if !effect_shape_ok(action.act_type, &action.effect) {
            let rule = match action.act_type {
                ActionType::Ontic => "an ontic effect must be a conjunction of fluent literals",
                _ => "a sensing or announcement effect must be a single fluent",
            };
            self.error(
                Code::E_EFFECT_SHAPE,
                action.effect.span,
                format!("action `{name}`: {rule}"),
            );
        }

        let ctx = format!("action `{name}`");
        self.check_formula(
            &action.precondition,
            action.precondition.span,
            &params,
            &ctx,
        );
        self.check_formula(&action.effect, action.effect.span, &params, &ctx);
        if let Some(e) = &action.exp_effect {
            self.check_formula(e, e.span, &params, &ctx);
        }
        self.check_observers(&action.observers, &params, &ctx);
        if let Some(p) = &action.p_observers {
            self.check_observers(p, &params, &ctx);
            if action.act_type == ActionType::Ontic && !p.is_empty() {
                self.warn(
                    Code::W_ONTIC_PARTIAL_OBSERVERS,
                    p.span,
                    format!(
                        "{ctx}: partial observers of an ontic action are treated as full observers"
                    ),
                );
            }
        }

        if let Some(exec) = action.executor() {
            let exec = Term::Var(exec.clone());
            let unconditional = action.observers.clauses.iter().any(|c| {
                c.agent == exec && c.condition.is_none() && c.scope == ObserverScope::Plain
            });
            if !unconditional {
                self.warn(
                    Code::W_EXECUTOR_NOT_OBSERVANT,
                    action.observers.span,
                    format!("{ctx}: the executor {exec} is not an unconditional observer; grounding adds it"),
                );
            }
        }
    }

    fn check_observers(&mut self, spec: &Spanned<ObserverSpec>, params: &HashSet<Var>, ctx: &str) {
        for clause in &spec.clauses {
            let mut bound = params.clone();
            if let ObserverScope::ForallDiff { var, excluded } = &clause.scope {
                for t in excluded {
                    self.check_term(t, spec.span, params, ctx);
                }
                bound.insert(var.clone());
            }
            self.check_term(&clause.agent, spec.span, &bound, ctx);
            if let Some(c) = &clause.condition {
                self.check_formula(c, spec.span, &bound, ctx);
            }
        }
    }

    fn check_term(&mut self, t: &Term, span: Span, bound: &HashSet<Var>, ctx: &str) {
        match t {
            Term::Var(v) if !bound.contains(v) => self.error(
                Code::E_UNBOUND_VARIABLE,
                span,
                format!("{ctx}: variable {v} is not bound"),
            ),
            Term::Const(a) if !self.agents.contains(a) => self.error(
                Code::E_UNKNOWN_AGENT,
                span,
                format!("{ctx}: `{a}` is not a declared agent"),
            ),
            _ => {}
        }
    }

    fn check_formula(&mut self, f: &BeliefFormula, span: Span, bound: &HashSet<Var>, ctx: &str) {
        for fl in f.fluents() {
            match self.domain.predicate(&fl.predicate) {
                None => self.error(
                    Code::E_UNDECLARED_PREDICATE,
                    span,
                    format!("{ctx}: predicate `{}` is not declared", fl.predicate),
                ),
                Some(decl) if decl.arity() != fl.args.len() => self.error(
                    Code::E_ARITY,
                    span,
                    format!(
                        "{ctx}: `{}` expects {} argument(s), found {}",
                        fl.predicate,
                        decl.arity(),
                        fl.args.len()
                    ),
                ),
                Some(_) => {}
            }
        }
        // report each offending term once
        let terms: BTreeSet<&Term> = f.terms().into_iter().collect();
        for t in terms {
            self.check_term(t, span, bound, ctx);
        }
    }
}
