//! Instantiates parametric predicates and actions over the instance agents.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde_json::json;

use crate::ast::*;
use crate::parser::print_formula;
use crate::span::Span;
use crate::validator::ValidatedProblem;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundObserver {
    pub agent: Agent,
    /// `None` means the agent always observes.
    pub condition: Option<BeliefFormula>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    /// `schema_arg1_arg2...`
    pub name: String,
    pub schema: String,
    pub args: Vec<Agent>,
    pub executor: Option<Agent>,
    pub act_type: ActionType,
    pub precondition: BeliefFormula,
    /// Effect literals (ontic) or the single sensed/announced fluent.
    pub effects: Vec<BeliefFormula>,
    pub full_observers: Vec<GroundObserver>,
    pub partial_observers: Vec<GroundObserver>,
    pub exp_effect: Option<BeliefFormula>,
    /// The condition under which the executor itself observes: its own
    /// conditional clause if it has one, otherwise the condition of the
    /// action's first quantified observer clause instantiated at the executor.
    pub executor_condition: Option<BeliefFormula>,
    /// Location of the action schema.
    pub span: Span,
}

impl GroundAction {
    pub fn observer_role(&self, agent: &Agent) -> Option<(&GroundObserver, bool)> {
        self.full_observers
            .iter()
            .find(|o| &o.agent == agent)
            .map(|o| (o, true))
            .or_else(|| {
                self.partial_observers
                    .iter()
                    .find(|o| &o.agent == agent)
                    .map(|o| (o, false))
            })
    }

    /// The single effect fluent of a sensing or announcement action.
    pub fn effect_fluent(&self) -> Option<&Fluent> {
        match self.effects.as_slice() {
            [BeliefFormula::Atom(f)] => Some(f),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundedProblem {
    pub name: String,
    pub domain_name: String,
    pub agents: Vec<Agent>,
    pub fluents: Vec<GroundFluent>,
    pub actions: Vec<GroundAction>,
    /// Closed-world valuation of the real world.
    pub init_world: BTreeSet<GroundFluent>,
    /// World literals stated in `:init`, in order.
    pub init_literals: Vec<(GroundFluent, bool)>,
    /// Every non-literal init entry.
    pub init_beliefs: Vec<BeliefFormula>,
    /// Source location of each `init_beliefs` entry.
    pub init_belief_spans: Vec<Span>,
    pub goal: BeliefFormula,
    pub goal_span: Span,
    pub depth: usize,
}

impl GroundedProblem {
    pub fn action(&self, name: &str) -> Option<&GroundAction> {
        self.actions.iter().find(|a| a.name == name)
    }

    /// One JSON record per ground action, for golden tests and `epddl ground`.
    pub fn debug_records(&self) -> Vec<serde_json::Value> {
        let obs = |list: &[GroundObserver]| {
            list.iter()
                .map(|o| {
                    json!({
                        "agent": o.agent.name(),
                        "condition": o.condition.as_ref().map(print_formula),
                    })
                })
                .collect::<Vec<_>>()
        };
        self.actions
            .iter()
            .map(|a| {
                json!({
                    "kind": "ground_action",
                    "name": a.name,
                    "act_type": a.act_type,
                    "precondition": print_formula(&a.precondition),
                    "effects": a.effects.iter().map(print_formula).collect::<Vec<_>>(),
                    "full_observers": obs(&a.full_observers),
                    "partial_observers": obs(&a.partial_observers),
                    "exp_effect": a.exp_effect.as_ref().map(print_formula),
                })
            })
            .collect()
    }
}

/// All `n`-tuples over `agents` in lexicographic declaration order.
pub fn agent_tuples(agents: &[Agent], n: usize) -> Vec<Vec<Agent>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    (0..n)
        .map(|_| agents.iter().cloned())
        .multi_cartesian_product()
        .collect()
}

fn ground_formula(f: &BeliefFormula) -> BeliefFormula {
    debug_assert!(
        f.is_ground(),
        "validated formula still has variables: {f:?}"
    );
    f.clone()
}

/// Resolves an observer specification under `sigma`, unrolling quantified
/// clauses. Agents listed by several clauses get the disjunction of their
/// conditions (an unconditional clause wins).
pub fn ground_observers(
    spec: &ObserverSpec,
    sigma: &Substitution,
    agents: &[Agent],
) -> Vec<GroundObserver> {
    let mut out: Vec<GroundObserver> = Vec::new();
    let mut add = |agent: Agent, condition: Option<BeliefFormula>| {
        if let Some(existing) = out.iter_mut().find(|o| o.agent == agent) {
            existing.condition = match (existing.condition.take(), condition) {
                (None, _) | (_, None) => None,
                (Some(a), Some(b)) if a == b => Some(a),
                (Some(BeliefFormula::Or(mut v)), Some(b)) => {
                    if !v.contains(&b) {
                        v.push(b);
                    }
                    Some(BeliefFormula::Or(v))
                }
                (Some(a), Some(b)) => Some(BeliefFormula::Or(vec![a, b])),
            };
        } else {
            out.push(GroundObserver { agent, condition });
        }
    };
    for clause in &spec.clauses {
        match &clause.scope {
            ObserverScope::Plain => {
                if let Term::Const(a) = clause.agent.subst(sigma) {
                    add(a, clause.condition.as_ref().map(|c| c.subst(sigma)));
                }
            }
            ObserverScope::ForallDiff { var, excluded } => {
                let excluded: Vec<Term> = excluded.iter().map(|t| t.subst(sigma)).collect();
                for a in agents {
                    if excluded.contains(&Term::Const(a.clone())) {
                        continue;
                    }
                    let mut inner = sigma.clone();
                    inner.insert(var.clone(), Term::Const(a.clone()));
                    if let Term::Const(obs) = clause.agent.subst(&inner) {
                        add(obs, clause.condition.as_ref().map(|c| c.subst(&inner)));
                    }
                }
            }
        }
    }
    out
}

fn ground_action(
    action: &Spanned<EpddlAction>,
    args: Vec<Agent>,
    agents: &[Agent],
) -> GroundAction {
    let sigma: Substitution = action
        .parameters
        .iter()
        .zip(&args)
        .map(|(p, a)| (p.var.clone(), Term::Const(a.clone())))
        .collect();
    let executor = action
        .executor()
        .and_then(|v| sigma.get(v))
        .and_then(Term::as_agent)
        .cloned();

    let mut full = ground_observers(&action.observers, &sigma, agents);
    let mut partial = action
        .p_observers
        .as_ref()
        .map(|p| ground_observers(p, &sigma, agents))
        .unwrap_or_default();

    let own_condition = executor.as_ref().and_then(|e| {
        full.iter()
            .chain(partial.iter())
            .find(|o| &o.agent == e)
            .and_then(|o| o.condition.clone())
    });
    let executor_condition = own_condition.or_else(|| {
        let exec = executor.as_ref()?;
        action
            .observers
            .clauses
            .iter()
            .chain(action.p_observers.iter().flat_map(|p| p.clauses.iter()))
            .find_map(|c| match (&c.scope, &c.condition) {
                (ObserverScope::ForallDiff { var, .. }, Some(cond)) => {
                    let mut inner = sigma.clone();
                    inner.insert(var.clone(), Term::Const(exec.clone()));
                    Some(cond.subst(&inner))
                }
                _ => None,
            })
    });

    if let Some(e) = &executor {
        match full.iter_mut().find(|o| &o.agent == e) {
            Some(o) => o.condition = None,
            None => full.insert(
                0,
                GroundObserver {
                    agent: e.clone(),
                    condition: None,
                },
            ),
        }
    }
    partial.retain(|p| {
        !full
            .iter()
            .any(|f| f.agent == p.agent && f.condition.is_none())
    });

    let name = std::iter::once(action.name.as_str())
        .chain(args.iter().map(Agent::name))
        .join("_");
    GroundAction {
        name,
        schema: action.name.clone(),
        executor,
        act_type: action.act_type,
        precondition: ground_formula(&action.precondition.subst(&sigma)),
        effects: action
            .effect
            .subst(&sigma)
            .conjuncts()
            .iter()
            .map(ground_formula)
            .collect(),
        full_observers: full,
        partial_observers: partial,
        exp_effect: action
            .exp_effect
            .as_ref()
            .map(|e| ground_formula(&e.subst(&sigma))),
        executor_condition,
        args,
        span: action.span,
    }
}

/// Grounds a validated problem. Every action with `k` parameters yields
/// `|agents|^k` ground actions, repeated agents included.
pub fn ground(p: &ValidatedProblem) -> GroundedProblem {
    let domain = p.domain();
    let instance = p.instance();
    let agents = p.agents();

    let fluents = domain
        .predicates
        .iter()
        .flat_map(|decl| {
            agent_tuples(&agents, decl.arity())
                .into_iter()
                .map(move |args| GroundFluent {
                    predicate: decl.name.clone(),
                    args,
                })
        })
        .collect();

    let actions = domain
        .actions
        .iter()
        .flat_map(|a| {
            agent_tuples(&agents, a.parameters.len())
                .into_iter()
                .map(|args| ground_action(a, args, &agents))
                .collect::<Vec<_>>()
        })
        .collect();

    let mut init_world = BTreeSet::new();
    let mut init_literals = Vec::new();
    let mut init_beliefs = Vec::new();
    let mut init_belief_spans = Vec::new();
    for entry in &instance.init {
        let f = ground_formula(entry);
        match f
            .as_literal()
            .and_then(|(fl, pos)| Some((fl.to_ground()?, pos)))
        {
            Some((gf, positive)) => {
                if positive {
                    init_world.insert(gf.clone());
                }
                init_literals.push((gf, positive));
            }
            None => {
                init_beliefs.push(f);
                init_belief_spans.push(entry.span);
            }
        }
    }

    GroundedProblem {
        name: instance.name.node.clone(),
        domain_name: domain.name.node.clone(),
        agents,
        fluents,
        actions,
        init_world,
        init_literals,
        init_beliefs,
        init_belief_spans,
        goal: ground_formula(&instance.goal),
        goal_span: instance.goal.span,
        depth: p.depth(),
    }
}
