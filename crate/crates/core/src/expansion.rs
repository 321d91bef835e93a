//! Knowledge-chain derivation: turns observability-based (implicit) knowledge
//! updates into explicit, depth-bounded belief formulae, and unrolls common
//! knowledge into bounded chains of single-agent beliefs.
//!
//! A chain `B_{i1} .. B_{il} φ` is stored with `i1` (the outermost agent) first.

use std::collections::HashMap;

use itertools::Itertools;
use thiserror::Error;

use crate::ast::*;
use crate::grounder::GroundAction;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpansionError {
    #[error("depth must be at least 1, got {0}")]
    BadDepth(usize),
    #[error("expected a common-knowledge formula")]
    NotCommon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainKind {
    /// The world-level effect itself (length 0, ontic actions only).
    World,
    /// Chains of fully observant agents over the effect.
    FullChain,
    /// A partially observant agent over a fully observant chain.
    PartialPrefixed,
    /// Any observant chain prefixed onto a `PartialPrefixed` formula.
    OuterPrefixed,
    /// Chains unrolled from a common-knowledge operator.
    Common,
    /// The action's `:exp_effect`, verbatim.
    Override,
}

/// A variable introduced by a quantified observer slot, ranging over agents
/// other than `excluded`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quantifier {
    pub var: Var,
    pub excluded: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainFormula {
    pub prefix: Vec<Term>,
    pub body: BeliefFormula,
    pub kind: ChainKind,
    /// Conjunction of the observability conditions involved; true when unconditional.
    pub guard: BeliefFormula,
    pub quantified: Vec<Quantifier>,
}

impl ChainFormula {
    /// The chain as a nested belief formula (without guard or quantifiers).
    pub fn formula(&self) -> BeliefFormula {
        self.prefix.iter().rev().fold(self.body.clone(), |acc, t| {
            BeliefFormula::believes(t.clone(), acc)
        })
    }

    pub fn len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.formula().depth()
    }

    fn has_consecutive_duplicates(&self) -> bool {
        self.prefix.windows(2).any(|w| w[0] == w[1])
    }
}

/// Who may appear in a chain position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slot {
    Agent(Term),
    Each { var: Var, excluded: Vec<Term> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotObserver {
    pub slot: Slot,
    pub condition: Option<BeliefFormula>,
}

/// The observability frame of one action, ground or schematic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObserverSet {
    pub full: Vec<SlotObserver>,
    pub partial: Vec<SlotObserver>,
}

impl ObserverSet {
    pub fn from_ground(act: &GroundAction) -> Self {
        let conv = |list: &[crate::grounder::GroundObserver]| {
            list.iter()
                .map(|o| SlotObserver {
                    slot: Slot::Agent(Term::Const(o.agent.clone())),
                    condition: o.condition.clone(),
                })
                .collect()
        };
        ObserverSet {
            full: conv(&act.full_observers),
            partial: conv(&act.partial_observers),
        }
    }

    /// The schematic frame of a parametric action: quantified clauses become
    /// [`Slot::Each`]. The executor is made an unconditional full observer.
    pub fn from_schema(act: &EpddlAction) -> Self {
        let conv = |spec: &ObserverSpec| -> Vec<SlotObserver> {
            spec.clauses
                .iter()
                .map(|c| SlotObserver {
                    slot: match &c.scope {
                        ObserverScope::Plain => Slot::Agent(c.agent.clone()),
                        ObserverScope::ForallDiff { var, excluded } => Slot::Each {
                            var: var.clone(),
                            excluded: excluded.clone(),
                        },
                    },
                    condition: c.condition.clone(),
                })
                .collect()
        };
        let mut full = conv(&act.observers);
        let mut partial = act
            .p_observers
            .as_ref()
            .map(|p| conv(p))
            .unwrap_or_default();
        if let Some(exec) = act.executor() {
            let exec = Term::Var(exec.clone());
            full.retain(|o| o.slot != Slot::Agent(exec.clone()));
            partial.retain(|o| o.slot != Slot::Agent(exec.clone()));
            full.insert(
                0,
                SlotObserver {
                    slot: Slot::Agent(exec),
                    condition: None,
                },
            );
        }
        ObserverSet { full, partial }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExpansionOptions {
    /// Drop chains with consecutive repeated agents (`B_a B_a φ`).
    pub dedupe_chains: bool,
    /// Emit sensing chains over the positive fluent only, unguarded.
    pub sensing_positive_only: bool,
}

/// The effect content of an action as seen by the expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateSpec {
    pub act_type: ActionType,
    pub effects: Vec<BeliefFormula>,
    pub observers: ObserverSet,
    pub exp_effect: Option<BeliefFormula>,
}

impl UpdateSpec {
    pub fn from_ground(act: &GroundAction) -> Self {
        UpdateSpec {
            act_type: act.act_type,
            effects: act.effects.clone(),
            observers: ObserverSet::from_ground(act),
            exp_effect: act.exp_effect.clone(),
        }
    }

    pub fn from_schema(act: &EpddlAction) -> Self {
        UpdateSpec {
            act_type: act.act_type,
            effects: act.effect.conjuncts().to_vec(),
            observers: ObserverSet::from_schema(act),
            exp_effect: act.exp_effect.as_ref().map(|e| e.node.clone()),
        }
    }
}

/// `(or e (not e))`: the "knows whether" body used for partial observers.
pub fn knows_whether(e: &BeliefFormula) -> BeliefFormula {
    BeliefFormula::Or(vec![e.clone(), BeliefFormula::not(e.clone())])
}

/// Instantiates a sequence of observer slots as a chain prefix, renaming
/// repeated quantified variables apart (`?j`, `?j2`, ...).
fn instantiate(seq: &[&SlotObserver]) -> (Vec<Term>, Vec<BeliefFormula>, Vec<Quantifier>) {
    let mut uses: HashMap<Var, usize> = HashMap::new();
    let mut prefix = Vec::with_capacity(seq.len());
    let mut conditions: Vec<BeliefFormula> = Vec::new();
    let mut quantified = Vec::new();
    for obs in seq {
        let (term, cond) = match &obs.slot {
            Slot::Agent(t) => (t.clone(), obs.condition.clone()),
            Slot::Each { var, excluded } => {
                let n = uses.entry(var.clone()).or_insert(0);
                *n += 1;
                let fresh = if *n == 1 {
                    var.clone()
                } else {
                    Var(format!("{}{}", var.0, n))
                };
                let map = Substitution::from([(var.clone(), Term::Var(fresh.clone()))]);
                quantified.push(Quantifier {
                    var: fresh.clone(),
                    excluded: excluded.clone(),
                });
                (
                    Term::Var(fresh),
                    obs.condition.as_ref().map(|c| c.subst(&map)),
                )
            }
        };
        prefix.push(term);
        if let Some(c) = cond {
            if !conditions.contains(&c) {
                conditions.push(c);
            }
        }
    }
    (prefix, conditions, quantified)
}

/// All sequences of length `len` over `pool`, outermost first.
fn sequences(pool: &[SlotObserver], len: usize) -> Vec<Vec<&SlotObserver>> {
    if len == 0 {
        return vec![Vec::new()];
    }
    (0..len)
        .map(|_| pool.iter())
        .multi_cartesian_product()
        .collect()
}

fn guard_of(mut conditions: Vec<BeliefFormula>, extra: Option<&BeliefFormula>) -> BeliefFormula {
    if let Some(e) = extra {
        conditions.insert(0, e.clone());
    }
    BeliefFormula::and(conditions)
}

/// Chains over `pool` of every length in `lengths`, each wrapping `body`.
fn chains_over(
    pool: &[SlotObserver],
    lengths: std::ops::RangeInclusive<usize>,
    body: &BeliefFormula,
    world_guard: Option<&BeliefFormula>,
    kind: ChainKind,
) -> Vec<ChainFormula> {
    let mut out = Vec::new();
    for len in lengths {
        for seq in sequences(pool, len) {
            let (prefix, conds, quantified) = instantiate(&seq);
            out.push(ChainFormula {
                prefix,
                body: body.clone(),
                kind,
                guard: guard_of(conds, world_guard),
                quantified,
            });
        }
    }
    out
}

/// Derives the explicit knowledge update of an action bounded by depth `d`.
pub fn derive_updates(spec: &UpdateSpec, d: usize, opts: ExpansionOptions) -> Vec<ChainFormula> {
    if let Some(e) = &spec.exp_effect {
        return vec![ChainFormula {
            prefix: Vec::new(),
            body: e.clone(),
            kind: ChainKind::Override,
            guard: BeliefFormula::top(),
            quantified: Vec::new(),
        }];
    }
    let full = &spec.observers.full;
    let partial = &spec.observers.partial;
    let mut out = Vec::new();

    // (body, world guard) pairs that the full observers come to know
    let mut known: Vec<(BeliefFormula, Option<BeliefFormula>)> = Vec::new();
    let mut whether: Vec<BeliefFormula> = Vec::new();
    for e in &spec.effects {
        match spec.act_type {
            ActionType::Ontic => {
                out.push(ChainFormula {
                    prefix: Vec::new(),
                    body: e.clone(),
                    kind: ChainKind::World,
                    guard: BeliefFormula::top(),
                    quantified: Vec::new(),
                });
                known.push((e.clone(), None));
            }
            ActionType::Announcement => known.push((e.clone(), None)),
            ActionType::Sensing if opts.sensing_positive_only => known.push((e.clone(), None)),
            ActionType::Sensing => {
                let neg = BeliefFormula::not(e.clone());
                known.push((e.clone(), Some(e.clone())));
                known.push((neg.clone(), Some(neg)));
            }
        }
        whether.push(knows_whether(e));
    }

    // (1) chains of fully observant agents
    for (body, world) in &known {
        out.extend(chains_over(
            full,
            1..=d,
            body,
            world.as_ref(),
            ChainKind::FullChain,
        ));
    }

    // (2) a partial observer over any full chain of length <= d - 1
    let mut second = Vec::new();
    if d >= 2 {
        for body in &whether {
            for p in partial {
                for inner in chains_over(full, 1..=d - 1, body, None, ChainKind::PartialPrefixed) {
                    let (mut prefix, mut conds, mut quantified) = instantiate(&[p]);
                    let (prefix, conds, quantified) =
                        merge_prefix(&mut prefix, &mut conds, &mut quantified, inner);
                    second.push(ChainFormula {
                        prefix,
                        body: body.clone(),
                        kind: ChainKind::PartialPrefixed,
                        guard: BeliefFormula::and(conds),
                        quantified,
                    });
                }
            }
        }
    }

    // (3) any observant chain of length <= d - 2 on top of the formulae of (2)
    let mut third = Vec::new();
    if d >= 3 {
        let observant: Vec<SlotObserver> = full.iter().chain(partial.iter()).cloned().collect();
        for f in &second {
            let room = d - f.depth();
            for m in 1..=room.min(d - 2) {
                for seq in sequences(&observant, m) {
                    let (mut prefix, mut conds, mut quantified) = instantiate(&seq);
                    let (prefix, conds, quantified) =
                        merge_prefix(&mut prefix, &mut conds, &mut quantified, f.clone());
                    third.push(ChainFormula {
                        prefix,
                        body: f.body.clone(),
                        kind: ChainKind::OuterPrefixed,
                        guard: BeliefFormula::and(conds),
                        quantified,
                    });
                }
            }
        }
    }
    out.extend(second);
    out.extend(third);

    if opts.dedupe_chains {
        out.retain(|c| !c.has_consecutive_duplicates());
    }
    debug_assert!(out.iter().all(|c| c.depth() <= d.max(c.body.depth())));
    out
}

/// Puts `outer` in front of `inner`, renaming `inner`'s quantified
/// variables that clash with the outer ones.
fn merge_prefix(
    outer: &mut Vec<Term>,
    outer_conds: &mut Vec<BeliefFormula>,
    outer_q: &mut Vec<Quantifier>,
    inner: ChainFormula,
) -> (Vec<Term>, Vec<BeliefFormula>, Vec<Quantifier>) {
    let mut map = Substitution::new();
    let mut taken: Vec<Var> = outer_q.iter().map(|q| q.var.clone()).collect();
    for q in &inner.quantified {
        if taken.contains(&q.var) {
            let base = q
                .var
                .0
                .trim_end_matches(|c: char| c.is_ascii_digit())
                .to_owned();
            let fresh = (2..)
                .map(|n| Var(format!("{base}{n}")))
                .find(|v| !taken.contains(v) && !inner.quantified.iter().any(|x| &x.var == v))
                .unwrap();
            map.insert(q.var.clone(), Term::Var(fresh.clone()));
            taken.push(fresh);
        } else {
            taken.push(q.var.clone());
        }
    }
    let mut prefix = std::mem::take(outer);
    prefix.extend(inner.prefix.iter().map(|t| t.subst(&map)));
    let mut conds = std::mem::take(outer_conds);
    for c in inner.guard.conjuncts() {
        let c = c.subst(&map);
        if !conds.contains(&c) {
            conds.push(c);
        }
    }
    let mut quantified = std::mem::take(outer_q);
    quantified.extend(inner.quantified.iter().map(|q| Quantifier {
        var: match map.get(&q.var) {
            Some(Term::Var(nv)) => nv.clone(),
            _ => q.var.clone(),
        },
        excluded: q.excluded.iter().map(|t| t.subst(&map)).collect(),
    }));
    (prefix, conds, quantified)
}

/// Explicit knowledge update of a ground action with default options.
pub fn derive_explicit_updates(act: &GroundAction, d: usize) -> Vec<ChainFormula> {
    derive_updates(
        &UpdateSpec::from_ground(act),
        d,
        ExpansionOptions::default(),
    )
}

/// Every chain `B_{i1}..B_{il} body` with `i_k ∈ group` and `1 <= l <= max_len`.
pub fn common_chains(group: &[Term], body: &BeliefFormula, max_len: usize) -> Vec<ChainFormula> {
    let mut out = Vec::new();
    for len in 1..=max_len {
        for seq in (0..len).map(|_| group.iter()).multi_cartesian_product() {
            out.push(ChainFormula {
                prefix: seq.into_iter().cloned().collect(),
                body: body.clone(),
                kind: ChainKind::Common,
                guard: BeliefFormula::top(),
                quantified: Vec::new(),
            });
        }
    }
    out
}

/// Unrolls `Common(group, ψ)` into all belief chains of total depth at most `d`.
/// Nested common knowledge inside `ψ` is expanded first.
pub fn expand_common(f: &BeliefFormula, d: usize) -> Result<Vec<BeliefFormula>, ExpansionError> {
    if d < 1 {
        return Err(ExpansionError::BadDepth(d));
    }
    let BeliefFormula::Common(group, body) = f else {
        return Err(ExpansionError::NotCommon);
    };
    let body = expand_formula(body, d - 1);
    let max_len = d.saturating_sub(body.depth());
    Ok(common_chains(group, &body, max_len)
        .into_iter()
        .map(|c| c.formula())
        .collect())
}

/// Replaces every common-knowledge operator by the conjunction of its chains,
/// given `budget` remaining modal depth at that position.
pub fn expand_formula(f: &BeliefFormula, budget: usize) -> BeliefFormula {
    use BeliefFormula as BF;
    match f {
        BF::Atom(_) => f.clone(),
        BF::Not(g) => BF::not(expand_formula(g, budget)),
        BF::And(v) => BF::And(v.iter().map(|g| expand_formula(g, budget)).collect()),
        BF::Or(v) => BF::Or(v.iter().map(|g| expand_formula(g, budget)).collect()),
        BF::Implies(a, b) => BF::implies(expand_formula(a, budget), expand_formula(b, budget)),
        BF::Believes(t, g) => BF::believes(t.clone(), expand_formula(g, budget.saturating_sub(1))),
        BF::Common(group, g) => {
            let body = expand_formula(g, budget.saturating_sub(1));
            let max_len = budget.saturating_sub(body.depth());
            BF::and(
                common_chains(group, &body, max_len)
                    .into_iter()
                    .map(|c| c.formula())
                    .collect(),
            )
        }
    }
}
