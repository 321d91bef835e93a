//! State transitions by world copying.
//!
//! Each world of the result is a pair `(w, tag)` of a pre-state world and a tag:
//!
//! * `Actual`: `w` satisfies the precondition and, for sensing/announcement,
//!   agrees with the effect as it is at the pointed world; ontic effects are applied;
//! * `Other`: sensing/announcement only: `w` satisfies the precondition and
//!   disagrees with the pointed world on the effect;
//! * `Unchanged`: an untouched copy of `w`, what oblivious agents keep believing.
//!
//! Full observers move within the same tag, partial observers between
//! `Actual` and `Other`, oblivious agents into `Unchanged`.

use std::collections::HashMap;

use super::kripke::{Compiled, KripkeState};
use super::OracleError;
use crate::ast::*;
use crate::grounder::GroundAction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Tag {
    Actual,
    Other,
    Unchanged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Full,
    Partial,
    Oblivious,
}

/// Each agent's observability of `act`, fixed at the pointed world.
pub fn observer_roles(s: &KripkeState, act: &GroundAction) -> Result<Vec<Role>, OracleError> {
    let sig = s.signature().clone();
    let p = s.pointed();
    let active = |cond: &Option<BeliefFormula>| -> Result<bool, OracleError> {
        match cond {
            None => Ok(true),
            Some(c) => s.holds_at(p, c),
        }
    };
    let mut roles = vec![Role::Oblivious; sig.agents().len()];
    for o in &act.partial_observers {
        let i = sig
            .agent(&o.agent)
            .ok_or_else(|| OracleError::UnknownAgent(o.agent.to_string()))?;
        if active(&o.condition)? {
            roles[i] = Role::Partial;
        }
    }
    for o in &act.full_observers {
        let i = sig
            .agent(&o.agent)
            .ok_or_else(|| OracleError::UnknownAgent(o.agent.to_string()))?;
        if active(&o.condition)? {
            roles[i] = Role::Full;
        }
    }
    if act.act_type == ActionType::Ontic {
        // ontic actions have no "whether" to observe partially
        for r in &mut roles {
            if *r == Role::Partial {
                *r = Role::Full;
            }
        }
    }
    Ok(roles)
}

/// Applies a ground action to a state.
pub fn apply(s: &KripkeState, act: &GroundAction) -> Result<KripkeState, OracleError> {
    let sig = s.signature().clone();
    let pre = sig.compile(&act.precondition)?;
    let pre_set = s.truth_set(&pre);
    if !pre_set[s.pointed()] {
        return Err(OracleError::PreconditionFailed(act.name.clone()));
    }
    let roles = observer_roles(s, act)?;
    let n = s.world_count();

    // world index -> (pre-state world, tag), and valuation
    let mut copies: Vec<(usize, Tag)> = Vec::new();
    let mut valuations: Vec<u64> = Vec::new();

    match act.act_type {
        ActionType::Ontic => {
            let mut set_mask = 0u64;
            let mut clear_mask = 0u64;
            for e in &act.effects {
                let (fl, positive) = e.as_literal().ok_or_else(|| {
                    OracleError::NotConstructible(format!(
                        "ontic effect `{}` is not a literal",
                        crate::parser::print_formula(e)
                    ))
                })?;
                let Compiled::Atom(i) = sig.compile(&BeliefFormula::Atom(fl.clone()))? else {
                    unreachable!()
                };
                if positive {
                    set_mask |= 1 << i;
                    clear_mask &= !(1 << i);
                } else {
                    clear_mask |= 1 << i;
                    set_mask &= !(1 << i);
                }
            }
            for w in (0..n).filter(|&w| pre_set[w]) {
                copies.push((w, Tag::Actual));
                valuations.push((s.valuation(w) | set_mask) & !clear_mask);
            }
        }
        ActionType::Sensing | ActionType::Announcement => {
            let effect = sig.compile(&BeliefFormula::and(act.effects.clone()))?;
            let eff_set = s.truth_set(&effect);
            let actual_value = eff_set[s.pointed()];
            if act.act_type == ActionType::Announcement && !actual_value {
                return Err(OracleError::PreconditionFailed(format!(
                    "{} (announced formula is false)",
                    act.name
                )));
            }
            for w in 0..n {
                if pre_set[w] {
                    let tag = if eff_set[w] == actual_value {
                        Tag::Actual
                    } else {
                        Tag::Other
                    };
                    copies.push((w, tag));
                    valuations.push(s.valuation(w));
                }
            }
        }
    }
    let needs_unchanged = roles.contains(&Role::Oblivious);
    if needs_unchanged {
        for w in 0..n {
            copies.push((w, Tag::Unchanged));
            valuations.push(s.valuation(w));
        }
    }
    let index: HashMap<(usize, Tag), u32> = copies
        .iter()
        .enumerate()
        .map(|(k, &c)| (c, k as u32))
        .collect();
    let index = &index;

    let relations: Vec<Vec<Vec<u32>>> = roles
        .iter()
        .enumerate()
        .map(|(i, role)| {
            copies
                .iter()
                .map(|&(w, tag)| {
                    let targets: &[Tag] = match (tag, role) {
                        (Tag::Unchanged, _) | (_, Role::Oblivious) => &[Tag::Unchanged],
                        (t, Role::Full) => {
                            if t == Tag::Actual {
                                &[Tag::Actual]
                            } else {
                                &[Tag::Other]
                            }
                        }
                        (_, Role::Partial) => &[Tag::Actual, Tag::Other],
                    };
                    s.successors(i, w)
                        .iter()
                        .flat_map(|&v| {
                            targets
                                .iter()
                                .filter_map(move |&t| index.get(&(v as usize, t)).copied())
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let pointed = index[&(s.pointed(), Tag::Actual)];
    Ok(KripkeState::new(sig, valuations, relations, pointed).generated())
}
