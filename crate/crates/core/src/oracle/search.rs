use std::collections::HashSet;

use super::bisim::minimize;
use super::kripke::{initial_state, KripkeState};
use super::update::apply;
use super::OracleError;
use crate::grounder::{GroundAction, GroundedProblem};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Plan(Vec<String>),
    NotFound { max_len: usize },
    ResourceExhausted { states: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_len: usize,
    /// Distinct (contracted) states kept before giving up.
    pub max_states: usize,
}

impl SearchLimits {
    pub fn new(max_len: usize) -> Self {
        SearchLimits {
            max_len,
            max_states: 200_000,
        }
    }
}

/// Shortest plan by breadth-first search; ties go to the lexicographically
/// smallest action sequence.
pub fn bfs_plan(g: &GroundedProblem, max_len: usize) -> Result<SearchOutcome, OracleError> {
    bfs_plan_with(g, SearchLimits::new(max_len))
}

pub fn bfs_plan_with(
    g: &GroundedProblem,
    limits: SearchLimits,
) -> Result<SearchOutcome, OracleError> {
    let init = minimize(&initial_state(g)?);
    let goal = init.signature().compile(&g.goal)?;
    if init.holds_compiled(init.pointed(), &goal) {
        return Ok(SearchOutcome::Plan(Vec::new()));
    }
    let mut actions: Vec<&GroundAction> = g.actions.iter().collect();
    actions.sort_by(|a, b| a.name.cmp(&b.name));
    let preconditions: Vec<_> = actions
        .iter()
        .map(|a| init.signature().compile(&a.precondition))
        .collect::<Result<_, _>>()?;

    let mut visited: HashSet<KripkeState> = HashSet::from([init.clone()]);
    let mut frontier: Vec<(KripkeState, Vec<usize>)> = vec![(init, Vec::new())];
    for _ in 0..limits.max_len {
        let mut next = Vec::new();
        for (state, plan) in &frontier {
            for (k, act) in actions.iter().enumerate() {
                if !state.holds_compiled(state.pointed(), &preconditions[k]) {
                    continue;
                }
                let succ = minimize(&apply(state, act)?);
                if visited.contains(&succ) {
                    continue;
                }
                let mut p = plan.clone();
                p.push(k);
                if succ.holds_compiled(succ.pointed(), &goal) {
                    return Ok(SearchOutcome::Plan(
                        p.into_iter().map(|k| actions[k].name.clone()).collect(),
                    ));
                }
                if visited.len() >= limits.max_states {
                    return Ok(SearchOutcome::ResourceExhausted {
                        states: visited.len(),
                    });
                }
                visited.insert(succ.clone());
                next.push((succ, p));
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(SearchOutcome::NotFound {
        max_len: limits.max_len,
    })
}

/// Applies `plan` from the initial state, returning every intermediate state.
pub fn simulate(g: &GroundedProblem, plan: &[&str]) -> Result<Vec<KripkeState>, OracleError> {
    let mut states = vec![initial_state(g)?];
    for name in plan {
        let act = g
            .action(name)
            .ok_or_else(|| OracleError::UnknownAction(name.to_string()))?;
        let next = apply(states.last().unwrap(), act)?;
        states.push(next);
    }
    Ok(states)
}
