//! Static problem features and a rule-based planner recommendation.

use std::fmt;

use serde::Serialize;

use crate::ast::*;
use crate::validator::ValidatedProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Recommendation {
    #[serde(rename = "PDKB")]
    Pdkb,
    #[serde(rename = "MAR")]
    Mar,
    Either,
}

impl fmt::Display for Recommendation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Recommendation::Pdkb => "PDKB",
            Recommendation::Mar => "MAR",
            Recommendation::Either => "Either",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ActionCounts {
    pub ontic: usize,
    pub sensing: usize,
    pub announcement: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureReport {
    pub agent_count: usize,
    pub depth: usize,
    pub actions: ActionCounts,
    pub has_partial_observers: bool,
    pub max_init_formula_depth: usize,
    pub max_goal_depth: usize,
    pub max_precondition_depth: usize,
    pub common_knowledge_used: bool,
    pub exp_effect_actions: usize,
    /// Longest knowledge chain an explicit-update translation emits.
    pub max_chain_depth: usize,
    pub recommendation: Recommendation,
    pub rationale: String,
}

/// Applies the selection rules in order; the first match wins.
fn recommend(r: &FeatureReport, goal_has_common: bool) -> (Recommendation, String) {
    let total = r.actions.ontic + r.actions.sensing + r.actions.announcement;
    if r.has_partial_observers {
        return (
            Recommendation::Mar,
            "partial observability is native in mAρ but only an extension in PDKB-PDDL".into(),
        );
    }
    if r.max_goal_depth > r.depth || r.max_precondition_depth > r.depth {
        return (
            Recommendation::Mar,
            "goal or preconditions nest deeper than the :depth bound a PDKB translation keeps"
                .into(),
        );
    }
    if goal_has_common {
        return (
            Recommendation::Mar,
            "the goal uses common knowledge, which PDKB-PDDL only approximates up to :depth".into(),
        );
    }
    if total > 0 && r.exp_effect_actions == total {
        return (
            Recommendation::Pdkb,
            "every action carries an explicit :exp_effect, which only PDKB-PDDL uses".into(),
        );
    }
    (
        Recommendation::Either,
        "full observability within the depth bound; both targets are exact".into(),
    )
}

pub fn extract_features(p: &ValidatedProblem) -> FeatureReport {
    let domain = p.domain();
    let instance = p.instance();
    let mut actions = ActionCounts::default();
    let mut has_partial_observers = false;
    let mut max_precondition_depth = 0;
    let mut common_knowledge_used = false;
    let mut exp_effect_actions = 0;
    for a in &domain.actions {
        match a.act_type {
            ActionType::Ontic => actions.ontic += 1,
            ActionType::Sensing => actions.sensing += 1,
            ActionType::Announcement => actions.announcement += 1,
        }
        has_partial_observers |= a.p_observers.as_ref().is_some_and(|o| !o.is_empty());
        max_precondition_depth = max_precondition_depth.max(a.precondition.depth());
        common_knowledge_used |= a.precondition.contains_common();
        if a.exp_effect.is_some() {
            exp_effect_actions += 1;
        }
    }
    let max_init_formula_depth = instance.init.iter().map(|f| f.depth()).max().unwrap_or(0);
    common_knowledge_used |= instance.init.iter().any(|f| f.contains_common());
    let goal_has_common = instance.goal.contains_common();
    common_knowledge_used |= goal_has_common;

    let mut report = FeatureReport {
        agent_count: p.agents().len(),
        depth: p.depth(),
        actions,
        has_partial_observers,
        max_init_formula_depth,
        max_goal_depth: instance.goal.depth(),
        max_precondition_depth,
        common_knowledge_used,
        exp_effect_actions,
        max_chain_depth: p.depth(),
        recommendation: Recommendation::Either,
        rationale: String::new(),
    };
    let (rec, why) = recommend(&report, goal_has_common);
    report.recommendation = rec;
    report.rationale = why;
    report
}

impl fmt::Display for FeatureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "agents: {}", self.agent_count)?;
        writeln!(f, "depth: {}", self.depth)?;
        writeln!(
            f,
            "actions: ontic {}, sensing {}, announcement {}",
            self.actions.ontic, self.actions.sensing, self.actions.announcement
        )?;
        writeln!(f, "partial observers: {}", self.has_partial_observers)?;
        writeln!(f, "max init formula depth: {}", self.max_init_formula_depth)?;
        writeln!(f, "max goal depth: {}", self.max_goal_depth)?;
        writeln!(f, "max precondition depth: {}", self.max_precondition_depth)?;
        writeln!(f, "common knowledge used: {}", self.common_knowledge_used)?;
        writeln!(f, "actions with exp_effect: {}", self.exp_effect_actions)?;
        writeln!(f, "max chain depth: {}", self.max_chain_depth)?;
        writeln!(
            f,
            "recommendation: {} ({})",
            self.recommendation, self.rationale
        )
    }
}
