mod common;

use epddl::{extract_features, Recommendation};

fn coin_without_partial_observers() -> String {
    let domain = common::COIN_DOMAIN.replace(
        ":observers    (?i)\n   :p_observers  (forall(diff(?j-agent)(?i))\n                 (when(looking ?j) (?j)))",
        ":observers    (and (?i) (forall(diff(?j-agent)(?i))\n                 (when(looking ?j) (?j))))",
    );
    assert_ne!(domain, common::COIN_DOMAIN);
    domain
}

#[test]
fn coin_recommends_mar_for_partial_observers() {
    let r = extract_features(&common::coin_validated());
    assert_eq!(r.agent_count, 3);
    assert_eq!(r.depth, 2);
    assert_eq!(
        (r.actions.ontic, r.actions.sensing, r.actions.announcement),
        (1, 1, 1)
    );
    assert!(r.has_partial_observers);
    assert!(r.common_knowledge_used);
    assert_eq!(r.max_init_formula_depth, 1);
    assert_eq!(r.max_goal_depth, 1);
    assert_eq!(r.max_precondition_depth, 1);
    assert_eq!(r.recommendation, Recommendation::Mar);
}

#[test]
fn deep_goal_recommends_mar() {
    let domain = coin_without_partial_observers();
    let instance =
        common::COIN_INSTANCE.replace("(:goal ([a](tails)))", "(:goal ([a]([b]([c](tails)))))");
    let r = extract_features(&common::validated(&domain, &instance));
    assert!(!r.has_partial_observers);
    assert_eq!(r.max_goal_depth, 3);
    assert_eq!(r.recommendation, Recommendation::Mar);
}

#[test]
fn common_goal_recommends_mar() {
    let domain = coin_without_partial_observers();
    let instance = common::COIN_INSTANCE.replace("(:goal ([a](tails)))", "(:goal ([a b](tails)))");
    let r = extract_features(&common::validated(&domain, &instance));
    assert_eq!(r.recommendation, Recommendation::Mar);
}

#[test]
fn fully_observable_problem_is_either() {
    let r = extract_features(&common::validated(
        &coin_without_partial_observers(),
        common::COIN_INSTANCE,
    ));
    assert_eq!(r.recommendation, Recommendation::Either);
    assert_eq!(r.exp_effect_actions, 0);
}

#[test]
fn explicit_effects_everywhere_recommend_pdkb() {
    let domain = coin_without_partial_observers()
        .replace(
            ":effect       (opened)",
            ":effect       (opened)\n   :exp_effect   ([?i](opened))",
        )
        .replace(
            ":effect       (tails)",
            ":effect       (tails)\n   :exp_effect   ([?i](tails))",
        );
    let r = extract_features(&common::validated(&domain, common::COIN_INSTANCE));
    assert_eq!(r.exp_effect_actions, 3);
    assert_eq!(r.recommendation, Recommendation::Pdkb);
}

#[test]
fn depth_one_bounds_chain_depth() {
    let instance = common::COIN_INSTANCE.replace("(:depth 2)", "(:depth 1)");
    let r = extract_features(&common::validated(common::COIN_DOMAIN, &instance));
    assert_eq!(r.max_chain_depth, 1);
}

#[test]
fn report_serializes_with_stable_names() {
    let r = extract_features(&common::coin_validated());
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["recommendation"], "MAR");
    assert_eq!(json["actions"]["sensing"], 1);
    assert!(r.to_string().contains("recommendation: MAR"));
}
