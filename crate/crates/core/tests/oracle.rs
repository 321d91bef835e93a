mod common;

use epddl::oracle::{
    apply, bfs_plan, entails, initial_state, minimize, simulate, OracleError, SearchOutcome,
};
use epddl::{BeliefFormula as BF, Term};

fn a(name: &str) -> Term {
    Term::agent(name)
}

fn atom(name: &str) -> BF {
    BF::atom(name, &[])
}

#[test]
fn coin_initial_state_has_two_worlds() {
    let g = common::coin();
    let s = initial_state(&g).unwrap();
    assert_eq!(s.world_count(), 2);
    assert!(s.is_s5());
    assert!(entails(&s, &atom("tails")).unwrap());
    let other = 1 - s.pointed();
    assert!(!s.holds_at(other, &atom("tails")).unwrap());
}

#[test]
fn fully_known_init_has_one_world() {
    let instance = common::COIN_INSTANCE.replace(
        "([a b c](has_key a))",
        "([a b c](has_key a)) ([a b c](tails))",
    );
    let g = epddl::load_problem(common::COIN_DOMAIN, &instance)
        .unwrap()
        .0;
    let s = initial_state(&g).unwrap();
    assert_eq!(s.world_count(), 1);
    for i in 0..3 {
        assert_eq!(s.successors(i, 0), &[0]);
    }
}

#[test]
fn contradicting_common_knowledge_is_rejected() {
    let instance = common::COIN_INSTANCE.replace("([a b c](has_key a))", "([a b c](not (tails)))");
    let g = epddl::load_problem(common::COIN_DOMAIN, &instance)
        .unwrap()
        .0;
    let err = initial_state(&g).unwrap_err();
    assert!(matches!(err, OracleError::InconsistentInit(_)), "{err:?}");
    assert_eq!(err.code().as_str(), "E_INCONSISTENT_INIT");
}

#[test]
fn entailment_at_the_initial_state() {
    let s = initial_state(&common::coin()).unwrap();
    assert!(entails(&s, &BF::believes(a("a"), BF::atom("has_key", &["a"]))).unwrap());
    assert!(!entails(&s, &BF::believes(a("a"), atom("tails"))).unwrap());
    assert!(!entails(&s, &BF::believes(a("a"), BF::not(atom("tails")))).unwrap());
    let group = vec![a("a"), a("b"), a("c")];
    assert!(entails(&s, &BF::common(group, BF::top()).unwrap()).unwrap());
}

#[test]
fn unknown_fluent_is_an_error() {
    let s = initial_state(&common::coin()).unwrap();
    assert!(matches!(
        entails(&s, &atom("heads")),
        Err(OracleError::UnknownFluent(_))
    ));
}

#[test]
fn open_informs_only_the_lookers() {
    let states = simulate(&common::coin(), &["open_a"]).unwrap();
    let s = &states[1];
    let opened = atom("opened");
    assert!(entails(s, &BF::Common(vec![a("a")], Box::new(opened.clone()))).unwrap());
    assert!(entails(s, &BF::believes(a("b"), BF::not(opened.clone()))).unwrap());
    assert!(entails(s, &BF::believes(a("c"), BF::not(opened))).unwrap());
}

#[test]
fn peek_after_open_teaches_a_only() {
    let states = simulate(&common::coin(), &["open_a", "peek_a"]).unwrap();
    let s = &states[2];
    assert!(entails(s, &BF::believes(a("a"), atom("tails"))).unwrap());
    assert!(!entails(s, &BF::believes(a("b"), atom("tails"))).unwrap());
}

#[test]
fn unmet_precondition_fails() {
    let g = common::coin();
    let s = initial_state(&g).unwrap();
    let err = apply(&s, g.action("peek_a").unwrap()).unwrap_err();
    assert_eq!(err, OracleError::PreconditionFailed("peek_a".into()));
}

#[test]
fn bfs_finds_open_then_peek() {
    let plan = bfs_plan(&common::coin(), 4).unwrap();
    assert_eq!(
        plan,
        SearchOutcome::Plan(vec!["open_a".into(), "peek_a".into()])
    );
}

#[test]
fn bfs_respects_the_length_bound() {
    assert_eq!(
        bfs_plan(&common::coin(), 1).unwrap(),
        SearchOutcome::NotFound { max_len: 1 }
    );
}

#[test]
fn goal_true_initially_gives_empty_plan() {
    let g = common::coin_with_goal("([a](has_key a))");
    assert_eq!(bfs_plan(&g, 3).unwrap(), SearchOutcome::Plan(vec![]));
}

#[test]
fn b_never_learns_the_coin() {
    let g = common::coin_with_goal("([b](tails))");
    assert_eq!(
        bfs_plan(&g, 4).unwrap(),
        SearchOutcome::NotFound { max_len: 4 }
    );
}

#[test]
fn contraction_is_idempotent_and_preserves_truth() {
    let g = common::coin();
    let states = simulate(&g, &["open_a", "peek_a", "announce_a"]).unwrap();
    let probes = [
        BF::believes(a("a"), atom("tails")),
        BF::believes(a("b"), atom("opened")),
        BF::believes(a("b"), BF::believes(a("a"), atom("tails"))),
        BF::Common(vec![a("a"), a("b")], Box::new(atom("opened"))),
    ];
    for s in &states {
        let m = minimize(s);
        assert_eq!(minimize(&m), m);
        assert!(m.world_count() <= s.world_count());
        for p in &probes {
            assert_eq!(entails(s, p).unwrap(), entails(&m, p).unwrap(), "{p:?}");
        }
    }
}

#[test]
fn dump_lists_worlds_and_agents() {
    let s = initial_state(&common::coin()).unwrap();
    let dump = s.dump();
    assert!(dump.starts_with("pointed w"));
    assert_eq!(dump.lines().filter(|l| l.starts_with("world ")).count(), 2);
    assert_eq!(dump.lines().filter(|l| l.starts_with("agent ")).count(), 3);
}
