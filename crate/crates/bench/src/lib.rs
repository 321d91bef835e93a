//! Shared inputs for the criterion benches in `benches/`.

use epddl::validator::ValidatedProblem;

pub const COIN_DOMAIN: &str = include_str!("../../core/tests/fixtures/coin_domain.epddl");
pub const COIN_INSTANCE: &str = include_str!("../../core/tests/fixtures/coin_instance.epddl");

/// The coin instance with `n` agents `ag0..` and knowledge depth `depth`.
pub fn scaled_instance(n: usize, depth: usize) -> String {
    let agents: Vec<String> = (0..n).map(|k| format!("ag{k}")).collect();
    let all = agents.join(" ");
    let others: String = agents[1..]
        .iter()
        .map(|a| format!(" ([{all}](not (has_key {a}))) ([{all}](not (looking {a})))"))
        .collect();
    format!(
        "(define (problem scaled) (:domain coininthebox) (:agent {all}) (:depth {depth})\n \
         (:init (tails) (has_key ag0) (looking ag0) ([{all}](has_key ag0)) ([{all}](looking ag0)) \
         ([{all}](not (opened))){others})\n (:goal ([ag0](tails))))"
    )
}

pub fn validated(domain: &str, instance: &str) -> ValidatedProblem {
    let d = epddl::parse_domain(domain).expect("bench domain parses");
    let i = epddl::parse_instance(instance).expect("bench instance parses");
    epddl::validate(&d, &i).expect("bench problem validates")
}
