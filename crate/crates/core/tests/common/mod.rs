#![allow(dead_code)]

use epddl::grounder::GroundedProblem;

pub const COIN_DOMAIN: &str = include_str!("../fixtures/coin_domain.epddl");
pub const COIN_INSTANCE: &str = include_str!("../fixtures/coin_instance.epddl");

pub fn coin() -> GroundedProblem {
    epddl::load_problem(COIN_DOMAIN, COIN_INSTANCE)
        .expect("coin fixture is valid")
        .0
}

pub fn coin_with_goal(goal: &str) -> GroundedProblem {
    let instance = COIN_INSTANCE.replace("(:goal ([a](tails)))", &format!("(:goal {goal})"));
    assert_ne!(instance, COIN_INSTANCE, "goal placeholder not found");
    epddl::load_problem(COIN_DOMAIN, &instance)
        .expect("modified coin is valid")
        .0
}

pub fn validated(domain: &str, instance: &str) -> epddl::validator::ValidatedProblem {
    let d = epddl::parse_domain(domain).expect("domain parses");
    let i = epddl::parse_instance(instance).expect("instance parses");
    epddl::validator::validate(&d, &i).expect("problem validates")
}

pub fn coin_validated() -> epddl::validator::ValidatedProblem {
    validated(COIN_DOMAIN, COIN_INSTANCE)
}

/// Whitespace-insensitive tokens: parentheses, brackets, commas and
/// semicolons stand alone; `;` comments are kept only when `comments`.
pub fn tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_whitespace() || "()[],;".contains(c) {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

pub fn contains_tokens(haystack: &str, needle: &str) -> bool {
    let h = tokens(haystack);
    let n = tokens(needle);
    !n.is_empty() && h.windows(n.len()).any(|w| w == n.as_slice())
}
