//! Shared domain types: agents, fluents, belief formulae, observer specifications
//! and the two file-level ASTs (domain and instance).
//!
//! Identifiers are stored lowercase. Variables are stored without their `?` sigil.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::Deref;

use serde::Serialize;
use thiserror::Error;

use crate::span::Span;

/// A named agent constant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Agent(pub String);

impl Agent {
    pub fn new(name: impl Into<String>) -> Self {
        Agent(name.into().to_lowercase())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A variable, stored without the leading `?`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Var(pub String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into().to_lowercase();
        Var(name.strip_prefix('?').map(str::to_owned).unwrap_or(name))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

/// A term in argument or agent position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Const(Agent),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Var::new(name))
    }

    pub fn agent(name: &str) -> Self {
        Term::Const(Agent::new(name))
    }

    pub fn as_agent(&self) -> Option<&Agent> {
        match self {
            Term::Const(a) => Some(a),
            Term::Var(_) => None,
        }
    }

    pub fn subst(&self, map: &Substitution) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Const(_) => self.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => v.fmt(f),
            Term::Const(a) => a.fmt(f),
        }
    }
}

impl Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub type Substitution = HashMap<Var, Term>;

/// A (possibly non-ground) fluent occurrence: a predicate applied to terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fluent {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Fluent {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        Fluent {
            predicate: predicate.to_lowercase(),
            args,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Const(_)))
    }

    pub fn to_ground(&self) -> Option<GroundFluent> {
        let args = self
            .args
            .iter()
            .map(|t| t.as_agent().cloned())
            .collect::<Option<Vec<_>>>()?;
        Some(GroundFluent {
            predicate: self.predicate.clone(),
            args,
        })
    }
}

impl fmt::Display for Fluent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

/// A variable-free fluent. Its flat name joins predicate and arguments with `_`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundFluent {
    pub predicate: String,
    pub args: Vec<Agent>,
}

impl GroundFluent {
    pub fn new(predicate: &str, args: &[&str]) -> Self {
        GroundFluent {
            predicate: predicate.to_lowercase(),
            args: args.iter().map(|a| Agent::new(*a)).collect(),
        }
    }

    /// `has_key a` becomes `has_key_a`.
    pub fn flat_name(&self) -> String {
        std::iter::once(self.predicate.as_str())
            .chain(self.args.iter().map(Agent::name))
            .collect::<Vec<_>>()
            .join("_")
    }

    pub fn to_fluent(&self) -> Fluent {
        Fluent {
            predicate: self.predicate.clone(),
            args: self.args.iter().cloned().map(Term::Const).collect(),
        }
    }
}

impl fmt::Display for GroundFluent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_fluent().fmt(f)
    }
}

impl Serialize for GroundFluent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.flat_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AstError {
    #[error("common knowledge requires a non-empty agent group")]
    EmptyGroup,
}

/// A dynamic-epistemic-logic formula.
///
/// `And(vec![])` is the constant true; see [`BeliefFormula::top`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BeliefFormula {
    Atom(Fluent),
    Not(Box<BeliefFormula>),
    And(Vec<BeliefFormula>),
    Or(Vec<BeliefFormula>),
    Implies(Box<BeliefFormula>, Box<BeliefFormula>),
    Believes(Term, Box<BeliefFormula>),
    /// Common knowledge among a group of at least two distinct agent terms.
    Common(Vec<Term>, Box<BeliefFormula>),
}

use BeliefFormula as BF;

impl BeliefFormula {
    pub fn top() -> Self {
        BF::And(Vec::new())
    }

    pub fn is_top(&self) -> bool {
        matches!(self, BF::And(v) if v.is_empty())
    }

    pub fn atom(predicate: &str, args: &[&str]) -> Self {
        let args = args
            .iter()
            .map(|a| {
                if a.starts_with('?') {
                    Term::var(a)
                } else {
                    Term::agent(a)
                }
            })
            .collect();
        BF::Atom(Fluent::new(predicate, args))
    }

    pub fn ground_atom(f: &GroundFluent) -> Self {
        BF::Atom(f.to_fluent())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: BeliefFormula) -> Self {
        BF::Not(Box::new(f))
    }

    pub fn believes(agent: Term, f: BeliefFormula) -> Self {
        BF::Believes(agent, Box::new(f))
    }

    pub fn implies(a: BeliefFormula, b: BeliefFormula) -> Self {
        BF::Implies(Box::new(a), Box::new(b))
    }

    /// Builds common knowledge over `group`. Duplicates are dropped; a
    /// singleton group normalizes to [`BeliefFormula::Believes`].
    pub fn common(group: Vec<Term>, f: BeliefFormula) -> Result<Self, AstError> {
        let mut seen = BTreeSet::new();
        let group: Vec<Term> = group
            .into_iter()
            .filter(|t| seen.insert(t.clone()))
            .collect();
        match group.len() {
            0 => Err(AstError::EmptyGroup),
            1 => Ok(BF::believes(group.into_iter().next().unwrap(), f)),
            _ => Ok(BF::Common(group, Box::new(f))),
        }
    }

    /// Flattening conjunction: `and(vec![])` is true, `and(vec![x])` is `x`.
    pub fn and(parts: Vec<BeliefFormula>) -> Self {
        let mut flat = Vec::with_capacity(parts.len());
        for p in parts {
            match p {
                BF::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            BF::And(flat)
        }
    }

    /// Top-level conjuncts; a non-conjunction is its own single conjunct.
    pub fn conjuncts(&self) -> &[BeliefFormula] {
        match self {
            BF::And(v) => v,
            other => std::slice::from_ref(other),
        }
    }

    /// Nesting depth of modal operators.
    pub fn depth(&self) -> usize {
        match self {
            BF::Atom(_) => 0,
            BF::Not(f) => f.depth(),
            BF::And(v) | BF::Or(v) => v.iter().map(BF::depth).max().unwrap_or(0),
            BF::Implies(a, b) => a.depth().max(b.depth()),
            BF::Believes(_, f) | BF::Common(_, f) => 1 + f.depth(),
        }
    }

    pub fn is_fluent_formula(&self) -> bool {
        self.depth() == 0
    }

    /// A fluent or a negated fluent.
    pub fn as_literal(&self) -> Option<(&Fluent, bool)> {
        match self {
            BF::Atom(f) => Some((f, true)),
            BF::Not(inner) => match inner.as_ref() {
                BF::Atom(f) => Some((f, false)),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn contains_common(&self) -> bool {
        self.any(&mut |f| matches!(f, BF::Common(..)))
    }

    pub fn contains_implication(&self) -> bool {
        self.any(&mut |f| matches!(f, BF::Implies(..)))
    }

    /// Pre-order search over subformulae (including `self`).
    pub fn any(&self, pred: &mut impl FnMut(&BeliefFormula) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            BF::Atom(_) => false,
            BF::Not(f) | BF::Believes(_, f) | BF::Common(_, f) => f.any(pred),
            BF::And(v) | BF::Or(v) => v.iter().any(|f| f.any(pred)),
            BF::Implies(a, b) => a.any(pred) || b.any(pred),
        }
    }

    /// Visits every subformula in pre-order.
    pub fn visit<'a>(&'a self, visitor: &mut impl FnMut(&'a BeliefFormula)) {
        visitor(self);
        match self {
            BF::Atom(_) => {}
            BF::Not(f) | BF::Believes(_, f) | BF::Common(_, f) => f.visit(visitor),
            BF::And(v) | BF::Or(v) => v.iter().for_each(|f| f.visit(visitor)),
            BF::Implies(a, b) => {
                a.visit(visitor);
                b.visit(visitor);
            }
        }
    }

    /// Every term occurrence, both in fluent arguments and in agent positions.
    pub fn terms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        self.visit(&mut |f| match f {
            BF::Atom(fl) => out.extend(fl.args.iter()),
            BF::Believes(t, _) => out.push(t),
            BF::Common(g, _) => out.extend(g.iter()),
            _ => {}
        });
        out
    }

    pub fn fluents(&self) -> Vec<&Fluent> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let BF::Atom(fl) = f {
                out.push(fl)
            }
        });
        out
    }

    /// All variables occurring in the formula. Formulae have no binders, so
    /// every occurrence is free.
    pub fn free_variables(&self) -> BTreeSet<Var> {
        self.terms()
            .into_iter()
            .filter_map(|t| match t {
                Term::Var(v) => Some(v.clone()),
                Term::Const(_) => None,
            })
            .collect()
    }

    pub fn is_ground(&self) -> bool {
        self.free_variables().is_empty()
    }

    pub fn subst(&self, map: &Substitution) -> BeliefFormula {
        match self {
            BF::Atom(f) => BF::Atom(Fluent {
                predicate: f.predicate.clone(),
                args: f.args.iter().map(|t| t.subst(map)).collect(),
            }),
            BF::Not(f) => BF::not(f.subst(map)),
            BF::And(v) => BF::And(v.iter().map(|f| f.subst(map)).collect()),
            BF::Or(v) => BF::Or(v.iter().map(|f| f.subst(map)).collect()),
            BF::Implies(a, b) => BF::implies(a.subst(map), b.subst(map)),
            BF::Believes(t, f) => BF::believes(t.subst(map), f.subst(map)),
            BF::Common(g, f) => {
                // substitution may collapse the group (e.g. [?i ?j] with i = j)
                let group = g.iter().map(|t| t.subst(map)).collect();
                BF::common(group, f.subst(map)).expect("substitution keeps groups non-empty")
            }
        }
    }
}

/// Free-function form of [`BeliefFormula::depth`].
pub fn depth_of(f: &BeliefFormula) -> usize {
    f.depth()
}

/// Free-function form of [`BeliefFormula::free_variables`].
pub fn free_variables(f: &BeliefFormula) -> BTreeSet<Var> {
    f.free_variables()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionType {
    Ontic,
    Sensing,
    Announcement,
}

impl ActionType {
    pub fn keyword(self) -> &'static str {
        match self {
            ActionType::Ontic => "ontic",
            ActionType::Sensing => "sensing",
            ActionType::Announcement => "announcement",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "ontic" => Some(ActionType::Ontic),
            "sensing" => Some(ActionType::Sensing),
            "announcement" => Some(ActionType::Announcement),
            _ => None,
        }
    }
}

impl fmt::Display for ActionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A value with a source location. Equality ignores the span.
#[derive(Debug, Clone)]
pub struct Spanned<T> {
    pub node: T,
    pub span: Span,
}

impl<T> Spanned<T> {
    pub fn new(node: T, span: Span) -> Self {
        Spanned { node, span }
    }

    /// Wraps a value built in code rather than parsed.
    pub fn synthetic(node: T) -> Self {
        Spanned {
            node,
            span: Span::default(),
        }
    }
}

impl<T> Deref for Spanned<T> {
    type Target = T;
    fn deref(&self) -> &T {
        &self.node
    }
}

impl<T: PartialEq> PartialEq for Spanned<T> {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

impl<T: Eq> Eq for Spanned<T> {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedVar {
    pub var: Var,
    pub ty: String,
}

impl TypedVar {
    pub fn agent(name: &str) -> Self {
        TypedVar {
            var: Var::new(name),
            ty: "agent".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObserverScope {
    Plain,
    /// `(forall (diff (?var - agent) (excluded...)) ...)`; an empty exclusion
    /// list is a plain `forall`.
    ForallDiff {
        var: Var,
        excluded: Vec<Term>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObserverClause {
    pub agent: Term,
    pub condition: Option<BeliefFormula>,
    pub scope: ObserverScope,
}

impl ObserverClause {
    pub fn plain(agent: Term) -> Self {
        ObserverClause {
            agent,
            condition: None,
            scope: ObserverScope::Plain,
        }
    }

    /// Variables this clause binds on top of the action parameters.
    pub fn bound_var(&self) -> Option<&Var> {
        match &self.scope {
            ObserverScope::Plain => None,
            ObserverScope::ForallDiff { var, .. } => Some(var),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObserverSpec {
    pub clauses: Vec<ObserverClause>,
}

impl ObserverSpec {
    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpddlAction {
    pub name: String,
    pub act_type: ActionType,
    pub parameters: Vec<TypedVar>,
    pub precondition: Spanned<BeliefFormula>,
    pub effect: Spanned<BeliefFormula>,
    pub observers: Spanned<ObserverSpec>,
    pub p_observers: Option<Spanned<ObserverSpec>>,
    pub exp_effect: Option<Spanned<BeliefFormula>>,
}

impl EpddlAction {
    /// The first agent-typed parameter, taken as the executor.
    pub fn executor(&self) -> Option<&Var> {
        self.parameters
            .iter()
            .find(|p| p.ty == "agent")
            .map(|p| &p.var)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedVar>,
}

impl PredicateDecl {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

/// Requirement flags are kept in canonical order without duplicates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Requirements(Vec<String>);

const REQUIREMENT_ORDER: &[&str] = &[
    ":strips",
    ":typing",
    ":negative-preconditions",
    ":disjunctive-preconditions",
    ":equality",
    ":existential-preconditions",
    ":universal-preconditions",
    ":quantified-preconditions",
    ":conditional-effects",
    ":adl",
];

impl Requirements {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(flags: I) -> Self {
        let mut v: Vec<String> = flags.into_iter().map(|s| s.into().to_lowercase()).collect();
        v.sort_by_key(|f| Self::rank(f));
        v.dedup();
        Requirements(v)
    }

    fn rank(flag: &str) -> (usize, String) {
        match REQUIREMENT_ORDER.iter().position(|r| *r == flag) {
            Some(i) => (i, String::new()),
            None if flag == ":mep" => (REQUIREMENT_ORDER.len() + 1, String::new()),
            None => (REQUIREMENT_ORDER.len(), flag.to_owned()),
        }
    }

    pub fn contains(&self, flag: &str) -> bool {
        self.0.iter().any(|f| f == flag)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpddlDomain {
    pub name: Spanned<String>,
    pub requirements: Spanned<Requirements>,
    pub predicates: Vec<Spanned<PredicateDecl>>,
    pub actions: Vec<Spanned<EpddlAction>>,
}

impl EpddlDomain {
    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates
            .iter()
            .map(|p| &p.node)
            .find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&EpddlAction> {
        self.actions
            .iter()
            .map(|a| &a.node)
            .find(|a| a.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpddlInstance {
    pub name: Spanned<String>,
    pub domain_name: Spanned<String>,
    pub agents: Vec<Spanned<Agent>>,
    pub depth: Spanned<u32>,
    pub init: Vec<Spanned<BeliefFormula>>,
    pub goal: Spanned<BeliefFormula>,
}

impl EpddlInstance {
    pub fn agent_list(&self) -> Vec<Agent> {
        self.agents.iter().map(|a| a.node.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tails() -> BF {
        BF::atom("tails", &[])
    }

    #[test]
    fn depth_of_fluent_is_zero() {
        assert_eq!(depth_of(&tails()), 0);
    }

    #[test]
    fn depth_of_single_belief_is_one() {
        assert_eq!(depth_of(&BF::believes(Term::agent("a"), tails())), 1);
    }

    #[test]
    fn depth_of_belief_over_common_is_two() {
        let f = BF::believes(
            Term::agent("i"),
            BF::common(vec![Term::agent("i"), Term::agent("j")], BF::atom("f", &[])).unwrap(),
        );
        assert_eq!(depth_of(&f), 2);
    }

    #[test]
    fn free_variables_examples() {
        let has_key_i = BF::atom("has_key", &["?i"]);
        assert_eq!(free_variables(&has_key_i), BTreeSet::from([Var::new("i")]));
        let b = BF::believes(Term::var("?i"), has_key_i);
        assert_eq!(free_variables(&b), BTreeSet::from([Var::new("i")]));
        assert!(free_variables(&BF::atom("opened", &[])).is_empty());
    }

    #[test]
    fn common_rejects_empty_and_normalizes_singleton() {
        assert_eq!(BF::common(vec![], tails()), Err(AstError::EmptyGroup));
        assert_eq!(
            BF::common(vec![Term::agent("a")], tails()).unwrap(),
            BF::believes(Term::agent("a"), tails())
        );
        assert_eq!(
            BF::common(vec![Term::agent("a"), Term::agent("a")], tails()).unwrap(),
            BF::believes(Term::agent("a"), tails())
        );
    }

    #[test]
    fn substitution_can_collapse_common_group() {
        let f = BF::common(vec![Term::var("i"), Term::var("j")], tails()).unwrap();
        let map = Substitution::from([
            (Var::new("i"), Term::agent("a")),
            (Var::new("j"), Term::agent("a")),
        ]);
        assert_eq!(f.subst(&map), BF::believes(Term::agent("a"), tails()));
    }

    #[test]
    fn requirements_are_canonically_ordered() {
        let r = Requirements::new([":mep", ":strips", ":negative-preconditions", ":mep"]);
        assert_eq!(
            r.iter().collect::<Vec<_>>(),
            vec![":strips", ":negative-preconditions", ":mep"]
        );
    }

    #[test]
    fn ground_fluent_flat_name() {
        assert_eq!(
            GroundFluent::new("has_key", &["a"]).flat_name(),
            "has_key_a"
        );
        assert_eq!(GroundFluent::new("tails", &[]).flat_name(), "tails");
    }

    fn arb_formula() -> impl proptest::strategy::Strategy<Value = BF> {
        use proptest::prelude::*;
        let leaf = prop_oneof![
            Just(BF::atom("p", &[])),
            Just(BF::atom("q", &["a"])),
            Just(BF::atom("q", &["?x"])),
        ];
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(BF::not),
                proptest::collection::vec(inner.clone(), 0..3).prop_map(BF::And),
                proptest::collection::vec(inner.clone(), 0..3).prop_map(BF::Or),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| BF::implies(a, b)),
                inner
                    .clone()
                    .prop_map(|f| BF::believes(Term::agent("a"), f)),
                inner
                    .prop_map(|f| BF::common(vec![Term::agent("a"), Term::agent("b")], f).unwrap()),
            ]
        })
    }

    proptest::proptest! {
        #[test]
        fn depth_is_monotone_under_substructure(f in arb_formula()) {
            let whole = f.depth();
            f.visit(&mut |sub| assert!(sub.depth() <= whole));
        }
    }
}
