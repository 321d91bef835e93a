use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::{self, Write};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use itertools::Itertools;

use super::OracleError;
use crate::ast::*;
use crate::grounder::GroundedProblem;

/// Most fluents left open by the initial common knowledge (2^n worlds).
pub const MAX_OPEN_FLUENTS: usize = 10;

/// Fluent and agent universes shared by all states of one problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    fluents: Vec<GroundFluent>,
    fluent_index: HashMap<GroundFluent, usize>,
    agents: Vec<Agent>,
    agent_index: HashMap<Agent, usize>,
}

impl Signature {
    pub fn new(fluents: Vec<GroundFluent>, agents: Vec<Agent>) -> Result<Self, OracleError> {
        if fluents.len() > 64 {
            return Err(OracleError::NotConstructible(format!(
                "{} fluents exceed the 64-fluent valuation width",
                fluents.len()
            )));
        }
        let fluent_index = fluents
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, f)| (f, i))
            .collect();
        let agent_index = agents
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, a)| (a, i))
            .collect();
        Ok(Signature {
            fluents,
            fluent_index,
            agents,
            agent_index,
        })
    }

    pub fn fluents(&self) -> &[GroundFluent] {
        &self.fluents
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn fluent(&self, f: &GroundFluent) -> Option<usize> {
        self.fluent_index.get(f).copied()
    }

    pub fn agent(&self, a: &Agent) -> Option<usize> {
        self.agent_index.get(a).copied()
    }

    fn fluent_of(&self, f: &Fluent) -> Result<usize, OracleError> {
        let g = f
            .to_ground()
            .ok_or_else(|| OracleError::NonGround(f.to_string()))?;
        self.fluent(&g)
            .ok_or_else(|| OracleError::UnknownFluent(g.to_string()))
    }

    fn agent_of(&self, t: &Term) -> Result<usize, OracleError> {
        match t {
            Term::Var(v) => Err(OracleError::NonGround(v.to_string())),
            Term::Const(a) => self
                .agent(a)
                .ok_or_else(|| OracleError::UnknownAgent(a.to_string())),
        }
    }

    /// Resolves fluent and agent names to indices.
    pub fn compile(&self, f: &BeliefFormula) -> Result<Compiled, OracleError> {
        use BeliefFormula as BF;
        Ok(match f {
            BF::Atom(fl) => Compiled::Atom(self.fluent_of(fl)?),
            BF::Not(g) => Compiled::Not(Box::new(self.compile(g)?)),
            BF::And(v) => Compiled::And(v.iter().map(|g| self.compile(g)).try_collect()?),
            BF::Or(v) => Compiled::Or(v.iter().map(|g| self.compile(g)).try_collect()?),
            BF::Implies(a, b) => Compiled::Or(vec![
                Compiled::Not(Box::new(self.compile(a)?)),
                self.compile(b)?,
            ]),
            BF::Believes(t, g) => Compiled::Believes(self.agent_of(t)?, Box::new(self.compile(g)?)),
            BF::Common(group, g) => Compiled::Common(
                group.iter().map(|t| self.agent_of(t)).try_collect()?,
                Box::new(self.compile(g)?),
            ),
        })
    }
}

/// A ground formula with fluents and agents as indices into a [`Signature`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Compiled {
    Atom(usize),
    Not(Box<Compiled>),
    And(Vec<Compiled>),
    Or(Vec<Compiled>),
    Believes(usize, Box<Compiled>),
    Common(Vec<usize>, Box<Compiled>),
}

/// A pointed Kripke structure. Valuations are bit sets over the signature's
/// fluents; `relations[i][w]` lists agent `i`'s successors of world `w`, sorted.
#[derive(Debug, Clone)]
pub struct KripkeState {
    pub(crate) sig: Arc<Signature>,
    pub(crate) worlds: Vec<u64>,
    pub(crate) relations: Vec<Vec<Vec<u32>>>,
    pub(crate) pointed: u32,
}

impl PartialEq for KripkeState {
    fn eq(&self, other: &Self) -> bool {
        self.pointed == other.pointed
            && self.worlds == other.worlds
            && self.relations == other.relations
    }
}

impl Eq for KripkeState {}

impl Hash for KripkeState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.pointed.hash(state);
        self.worlds.hash(state);
        self.relations.hash(state);
    }
}

impl KripkeState {
    /// Builds a state, sorting and deduplicating successor lists.
    pub fn new(
        sig: Arc<Signature>,
        worlds: Vec<u64>,
        mut relations: Vec<Vec<Vec<u32>>>,
        pointed: u32,
    ) -> Self {
        assert!(
            (pointed as usize) < worlds.len(),
            "pointed world out of range"
        );
        assert_eq!(relations.len(), sig.agents.len());
        for rel in &mut relations {
            assert_eq!(rel.len(), worlds.len());
            for succ in rel.iter_mut() {
                succ.sort_unstable();
                succ.dedup();
            }
        }
        KripkeState {
            sig,
            worlds,
            relations,
            pointed,
        }
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    pub fn pointed(&self) -> usize {
        self.pointed as usize
    }

    pub fn valuation(&self, w: usize) -> u64 {
        self.worlds[w]
    }

    pub fn successors(&self, agent: usize, w: usize) -> &[u32] {
        &self.relations[agent][w]
    }

    /// True fluents of world `w`, in signature order.
    pub fn true_fluents(&self, w: usize) -> Vec<&GroundFluent> {
        let v = self.worlds[w];
        self.sig
            .fluents
            .iter()
            .enumerate()
            .filter(|(i, _)| v >> i & 1 == 1)
            .map(|(_, f)| f)
            .collect()
    }

    pub fn is_equivalence(&self, agent: usize) -> bool {
        let rel = &self.relations[agent];
        let has = |w: usize, v: u32| rel[w].binary_search(&v).is_ok();
        (0..self.worlds.len()).all(|w| {
            has(w, w as u32)
                && rel[w].iter().all(|&v| {
                    has(v as usize, w as u32) && rel[v as usize].iter().all(|&u| has(w, u))
                })
        })
    }

    pub fn is_s5(&self) -> bool {
        (0..self.sig.agents.len()).all(|i| self.is_equivalence(i))
    }

    /// Truth set of `f` over all worlds.
    pub fn truth_set(&self, f: &Compiled) -> Vec<bool> {
        let n = self.worlds.len();
        match f {
            Compiled::Atom(i) => self.worlds.iter().map(|v| v >> i & 1 == 1).collect(),
            Compiled::Not(g) => self.truth_set(g).into_iter().map(|b| !b).collect(),
            Compiled::And(parts) => parts.iter().fold(vec![true; n], |acc, g| {
                acc.into_iter()
                    .zip(self.truth_set(g))
                    .map(|(a, b)| a && b)
                    .collect()
            }),
            Compiled::Or(parts) => parts.iter().fold(vec![false; n], |acc, g| {
                acc.into_iter()
                    .zip(self.truth_set(g))
                    .map(|(a, b)| a || b)
                    .collect()
            }),
            Compiled::Believes(i, g) => {
                let inner = self.truth_set(g);
                self.relations[*i]
                    .iter()
                    .map(|succ| succ.iter().all(|&v| inner[v as usize]))
                    .collect()
            }
            Compiled::Common(group, g) => {
                let inner = self.truth_set(g);
                (0..n)
                    .map(|w| self.reachable_from(w, group).all(|v| inner[v]))
                    .collect()
            }
        }
    }

    /// Worlds reachable in one or more steps along the union of `group`'s relations.
    fn reachable_from<'a>(
        &'a self,
        w: usize,
        group: &'a [usize],
    ) -> impl Iterator<Item = usize> + 'a {
        let mut seen = vec![false; self.worlds.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        let mut out = Vec::new();
        queue.push_back(w);
        while let Some(x) = queue.pop_front() {
            for &i in group {
                for &v in &self.relations[i][x] {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        out.push(v as usize);
                        queue.push_back(v as usize);
                    }
                }
            }
        }
        out.into_iter()
    }

    pub fn holds_compiled(&self, w: usize, f: &Compiled) -> bool {
        self.truth_set(f)[w]
    }

    /// Truth of a ground formula at world `w`.
    pub fn holds_at(&self, w: usize, f: &BeliefFormula) -> Result<bool, OracleError> {
        Ok(self.holds_compiled(w, &self.sig.compile(f)?))
    }

    /// Structured text dump: one line per world, then per-agent edges.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        writeln!(out, "pointed w{}", self.pointed).unwrap();
        for w in 0..self.worlds.len() {
            writeln!(out, "world w{w}: {}", self.true_fluents(w).iter().join(" ")).unwrap();
        }
        for (i, agent) in self.sig.agents.iter().enumerate() {
            let edges = (0..self.worlds.len())
                .map(|w| {
                    format!(
                        "w{w}->{{{}}}",
                        self.relations[i][w]
                            .iter()
                            .map(|v| format!("w{v}"))
                            .join(",")
                    )
                })
                .join(" ");
            writeln!(out, "agent {agent}: {edges}").unwrap();
        }
        out
    }

    /// Restriction to the worlds reachable from the pointed world.
    pub fn generated(&self) -> KripkeState {
        let all: Vec<usize> = (0..self.sig.agents.len()).collect();
        let mut keep: Vec<usize> = self.reachable_from(self.pointed as usize, &all).collect();
        if !keep.contains(&(self.pointed as usize)) {
            keep.push(self.pointed as usize);
        }
        keep.sort_unstable();
        let index: HashMap<usize, u32> = keep
            .iter()
            .enumerate()
            .map(|(n, &w)| (w, n as u32))
            .collect();
        let worlds = keep.iter().map(|&w| self.worlds[w]).collect();
        let relations = self
            .relations
            .iter()
            .map(|rel| {
                keep.iter()
                    .map(|&w| rel[w].iter().map(|v| index[&(*v as usize)]).collect())
                    .collect()
            })
            .collect();
        KripkeState::new(
            self.sig.clone(),
            worlds,
            relations,
            index[&(self.pointed as usize)],
        )
    }
}

impl fmt::Display for KripkeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

/// Truth of a ground formula at the pointed world.
pub fn entails(s: &KripkeState, f: &BeliefFormula) -> Result<bool, OracleError> {
    s.holds_at(s.pointed as usize, f)
}

/// Finitary-S5 initial state: every valuation consistent with the commonly
/// known literals, universal accessibility for every agent, pointed at the
/// closed-world valuation of the initial world atoms.
pub fn initial_state(g: &GroundedProblem) -> Result<KripkeState, OracleError> {
    let sig = Arc::new(Signature::new(g.fluents.clone(), g.agents.clone())?);
    let mut fixed: BTreeMap<usize, bool> = BTreeMap::new();
    for entry in &g.init_beliefs {
        let (group, body) = match entry {
            BeliefFormula::Common(group, body) => (group.clone(), body),
            BeliefFormula::Believes(t, body) => (vec![t.clone()], body),
            other => {
                return Err(OracleError::NotConstructible(format!(
                    "initial belief `{}` is not common knowledge of a literal",
                    crate::parser::print_formula(other)
                )))
            }
        };
        let mut members: Vec<&Agent> = group.iter().filter_map(Term::as_agent).collect();
        members.sort();
        members.dedup();
        if members.len() != g.agents.len() {
            return Err(OracleError::NotConstructible(format!(
                "initial belief `{}` is not shared by all agents",
                crate::parser::print_formula(entry)
            )));
        }
        let Some((fluent, positive)) = body.as_literal() else {
            return Err(OracleError::NotConstructible(format!(
                "initial belief `{}` does not have a literal body",
                crate::parser::print_formula(entry)
            )));
        };
        let idx = sig.fluent_of(fluent)?;
        if let Some(prev) = fixed.insert(idx, positive) {
            if prev != positive {
                return Err(OracleError::InconsistentInit(format!(
                    "`{fluent}` is commonly known both true and false"
                )));
            }
        }
    }

    let mut pointed_val = 0u64;
    for f in &g.init_world {
        let idx = sig
            .fluent(f)
            .ok_or_else(|| OracleError::UnknownFluent(f.to_string()))?;
        pointed_val |= 1 << idx;
    }
    for (&idx, &value) in &fixed {
        if (pointed_val >> idx & 1 == 1) != value {
            return Err(OracleError::InconsistentInit(format!(
                "the initial world contradicts common knowledge of `{}{}`",
                if value { "" } else { "not " },
                sig.fluents[idx]
            )));
        }
    }

    let open: Vec<usize> = (0..sig.fluents.len())
        .filter(|i| !fixed.contains_key(i))
        .collect();
    if open.len() > MAX_OPEN_FLUENTS {
        return Err(OracleError::NotConstructible(format!(
            "{} fluents are not commonly known; at most {MAX_OPEN_FLUENTS} are supported",
            open.len()
        )));
    }
    let base = fixed
        .iter()
        .filter(|(_, &v)| v)
        .fold(0u64, |acc, (&i, _)| acc | 1 << i);
    let worlds: Vec<u64> = (0..1u64 << open.len())
        .map(|bits| {
            open.iter()
                .enumerate()
                .filter(|(k, _)| bits >> k & 1 == 1)
                .fold(base, |acc, (_, &i)| acc | 1 << i)
        })
        .collect();
    let pointed = worlds
        .iter()
        .position(|&v| v == pointed_val)
        .expect("pointed valuation enumerated") as u32;
    let all: Vec<u32> = (0..worlds.len() as u32).collect();
    let relations = vec![vec![all; worlds.len()]; sig.agents.len()];
    let state = KripkeState::new(sig, worlds, relations, pointed);
    debug_assert!(state.is_s5());
    Ok(state)
}
