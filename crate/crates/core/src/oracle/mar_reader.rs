//! Reader for the mAρ subset the mAρ backend writes, producing a grounded
//! problem the oracle can search directly. Used to check that translation
//! preserves plans.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::*;
use crate::grounder::{GroundAction, GroundObserver, GroundedProblem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("mAρ statement {index}: {message}")]
pub struct MarReadError {
    pub index: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Punct(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c.is_alphanumeric() || c == '_' {
            let mut id = String::new();
            while let Some(&c) = chars.peek().filter(|c| c.is_alphanumeric() || **c == '_') {
                id.push(c);
                chars.next();
            }
            out.push(Tok::Ident(id));
        } else if "()[],-".contains(c) {
            out.push(Tok::Punct(c));
            chars.next();
        } else {
            return Err(format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<Tok>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn ident(&mut self) -> Result<String, String> {
        match self.toks.get(self.pos) {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            other => Err(format!("expected a name, found {other:?}")),
        }
    }

    fn punct(&mut self, c: char) -> Result<(), String> {
        match self.toks.get(self.pos) {
            Some(Tok::Punct(p)) if *p == c => {
                self.pos += 1;
                Ok(())
            }
            other => Err(format!("expected `{c}`, found {other:?}")),
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn done(&self) -> bool {
        self.pos == self.toks.len()
    }

    fn formula(&mut self) -> Result<BeliefFormula, String> {
        if self.peek() == Some(&Tok::Punct('-')) {
            self.pos += 1;
            return Ok(BeliefFormula::not(self.formula()?));
        }
        let head = self.ident()?;
        match (head.as_str(), self.peek()) {
            ("B", Some(Tok::Punct('('))) => {
                self.punct('(')?;
                let agent = self.ident()?;
                self.punct(',')?;
                let body = self.formula()?;
                self.punct(')')?;
                Ok(BeliefFormula::believes(Term::agent(&agent), body))
            }
            ("C", Some(Tok::Punct('('))) => {
                self.punct('(')?;
                self.punct('[')?;
                let mut group = vec![Term::agent(&self.ident()?)];
                while self.peek() == Some(&Tok::Punct(',')) {
                    self.pos += 1;
                    group.push(Term::agent(&self.ident()?));
                }
                self.punct(']')?;
                self.punct(',')?;
                let body = self.formula()?;
                self.punct(')')?;
                Ok(BeliefFormula::Common(group, Box::new(body)))
            }
            _ => Ok(BeliefFormula::atom(&head, &[])),
        }
    }

    fn list(&mut self) -> Result<Vec<BeliefFormula>, String> {
        let mut items = vec![self.formula()?];
        while self.peek() == Some(&Tok::Punct(',')) {
            self.pos += 1;
            items.push(self.formula()?);
        }
        Ok(items)
    }

    fn names(&mut self) -> Result<Vec<String>, String> {
        let mut items = vec![self.ident()?];
        while self.peek() == Some(&Tok::Punct(',')) {
            self.pos += 1;
            items.push(self.ident()?);
        }
        Ok(items)
    }

    fn optional_condition(&mut self) -> Result<Option<BeliefFormula>, String> {
        if self.eat_keyword("if") {
            Ok(Some(BeliefFormula::and(self.list()?)))
        } else {
            Ok(None)
        }
    }
}

fn blank_action(name: &str) -> GroundAction {
    GroundAction {
        name: name.to_owned(),
        schema: name.to_owned(),
        args: Vec::new(),
        executor: None,
        act_type: ActionType::Ontic,
        precondition: BeliefFormula::top(),
        effects: Vec::new(),
        full_observers: Vec::new(),
        partial_observers: Vec::new(),
        exp_effect: None,
        executor_condition: None,
        span: Default::default(),
    }
}

/// Parses mAρ text into a grounded problem over 0-ary fluents named by
/// their flat names.
pub fn read_mar(text: &str) -> Result<GroundedProblem, MarReadError> {
    let mut fluents = Vec::new();
    let mut agents = Vec::new();
    let mut actions: Vec<GroundAction> = Vec::new();
    let mut init_world = BTreeSet::new();
    let mut init_literals = Vec::new();
    let mut init_beliefs = Vec::new();
    let mut goals = Vec::new();

    let body = text.trim_end();
    let statements: Vec<&str> = body.split(';').collect();
    let Some((last, statements)) = statements.split_last() else {
        unreachable!("split yields at least one item")
    };
    if !last.trim().is_empty() {
        return Err(MarReadError {
            index: statements.len(),
            message: "missing `;` after the last statement".into(),
        });
    }

    for (index, stmt) in statements.iter().enumerate() {
        let err = |message: String| MarReadError { index, message };
        let toks = tokenize(stmt).map_err(err)?;
        let mut c = Cursor { toks, pos: 0 };
        let first = c.ident().map_err(err)?;
        let action_mut =
            |actions: &mut Vec<GroundAction>, name: &str| -> Result<usize, MarReadError> {
                actions
                    .iter()
                    .position(|a| a.name == name)
                    .ok_or_else(|| err(format!("undeclared action `{name}`")))
            };
        match first.as_str() {
            "fluent" => {
                fluents.extend(
                    c.names()
                        .map_err(err)?
                        .iter()
                        .map(|n| GroundFluent::new(n, &[])),
                );
            }
            "action" => actions.extend(c.names().map_err(err)?.iter().map(|n| blank_action(n))),
            "agent" => agents.extend(c.names().map_err(err)?.into_iter().map(Agent::new)),
            "executable" => {
                let name = c.ident().map_err(err)?;
                let k = action_mut(&mut actions, &name)?;
                actions[k].precondition = c
                    .optional_condition()
                    .map_err(err)?
                    .unwrap_or_else(BeliefFormula::top);
            }
            "initially" => {
                let items = c.list().map_err(err)?;
                if items.iter().all(|f| f.as_literal().is_some()) {
                    for f in items {
                        let (fl, positive) = f.as_literal().unwrap();
                        let g = GroundFluent::new(&fl.predicate, &[]);
                        if positive {
                            init_world.insert(g.clone());
                        }
                        init_literals.push((g, positive));
                    }
                } else {
                    init_beliefs.extend(items);
                }
            }
            "goal" => goals.extend(c.list().map_err(err)?),
            _ => {
                let verb = c.ident().map_err(err)?;
                match verb.as_str() {
                    "causes" | "determines" | "announces" => {
                        let k = action_mut(&mut actions, &first)?;
                        let effects = c.list().map_err(err)?;
                        let cond = c.optional_condition().map_err(err)?;
                        let act = &mut actions[k];
                        act.act_type = match verb.as_str() {
                            "causes" => ActionType::Ontic,
                            "determines" => ActionType::Sensing,
                            _ => ActionType::Announcement,
                        };
                        act.effects.extend(effects);
                        if verb == "determines" {
                            act.executor_condition = cond;
                        }
                    }
                    "observes" | "aware_of" => {
                        let name = c.ident().map_err(err)?;
                        let k = action_mut(&mut actions, &name)?;
                        let cond = c.optional_condition().map_err(err)?;
                        let obs = GroundObserver {
                            agent: Agent::new(first.as_str()),
                            condition: cond,
                        };
                        if verb == "observes" {
                            actions[k].full_observers.push(obs);
                        } else {
                            actions[k].partial_observers.push(obs);
                        }
                    }
                    other => return Err(err(format!("unknown statement verb `{other}`"))),
                }
            }
        }
        if !c.done() {
            return Err(err("trailing tokens".into()));
        }
    }

    let init_belief_spans = vec![Default::default(); init_beliefs.len()];
    Ok(GroundedProblem {
        name: "mar".into(),
        domain_name: "mar".into(),
        agents,
        fluents,
        actions,
        init_world,
        init_literals,
        init_beliefs,
        init_belief_spans,
        goal: BeliefFormula::and(goals),
        goal_span: Default::default(),
        depth: 0,
    })
}
