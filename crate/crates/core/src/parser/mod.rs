//! E-PDDL domain and instance parsing.

mod print;
pub mod sexpr;

pub use print::{print_domain, print_formula, print_instance};

use std::collections::HashSet;

use crate::ast::*;
use crate::diagnostic::{Code, Diagnostic};
use crate::span::{FileId, Span};
use sexpr::SExpr;

type PResult<T> = Result<T, Diagnostic>;

/// Parses a domain file (the `(define (domain ...) ...)` form).
pub fn parse_domain(text: &str) -> Result<EpddlDomain, Vec<Diagnostic>> {
    parse_domain_in(FileId::default(), text)
}

pub fn parse_domain_in(file: FileId, text: &str) -> Result<EpddlDomain, Vec<Diagnostic>> {
    let body = read_define(file, text, "domain")?;
    let mut p = Parser::default();
    let domain = p.domain(body);
    p.finish(domain)
}

/// Parses an instance file (the `(define (problem ...) ...)` form).
pub fn parse_instance(text: &str) -> Result<EpddlInstance, Vec<Diagnostic>> {
    parse_instance_in(FileId::default(), text)
}

pub fn parse_instance_in(file: FileId, text: &str) -> Result<EpddlInstance, Vec<Diagnostic>> {
    let body = read_define(file, text, "problem")?;
    let mut p = Parser::default();
    let instance = p.instance(body);
    p.finish(instance)
}

/// Byte-level entry point: rejects invalid UTF-8 with a spanned diagnostic.
pub fn parse_domain_bytes(file: FileId, bytes: &[u8]) -> Result<EpddlDomain, Vec<Diagnostic>> {
    parse_domain_in(file, decode(file, bytes)?)
}

pub fn parse_instance_bytes(file: FileId, bytes: &[u8]) -> Result<EpddlInstance, Vec<Diagnostic>> {
    parse_instance_in(file, decode(file, bytes)?)
}

fn decode(file: FileId, bytes: &[u8]) -> Result<&str, Vec<Diagnostic>> {
    std::str::from_utf8(bytes).map_err(|e| {
        let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or_default();
        let pos = sexpr::end_pos(valid);
        vec![Diagnostic::error(
            Code::E_ENCODING,
            Span::new(file, pos, pos),
            "input is not valid UTF-8",
        )]
    })
}

/// The payload of a `(define (<kind> name) ...)` form: the kind-header and the sections.
struct DefineBody {
    header: SExpr,
    sections: Vec<SExpr>,
    whole: Span,
}

fn read_define(file: FileId, text: &str, kind: &str) -> Result<DefineBody, Vec<Diagnostic>> {
    let top = sexpr::read_all(file, text).map_err(|d| vec![d])?;
    let mut it = top.into_iter();
    let Some(first) = it.next() else {
        let end = sexpr::end_pos(text);
        return Err(vec![Diagnostic::error(
            Code::E_SYNTAX,
            Span::new(file, end, end),
            format!("expected `(define ({kind} ...) ...)`, found end of input"),
        )]);
    };
    if let Some(extra) = it.next() {
        return Err(vec![Diagnostic::error(
            Code::E_SYNTAX,
            extra.span(),
            "unexpected input after the `define` form",
        )]);
    }
    let span = first.span();
    let SExpr::List(mut items, whole) = first else {
        return Err(vec![Diagnostic::error(
            Code::E_SYNTAX,
            span,
            format!("expected `(define ({kind} ...) ...)`"),
        )]);
    };
    if items.first().and_then(SExpr::as_symbol) != Some("define") || items.len() < 2 {
        return Err(vec![Diagnostic::error(
            Code::E_SYNTAX,
            whole,
            format!("expected `(define ({kind} ...) ...)`"),
        )]);
    }
    let sections = items.split_off(2);
    let header = items.pop().unwrap();
    Ok(DefineBody {
        header,
        sections,
        whole,
    })
}

#[derive(Default)]
struct Parser {
    diags: Vec<Diagnostic>,
}

fn err<T>(code: Code, span: Span, msg: impl Into<String>) -> PResult<T> {
    Err(Diagnostic::error(code, span, msg))
}

fn symbol(e: &SExpr, what: &str) -> PResult<String> {
    match e {
        SExpr::Symbol(s, _) => Ok(s.clone()),
        other => err(Code::E_SYNTAX, other.span(), format!("expected {what}")),
    }
}

fn is_keyword(s: &str) -> bool {
    s.starts_with(':')
}

fn span_of(items: &[SExpr], fallback: Span) -> Span {
    match (items.first(), items.last()) {
        (Some(a), Some(b)) => a.span().to(b.span()),
        _ => fallback,
    }
}

impl Parser {
    fn finish<T>(self, value: Option<T>) -> Result<T, Vec<Diagnostic>> {
        match value {
            Some(v) if self.diags.is_empty() => Ok(v),
            _ => Err(self.diags),
        }
    }

    fn record<T>(&mut self, r: PResult<T>) -> Option<T> {
        r.map_err(|d| self.diags.push(d)).ok()
    }

    fn name_header(&mut self, body: &DefineBody, kind: &str) -> Option<Spanned<String>> {
        let span = body.header.span();
        let r = match body.header.as_list() {
            Some([SExpr::Symbol(k, _), SExpr::Symbol(n, ns)]) if k == kind => {
                Ok(Spanned::new(n.clone(), *ns))
            }
            _ => err(Code::E_SYNTAX, span, format!("expected `({kind} <name>)`")),
        };
        self.record(r)
    }

    fn domain(&mut self, body: DefineBody) -> Option<EpddlDomain> {
        let name = self.name_header(&body, "domain");
        let mut requirements: Option<Spanned<Requirements>> = None;
        let mut predicates: Option<Vec<Spanned<PredicateDecl>>> = None;
        let mut actions: Vec<Spanned<EpddlAction>> = Vec::new();
        let mut action_names = HashSet::new();

        for section in &body.sections {
            let span = section.span();
            let Some(items) = section.as_list().filter(|l| !l.is_empty()) else {
                self.diags.push(Diagnostic::error(
                    Code::E_SYNTAX,
                    span,
                    "expected a `(:section ...)` form",
                ));
                continue;
            };
            let head = items[0].as_symbol().unwrap_or("");
            match head {
                ":requirements" => {
                    if requirements.is_some() {
                        self.diags.push(Diagnostic::error(
                            Code::E_DUPLICATE_SECTION,
                            span,
                            "duplicate `:requirements` section",
                        ));
                        continue;
                    }
                    let flags = items[1..]
                        .iter()
                        .map(|e| match e {
                            SExpr::Symbol(s, _) if is_keyword(s) => Ok(s.clone()),
                            other => {
                                err(Code::E_SYNTAX, other.span(), "expected a requirement flag")
                            }
                        })
                        .collect::<PResult<Vec<_>>>();
                    if let Some(flags) = self.record(flags) {
                        requirements = Some(Spanned::new(Requirements::new(flags), span));
                    }
                }
                ":predicates" => {
                    if predicates.is_some() {
                        self.diags.push(Diagnostic::error(
                            Code::E_DUPLICATE_SECTION,
                            span,
                            "duplicate `:predicates` section",
                        ));
                        continue;
                    }
                    let decls = items[1..]
                        .iter()
                        .map(predicate_decl)
                        .collect::<PResult<Vec<_>>>();
                    predicates = Some(self.record(decls).unwrap_or_default());
                }
                ":action" => {
                    if let Some(action) = self.record(action(items, span)) {
                        if !action_names.insert(action.name.clone()) {
                            self.diags.push(Diagnostic::error(
                                Code::E_DUPLICATE_ACTION,
                                span,
                                format!("duplicate action `{}`", action.name),
                            ));
                        } else {
                            actions.push(action);
                        }
                    }
                }
                other => self.diags.push(Diagnostic::error(
                    Code::E_UNKNOWN_SECTION,
                    span,
                    if other.is_empty() {
                        "expected a section keyword".to_owned()
                    } else {
                        format!("unknown domain section `{other}`")
                    },
                )),
            }
        }

        let requirements =
            requirements.unwrap_or_else(|| Spanned::new(Requirements::default(), body.whole));
        Some(EpddlDomain {
            name: name?,
            requirements,
            predicates: predicates.unwrap_or_default(),
            actions,
        })
    }

    fn instance(&mut self, body: DefineBody) -> Option<EpddlInstance> {
        let name = self.name_header(&body, "problem");
        let mut domain_name = None;
        let mut agents: Option<Vec<Spanned<Agent>>> = None;
        let mut depth = None;
        let mut init: Option<Vec<Spanned<BeliefFormula>>> = None;
        let mut goal = None;
        let mut seen = HashSet::new();

        for section in &body.sections {
            let span = section.span();
            let Some(items) = section.as_list().filter(|l| !l.is_empty()) else {
                self.diags.push(Diagnostic::error(
                    Code::E_SYNTAX,
                    span,
                    "expected a `(:section ...)` form",
                ));
                continue;
            };
            let head = items[0].as_symbol().unwrap_or("");
            let key = if head == ":agents" { ":agent" } else { head };
            if matches!(key, ":domain" | ":agent" | ":depth" | ":init" | ":goal")
                && !seen.insert(key)
            {
                self.diags.push(Diagnostic::error(
                    Code::E_DUPLICATE_SECTION,
                    span,
                    format!("duplicate `{key}` section"),
                ));
                continue;
            }
            let rest = &items[1..];
            match key {
                ":domain" => {
                    let r = match rest {
                        [SExpr::Symbol(n, s)] => Ok(Spanned::new(n.clone(), *s)),
                        _ => err(Code::E_SYNTAX, span, "expected `(:domain <name>)`"),
                    };
                    domain_name = self.record(r);
                }
                ":agent" => {
                    let r = rest
                        .iter()
                        .map(|e| match e {
                            SExpr::Symbol(s, sp) if !s.starts_with('?') && !is_keyword(s) => {
                                Ok(Spanned::new(Agent::new(s.as_str()), *sp))
                            }
                            other => err(Code::E_SYNTAX, other.span(), "expected an agent name"),
                        })
                        .collect::<PResult<Vec<_>>>();
                    agents = self.record(r);
                }
                ":depth" => {
                    let r = match rest {
                        [SExpr::Symbol(n, s)] => match n.parse::<i64>() {
                            Ok(d) if d >= 1 && d <= u32::MAX as i64 => {
                                Ok(Spanned::new(d as u32, *s))
                            }
                            Ok(_) => err(Code::E_BAD_DEPTH, *s, "depth must be >= 1"),
                            Err(_) => err(
                                Code::E_BAD_DEPTH,
                                *s,
                                format!("depth must be a positive integer, found `{n}`"),
                            ),
                        },
                        _ => err(
                            Code::E_BAD_DEPTH,
                            span,
                            "expected `(:depth <positive integer>)`",
                        ),
                    };
                    depth = self.record(r);
                }
                ":init" => {
                    let r = formula_list(rest).map(|fs| {
                        fs.into_iter()
                            .map(|(f, s)| Spanned::new(f, s))
                            .collect::<Vec<_>>()
                    });
                    init = Some(self.record(r).unwrap_or_default());
                }
                ":goal" => {
                    let r = formula_list(rest).and_then(|fs| {
                        if fs.is_empty() {
                            err(
                                Code::E_SYNTAX,
                                span,
                                "goal must contain at least one formula",
                            )
                        } else {
                            let s = span_of(rest, span);
                            Ok(Spanned::new(
                                BeliefFormula::and(fs.into_iter().map(|(f, _)| f).collect()),
                                s,
                            ))
                        }
                    });
                    goal = self.record(r);
                }
                other => self.diags.push(Diagnostic::error(
                    Code::E_UNKNOWN_SECTION,
                    span,
                    if other.is_empty() {
                        "expected a section keyword".to_owned()
                    } else {
                        format!("unknown problem section `{other}`")
                    },
                )),
            }
        }

        let mut missing = |present: bool, what: &str| {
            if !present {
                self.diags.push(Diagnostic::error(
                    Code::E_MISSING_SECTION,
                    body.whole,
                    format!("missing `{what}` section"),
                ));
            }
        };
        missing(seen.contains(":domain"), ":domain");
        missing(seen.contains(":agent"), ":agent");
        missing(seen.contains(":depth"), ":depth");
        missing(seen.contains(":goal"), ":goal");

        Some(EpddlInstance {
            name: name?,
            domain_name: domain_name?,
            agents: agents?,
            depth: depth?,
            init: init.unwrap_or_default(),
            goal: goal?,
        })
    }
}

fn predicate_decl(e: &SExpr) -> PResult<Spanned<PredicateDecl>> {
    let span = e.span();
    match e.as_list() {
        Some([SExpr::Symbol(name, _), rest @ ..])
            if !name.starts_with('?') && !is_keyword(name) =>
        {
            Ok(Spanned::new(
                PredicateDecl {
                    name: name.clone(),
                    params: typed_vars(rest, span)?,
                },
                span,
            ))
        }
        _ => err(
            Code::E_SYNTAX,
            span,
            "expected `(<predicate> ?x - agent ...)`",
        ),
    }
}

/// Parses `?a ?b - agent ?c - agent`. `?j-agent` written without spaces is split.
fn typed_vars(items: &[SExpr], span: Span) -> PResult<Vec<TypedVar>> {
    let mut pieces: Vec<(String, Span)> = Vec::new();
    for item in items {
        let SExpr::Symbol(s, sp) = item else {
            return err(
                Code::E_SYNTAX,
                item.span(),
                "expected a typed variable list",
            );
        };
        if s.starts_with('?') && s.len() > 1 && s[1..].contains('-') {
            let (v, ty) = s.split_once('-').unwrap();
            pieces.push((v.to_owned(), *sp));
            pieces.push(("-".to_owned(), *sp));
            if !ty.is_empty() {
                pieces.push((ty.to_owned(), *sp));
            }
        } else if s.len() > 1 && s.starts_with('-') {
            pieces.push(("-".to_owned(), *sp));
            pieces.push((s[1..].to_owned(), *sp));
        } else {
            pieces.push((s.clone(), *sp));
        }
    }

    let mut out = Vec::new();
    let mut pending: Vec<Var> = Vec::new();
    let mut it = pieces.into_iter();
    while let Some((p, sp)) = it.next() {
        if p == "-" {
            let Some((ty, tsp)) = it.next() else {
                return err(Code::E_SYNTAX, sp, "expected a type after `-`");
            };
            if ty.starts_with('?') || ty == "-" || pending.is_empty() {
                return err(Code::E_SYNTAX, tsp, "malformed typed variable list");
            }
            out.extend(pending.drain(..).map(|var| TypedVar {
                var,
                ty: ty.clone(),
            }));
        } else if p.starts_with('?') && p.len() > 1 {
            pending.push(Var::new(p));
        } else {
            return err(
                Code::E_SYNTAX,
                sp,
                format!("expected a variable, found `{p}`"),
            );
        }
    }
    let _ = span;
    out.extend(pending.into_iter().map(|var| TypedVar {
        var,
        ty: "agent".into(),
    }));
    Ok(out)
}

fn action(items: &[SExpr], span: Span) -> PResult<Spanned<EpddlAction>> {
    let name = match items.get(1) {
        Some(SExpr::Symbol(n, _)) if !is_keyword(n) && !n.starts_with('?') => n.clone(),
        Some(other) => return err(Code::E_SYNTAX, other.span(), "expected an action name"),
        None => return err(Code::E_SYNTAX, span, "expected an action name"),
    };
    let mut act_type = None;
    let mut parameters = None;
    let mut precondition = None;
    let mut effect = None;
    let mut observers = None;
    let mut p_observers = None;
    let mut exp_effect = None;

    let mut i = 2;
    while i < items.len() {
        let key_span = items[i].span();
        let key = match &items[i] {
            SExpr::Symbol(k, _) if is_keyword(k) => k.as_str(),
            other => {
                return err(
                    Code::E_SYNTAX,
                    other.span(),
                    "expected an action field keyword",
                )
            }
        };
        let Some(value) = items.get(i + 1) else {
            return err(
                Code::E_SYNTAX,
                key_span,
                format!("missing value for `{key}`"),
            );
        };
        let dup = |present: bool| -> PResult<()> {
            if present {
                err(
                    Code::E_DUPLICATE_SECTION,
                    key_span,
                    format!("duplicate `{key}` in action `{name}`"),
                )
            } else {
                Ok(())
            }
        };
        let mut consumed = 2;
        match key {
            ":act_type" => {
                dup(act_type.is_some())?;
                let kw = symbol(value, "an action type")?;
                act_type = Some(ActionType::from_keyword(&kw).ok_or_else(|| {
                    Diagnostic::error(
                        Code::E_SYNTAX,
                        value.span(),
                        format!(
                            "unknown action type `{kw}` (expected ontic, sensing or announcement)"
                        ),
                    )
                })?);
            }
            ":parameters" => {
                dup(parameters.is_some())?;
                let list = value.as_list().ok_or_else(|| {
                    Diagnostic::error(Code::E_SYNTAX, value.span(), "expected a parameter list")
                })?;
                parameters = Some(typed_vars(list, value.span())?);
            }
            ":precondition" | ":effect" | ":exp_effect" => {
                // a formula may be written as `[a](f)`: two sexprs
                let mut idx = i + 1;
                let start = idx;
                let f = formula_at(items, &mut idx)?;
                consumed = idx - i;
                let s = span_of(&items[start..idx], value.span());
                let slot = match key {
                    ":precondition" => &mut precondition,
                    ":effect" => &mut effect,
                    _ => &mut exp_effect,
                };
                dup(slot.is_some())?;
                *slot = Some(Spanned::new(f, s));
            }
            ":observers" | ":p_observers" => {
                let spec = Spanned::new(observer_spec(value)?, value.span());
                let slot = if key == ":observers" {
                    &mut observers
                } else {
                    &mut p_observers
                };
                dup(slot.is_some())?;
                *slot = Some(spec);
            }
            other => {
                return err(
                    Code::E_UNKNOWN_SECTION,
                    key_span,
                    format!("unknown action field `{other}`"),
                )
            }
        }
        i += consumed;
    }

    let act_type = act_type.ok_or_else(|| {
        Diagnostic::error(
            Code::E_MISSING_SECTION,
            span,
            format!("action `{name}` has no `:act_type`"),
        )
    })?;
    Ok(Spanned::new(
        EpddlAction {
            name,
            act_type,
            parameters: parameters.unwrap_or_default(),
            precondition: precondition.unwrap_or_else(|| Spanned::new(BeliefFormula::top(), span)),
            effect: effect.unwrap_or_else(|| Spanned::new(BeliefFormula::top(), span)),
            observers: observers.unwrap_or_else(|| Spanned::new(ObserverSpec::default(), span)),
            p_observers,
            exp_effect,
        },
        span,
    ))
}

fn term(e: &SExpr) -> PResult<Term> {
    match e {
        SExpr::Symbol(s, sp) => {
            if let Some(v) = s.strip_prefix('?') {
                if v.is_empty() {
                    return err(Code::E_SYNTAX, *sp, "empty variable name");
                }
                Ok(Term::Var(Var::new(v)))
            } else if is_keyword(s) || s.starts_with('!') || s == "-" {
                err(Code::E_SYNTAX, *sp, format!("expected a term, found `{s}`"))
            } else {
                Ok(Term::Const(Agent::new(s.as_str())))
            }
        }
        other => err(Code::E_SYNTAX, other.span(), "expected a term"),
    }
}

/// Parses a sequence of formulae, e.g. the entries of `:init`.
fn formula_list(items: &[SExpr]) -> PResult<Vec<(BeliefFormula, Span)>> {
    let mut out = Vec::new();
    let mut idx = 0;
    while idx < items.len() {
        let start = idx;
        let f = formula_at(items, &mut idx)?;
        out.push((f, span_of(&items[start..idx], items[start].span())));
    }
    Ok(out)
}

/// Parses one formula starting at `items[*idx]`, advancing past it.
fn formula_at(items: &[SExpr], idx: &mut usize) -> PResult<BeliefFormula> {
    let Some(e) = items.get(*idx) else {
        let span = items.last().map(SExpr::span).unwrap_or_default();
        return err(Code::E_SYNTAX, span, "expected a formula");
    };
    *idx += 1;
    match e {
        SExpr::Group(terms, span) => {
            let group = terms.iter().map(term).collect::<PResult<Vec<_>>>()?;
            if items.get(*idx).is_none() {
                return err(Code::E_SYNTAX, *span, "modal operator without a formula");
            }
            let body = formula_at(items, idx)?;
            BeliefFormula::common(group, body).map_err(|_| {
                Diagnostic::error(Code::E_EMPTY_GROUP, *span, "empty agent group `[]`")
            })
        }
        SExpr::Symbol(s, span) => {
            if s.starts_with('!') {
                err(
                    Code::E_SYNTAX,
                    *span,
                    "`!` negation is not accepted in E-PDDL; use `(not ...)`",
                )
            } else if s.starts_with('?') || is_keyword(s) || s == "-" {
                err(
                    Code::E_SYNTAX,
                    *span,
                    format!("expected a formula, found `{s}`"),
                )
            } else {
                // bare zero-arity fluent, as in `(not tails)`
                Ok(BeliefFormula::Atom(Fluent::new(s, vec![])))
            }
        }
        SExpr::List(list, span) => formula_list_form(list, *span),
    }
}

fn formula_list_form(list: &[SExpr], span: Span) -> PResult<BeliefFormula> {
    match list.first() {
        None => err(Code::E_SYNTAX, span, "empty formula `()`"),
        Some(SExpr::Group(..)) => {
            let mut idx = 0;
            let f = formula_at(list, &mut idx)?;
            if idx != list.len() {
                return err(
                    Code::E_SYNTAX,
                    list[idx].span(),
                    "unexpected trailing input after modal formula",
                );
            }
            Ok(f)
        }
        Some(SExpr::List(..)) => err(
            Code::E_SYNTAX,
            span,
            "expected a connective or predicate name",
        ),
        Some(SExpr::Symbol(head, hspan)) => {
            let rest = &list[1..];
            match head.as_str() {
                "and" | "or" => {
                    let parts = formula_list(rest)?.into_iter().map(|(f, _)| f).collect();
                    Ok(if head == "and" {
                        BeliefFormula::And(parts)
                    } else {
                        BeliefFormula::Or(parts)
                    })
                }
                "not" => {
                    let mut idx = 0;
                    let f = formula_at(rest, &mut idx).map_err(|_| {
                        Diagnostic::error(Code::E_SYNTAX, span, "`not` expects exactly one formula")
                    })?;
                    if idx != rest.len() {
                        return err(Code::E_SYNTAX, span, "`not` expects exactly one formula");
                    }
                    Ok(BeliefFormula::not(f))
                }
                "imply" | "implies" => {
                    let fs = formula_list(rest)?;
                    if fs.len() != 2 {
                        return err(Code::E_SYNTAX, span, "`imply` expects two formulae");
                    }
                    let mut it = fs.into_iter().map(|(f, _)| f);
                    Ok(BeliefFormula::implies(
                        it.next().unwrap(),
                        it.next().unwrap(),
                    ))
                }
                h if h.starts_with('!') => err(
                    Code::E_SYNTAX,
                    *hspan,
                    "`!` negation is not accepted in E-PDDL; use `(not ...)`",
                ),
                h if h.starts_with('?') || is_keyword(h) || h == "-" => err(
                    Code::E_SYNTAX,
                    *hspan,
                    format!("expected a predicate name, found `{h}`"),
                ),
                "forall" | "exists" | "when" | "diff" => err(
                    Code::E_SYNTAX,
                    *hspan,
                    format!("`{head}` is not allowed in a belief formula"),
                ),
                _ => {
                    let args = rest.iter().map(term).collect::<PResult<Vec<_>>>()?;
                    Ok(BeliefFormula::Atom(Fluent::new(head, args)))
                }
            }
        }
    }
}

fn observer_spec(e: &SExpr) -> PResult<ObserverSpec> {
    let mut clauses = Vec::new();
    observer_clauses(e, &mut clauses)?;
    Ok(ObserverSpec { clauses })
}

fn observer_clauses(e: &SExpr, out: &mut Vec<ObserverClause>) -> PResult<()> {
    let span = e.span();
    let list = match e {
        SExpr::Symbol(..) => {
            out.push(ObserverClause::plain(term(e)?));
            return Ok(());
        }
        SExpr::Group(..) => return err(Code::E_SYNTAX, span, "unexpected `[...]` in observers"),
        SExpr::List(l, _) => l,
    };
    match e.head() {
        Some("and") => {
            for c in &list[1..] {
                observer_clauses(c, out)?;
            }
        }
        Some("forall") => {
            let [_, binder, body] = list.as_slice() else {
                return err(
                    Code::E_SYNTAX,
                    span,
                    "expected `(forall (diff (?x - agent) (...)) <body>)`",
                );
            };
            let (var, excluded) = forall_binder(binder)?;
            let (agents, condition) = observer_body(body)?;
            for agent in agents {
                out.push(ObserverClause {
                    agent,
                    condition: condition.clone(),
                    scope: ObserverScope::ForallDiff {
                        var: var.clone(),
                        excluded: excluded.clone(),
                    },
                });
            }
        }
        Some("when") => {
            let (agents, condition) = observer_body(e)?;
            out.extend(agents.into_iter().map(|agent| ObserverClause {
                agent,
                condition: condition.clone(),
                scope: ObserverScope::Plain,
            }));
        }
        _ => {
            for t in list {
                out.push(ObserverClause::plain(term(t)?));
            }
        }
    }
    Ok(())
}

/// `(diff (?j - agent) (?i ...))` or a plain `(?j - agent)`.
fn forall_binder(e: &SExpr) -> PResult<(Var, Vec<Term>)> {
    let span = e.span();
    let list = e
        .as_list()
        .ok_or_else(|| Diagnostic::error(Code::E_SYNTAX, span, "expected a forall binder"))?;
    let (vars, excluded) = if e.head() == Some("diff") {
        let [_, vars, excl] = list else {
            return err(
                Code::E_SYNTAX,
                span,
                "expected `(diff (?x - agent) (<excluded terms>))`",
            );
        };
        let vars = vars.as_list().ok_or_else(|| {
            Diagnostic::error(Code::E_SYNTAX, vars.span(), "expected `(?x - agent)`")
        })?;
        let excluded = match excl {
            SExpr::List(l, _) => l.iter().map(term).collect::<PResult<Vec<_>>>()?,
            other => vec![term(other)?],
        };
        (typed_vars(vars, span)?, excluded)
    } else {
        (typed_vars(list, span)?, Vec::new())
    };
    match vars.as_slice() {
        [tv] => Ok((tv.var.clone(), excluded)),
        _ => err(
            Code::E_SYNTAX,
            span,
            "an observer forall binds exactly one variable",
        ),
    }
}

/// `(when <cond> (?j))`, `(?j)` or `?j`.
fn observer_body(e: &SExpr) -> PResult<(Vec<Term>, Option<BeliefFormula>)> {
    if e.head() == Some("when") {
        let list = e.as_list().unwrap();
        let [_, cond, agents] = list else {
            return err(
                Code::E_SYNTAX,
                e.span(),
                "expected `(when <condition> (<agent>))`",
            );
        };
        let mut idx = 0;
        let c = formula_at(std::slice::from_ref(cond), &mut idx)?;
        Ok((observer_terms(agents)?, Some(c)))
    } else {
        Ok((observer_terms(e)?, None))
    }
}

fn observer_terms(e: &SExpr) -> PResult<Vec<Term>> {
    match e {
        SExpr::List(l, s) if l.is_empty() => err(Code::E_SYNTAX, *s, "expected an observer"),
        SExpr::List(l, _) => l.iter().map(term).collect(),
        other => Ok(vec![term(other)?]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_domain() {
        let d = parse_domain("(define (domain d) (:requirements :mep) (:predicates))").unwrap();
        assert_eq!(d.name.node, "d");
        assert!(d.actions.is_empty());
        assert!(d.predicates.is_empty());
        assert!(d.requirements.contains(":mep"));
    }

    #[test]
    fn truncated_action_is_unbalanced_at_end() {
        let text = "(define (domain d) (:action a";
        let errs = parse_domain(text).unwrap_err();
        assert_eq!(errs[0].code, Code::E_UNBALANCED);
        assert_eq!(errs[0].span.end.offset, text.len());
    }

    #[test]
    fn depth_zero_rejected() {
        let errs = parse_instance(
            "(define (problem p) (:domain d) (:agent a) (:depth 0) (:init) (:goal (f)))",
        )
        .unwrap_err();
        assert_eq!(errs[0].code, Code::E_BAD_DEPTH);
        assert!(errs[0].message.contains(">= 1"));
    }

    #[test]
    fn non_integer_depth_rejected() {
        let errs = parse_instance(
            "(define (problem p) (:domain d) (:agent a) (:depth two) (:init) (:goal (f)))",
        )
        .unwrap_err();
        assert_eq!(errs[0].code, Code::E_BAD_DEPTH);
    }

    #[test]
    fn agents_in_declaration_order() {
        let i = parse_instance(
            "(define (problem p) (:domain d) (:agent a b c) (:depth 1) (:init) (:goal (f)))",
        )
        .unwrap();
        assert_eq!(
            i.agent_list(),
            vec![Agent::new("a"), Agent::new("b"), Agent::new("c")]
        );
    }

    #[test]
    fn group_operator_forms() {
        let i = parse_instance(
            "(define (problem p) (:domain d) (:agent a b) (:depth 2)
               (:init ([a b](f)) [a](g) ([a][b](not (h))))
               (:goal (and ([a](f)) (not tails))))",
        )
        .unwrap();
        let a = Term::agent("a");
        let b = Term::agent("b");
        assert_eq!(
            i.init[0].node,
            BeliefFormula::Common(
                vec![a.clone(), b.clone()],
                Box::new(BeliefFormula::atom("f", &[]))
            )
        );
        assert_eq!(
            i.init[1].node,
            BeliefFormula::believes(a.clone(), BeliefFormula::atom("g", &[]))
        );
        assert_eq!(
            i.init[2].node,
            BeliefFormula::believes(
                a.clone(),
                BeliefFormula::believes(b, BeliefFormula::not(BeliefFormula::atom("h", &[])))
            )
        );
        assert_eq!(
            i.goal.node,
            BeliefFormula::And(vec![
                BeliefFormula::believes(a, BeliefFormula::atom("f", &[])),
                BeliefFormula::not(BeliefFormula::atom("tails", &[])),
            ])
        );
    }

    #[test]
    fn bang_negation_rejected() {
        let errs = parse_instance(
            "(define (problem p) (:domain d) (:agent a) (:depth 1) (:init) (:goal ([a](!tails))))",
        )
        .unwrap_err();
        assert_eq!(errs[0].code, Code::E_SYNTAX);
        assert!(errs[0].message.contains('!'));
    }

    #[test]
    fn empty_group_rejected() {
        let errs = parse_instance(
            "(define (problem p) (:domain d) (:agent a) (:depth 1) (:init) (:goal ([](f))))",
        )
        .unwrap_err();
        assert_eq!(errs[0].code, Code::E_EMPTY_GROUP);
    }

    #[test]
    fn observers_with_diff_and_when() {
        let d = parse_domain(
            "(define (domain d) (:requirements :mep) (:predicates (looking ?i - agent))
              (:action open :act_type ontic :parameters (?i - agent)
                :effect (opened)
                :observers (and (?i) (forall(diff(?j-agent)(?i)) (when(looking ?j) (?j))))))",
        )
        .unwrap();
        let obs = &d.actions[0].observers.clauses;
        assert_eq!(obs.len(), 2);
        assert_eq!(obs[0], ObserverClause::plain(Term::var("i")));
        assert_eq!(
            obs[1],
            ObserverClause {
                agent: Term::var("j"),
                condition: Some(BeliefFormula::atom("looking", &["?j"])),
                scope: ObserverScope::ForallDiff {
                    var: Var::new("j"),
                    excluded: vec![Term::var("i")]
                },
            }
        );
    }

    #[test]
    fn unknown_section_and_duplicate_action() {
        let errs = parse_domain(
            "(define (domain d) (:requirements :mep) (:functions (f))
               (:action a :act_type ontic) (:action a :act_type ontic))",
        )
        .unwrap_err();
        let codes: Vec<_> = errs.iter().map(|d| d.code).collect();
        assert_eq!(
            codes,
            vec![Code::E_UNKNOWN_SECTION, Code::E_DUPLICATE_ACTION]
        );
    }

    #[test]
    fn identifiers_are_case_insensitive() {
        let d = parse_domain(
            "(DEFINE (Domain CoinInTheBox) (:Requirements :MEP) (:predicates (Opened)))",
        )
        .unwrap();
        assert_eq!(d.name.node, "coininthebox");
        assert_eq!(d.predicates[0].name, "opened");
    }

    #[test]
    fn invalid_utf8_is_a_spanned_diagnostic() {
        let errs = parse_domain_bytes(FileId(0), b"(define \xff)").unwrap_err();
        assert_eq!(errs[0].code, Code::E_ENCODING);
        assert_eq!(errs[0].span.start.offset, 8);
    }
}
