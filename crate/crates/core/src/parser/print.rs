use std::fmt::Write;

use itertools::Itertools;

use crate::ast::*;

/// Canonical E-PDDL rendering of a formula.
pub fn print_formula(f: &BeliefFormula) -> String {
    let mut s = String::new();
    write_formula(&mut s, f);
    s
}

fn write_formula(out: &mut String, f: &BeliefFormula) {
    match f {
        BeliefFormula::Atom(fl) => write!(out, "{fl}").unwrap(),
        BeliefFormula::Not(inner) => {
            out.push_str("(not ");
            write_formula(out, inner);
            out.push(')');
        }
        BeliefFormula::And(parts) | BeliefFormula::Or(parts) => {
            out.push_str(if matches!(f, BeliefFormula::And(_)) {
                "(and"
            } else {
                "(or"
            });
            for p in parts {
                out.push(' ');
                write_formula(out, p);
            }
            out.push(')');
        }
        BeliefFormula::Implies(a, b) => {
            out.push_str("(imply ");
            write_formula(out, a);
            out.push(' ');
            write_formula(out, b);
            out.push(')');
        }
        BeliefFormula::Believes(t, inner) => {
            write!(out, "([{t}] ").unwrap();
            write_formula(out, inner);
            out.push(')');
        }
        BeliefFormula::Common(group, inner) => {
            write!(out, "([{}] ", group.iter().join(" ")).unwrap();
            write_formula(out, inner);
            out.push(')');
        }
    }
}

fn typed_list(vars: &[TypedVar]) -> String {
    vars.iter()
        .map(|v| format!("{} - {}", v.var, v.ty))
        .join(" ")
}

fn observer_clause(c: &ObserverClause) -> String {
    let body = match &c.condition {
        Some(cond) => format!("(when {} ({}))", print_formula(cond), c.agent),
        None => format!("({})", c.agent),
    };
    match &c.scope {
        ObserverScope::Plain => body,
        ObserverScope::ForallDiff { var, excluded } if excluded.is_empty() => {
            format!("(forall ({var} - agent) {body})")
        }
        ObserverScope::ForallDiff { var, excluded } => format!(
            "(forall (diff ({var} - agent) ({})) {body})",
            excluded.iter().join(" ")
        ),
    }
}

fn observer_spec(spec: &ObserverSpec) -> String {
    match spec.clauses.as_slice() {
        [single] => observer_clause(single),
        many => format!(
            "(and{})",
            many.iter()
                .map(|c| format!(" {}", observer_clause(c)))
                .join("")
        ),
    }
}

/// Canonical pretty-printed domain; re-parses to an equal AST.
pub fn print_domain(d: &EpddlDomain) -> String {
    let mut out = String::new();
    writeln!(out, "(define (domain {})", d.name.node).unwrap();
    writeln!(out, "  (:requirements {})", d.requirements.iter().join(" ")).unwrap();
    write!(out, "  (:predicates").unwrap();
    for p in &d.predicates {
        if p.params.is_empty() {
            write!(out, " ({})", p.name).unwrap();
        } else {
            write!(out, " ({} {})", p.name, typed_list(&p.params)).unwrap();
        }
    }
    out.push_str(")\n");
    for a in &d.actions {
        out.push('\n');
        writeln!(out, "  (:action {}", a.name).unwrap();
        writeln!(out, "    :act_type     {}", a.act_type).unwrap();
        writeln!(out, "    :parameters   ({})", typed_list(&a.parameters)).unwrap();
        writeln!(out, "    :precondition {}", print_formula(&a.precondition)).unwrap();
        writeln!(out, "    :effect       {}", print_formula(&a.effect)).unwrap();
        writeln!(out, "    :observers    {}", observer_spec(&a.observers)).unwrap();
        if let Some(p) = &a.p_observers {
            writeln!(out, "    :p_observers  {}", observer_spec(p)).unwrap();
        }
        if let Some(e) = &a.exp_effect {
            writeln!(out, "    :exp_effect   {}", print_formula(e)).unwrap();
        }
        out.push_str("  )\n");
    }
    out.push_str(")\n");
    out
}

/// Canonical pretty-printed instance; re-parses to an equal AST.
pub fn print_instance(i: &EpddlInstance) -> String {
    let mut out = String::new();
    writeln!(out, "(define (problem {})", i.name.node).unwrap();
    writeln!(out, "  (:domain {})", i.domain_name.node).unwrap();
    writeln!(
        out,
        "  (:agent {})",
        i.agents.iter().map(|a| a.name()).join(" ")
    )
    .unwrap();
    writeln!(out, "  (:depth {})", i.depth.node).unwrap();
    out.push_str("  (:init");
    for f in &i.init {
        write!(out, "\n    {}", print_formula(f)).unwrap();
    }
    out.push_str(")\n");
    writeln!(out, "  (:goal {})", print_formula(&i.goal)).unwrap();
    out.push_str(")\n");
    out
}
