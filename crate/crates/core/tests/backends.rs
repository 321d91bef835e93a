mod common;

use epddl::backend::{emit_mar, emit_pdkb, MarOptions, PdkbOptions, Strategy};
use epddl::oracle::mar_reader::read_mar;
use epddl::oracle::{bfs_plan, SearchOutcome};
use epddl::Code;

/// Minimal s-expression reader for checking emitted PDDL structure.
#[derive(Debug, Clone, PartialEq)]
enum Sx {
    Atom(String),
    List(Vec<Sx>),
}

fn read_sx(text: &str) -> Vec<Sx> {
    let mut stack: Vec<Vec<Sx>> = vec![Vec::new()];
    let mut atom = String::new();
    let flush = |atom: &mut String, stack: &mut Vec<Vec<Sx>>| {
        if !atom.is_empty() {
            stack
                .last_mut()
                .unwrap()
                .push(Sx::Atom(std::mem::take(atom)));
        }
    };
    for line in text.lines() {
        let line = line.split(';').next().unwrap();
        for c in line.chars() {
            match c {
                '(' => {
                    flush(&mut atom, &mut stack);
                    stack.push(Vec::new());
                }
                ')' => {
                    flush(&mut atom, &mut stack);
                    let done = stack.pop().expect("balanced");
                    stack.last_mut().expect("balanced").push(Sx::List(done));
                }
                c if c.is_whitespace() => flush(&mut atom, &mut stack),
                c => atom.push(c),
            }
        }
        flush(&mut atom, &mut stack);
    }
    assert_eq!(stack.len(), 1, "unbalanced parentheses");
    stack.pop().unwrap()
}

fn head(sx: &Sx) -> Option<&str> {
    match sx {
        Sx::List(items) => match items.first() {
            Some(Sx::Atom(a)) => Some(a),
            _ => None,
        },
        Sx::Atom(_) => None,
    }
}

fn section<'a>(top: &'a [Sx], name: &str) -> Vec<&'a Sx> {
    let Some(Sx::List(items)) = top.first() else {
        panic!("no define")
    };
    items.iter().filter(|s| head(s) == Some(name)).collect()
}

fn action_names(domain: &str) -> Vec<String> {
    section(&read_sx(domain), ":action")
        .into_iter()
        .map(|s| match s {
            Sx::List(items) => match &items[1] {
                Sx::Atom(a) => a.clone(),
                other => panic!("{other:?}"),
            },
            _ => unreachable!(),
        })
        .collect()
}

fn init_formula_count(instance: &str) -> usize {
    match section(&read_sx(instance), ":init").as_slice() {
        [Sx::List(items)] => items.len() - 1,
        other => panic!("expected one :init, got {other:?}"),
    }
}

/// Deepest `[agent]` modal nesting in a text.
fn max_modal_nesting(text: &str) -> usize {
    let toks = common::tokens(text);
    let mut best = 0;
    let mut i = 0;
    while i < toks.len() {
        let mut run = 0;
        while i + 2 < toks.len() && toks[i] == "[" && toks[i + 2] == "]" {
            run += 1;
            i += 3;
        }
        best = best.max(run);
        i += 1;
    }
    best
}

fn coin_pdkb(opts: PdkbOptions) -> epddl::backend::PdkbArtifact {
    emit_pdkb(&common::coin_validated(), opts).expect("coin translates")
}

#[test]
fn pdkb_domain_lists_every_schema() {
    let art = coin_pdkb(PdkbOptions::default());
    assert_eq!(action_names(&art.domain_text), ["open", "peek", "announce"]);
    let strategies: Vec<_> = art.manifest.actions.iter().map(|a| a.strategy).collect();
    assert_eq!(
        strategies,
        [
            Strategy::DeriveCondition,
            Strategy::ExplicitEffects,
            Strategy::DeriveCondition
        ]
    );
    assert!(art.manifest.actions[1].partial_observability_extension);
}

#[test]
fn pdkb_open_is_widened_by_default() {
    let art = coin_pdkb(PdkbOptions::default());
    assert!(common::contains_tokens(
        &art.domain_text,
        ":derive (or (looking $agent$) (= $agent$ ?i))"
    ));
    assert!(art.manifest.actions[0].derive_widened);
}

#[test]
fn pdkb_instance_unrolls_common_knowledge() {
    let art = coin_pdkb(PdkbOptions::default());
    let text = &art.instance_text;
    // three true atoms plus one block per chain length for each entry
    assert_eq!(init_formula_count(text), 3 + 7 * 2);
    assert_eq!(art.manifest.init_chain_blocks, 7 * 2);
    assert_eq!(text.matches(";Length 1").count(), 7);
    assert_eq!(text.matches(";Length 2").count(), 7);
    assert!(text.contains("(:depth 2)"));
    assert!(max_modal_nesting(text) <= 2);
}

#[test]
fn pdkb_output_is_balanced_and_bounded() {
    for faithful in [false, true] {
        let art = coin_pdkb(PdkbOptions {
            listing_faithful: faithful,
            ..Default::default()
        });
        let domain = if faithful {
            art.domain_text.replace("(action:", "(:action")
        } else {
            art.domain_text.clone()
        };
        read_sx(&domain);
        read_sx(&art.instance_text);
        assert_eq!(max_modal_nesting(&art.domain_text), 2);
    }
}

#[test]
fn pdkb_depth_one_drops_nested_chains() {
    let instance = common::COIN_INSTANCE.replace("(:depth 2)", "(:depth 1)");
    let p = common::validated(common::COIN_DOMAIN, &instance);
    let art = emit_pdkb(&p, PdkbOptions::default()).unwrap();
    assert_eq!(art.instance_text.matches(";Length 2").count(), 0);
    assert_eq!(max_modal_nesting(&art.domain_text), 1);
    assert_eq!(max_modal_nesting(&art.instance_text), 1);
}

#[test]
fn pdkb_is_deterministic() {
    let a = coin_pdkb(PdkbOptions::default());
    let b = coin_pdkb(PdkbOptions::default());
    assert_eq!(a, b);
}

#[test]
fn pdkb_rejects_ontic_observers_without_template() {
    let domain = common::COIN_DOMAIN.replace(
        "(forall(diff(?j-agent)(?i))\n                 (when(looking ?j) (?j))))\n )\n\n (:action peek",
        "(forall(diff(?j-agent)(?i))\n                 (when(looking ?j) (?j)))\n                 (forall(diff(?k-agent)(?i))\n                 (when(has_key ?k) (?k))))\n )\n\n (:action peek",
    );
    assert_ne!(domain, common::COIN_DOMAIN);
    let p = common::validated(&domain, common::COIN_INSTANCE);
    let errs = emit_pdkb(&p, PdkbOptions::default()).unwrap_err();
    assert_eq!(errs.len(), 1);
    assert_eq!(errs[0].code, Code::E_UNREPRESENTABLE);
    let art = emit_pdkb(
        &p,
        PdkbOptions {
            explicit_fallback: true,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(art.manifest.actions[0].strategy, Strategy::ExplicitEffects);
    assert!(art.manifest.actions[0].chains.world > 0);
}

#[test]
fn mar_statement_count_follows_problem_shape() {
    let g = common::coin();
    let art = emit_mar(&g, &MarOptions::default()).unwrap();
    let statements = art.text.matches(';').count();
    assert_eq!(art.manifest.statements, statements);
    // per action: executable, one effect line, executor plus two conditional observers
    let per_action = 1 + 1 + 3;
    let init = 1 + 1 + 7;
    assert_eq!(statements, 3 + 9 * per_action + init + 1);
    assert_eq!(art.manifest.fluents, 1 + 3 + 3 + 1);
}

#[test]
fn mar_renames_predicates_on_request() {
    let g = common::coin();
    let opts = MarOptions {
        rename: [("looking".to_owned(), "look".to_owned())].into(),
    };
    let art = emit_mar(&g, &opts).unwrap();
    assert!(art.text.contains("look_a"));
    assert!(!art.text.contains("looking"));
}

#[test]
fn mar_rejects_disjunctive_goal() {
    let g = common::coin_with_goal("(or ([a](tails)) ([b](tails)))");
    let errs = emit_mar(&g, &MarOptions::default()).unwrap_err();
    assert_eq!(errs[0].code, Code::E_UNSUPPORTED_GOAL);
}

#[test]
fn mar_ignores_exp_effect() {
    let with = common::COIN_DOMAIN.replace(
        ":effect       (opened)",
        ":effect       (opened)\n   :exp_effect   ([?i](opened))",
    );
    let (g, _) = epddl::load_problem(&with, common::COIN_INSTANCE).unwrap();
    let plain = emit_mar(&common::coin(), &MarOptions::default()).unwrap();
    assert_eq!(emit_mar(&g, &MarOptions::default()).unwrap(), plain);
}

#[test]
fn mar_single_agent_action_has_bare_executable() {
    let domain = common::COIN_DOMAIN.replace("   :precondition ([?i](tails))\n", "");
    let (g, _) = epddl::load_problem(&domain, common::COIN_INSTANCE).unwrap();
    let art = emit_mar(&g, &MarOptions::default()).unwrap();
    assert!(art.text.lines().any(|l| l == "executable announce_a;"));
}

#[test]
fn mar_round_trip_preserves_plans() {
    for goal in ["([a](tails))", "([b]([a](tails)))", "(opened)"] {
        let g = if goal == "([a](tails))" {
            common::coin()
        } else {
            common::coin_with_goal(goal)
        };
        let art = emit_mar(&g, &MarOptions::default()).unwrap();
        let back = read_mar(&art.text).unwrap();
        assert_eq!(back.actions.len(), g.actions.len());
        let direct = bfs_plan(&g, 3).unwrap();
        let via_mar = bfs_plan(&back, 3).unwrap();
        assert_eq!(direct, via_mar, "goal {goal}");
        assert!(matches!(direct, SearchOutcome::Plan(_)) || goal.contains("[b]"));
    }
}
