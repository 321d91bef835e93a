use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn coin() -> (PathBuf, PathBuf) {
    (
        fixtures().join("coin_domain.epddl"),
        fixtures().join("coin_instance.epddl"),
    )
}

fn epddl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epddl"))
        .args(args)
        .env_remove("EPDDL_COLOR")
        .output()
        .expect("binary runs")
}

fn run_coin(args: &[&str]) -> Output {
    let (d, i) = coin();
    let mut all: Vec<&str> = args.to_vec();
    all.push(d.to_str().unwrap());
    all.push(i.to_str().unwrap());
    epddl(&all)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn tokens(text: &str) -> Vec<String> {
    let spaced: String = text
        .chars()
        .flat_map(|c| {
            if "()[]".contains(c) {
                vec![' ', c, ' ']
            } else {
                vec![c]
            }
        })
        .collect();
    spaced.split_whitespace().map(str::to_owned).collect()
}

/// Writes a coin variant into a fresh directory and returns the file paths.
fn variant(dir: &Path, domain: &str, instance: &str) -> (String, String) {
    let d = dir.join("domain.epddl");
    let i = dir.join("instance.epddl");
    fs::write(&d, domain).unwrap();
    fs::write(&i, instance).unwrap();
    (d.display().to_string(), i.display().to_string())
}

fn coin_texts() -> (String, String) {
    let (d, i) = coin();
    (
        fs::read_to_string(d).unwrap(),
        fs::read_to_string(i).unwrap(),
    )
}

#[test]
fn validate_accepts_the_worked_example() {
    let o = run_coin(&["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).is_empty());
}

#[test]
fn validate_reports_effect_shape_with_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let (domain, instance) = coin_texts();
    let domain = domain.replace(
        ":effect       (opened)",
        ":effect       (or (opened) (tails))",
    );
    let (d, i) = variant(tmp.path(), &domain, &instance);
    let o = epddl(&["validate", &d, &i]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.starts_with("error E_EFFECT_SHAPE "), "{err}");
    assert!(err.contains("domain.epddl:"), "{err}");

    let o = epddl(&["--json", "validate", &d, &i]);
    assert_eq!(o.status.code(), Some(1));
    let rec: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(rec["kind"], "diagnostic");
    assert_eq!(rec["code"], "E_EFFECT_SHAPE");
}

#[test]
fn missing_file_is_an_io_failure() {
    let (_, i) = coin();
    let o = epddl(&["validate", "/nonexistent/domain.epddl", i.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parse_errors_carry_file_positions() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, instance) = coin_texts();
    let (d, i) = variant(tmp.path(), "(define (domain d) (:action a", &instance);
    let o = epddl(&["validate", &d, &i]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("E_UNBALANCED"), "{}", stderr(&o));
}

#[test]
fn translate_writes_both_targets() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = run_coin(&[
        "translate",
        "--target",
        "pdkb",
        "--target",
        "mar",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mar = fs::read_to_string(tmp.path().join("toyinstance.mar")).unwrap();
    assert!(mar.contains("peek_a determines tails if looking_a;"));
    let problem = fs::read_to_string(tmp.path().join("toyinstance.pdkb-problem.pddl")).unwrap();
    assert!(problem.contains("(:depth 2)"));
    assert!(tmp.path().join("toyinstance.pdkb-domain.pddl").exists());
    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(tmp.path().join("toyinstance.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["mar"]["actions"], 9);
    assert_eq!(manifest["pdkb"]["depth"], 2);
}

#[test]
fn translate_applies_rename_map() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = run_coin(&[
        "translate",
        "--target",
        "mar",
        "--rename",
        "looking=look",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let mar = fs::read_to_string(tmp.path().join("toyinstance.mar")).unwrap();
    assert!(mar.contains("peek_a determines tails if look_a;"));
}

#[test]
fn listing_faithful_open_block_matches() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = run_coin(&[
        "translate",
        "--target",
        "pdkb",
        "--listing-faithful",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let domain = fs::read_to_string(tmp.path().join("toyinstance.pdkb-domain.pddl")).unwrap();
    let golden = fs::read_to_string(fixtures().join("golden/pdkb_open_faithful.txt")).unwrap();
    let (hay, needle) = (tokens(&domain), tokens(&golden));
    assert!(
        hay.windows(needle.len()).any(|w| w == needle.as_slice()),
        "{domain}"
    );
}

#[test]
fn failed_translation_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let (domain, instance) = coin_texts();
    let instance = instance.replace(
        "(:goal ([a](tails)))",
        "(:goal (or ([a](tails)) ([b](tails))))",
    );
    let (d, i) = variant(tmp.path(), &domain, &instance);
    let out = tmp.path().join("out");
    let o = epddl(&[
        "translate",
        "--target",
        "pdkb",
        "--target",
        "mar",
        "--out",
        out.to_str().unwrap(),
        &d,
        &i,
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("E_UNSUPPORTED_GOAL"));
    assert!(!out.exists() || fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn solve_finds_open_then_peek() {
    let o = run_coin(&["solve", "--max-len", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "open_a\npeek_a\n");
}

#[test]
fn solve_reports_no_plan_within_bound() {
    let o = run_coin(&["solve", "--max-len", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "NO PLAN within 1\n");
}

#[test]
fn solve_returns_empty_plan_for_satisfied_goal() {
    let tmp = tempfile::tempdir().unwrap();
    let (domain, instance) = coin_texts();
    let instance = instance.replace("(:goal ([a](tails)))", "(:goal ([a](has_key a)))");
    let (d, i) = variant(tmp.path(), &domain, &instance);
    let o = epddl(&["--json", "solve", &d, &i]);
    assert_eq!(o.status.code(), Some(0));
    let rec: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(rec["kind"], "plan");
    assert_eq!(rec["found"], true);
    assert_eq!(rec["length"], 0);
}

#[test]
fn solve_exhaustion_exits_three() {
    let o = run_coin(&["solve", "--max-states", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn solve_rejects_non_constructible_init() {
    let tmp = tempfile::tempdir().unwrap();
    let (domain, instance) = coin_texts();
    let instance = instance.replace("([a b c](looking a))", "([a](looking a))");
    let (d, i) = variant(tmp.path(), &domain, &instance);
    let o = epddl(&["solve", &d, &i]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("E_NOT_CONSTRUCTIBLE"), "{}", stderr(&o));
}

#[test]
fn features_report_for_the_worked_example() {
    let o = run_coin(&["--json", "features"]);
    assert_eq!(o.status.code(), Some(0));
    let rec: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(rec["kind"], "features");
    assert_eq!(rec["agent_count"], 3);
    assert_eq!(rec["depth"], 2);
    assert_eq!(rec["has_partial_observers"], true);
    assert_eq!(rec["recommendation"], "MAR");
    let text = stdout(&run_coin(&["features"]));
    assert!(text.contains("recommendation: MAR"));
}

#[test]
fn ground_dumps_one_record_per_action() {
    let o = run_coin(&["ground"]);
    let lines: Vec<_> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 9);
    let first: serde_json::Value = serde_json::from_str(&lines[0]).unwrap();
    assert_eq!(first["name"], "open_a");
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        &["--json", "features"][..],
        &["ground"],
        &["solve"],
        &["--json", "validate"],
    ] {
        assert_eq!(run_coin(args).stdout, run_coin(args).stdout);
    }
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        run_coin(&[
            "translate",
            "--target",
            "pdkb",
            "--target",
            "mar",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
    }
    for name in [
        "toyinstance.mar",
        "toyinstance.pdkb-domain.pddl",
        "toyinstance.pdkb-problem.pddl",
    ] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap()
        );
    }
}

#[test]
fn batch_keeps_list_order() {
    let tmp = tempfile::tempdir().unwrap();
    let (domain, instance) = coin_texts();
    fs::write(tmp.path().join("d.epddl"), &domain).unwrap();
    let mut list = String::from("# problems\n");
    for k in 0..6 {
        let goal = if k % 2 == 0 {
            "([a](tails))"
        } else {
            "([a](has_key a))"
        };
        let text = instance.replace("(:goal ([a](tails)))", &format!("(:goal {goal})"));
        fs::write(tmp.path().join(format!("i{k}.epddl")), text).unwrap();
        list.push_str(&format!("d.epddl i{k}.epddl\n"));
    }
    list.push_str("d.epddl missing.epddl\n");
    fs::write(tmp.path().join("list.txt"), list).unwrap();
    let o = epddl(&[
        "--json",
        "solve",
        "--batch",
        tmp.path().join("list.txt").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let recs: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let headers: Vec<_> = recs.iter().filter(|r| r["kind"] == "problem").collect();
    assert_eq!(headers.len(), 7);
    for (k, h) in headers.iter().enumerate() {
        assert_eq!(h["index"], k);
    }
    let plans: Vec<_> = recs
        .iter()
        .filter(|r| r["kind"] == "plan")
        .map(|r| r["length"].clone())
        .collect();
    assert_eq!(plans, [2, 0, 2, 0, 2, 0]);
    assert_eq!(recs.last().unwrap()["kind"], "io_error");
}

#[test]
fn color_only_when_requested() {
    let tmp = tempfile::tempdir().unwrap();
    let (domain, instance) = coin_texts();
    let domain = domain.replace(
        ":effect       (opened)",
        ":effect       (or (opened) (tails))",
    );
    let (d, i) = variant(tmp.path(), &domain, &instance);
    let plain = epddl(&["validate", &d, &i]);
    assert!(!stderr(&plain).contains('\x1b'));
    let colored = Command::new(env!("CARGO_BIN_EXE_epddl"))
        .args(["validate", &d, &i])
        .env("EPDDL_COLOR", "1")
        .output()
        .unwrap();
    assert!(stderr(&colored).contains("\x1b[31m"));
}
