use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn semnum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semnum")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn worked() -> String {
    data("worked_example.cao").display().to_string()
}

#[test]
fn validate_accepts_worked_example() {
    let out = semnum(&["validate", &worked()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("7 entities, 4 operators"));
}

#[test]
fn validate_prints_cycle_path() {
    let path = data("cycle.cao").display().to_string();
    let out = semnum(&["validate", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("a -> b -> a"), "{}", stderr(&out));
    assert_eq!(semnum(&["validate", &path, "--allow-cycles"]).status.code(), Some(0));
}

#[test]
fn missing_file_is_an_io_error() {
    let out = semnum(&["validate", "/nonexistent/model.cao"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("cannot read"));
}

#[test]
fn syntax_errors_carry_positions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cao");
    std::fs::write(&path, "cao bad {\n    entity a\n    operator (a:2) -> ;\n}\n").unwrap();
    let out = semnum(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("bad.cao:3:"), "{}", stderr(&out));
}

#[test]
fn simulate_prints_worked_trace() {
    let out = semnum(&["simulate", &worked(), "--init", "i=100,j=100"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let states: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(" | ").nth(1).unwrap())
        .collect();
    assert_eq!(
        states,
        ["100 100 0 0 0 0 0", "0 20 10 20 0 0 0", "0 20 2 0 4 6 0", "0 20 2 0 0 4 1"]
    );
    assert!(text.starts_with("# cao worked_example: fixed-point after 3 steps\n"));
}

#[test]
fn simulate_engines_and_formats_agree() {
    let rows = |engine: &str| stdout(&semnum(&["simulate", &worked(), "--init", "i=100,j=100", "--engine", engine]));
    assert_eq!(rows("matrix"), rows("operational"));
    assert_eq!(rows("matrix"), rows("both"));
    let out = semnum(&["simulate", &worked(), "--init", "i=100,j=100", "--format", "structured"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("\"format_version\": 1"));
    assert!(text.contains("\"step_count\": 3"));
}

#[test]
fn zero_init_is_an_immediate_fixed_point() {
    let out = semnum(&["simulate", &worked()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("fixed-point after 0 steps"));
}

#[test]
fn step_limit_has_its_own_exit_code() {
    let out = semnum(&["simulate", &worked(), "--init", "i=100,j=100", "--max-steps", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("step-limit after 1 steps"));
}

#[test]
fn bad_init_is_rejected() {
    assert_eq!(semnum(&["simulate", &worked(), "--init", "q=1"]).status.code(), Some(1));
    assert_eq!(semnum(&["simulate", &worked(), "--init", "i=-3"]).status.code(), Some(1));
    assert_eq!(semnum(&["simulate", &worked(), "--init", "i"]).status.code(), Some(1));
}

#[test]
fn cyclic_simulation_needs_max_steps() {
    let path = data("cycle.cao").display().to_string();
    let out = semnum(&["simulate", &path, "--allow-cycles", "--init", "a=5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--max-steps"));
    let out = semnum(&["simulate", &path, "--allow-cycles", "--init", "a=5", "--max-steps", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn schedule_file_changes_parameters_per_step() {
    let line = data("line.cao").display().to_string();
    let schedule = data("schedule.json").display().to_string();
    let out = semnum(&["simulate", &line, "--init", "a=27", "--schedule", &schedule]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let states: Vec<String> = stdout(&out)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(" | ").nth(1).unwrap().to_string())
        .collect();
    assert_eq!(states, ["27 0", "7 2", "2 3"]);
}

#[test]
fn weights_of_worked_example() {
    let out = semnum(&["weights", &worked()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "# entities (i, j, d, s, g, u, h)\n(1, 1, 10, 4, 40, 0, 160)\n");
}

#[test]
fn weights_of_chain_and_empty_models() {
    let dir = tempfile::tempdir().unwrap();
    let chain = dir.path().join("chain.cao");
    std::fs::write(
        &chain,
        "cao chain { entity e0; entity e1; entity e2; entity e3;\n\
         operator (e0:10) -> (e1:1); operator (e1:10) -> (e2:1); operator (e2:10) -> (e3:1); }",
    )
    .unwrap();
    let out = semnum(&["weights", chain.to_str().unwrap()]);
    assert!(stdout(&out).ends_with("(1, 10, 100, 1000)\n"));

    let bare = dir.path().join("bare.cao");
    std::fs::write(&bare, "cao bare { entity a; entity b; entity c; }").unwrap();
    let out = semnum(&["weights", bare.to_str().unwrap()]);
    let lines: Vec<String> = stdout(&out).lines().skip(1).map(String::from).collect();
    assert_eq!(lines, ["(1, 0, 0)", "(0, 1, 0)", "(0, 0, 1)"]);
}

#[test]
fn dot_export_has_eleven_nodes() {
    let out = semnum(&["export", &worked(), "--kind", "dot"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("digraph \"worked_example\" {"));
    let nodes = text.lines().filter(|l| l.contains("shape=")).count();
    let edges = text.lines().filter(|l| l.contains(" -> ")).count();
    assert_eq!((nodes, edges), (11, 12));
}

#[test]
fn canonical_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.cao");
    let second = dir.path().join("second.cao");
    let out = semnum(&["export", &worked(), "--kind", "canonical", "-o", first.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    semnum(&["export", first.to_str().unwrap(), "--kind", "canonical", "-o", second.to_str().unwrap()]);
    let a = std::fs::read_to_string(&first).unwrap();
    assert_eq!(a, std::fs::read_to_string(&second).unwrap());
    assert!(a.contains("    operator L (d:8) -> (g:2);"));
}

#[test]
fn radix_digits() {
    let digits = |v: &str, b: &str, l: &str| stdout(&semnum(&["radix", "--value", v, "--base", b, "--length", l]));
    assert_eq!(digits("1234", "10", "4"), "4 3 2 1\n");
    assert_eq!(digits("0", "2", "4"), "0 0 0 0\n");
    assert_eq!(digits("19", "2", "5"), "1 1 0 0 1\n");
    assert_eq!(semnum(&["radix", "--value", "5", "--base", "1", "--length", "3"]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(semnum(&["simulate"]).status.code(), Some(2));
    assert_eq!(semnum(&["export", &worked(), "--kind", "svg"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = ["simulate", &worked(), "--init", "i=12345,j=6789", "--format", "structured"];
    let runs: Vec<Vec<u8>> = (0..3).map(|_| semnum(&args).stdout).collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
}
