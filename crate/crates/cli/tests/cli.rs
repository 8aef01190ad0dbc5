use std::fs;
use std::process::{Command, Output};

fn mbqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbqc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp_file(name: &str, body: &str) -> String {
    let dir = std::env::temp_dir().join(format!("mbqc-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn table1_matches_golden() {
    let o = mbqc(&["table1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let block_1a = out.split("\n\n").find(|b| b.starts_with("1a) Measure ZXII")).unwrap();
    assert!(block_1a.contains("X1: +XZXI"));
    let last = out.split("\n\n").last().unwrap();
    assert!(last.contains("X4: +ZIIX"));
    assert!(out.ends_with("table1: PASS\n"));
}

#[test]
fn table1_json() {
    let o = mbqc(&["table1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["blocks"][1]["title"], "1a) Measure ZXII");
    assert_eq!(v["blocks"][1]["tracked"][0]["op"], "+XZXI");
}

#[test]
fn verify_patterns_lists_branch_counts() {
    let o = mbqc(&["verify", "--suite", "patterns"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for (name, n) in [("wire", 4), ("xrot", 4), ("zrot", 4), ("cnot6", 16), ("remote_cz", 4)] {
        let line = out.lines().find(|l| l.split_whitespace().nth(1) == Some(name)).unwrap();
        assert!(line.starts_with("  PASS"), "{line}");
        assert!(line.contains(&format!("branches {n:>6}")), "{line}");
    }
}

#[test]
fn verify_mapping_and_json_summary() {
    let o = mbqc(&["verify", "--suite", "mapping", "--tolerance", "1e-10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verify: PASS"));
    let o = mbqc(&["verify", "--suite", "gadgets", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["suites"][0]["suite"], "gadgets");
}

#[test]
fn schedule_depths() {
    let tri = temp_file("tri.txt", "1 2\n2 3\n1 3\n");
    let v: serde_json::Value = serde_json::from_slice(&mbqc(&["schedule", &tri, "--proc", "B", "--format", "json"]).stdout).unwrap();
    assert_eq!(v["depth"], 3);
    let star = temp_file("star.json", r#"{"vertices": ["c", "a", "b", "d", "e"], "edges": [["c","a"],["c","b"],["c","d"],["c","e"]]}"#);
    let o = mbqc(&["schedule", &star, "--proc", "B", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["depth"], 5);
    assert_eq!(v["ancillas"], 4);
}

#[test]
fn schedule_execute() {
    let star = temp_file("star.txt", "1 2\n1 3\n1 4\n1 5\n");
    let o = mbqc(&["schedule", &star, "--proc", "B", "--execute", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("graph-state check: PASS"));
    assert!(out.contains("seed 7"));
    let corrections = out.lines().find_map(|l| l.strip_prefix("corrections: ")).unwrap();
    assert!(corrections.chars().any(|c| c == 'X' || c == 'Y' || c == 'Z'), "{corrections}");
}

#[test]
fn same_seed_same_bytes() {
    let tri = temp_file("tri2.txt", "1 2\n2 3\n1 3\n");
    for args in [
        vec!["schedule", tri.as_str(), "--proc", "A", "--execute", "--seed", "3"],
        vec!["run-pattern", "xrot:0.3", "--seed", "9"],
    ] {
        assert_eq!(mbqc(&args).stdout, mbqc(&args).stdout);
    }
}

#[test]
fn run_pattern_modes() {
    let o = mbqc(&["run-pattern", "cnot6", "--branch", "0110", "--input", "plus"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("run-pattern: PASS"));
    let o = mbqc(&["run-pattern", "wire", "--input", "[[0.6,0],[0,0.8]]", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    // a pattern stored as JSON runs from a file
    let json = mbqc_core::build_pattern(mbqc_core::PatternKind::Wire).unwrap().to_json().to_string();
    let file = temp_file("wire.json", &json);
    assert_eq!(mbqc(&["run-pattern", &file]).status.code(), Some(0));
}

#[test]
fn map_traces() {
    let o = mbqc(&["map", "wire"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("validation: PASS"));
    for dir in ["tqc_to_1wqc", "1wqc_to_tqc"] {
        let o = mbqc(&["map", "cnot", "--direction", dir, "--format", "json"]);
        assert_eq!(o.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["validation"], "PASS");
        assert_eq!(v["steps"][0]["rule"], "start");
    }
}

#[test]
fn output_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("mbqc-out-{}.txt", std::process::id()));
    let o = mbqc(&["table1", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert!(fs::read_to_string(&path).unwrap().contains("table1: PASS"));
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(mbqc(&["schedule", "/no/such/graph"]).status.code(), Some(2));
    let bad = temp_file("bad.txt", "1 1\n");
    assert_eq!(mbqc(&["schedule", &bad]).status.code(), Some(2));
    let empty = temp_file("edgeless.json", r#"{"vertices": ["a"], "edges": []}"#);
    assert_eq!(mbqc(&["schedule", &empty]).status.code(), Some(2));
    assert_eq!(mbqc(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(mbqc(&["--tolerance=0", "table1"]).status.code(), Some(2));
    assert_eq!(mbqc(&["run-pattern", "xrot"]).status.code(), Some(2));
    assert_eq!(mbqc(&["run-pattern", "wire", "--branch", "012"]).status.code(), Some(2));
    assert_eq!(mbqc(&["map", "cnot6"]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_one() {
    // round-off alone exceeds a tolerance this tight
    let o = mbqc(&["verify", "--suite", "patterns", "--tolerance", "1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("FAIL xrot"));
    assert!(out.ends_with("verify: FAIL\n"));
}
