use std::path::Path;
use std::process::{Command, Output};

use largesets::setsys::{check_largeset_divisibility, InstanceParams};
use serde_json::Value;

const FANO: &str = r#"{"n":7,"k":3,"t":2,"lambda":1,"blocks":[[1,2,4],[2,3,5],[3,4,6],[4,5,7],[1,5,6],[2,6,7],[1,3,7]]}"#;
const FANO_MINUS_ONE: &str = r#"{"n":7,"k":3,"t":2,"lambda":1,"blocks":[[1,2,4],[2,3,5],[3,4,6],[4,5,7],[1,5,6],[2,6,7]]}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_largesets")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn divisibility_matches_library_report() {
    let o = run(&["divisibility", "--n", "9", "--k", "3", "--t", "2", "--l", "7"]);
    assert_eq!(code(&o), 0);
    let lib = check_largeset_divisibility(&InstanceParams::new(9, 3, 2, 7).unwrap()).unwrap();
    assert_eq!(String::from_utf8(o.stdout).unwrap(), serde_json::to_string(&lib).unwrap() + "\n");

    let o = run(&["divisibility", "--n", "9", "--k", "3", "--t", "2", "--l", "6"]);
    assert_eq!(code(&o), 1);
    let o = run(&["divisibility", "--n", "7", "--k", "3", "--t", "2", "--lambda", "1"]);
    assert_eq!((code(&o), json(&o)["pass"].clone()), (0, Value::Bool(true)));
}

#[test]
fn divisibility_csv_lists_checks() {
    let o = run(&["divisibility", "--n", "9", "--k", "3", "--t", "2", "--l", "6", "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text, "s,divisor,dividend,pass\n0,18,252,true\n1,12,56,false\n2,6,7,false\n");
}

#[test]
fn verify_design_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "fano.json", FANO);
    let bad = write(dir.path(), "bad.json", FANO_MINUS_ONE);
    assert_eq!(code(&run(&["verify-design", &good])), 0);
    let o = run(&["verify-design", &bad]);
    assert_eq!(code(&o), 1);
    let ce = &json(&o)["counterexample"];
    assert_eq!(ce["kind"], "wrongCount");
    assert_eq!(ce["tset"], serde_json::json!([1, 3]));
    assert_eq!((ce["count"].clone(), ce["expected"].clone()), (0.into(), 1.into()));
}

#[test]
fn file_errors_name_path_and_position() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write(dir.path(), "broken.json", "{\"n\":7,\n\"k\":3,,}");
    let o = run(&["verify-design", &broken]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("broken.json") && err.contains("line 2, column 7"), "{err}");

    let semantic = write(dir.path(), "sem.json", r#"{"n":7,"k":3,"t":2,"lambda":1,"blocks":[[1,2,4],[2,3,9]]}"#);
    let err = String::from_utf8(run(&["verify-design", &semantic]).stderr).unwrap();
    assert!(err.contains("blocks[1][2]"), "{err}");

    let missing = dir.path().join("nope.json");
    assert_eq!(code(&run(&["verify-design", missing.to_str().unwrap()])), 2);
}

#[test]
fn usage_errors_exit_two() {
    let o = run(&["divisibility", "--n", "9"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stderr).unwrap().contains("Usage"));
    assert_eq!(code(&run(&["divisibility", "--n", "3", "--k", "3", "--t", "3", "--l", "1"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn estimate_is_positive() {
    let o = run(&["estimate", "--n", "4", "--k", "2", "--t", "1", "--l", "3", "--seed", "42"]);
    assert_eq!(code(&o), 0);
    let est: f64 = json(&o)["pointEstimate"].as_f64().unwrap();
    assert!(est > 0.0);
    // main divisibility fails for l = 2
    assert_eq!(code(&run(&["estimate", "--n", "4", "--k", "2", "--t", "1", "--l", "2"])), 1);
    assert_eq!(code(&run(&["estimate", "--n", "4", "--k", "2", "--t", "1", "--l", "3", "--const-main", "0"])), 2);
}

#[test]
fn sampling_is_reproducible_across_workers() {
    let base = ["sample", "--n", "4", "--k", "2", "--t", "1", "--l", "3", "--trials", "20000", "--seed", "9"];
    let a = run(&base);
    let b = run(&base);
    let mut four = base.to_vec();
    four.extend(["--workers", "4"]);
    let c = run(&four);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn exact_and_cap() {
    let o = run(&["exact", "--n", "4", "--k", "2", "--t", "1", "--l", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["probability"], serde_json::json!({"num": "2", "den": "243"}));
    assert_eq!(code(&run(&["exact", "--n", "4", "--k", "2", "--t", "1", "--l", "3", "--cap", "100"])), 3);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.txt");
    let o = run(&["exact", "--n", "4", "--k", "2", "--t", "1", "--l", "3", "--format", "text", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("probability 2/243\n"), "{text}");
}

#[test]
fn search_results_verify() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["search-design", "--n", "7", "--k", "3", "--t", "2"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["status"], "found");
    let f = write(dir.path(), "found.json", &v["result"].to_string());
    assert_eq!(code(&run(&["verify-design", &f])), 0);

    let o = run(&["search-largeset", "--n", "4", "--k", "2", "--t", "1", "--l", "3"]);
    assert_eq!(code(&o), 0);
    let f = write(dir.path(), "ls.json", &json(&o)["result"].to_string());
    assert_eq!(code(&run(&["verify-largeset", &f])), 0);
}

#[test]
fn search_exit_codes() {
    let o = run(&["search-design", "--n", "8", "--k", "3", "--t", "2"]);
    assert_eq!((code(&o), json(&o)["status"].clone()), (1, "exhausted".into()));
    let o = run(&["search-largeset", "--n", "7", "--k", "3", "--t", "2", "--l", "5"]);
    assert_eq!(code(&o), 1);
    let o = run(&["search-largeset", "--n", "9", "--k", "3", "--t", "2", "--l", "7", "--budget-nodes", "500"]);
    assert_eq!((code(&o), json(&o)["status"].clone()), (3, "budgetExceeded".into()));
    let o = run(&["max-disjoint", "--n", "7", "--k", "3", "--t", "2"]);
    assert_eq!((json(&o)["count"].clone(), json(&o)["designsEnumerated"].clone()), (2.into(), 30.into()));
}

#[test]
fn restart_strategy_is_deterministic() {
    let args = [
        "search-largeset", "--n", "6", "--k", "2", "--t", "1", "--l", "5", "--strategy", "restart",
        "--restarts", "4", "--order", "random", "--seed", "3",
    ];
    let a = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, run(&args).stdout);
}

#[test]
fn general_matrix_mode() {
    let dir = tempfile::tempdir().unwrap();
    // edges of K4 as an explicit matrix
    let m = write(dir.path(), "k4.json", "[[1,1,0,0],[1,0,1,0],[0,1,1,0],[1,0,0,1],[0,1,0,1],[0,0,1,1]]");
    let o = run(&["lattice", "--matrix", &m, "--l", "3"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!((v["c1"].clone(), v["determinant"].clone()), ("2".into(), "2".into()));

    assert_eq!(code(&run(&["estimate", "--matrix", &m, "--l", "3"])), 2);
    assert_eq!(code(&run(&["estimate", "--matrix", &m, "--l", "3", "--c3", "44"])), 0);
    assert_eq!(code(&run(&["lattice", "--matrix", &m, "--n", "4"])), 2);

    // one perfect matching of K4 is uniform, two edges sharing a vertex are not
    assert_eq!(code(&run(&["uniform-check", "--matrix", &m, "--rows", "1,6"])), 0);
    assert_eq!(code(&run(&["uniform-check", "--matrix", &m, "--rows", "1,2"])), 1);
}

#[test]
fn uniform_check_on_design_file() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "fano.json", FANO);
    let bad = write(dir.path(), "bad.json", FANO_MINUS_ONE);
    assert_eq!(code(&run(&["uniform-check", &good])), 0);
    assert_eq!(code(&run(&["uniform-check", &bad])), 1);
}

#[test]
fn lattice_membership_query() {
    let base = ["lattice", "--n", "4", "--k", "2", "--t", "1", "--vector"];
    let inside = [&base[..], &["1,1,1,1"]].concat();
    let outside = [&base[..], &["1,0,0,0"]].concat();
    assert_eq!(json(&run(&inside))["member"], true);
    let o = run(&outside);
    assert_eq!((code(&o), json(&o)["member"].clone()), (1, false.into()));
}
