use std::path::Path;
use std::process::{Command, Output};

fn imin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imin"))
        .args(args)
        .env_remove("IMIN_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_graph(dir: &Path) -> String {
    // two hubs feeding a ring
    let mut text = String::from("# test graph\n");
    for v in 2..30 {
        text.push_str(&format!("{} {}\n", v % 2, v));
        text.push_str(&format!("{} {}\n", v, 2 + (v - 1) % 28));
    }
    let path = dir.join("ring.txt");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn diamond_sandimin_row() {
    let out = imin(&["run", "--graph", "fixture:diamond", "--algo", "sandimin", "--k", "2", "--eval-trials", "20000"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let row = reader.records().next().unwrap().unwrap();
    let get = |name: &str| row.get(headers.iter().position(|h| h == name).unwrap()).unwrap().to_string();
    assert_eq!(get("algo"), "sandimin");
    assert_eq!(get("blockers"), "1 2");
    assert!((get("decrease").parse::<f64>().unwrap() - 3.0).abs() < 0.05);
    assert_eq!(get("runtime_ms"), "");
}

#[test]
fn chain_lhga_decrease() {
    let out = imin(&["run", "--graph", "fixture:chain", "--algo", "lhga", "--k", "1", "--eval-trials", "1000"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",2.0,"), "{text}");
}

#[test]
fn identical_flags_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_graph(dir.path());
    let cache = dir.path().join("pool.json");
    let mut outputs = Vec::new();
    for (i, threads) in ["2", "2", "1", "4"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}.csv"));
        let o = imin(&[
            "run",
            "--graph",
            &graph,
            "--algo",
            "sandimin",
            "--k",
            "2",
            "--seeds",
            "2",
            "--seed-rank-pool",
            "6",
            "--pool-trials",
            "200",
            "--pool-cache",
            cache.to_str().unwrap(),
            "--repeats",
            "2",
            "--rng-seed",
            "7",
            "--eval-trials",
            "5000",
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(std::fs::read(out).unwrap());
    }
    assert!(cache.exists());
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    assert_eq!(outputs[0], outputs[3]);
    assert_eq!(String::from_utf8_lossy(&outputs[0]).lines().count(), 3);
}

#[test]
fn missing_file_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let o = imin(&["run", "--graph", "/no/such/file", "--algo", "lhga", "--k", "1", "--seeds", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 6);
    assert!(!out.exists());
    assert!(o.stdout.is_empty());
}

#[test]
fn malformed_graph() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "1 2\n3 x\n").unwrap();
    let o = imin(&["run", "--graph", path.to_str().unwrap(), "--algo", "lhga", "--k", "1", "--seeds", "1"]);
    assert_eq!(code(&o), 6);
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2:"));
}

#[test]
fn distinct_exit_codes() {
    let base = ["run", "--graph", "fixture:chain"];
    let run = |extra: &[&str]| code(&imin(&[&base[..], extra].concat()));
    assert_eq!(run(&["--algo", "celf", "--k", "1"]), 3);
    assert_eq!(run(&["--algo", "lhga", "--k", "0"]), 4);
    assert_eq!(run(&["--algo", "lhga", "--k", "-3"]), 4);
    assert_eq!(run(&["--algo", "lhga", "--k", "1", "--seeds", "0,99"]), 5);
    assert_eq!(run(&["--algo", "lhga", "--k", "1", "--seeds", "ids:-1"]), 5);
    assert_eq!(run(&["--algo", "lhga"]), 2);
    assert_eq!(run(&["--algo", "lhga", "--k", "1", "--prob", "half"]), 2);
    assert_eq!(code(&imin(&["frobnicate"])), 2);
}

#[test]
fn json_report_and_timings() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let o = imin(&[
        "run",
        "--graph",
        "fixture:dominator-example",
        "--algo",
        "sandimin",
        "--k",
        "2",
        "--eval-trials",
        "1000",
        "--timings",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(json).unwrap()).unwrap();
    let rep = &report["repeats"][0];
    assert!(rep["sandwich"]["candidates"].as_array().unwrap().len() == 3);
    assert!(rep["row"]["runtime_ms"].as_f64().is_some());
    let text = String::from_utf8(o.stdout).unwrap();
    let runtime = text.lines().nth(1).unwrap().split(',').nth(10).unwrap();
    assert!(runtime.parse::<f64>().is_ok(), "{text}");
}

#[test]
fn bench_writes_each_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("bench");
    let o = imin(&[
        "bench",
        "--graph",
        "fixture:bounds-example",
        "--algos",
        "lhga,lsbm",
        "--k",
        "2",
        "--k-list",
        "1,2,3",
        "--epsilon-list",
        "0.2,0.4",
        "--eval-trials",
        "1000",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let k = std::fs::read_to_string(out_dir.join("bench_k.csv")).unwrap();
    let eps = std::fs::read_to_string(out_dir.join("bench_epsilon.csv")).unwrap();
    assert_eq!(k.lines().count(), 1 + 2 * 3);
    assert_eq!(eps.lines().count(), 1 + 2 * 2);
    assert!(!out_dir.join("bench_seeds.csv").exists());
}

#[test]
fn oracle_check_table() {
    let o = imin(&["oracle-check"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("bounds-example"));
    assert!(!text.contains("FAIL"));
}
