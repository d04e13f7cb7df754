use std::process::{Command, Output};

fn cascade(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cascade")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn model5_defaults() {
    let out = cascade(&["model5", "--depth", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["aligned_max_ratio"], 4);
    assert_eq!(v["shifted_max_ratio"], 5);
}

#[test]
fn bad_input_exits_2() {
    assert_eq!(cascade(&["model5", "--depth", "0"]).status.code(), Some(2));
    assert_eq!(cascade(&["walk", "--paths", "10"]).status.code(), Some(2));
    assert_eq!(cascade(&["cantor", "--params", "6,8"]).status.code(), Some(2));
    assert_eq!(cascade(&["interp", "--lambda", "3/2"]).status.code(), Some(2));
    assert_eq!(cascade(&["walk", "--seed", "1", "--start", "gap:2/9:2:7"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "n = 6\ncolour = blue\n").unwrap();
    let out = cascade(&["expect", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small model\nn = 4\nq = 4\neps = 1/10\nseed = 2\npaths = 50\n").unwrap();
    let out = cascade(&["walk", "--config", cfg.to_str().unwrap(), "--paths", "80"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["paths"], 80);
    assert_eq!(v["seed"], 2);
}

#[test]
fn walk_is_deterministic() {
    let args = ["walk", "--seed", "7", "--paths", "300", "--max-steps", "60"];
    let (a, b) = (cascade(&args), cascade(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = cascade(&["walk", "--seed", "8", "--paths", "300", "--max-steps", "60"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn csv_output() {
    let out = cascade(&["cantor", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,children,children_closed,s1,s1_closed,s5,s5_closed,s5_quoted"));
    assert_eq!(lines.next(), Some("1,2,2,0,0,0,0,0"));
}

#[test]
fn interp_writes_map() {
    let dir = tempfile::tempdir().unwrap();
    let out = cascade(&["interp", "--depth", "3", "--lambda", "1", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let map = std::fs::read(dir.path().join("map.csv")).unwrap();
    let f = cascade::export::read_map_table(&map[..]).unwrap();
    assert_eq!(f.xs.len(), 126);
    assert!(f.strictly_increasing());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("interp.json")).unwrap()).unwrap();
    assert_eq!(v["qs_depth1"]["m"], 4);
}

#[test]
fn export_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        cascade(&["export", "--seed", "1", "--paths", "200", "--depth", "3", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["walk.json", "interp.json", "map.csv", "trajectories.csv"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    assert_eq!(cascade(&["export"]).status.code(), Some(2));
}
