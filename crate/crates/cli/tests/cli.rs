use std::fs;
use std::path::Path;
use std::process::Command;

fn gpkink(args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_gpkink")).args(args).output().expect("spawn gpkink");
    out.status.code().expect("exited by signal")
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn soliton_writes_profile_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(gpkink(&["soliton", "--c", "0.5", "--L", "30", "--N", "1024", "--out", out]), 0);
    let csv = fs::read_to_string(dir.path().join("soliton.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,re,im,modulus"));
    assert_eq!(csv.lines().count(), 1025);
    assert!(dir.path().join("soliton.gpfd").exists());
    let s = summary(dir.path());
    let items = s.as_array().unwrap();
    assert!(!items.is_empty());
    for a in items {
        assert_eq!(a["passed"], true);
        for key in ["name", "measured", "threshold"] {
            assert!(a.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(gpkink(&["teleport"]), 2);
    assert_eq!(gpkink(&["winding", "--eps", "0.1", "--out", out]), 2);
    assert_eq!(gpkink(&["dips", "--N", "1000", "--out", out]), 2);
    assert_eq!(gpkink(&["soliton", "--c", "2", "--out", out]), 2);
    assert_eq!(gpkink(&["suite", "--config", dir.path().join("none.toml").to_str().unwrap(), "--out", out]), 2);
}

#[test]
fn suite_exit_code_follows_assertions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let config = dir.path().join("suite.toml");

    fs::write(&config, "experiments = [\"winding\"]\n[winding]\nsamples = 3\n").unwrap();
    assert_eq!(gpkink(&["suite", "--config", config.to_str().unwrap(), "--out", out]), 0);
    assert!(summary(Path::new(out)).as_array().unwrap().iter().all(|a| a["passed"] == true));

    fs::write(&config, "experiments = [\"winding\"]\n[winding]\nsamples = 3\ntolerance = 0.0\n").unwrap();
    assert_eq!(gpkink(&["suite", "--config", config.to_str().unwrap(), "--out", out]), 1);
    assert!(summary(Path::new(out)).as_array().unwrap().iter().any(|a| a["passed"] == false));

    fs::write(&config, "experiments = [\"winding\"]\n[winding]\nsamplez = 3\n").unwrap();
    assert_eq!(gpkink(&["suite", "--config", config.to_str().unwrap(), "--out", out]), 2);
}
