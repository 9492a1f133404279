use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn ggkdv(args: &[&std::ffi::OsStr]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ggkdv")).args(args).output().unwrap()
}

fn run(file: &Path, out: &Path) -> Output {
    ggkdv(&["run".as_ref(), file.as_os_str(), "--output-dir".as_ref(), out.as_os_str()])
}

fn read_dir(dir: &Path) -> BTreeMap<String, String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap())
        })
        .collect()
}

fn expected_header(file: &str) -> Option<&'static str> {
    Some(match file {
        "trajectory.csv" => "t,x,u,v",
        "controls.csv" => "t,h0,h1,h2,g0,g1,g2",
        "observability.csv" => "sample,quotient",
        "ucp.csv" => "L,re_p,im_p,case_tag,dispersion,verdict",
        "r0.csv" => "L,re_s,im_s,sigma_min,trivial_only",
        _ => return None,
    })
}

#[test]
fn artifacts_follow_schema() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["simulate.toml", "control_four_i.toml", "observe.toml", "ucp_sweep.toml", "r0_check.toml"] {
        let out = tmp.path().join(name);
        let o = run(&scenario(name), &out);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let files = read_dir(&out);
        let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        let json: serde_json::Value = serde_json::from_str(&files["run.json"]).unwrap();
        assert_eq!(json["summary"], summary);
        assert!(json["command"].is_string());
        for (file, body) in &files {
            if !file.ends_with(".csv") {
                continue;
            }
            let mut lines = body.lines();
            let header = lines.next().unwrap();
            if let Some(h) = expected_header(file) {
                assert_eq!(header, h, "{name}/{file}");
            }
            let width = header.split(',').count();
            let mut rows = 0;
            for line in lines {
                assert_eq!(line.split(',').count(), width, "{name}/{file}: {line}");
                rows += 1;
            }
            assert!(rows > 0, "{name}/{file} is empty");
        }
    }
}

#[test]
fn seeded_runs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        assert!(run(&scenario("ucp_sweep.toml"), dir).status.success());
    }
    assert_eq!(read_dir(&a), read_dir(&b));
}

#[test]
fn misspelled_key_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scenario("simulate.toml")).unwrap().replace("[params]", "[paramss]");
    let file = tmp.path().join("bad.toml");
    fs::write(&file, text).unwrap();
    let o = run(&file, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("paramss"));
    assert!(!tmp.path().join("out").exists());
    let o = ggkdv(&["validate".as_ref(), file.as_os_str()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_accepts_shipped_scenarios() {
    let o = ggkdv(&["validate".as_ref(), scenario("three_v.toml").as_os_str()]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "ok: control");
}
