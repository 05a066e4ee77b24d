use std::process::Command;

fn mverify() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mverify"))
}

fn code(cmd: &mut Command) -> i32 {
    cmd.output().expect("binary runs").status.code().expect("exit code")
}

#[test]
fn passing_checks_exit_zero_and_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("reports.jsonl");
    let out = mverify()
        .args(["theta-e8", "eisenstein-n", "--N", "3", "--json"])
        .arg(&json)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = std::fs::read_to_string(&json).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    for (line, name) in lines.iter().zip(["theta-e8", "eisenstein-n"]) {
        assert_eq!(line["check_name"], name);
        for key in ["inputs", "value", "error_bound", "pass", "runtime_ms", "notes"] {
            assert!(line.get(key).is_some(), "missing {key}");
        }
        assert_eq!(line["pass"], true);
    }
    assert_eq!(lines[1]["inputs"]["N"], 3);
}

#[test]
fn failed_check_exits_one() {
    assert_eq!(code(mverify().args(["theta-e8", "eisenstein-n", "--tol", "0"])), 1);
}

#[test]
fn usage_and_data_errors_exit_two() {
    assert_eq!(code(&mut mverify()), 2);
    assert_eq!(code(mverify().arg("frobnicate")), 2);
    assert_eq!(code(mverify().args(["nonvanishing", "--s", "four"])), 2);
    let empty = tempfile::tempdir().unwrap();
    assert_eq!(code(mverify().arg("unfold-gamma0").env("MVERIFY_DATA", empty.path())), 2);
    assert_eq!(code(mverify().args(["unfold-gamma0", "--N", "3"])), 2);
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(mverify().arg("--help")), 0);
}

#[test]
fn data_dir_override_is_used() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(mverify().args(["gen-fixtures", "--rows", "300", "--out"]).arg(dir.path())), 0);
    let out = mverify()
        .args(["unfold-gamma0", "--json", "-"])
        .env("MVERIFY_DATA", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["inputs"]["terms"], 300);
}
