use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("models")
}

fn pact(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pact")).args(args).output().expect("run pact")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn model_path(name: &str) -> String {
    models().join(name).to_string_lossy().into_owned()
}

fn write_model(dir: &tempfile::TempDir, text: &str) -> String {
    let p = dir.path().join("m.pact");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn parse_prints_canonical_model() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(&dir, "uncontrollable u\ncontrollable c\nplant P = (u.1 + c?.1)*\n");
    let o = pact(&["parse", "--model", &m]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("uncontrollable u"), "{text}");
    assert!(text.contains("plant P"), "{text}");

    // The canonical form parses back to itself.
    let again = write_model(&dir, &text);
    assert_eq!(stdout(&pact(&["parse", "--model", &again])), text);
}

#[test]
fn parse_error_is_usage_exit() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_model(&dir, "uncontrollable u;\n");
    let o = pact(&["parse", "--model", &m]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:"));
}

#[test]
fn missing_model_file_is_usage_exit() {
    let o = pact(&["parse", "--model", "/nonexistent/model.pact"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn agv_deadlocks_with_evidence() {
    let o = pact(&["check", "deadlock", "--model", &model_path("agv.pact")]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.starts_with("deadlock: FAIL"), "{text}");
    let evidence: Vec<_> = text.lines().filter(|l| l.starts_with("EVIDENCE: ")).collect();
    assert_eq!(evidence.len(), 15, "{text}");
    assert_eq!(evidence[0], "EVIDENCE: s!?(make)");
}

#[test]
fn printer_is_controllable() {
    let p = model_path("printer.pact");
    for check in ["controllable", "lang-controllable", "deadlock", "nonblocking", "reqs"] {
        let o = pact(&["check", check, "--model", &p]);
        assert_eq!(o.status.code(), Some(0), "{check}: {}", stdout(&o));
    }
}

#[test]
fn budget_overrun_exits_three() {
    let o = pact(&["lts", "--model", &model_path("agv.pact"), "--max-states", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn lts_exports() {
    let agv = model_path("agv.pact");
    let aut = stdout(&pact(&["lts", "--model", &agv]));
    let header = aut.lines().next().unwrap();
    assert!(header.starts_with("des (0, "), "{header}");
    let edges = aut.lines().count() - 1;
    assert!(header.contains(&format!(", {edges}, ")), "{header} vs {edges} edges");

    let dot = stdout(&pact(&["lts", "--model", &agv, "--format", "dot"]));
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches(" -> ").count(), edges + 1, "one arrow per edge plus the initial marker");
}

#[test]
fn evidence_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("evidence.txt");
    let o = pact(&[
        "check",
        "deadlock",
        "--model",
        &model_path("agv.pact"),
        "--evidence-out",
        &out.to_string_lossy(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let written = fs::read_to_string(&out).unwrap();
    let printed: String = stdout(&o)
        .lines()
        .filter(|l| l.starts_with("EVIDENCE: "))
        .map(|l| format!("{l}\n"))
        .collect();
    assert!(!written.is_empty());
    assert!(printed.contains(written.lines().next().unwrap()));
}

#[test]
fn supervisor_and_encap_overrides() {
    let agv = model_path("agv.pact");
    let o = pact(&["check", "controllable", "--model", &agv, "--supervisor", "S'", "--encap", "E'", "--rename", "xi'"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let o = pact(&["check", "pbisim", "--model", &agv, "--left", "supervised", "--right", "renamed", "--b", "U"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    // The plant has `s?` where the renamed plant has `s!?`.
    let o = pact(&["check", "pbisim", "--model", &agv, "--left", "plant", "--right", "renamed", "--b", "U"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn output_is_deterministic() {
    let p = model_path("printer.pact");
    let a = pact(&["minimize", "--model", &p, "--of", "supervised", "--b", "all"]);
    let b = pact(&["minimize", "--model", &p, "--of", "supervised", "--b", "all"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
