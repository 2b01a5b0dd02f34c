//! Process-level checks of the `oddform` binary: exit codes, stream
//! routing and byte-for-byte determinism as observed by a shell rather
//! than through the library entry point.

use std::path::PathBuf;
use std::process::{Command, Output};

const CONTACT_DARBOUX: &str =
    "version = 1\n\n[darboux]\nn = 1\ns = 1\nomega_funcs = [\"-x2\", \"0\"]\n";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oddform"))
        .args(args)
        .output()
        .expect("spawn oddform")
}

fn fixture(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!(
        "oddform-proc-{}-{name}.toml",
        std::process::id()
    ));
    std::fs::write(&path, contents).expect("write fixture");
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn help_lists_every_subcommand_on_stdout() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for cmd in ["classify", "dualize", "bracket", "scenario"] {
        assert!(text.contains(cmd), "--help missing {cmd}: {text}");
    }
    assert!(out.stderr.is_empty());
}

#[test]
fn version_goes_to_stdout() {
    let out = run(&["--version"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn usage_errors_exit_two_on_stderr() {
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Usage"));

    let path = fixture("usage", CONTACT_DARBOUX);
    let out = run(&["bracket", path.to_str().unwrap(), "--f", "t"]);
    assert_eq!(out.status.code(), Some(2), "missing --g must be a usage error");
}

#[test]
fn classify_expect_drives_the_exit_code() {
    let path = fixture("classify", CONTACT_DARBOUX);
    let path = path.to_str().unwrap();

    let out = run(&["classify", path]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("contact"));

    let out = run(&["classify", path, "--expect", "contact"]);
    assert_eq!(out.status.code(), Some(0));

    let out = run(&["classify", path, "--expect", "cosymplectic"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("status: mismatch"));

    let out = run(&["classify", path, "--expect", "symplectic"]);
    assert_eq!(out.status.code(), Some(1), "unknown label is an input error");
    assert!(stderr(&out).starts_with("error:"));
}

#[test]
fn missing_file_exits_one() {
    let out = run(&["classify", "/no/such/file.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error:"));
    assert!(out.stdout.is_empty());
}

#[test]
fn dualize_certifies_axioms_through_the_binary() {
    let path = fixture("dualize", CONTACT_DARBOUX);
    let out = run(&["dualize", path.to_str().unwrap(), "--roundtrip"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("axiom"));
    assert!(text.contains("roundtrip: dual of dual"));
    assert!(text.contains("E[0]"));
}

#[test]
fn bracket_reports_both_brackets() {
    let path = fixture("bracket", CONTACT_DARBOUX);
    let out = run(&["bracket", path.to_str().unwrap(), "--f", "t", "--g", "x1"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("{f,g}"));
    assert!(text.contains("[f,g]"));
}

#[test]
fn scenario_einstein_flat_verifies() {
    let out = run(&["scenario", "einstein"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("status: ok"));
    assert!(text.contains("contact"));
    assert!(text.contains("Jacobi"));
}

#[test]
fn scenario_rejects_a_mismatched_metric_file() {
    let galilei = oddform::scenario::ScenarioFile::galilei_flat()
        .to_toml_string()
        .expect("render builtin scenario");
    let path = fixture("mismatch", &galilei);
    let out = run(&["scenario", "einstein", "--metric", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("does not provide a einstein model"));
}

#[test]
fn structured_reports_are_identical_across_processes() {
    let path = fixture("determinism", CONTACT_DARBOUX);
    let path = path.to_str().unwrap();
    for args in [
        vec!["classify", path, "--samples", "9", "--format", "structured"],
        vec!["scenario", "galilei", "--samples", "5", "--format", "structured"],
    ] {
        let first = run(&args);
        let second = run(&args);
        assert_eq!(first.status.code(), Some(0), "stderr: {}", stderr(&first));
        assert_eq!(
            first.stdout, second.stdout,
            "two runs of {args:?} disagreed byte-for-byte"
        );
        assert!(!first.stdout.is_empty());
    }
}
