//! Drive the command-line interface in-process: every command is a
//! function from an argument vector to an exit code plus captured
//! output, so scripts and tests can use it without spawning anything.
//!
//! Run with `cargo run --example cli_runs`.

use oddform::cli::run;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Write a scenario file for the commands to chew on.
    let path = std::env::temp_dir().join("oddform-example-contact.toml");
    std::fs::write(
        &path,
        r#"
version = 1

[darboux]
n = 1
s = 1
omega_funcs = ["-x2", "0"]
"#,
    )?;
    let path = path.to_str().expect("utf-8 temp path");

    // classify: labels plus the certifying residual table.
    let outcome = run(["oddform", "classify", path, "--samples", "12"]);
    println!("$ oddform classify {path} --samples 12   (exit {})", outcome.code);
    print!("{}", outcome.stdout);

    // --expect turns the label into an exit-code contract: 0 when
    // granted, 2 when not.
    let outcome = run([
        "oddform", "classify", path, "--samples", "12", "--expect", "cosymplectic",
    ]);
    println!("$ ... --expect cosymplectic   (exit {})", outcome.code);

    // bracket: symbolic results and sampled values; structured output
    // is byte-reproducible JSON.
    let outcome = run([
        "oddform",
        "bracket",
        path,
        "--f",
        "t",
        "--g",
        "x1",
        "--samples",
        "3",
        "--format",
        "structured",
    ]);
    println!("$ oddform bracket ... --format structured   (exit {})", outcome.code);
    print!("{}", outcome.stdout);

    // scenario: the built-in flat Galilei model, fully verified.
    let outcome = run(["oddform", "scenario", "galilei", "--samples", "6"]);
    println!("$ oddform scenario galilei --samples 6   (exit {})", outcome.code);
    let status = outcome
        .stdout
        .lines()
        .filter(|l| l.starts_with("labels") || l.starts_with("status"))
        .collect::<Vec<_>>()
        .join("\n");
    println!("{status}");
    Ok(())
}
