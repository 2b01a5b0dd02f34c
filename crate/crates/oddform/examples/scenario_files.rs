//! Scenario files: the TOML format every CLI command consumes, written
//! and read back through the same typed schema the CLI uses.
//!
//! Run with `cargo run --example scenario_files`.

use oddform::scenario::{parse_scenario, ScenarioFile};
use oddform::structures::classify_covariant;

const TOL: f64 = 1e-9;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A scenario file is: a format version, an optional chart and
    // domain, and exactly one payload section.  Antisymmetric matrices
    // are given by their strict upper triangle (ragged rows), symmetric
    // ones include the diagonal; the lower triangle is never read.
    let text = r#"
version = 1

[chart]
coords = ["t", "x1", "x2"]
constants = { k = 0.25 }

[domain]
box = [[-1.0, 1.0], [-1.0, 1.0], [-0.5, 0.5]]

[covariant]
omega = ["1", "-x2", "0"]
Omega = [["0", "0", "0"], ["1 + k * t"], []]
"#;

    let file = parse_scenario(text)?;
    println!("parsed a {} scenario", file.payload_name());

    // realize() turns the text into symbolic fields on a deterministic,
    // constraint-respecting sampler.
    let realized = file.realize(42, 24)?;
    let pair = realized.covariant_pair(TOL)?;
    let report = classify_covariant(&pair, &realized.sampler, TOL)?;
    let labels: Vec<String> = report.labels.iter().map(|l| l.to_string()).collect();
    println!("labels: [{}]", labels.join(", "));

    // Built-in spacetime scenarios exist for the two flat models; their
    // TOML form is a template for writing curved ones.
    let flat = ScenarioFile::galilei_flat();
    println!("--- built-in galilei flat scenario ---");
    print!("{}", flat.to_toml_string()?);
    Ok(())
}
