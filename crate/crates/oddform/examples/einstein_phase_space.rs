//! The phase space of a relativistic (Einstein) spacetime: a Lorentz
//! metric alone determines a contact pair and its Jacobi dual on the
//! timelike velocity domain.
//!
//! Run with `cargo run --example einstein_phase_space`.

use oddform::spacetime::{
    phase_space, verify_theorems, EinsteinInput, PhaseChart, SpacetimeInput,
};

const TOL: f64 = 1e-8;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let phase = PhaseChart::standard();

    // Velocities must stay timelike: the sampler rejects points where
    // the quadratic form Q = g_00 + 2 g_0j x^j_0 + g_ij x^i_0 x^j_0
    // gets within the safety margin of the light cone.
    for (name, input) in [
        ("minkowski", {
            let s = EinsteinInput::minkowski(&phase, &phase.box_sampler(1, 8)?)?;
            SpacetimeInput::Einstein(s)
        }),
        ("rindler (uniformly accelerated)", {
            let s = EinsteinInput::rindler(&phase, &phase.box_sampler(1, 8)?)?;
            SpacetimeInput::Einstein(s)
        }),
    ] {
        let sampler = input.default_sampler(42, 12)?;
        let space = phase_space(&input)?;
        println!("{name}:");
        println!(
            "  Omega degree {}, Lambda degree {}",
            space.omega().degree(),
            space.lambda().degree()
        );

        // The relativistic two-form is *exact* up to the speed of light:
        // Omega = -c^2 d(tau), so the covariant pair is contact rather
        // than cosymplectic, and the dual is Jacobi rather than
        // coPoisson.  verify_theorems checks this along with the
        // connection diagnostics, the kernel property of the dynamical
        // field, the Schouten compatibilities and the duality.
        let report = verify_theorems(&input, &sampler, TOL)?;
        println!("  all theorems hold: {}", report.all_ok(TOL));
        println!("  worst residual:    {:.3e}", report.max_residual());
        let labels: Vec<String> = report
            .covariant
            .labels
            .iter()
            .map(|l| l.to_string())
            .collect();
        println!("  covariant labels:     [{}]", labels.join(", "));
        let labels: Vec<String> = report
            .contravariant
            .labels
            .iter()
            .map(|l| l.to_string())
            .collect();
        println!("  contravariant labels: [{}]", labels.join(", "));
        for key in ["Omega + c^2 d(tau)", "gamma hook Omega", "[E,Lambda]"] {
            if let Some(v) = report.residuals.get(key) {
                println!("    {key:<24} {v:.3e}");
            }
        }
    }
    Ok(())
}
