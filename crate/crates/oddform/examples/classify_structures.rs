//! Classify the four covariant and four contravariant structure families
//! from their normal forms, and watch the labels change as the
//! generating functions do.
//!
//! Run with `cargo run --example classify_structures`.

use oddform::darboux::{darboux_chart, DarbouxSpec};
use oddform::expr::{parse_expr, Sampler};
use oddform::structures::{classify_contravariant, classify_covariant};

const TOL: f64 = 1e-9;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A Darboux description on the (2n+1)-chart (t, x1 .. x2n) is a
    // choice of 2n functions omega^1 .. omega^2n; everything else — the
    // one-form, two-form, vector field and bivector — derives from them.
    //
    // The two classical normal forms:
    //   cosymplectic: all omega^a = 0            (omega = dt, closed)
    //   contact:      omega^i = -x^{n+i}         (d(omega) = Omega)
    for (name, spec) in [
        ("cosymplectic normal form", DarbouxSpec::cosymplectic(2)?),
        ("contact normal form", DarbouxSpec::contact(2)?),
    ] {
        report(name, &spec)?;
    }

    // Anything in between is an almost-cosymplectic-contact structure:
    // here s = 1 of the n = 2 pairs carries the contact functions and
    // the other pair is inert, so neither closure identity holds.
    let chart = darboux_chart(2)?;
    let omega_funcs = vec![
        parse_expr("-x3", &chart)?,
        parse_expr("0", &chart)?,
        parse_expr("0", &chart)?,
        parse_expr("0", &chart)?,
    ];
    let mixed = DarbouxSpec::from_functions(&chart, 1, omega_funcs)?;
    report("mixed normal form (s = 1 of n = 2)", &mixed)?;

    // Random generating functions land in the generic families.
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let random = DarbouxSpec::random(2, 1, &mut rng)?;
    report("random generating functions", &random)?;
    Ok(())
}

fn report(name: &str, spec: &DarbouxSpec) -> Result<(), Box<dyn std::error::Error>> {
    let sampler = Sampler::builder(spec.chart()).seed(42).count(24).build()?;

    let cov = spec.covariant_pair(&sampler, TOL)?;
    let c = classify_covariant(&cov, &sampler, TOL)?;
    let labels: Vec<String> = c.labels.iter().map(|l| l.to_string()).collect();
    println!("{name}");
    println!("  covariant     [{}]", labels.join(", "));

    let contra = spec.contravariant_pair(&sampler, TOL)?;
    let one_form = spec.one_form();
    let c = classify_contravariant(&contra, Some(&one_form), &sampler, TOL)?;
    let labels: Vec<String> = c.labels.iter().map(|l| l.to_string()).collect();
    println!("  contravariant [{}]", labels.join(", "));

    // The residual table is the evidence: identities that hold sit at
    // rounding error, identities that fail sit far above tolerance.
    for (key, value) in &c.residuals {
        println!("    {key:<40} {value:.3e}");
    }
    Ok(())
}
