//! The function algebra of a contravariant pair: Poisson bracket,
//! identity-corrected (Jacobi) bracket, hamiltonian lifts, and the
//! jacobiator that separates the families.
//!
//! Run with `cargo run --example brackets`.

use oddform::algebra::{
    hamiltonian_lift, jacobi_bracket, jacobiator, poisson_bracket, BracketContext, BracketKind,
};
use oddform::darboux::DarbouxSpec;
use oddform::expr::{field_residual, parse_expr, Sampler};

const TOL: f64 = 1e-9;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // --- A contact structure: brackets satisfy the Jacobi identity ----
    let spec = DarbouxSpec::contact(1)?;
    let chart = spec.chart().clone();
    let sampler = Sampler::builder(&chart).seed(3).count(24).build()?;
    let pair = spec.contravariant_pair(&sampler, TOL)?;
    let ctx = BracketContext::with_omega(pair, spec.one_form())?;

    let f = parse_expr("t + x1 * x2", &chart)?;
    let g = parse_expr("x1 - t^2", &chart)?;
    let h = parse_expr("x2", &chart)?;

    // Both brackets are fully symbolic; printing shows the expressions
    // and sampling certifies the identities.
    println!("on the contact normal form (t, x1, x2):");
    println!("  {{f,g}} = {}", poisson_bracket(&ctx, &f, &g));
    println!("  [f,g] = {}", jacobi_bracket(&ctx, &f, &g));

    // The corrected bracket satisfies Jacobi; its jacobiator vanishes.
    let jac = jacobiator(&ctx, BracketKind::Jacobi, &f, &g, &h);
    println!(
        "  jacobiator of [.,.]      = {:.3e}",
        field_residual(&jac, &sampler)?
    );

    // The lift f -> X_f = df# - f E intertwines brackets with field
    // commutators on Jacobi structures.
    let xf = hamiltonian_lift(&ctx, &f);
    println!("  X_f is a vector field of degree {}", xf.degree());

    // --- A coPoisson structure: the corrected bracket fails Jacobi ---
    // E = d/dt and Lambda = d/dx2 ^ d/dx1 form a coPoisson pair (both
    // Schouten brackets vanish) that is *not* Jacobi, and the
    // coordinate functions witness it: the jacobiator of (t, x1, x2)
    // is exactly 1 in magnitude.
    use oddform::exterior::KVector;
    use oddform::structures::ContravariantPair;
    let e = KVector::basis(&chart, &[0])?;
    let lambda = KVector::parse(&chart, 2, &[("1 2", "-1")])?;
    let pair = ContravariantPair::new(e, lambda, &sampler, TOL)?;
    let ctx = BracketContext::new(pair)?;

    let t = parse_expr("t", &chart)?;
    let x1 = parse_expr("x1", &chart)?;
    let x2 = parse_expr("x2", &chart)?;
    println!("on the flat coPoisson pair:");
    println!("  [t,x1] = {}", jacobi_bracket(&ctx, &t, &x1));
    let jac = jacobiator(&ctx, BracketKind::Jacobi, &t, &x1, &x2);
    println!(
        "  jacobiator of (t, x1, x2) = {}  (nonzero: not a Jacobi structure)",
        jac
    );
    Ok(())
}
