//! Symbolic exterior calculus from the ground up: scalar fields, forms,
//! multivector fields, and the operators that connect them.
//!
//! Run with `cargo run --example exterior_calculus`.

use oddform::expr::{field_residual, parse_expr, Chart, Sampler, ScalarField};
use oddform::exterior::{pair, schouten, sharp, KForm, KVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A chart is an ordered list of coordinates plus named constants.
    // Everything symbolic lives on exactly one chart.
    let chart = Chart::new(&["t", "x1", "x2"], &[("a", 0.5)])?;

    // Scalar fields parse from ordinary arithmetic text; `a` is the
    // chart constant declared above.
    let f = parse_expr("t * x1 + a * x2^2", &chart)?;
    println!("f       = {f}");
    println!("df/dx1  = {}", f.diff(1));

    // Forms and multivectors are coefficient tables over strictly
    // increasing index tuples; `parse` takes (tuple, coefficient) pairs.
    let omega = KForm::parse(&chart, 1, &[("0", "1"), ("1", "-x2")])?;
    let big_omega = KForm::parse(&chart, 2, &[("1 2", "1")])?;
    println!("omega   = dt - x2 dx1   (degree {})", omega.degree());
    println!("Omega   = dx1 ^ dx2     (degree {})", big_omega.degree());

    // d is the exterior derivative.  d(omega) here equals Omega: the
    // defining identity of the contact normal form.  No identity in this
    // crate is ever "proved" symbolically — each one is certified by
    // sampling, which is what residual_zero does.
    let sampler = Sampler::builder(&chart).seed(7).count(32).build()?;
    let closure = omega.d()?.sub(&big_omega).residual_zero(&sampler)?;
    println!("|d(omega) - Omega|      = {closure:.3e}");

    // The top form omega ^ Omega must not vanish anywhere for a contact
    // structure; min_magnitude certifies that numerically.
    let top = omega.wedge(&big_omega)?;
    println!(
        "min |omega ^ Omega|     = {:.3e}",
        top.min_magnitude(&sampler)?
    );

    // Vector fields mirror forms.  hook inserts a field into the first
    // slot; pair is the one-form/vector pairing.
    let e = KVector::basis(&chart, &[0])?;
    let reeb_pairing = &pair(&omega, &e) - &ScalarField::one(&chart);
    println!(
        "|omega(E) - 1|          = {:.3e}  (E = d/dt is the Reeb field)",
        field_residual(&reeb_pairing, &sampler)?
    );
    println!(
        "|i_E Omega|             = {:.3e}",
        big_omega.hook(&e)?.residual_zero(&sampler)?
    );

    // sharp turns one-forms into vector fields through a bivector, and
    // schouten is the graded bracket on multivector fields.
    let lambda = KVector::parse(&chart, 2, &[("1 2", "1")])?;
    let df = KForm::from_scalar(f.clone()).d()?;
    let df_sharp = sharp(&lambda, &df)?;
    println!("df#     = vector field of degree {}", df_sharp.degree());
    println!(
        "|[E, Lambda]|           = {:.3e}  (constant fields commute)",
        schouten(&e, &lambda)?.residual_zero(&sampler)?
    );
    Ok(())
}
