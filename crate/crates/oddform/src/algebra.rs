//! Function algebras of a contravariant pair: Poisson bracket, Hamiltonian
//! lift, Jacobi bracket, and the diagnostics that decide when each bracket
//! makes the functions a Lie algebra.
//!
//! The central objects are, for a pair (E, Λ) and functions f, g:
//!
//! ```text
//! {f,g} = Λ(df, dg)                    (Poisson bracket)
//! X_f   = df♯ − f·E                    (Hamiltonian lift)
//! [f,g] = {f,g} − f·E.g + g·E.f       (Jacobi bracket)
//! ```
//!
//! Whether these satisfy the Jacobi identity is controlled exactly by the
//! Schouten brackets of the pair, through identities with two fully
//! independent code paths — nested bracket recursion on one side, the
//! exterior engine's Schouten calculus on the other:
//!
//! - Poisson jacobiator = ½ i_{[Λ,Λ]}(df∧dg∧dh);
//! - Jacobi-bracket jacobiator = (½ i_{[Λ,Λ]} + i_{E∧Λ})(df∧dg∧dh)
//!   + i_{[E,Λ]}(f dg∧dh + g dh∧df + h df∧dg);
//! - ([X_f,X_g] − X_{[f,g]}).h = −(½ i_{[Λ,Λ]} + i_{E∧Λ})(df∧dg∧dh)
//!   − f i_{[E,Λ]}(dg∧dh) − g i_{[E,Λ]}(df∧dh);
//! - E.{f,g} = {E.f, g} + {f, E.g} + i_{[E,Λ]}(df∧dg).
//!
//! Consequences exercised by the checks: a Jacobi pair yields a Lie
//! algebra under the Jacobi bracket and a lift homomorphism
//! [X_f,X_g] = X_{[f,g]}; a coPoisson pair with Λ ≠ 0 does *not* (its
//! jacobiator equals i_{E∧Λ}(df∧dg∧dh), nonzero on a witness triple); and
//! the bracket criterion {f,g} = −dω(X_f, X_g) singles out the Jacobi
//! members among compatible triples.
//!
//! All brackets stay exact symbolic expressions; numbers appear only when
//! a residual is finally sampled.

use rand::SeedableRng;
use thiserror::Error;

use crate::expr::{EvalError, Sampler, ScalarField};
use crate::exterior::{pair, schouten, sharp, ExteriorError, KForm, KVector};
use crate::structures::ContravariantPair;

/// Number of random (f, g, h) draws used by the residual checks.
pub const DEFAULT_TRIALS: usize = 8;

/// Errors from the diagnostic checks.
#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    /// The dω-based bracket criterion needs a one-form in the context.
    #[error("this check needs a one-form in the bracket context")]
    MissingOneForm,
}

/// Which bracket a [`jacobiator`] should iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketKind {
    /// {f,g} = Λ(df,dg).
    Poisson,
    /// [f,g] = {f,g} − f·E.g + g·E.f.
    Jacobi,
}

/// A contravariant pair prepared for bracket computations: the two
/// Schouten brackets are computed once and reused by every diagnostic.
#[derive(Debug, Clone)]
pub struct BracketContext {
    pair: ContravariantPair,
    omega: Option<KForm>,
    bracket_el: KVector,
    bracket_ll: KVector,
}

impl BracketContext {
    /// Prepare a context without a one-form (the dω-based criterion will
    /// be unavailable).
    pub fn new(pair: ContravariantPair) -> Result<Self, AlgebraError> {
        let bracket_el = schouten(pair.e(), pair.lambda())?;
        let bracket_ll = schouten(pair.lambda(), pair.lambda())?;
        Ok(BracketContext {
            pair,
            omega: None,
            bracket_el,
            bracket_ll,
        })
    }

    /// Prepare a context carrying a one-form for the dω-based criterion.
    pub fn with_omega(pair: ContravariantPair, omega: KForm) -> Result<Self, AlgebraError> {
        assert_eq!(
            pair.e().chart(),
            omega.chart(),
            "one-form lives on a different chart"
        );
        let mut ctx = BracketContext::new(pair)?;
        ctx.omega = Some(omega);
        Ok(ctx)
    }

    /// The underlying pair.
    pub fn pair(&self) -> &ContravariantPair {
        &self.pair
    }

    /// The attached one-form, if any.
    pub fn omega(&self) -> Option<&KForm> {
        self.omega.as_ref()
    }
}

fn d(f: &ScalarField) -> KForm {
    KForm::from_scalar(f.clone())
        .d()
        .expect("differential of a scalar is always defined")
}

/// Directional derivative E.f.
fn e_dot(e: &KVector, f: &ScalarField) -> ScalarField {
    pair(&d(f), e)
}

/// {f,g} = Λ(df, dg).
///
/// Panics if f or g lives on a different chart than the context.
pub fn poisson_bracket(ctx: &BracketContext, f: &ScalarField, g: &ScalarField) -> ScalarField {
    let df_sharp = sharp(ctx.pair.lambda(), &d(f)).expect("sharp of a one-form");
    pair(&d(g), &df_sharp)
}

/// X_f = df♯ − f·E.
pub fn hamiltonian_lift(ctx: &BracketContext, f: &ScalarField) -> KVector {
    sharp(ctx.pair.lambda(), &d(f))
        .expect("sharp of a one-form")
        .sub(&ctx.pair.e().scale_field(f))
}

/// [f,g] = {f,g} − f·E.g + g·E.f.
pub fn jacobi_bracket(ctx: &BracketContext, f: &ScalarField, g: &ScalarField) -> ScalarField {
    let e = ctx.pair.e();
    &(&poisson_bracket(ctx, f, g) - &(f * &e_dot(e, g))) + &(g * &e_dot(e, f))
}

/// The cyclic sum bracket(bracket(f,g),h) + bracket(bracket(g,h),f)
/// + bracket(bracket(h,f),g) for the chosen bracket, fully symbolic.
pub fn jacobiator(
    ctx: &BracketContext,
    kind: BracketKind,
    f: &ScalarField,
    g: &ScalarField,
    h: &ScalarField,
) -> ScalarField {
    let b = |x: &ScalarField, y: &ScalarField| match kind {
        BracketKind::Poisson => poisson_bracket(ctx, x, y),
        BracketKind::Jacobi => jacobi_bracket(ctx, x, y),
    };
    &(&b(&b(f, g), h) + &b(&b(g, h), f)) + &b(&b(h, f), g)
}

fn trial_rng(samples: &Sampler, salt: u64) -> rand_chacha::ChaCha8Rng {
    rand_chacha::ChaCha8Rng::seed_from_u64(samples.seed().wrapping_mul(0x9e37_79b9).wrapping_add(salt))
}

fn three_random(
    chart: &crate::expr::Chart,
    rng: &mut impl rand::Rng,
) -> (ScalarField, ScalarField, ScalarField) {
    (
        crate::expr::random_polynomial(chart, rng),
        crate::expr::random_polynomial(chart, rng),
        crate::expr::random_polynomial(chart, rng),
    )
}

/// Max residual, over `trials` random polynomial triples, of
///
/// ```text
/// {{f,g},h} + {{g,h},f} + {{h,f},g}  =  ½ i_{[Λ,Λ]}(df∧dg∧dh)
/// ```
///
/// — nested bracket recursion on the left, the Schouten engine on the
/// right. The draw is seeded from the sampler, so results are
/// reproducible.
pub fn check_poisson_jacobiator_identity(
    ctx: &BracketContext,
    samples: &Sampler,
    trials: usize,
) -> Result<f64, AlgebraError> {
    let chart = ctx.pair.e().chart().clone();
    let mut rng = trial_rng(samples, 1);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let (f, g, h) = three_random(&chart, &mut rng);
        let lhs = jacobiator(ctx, BracketKind::Poisson, &f, &g, &h);
        let three = d(&f).wedge(&d(&g))?.wedge(&d(&h))?;
        let rhs = three.hook(&ctx.bracket_ll)?.as_scalar().scale(0.5);
        worst = worst.max(crate::expr::field_equal(&lhs, &rhs, samples, f64::INFINITY)?.residual);
    }
    Ok(worst)
}

/// Max residual, over `trials` random polynomial triples, of the
/// Jacobi-bracket cyclic identity
///
/// ```text
/// [[f,g],h] + [[g,h],f] + [[h,f],g]
///   = (½ i_{[Λ,Λ]} + i_{E∧Λ})(df∧dg∧dh)
///   + i_{[E,Λ]}(f dg∧dh + g dh∧df + h df∧dg).
/// ```
pub fn check_jacobi_jacobiator_identity(
    ctx: &BracketContext,
    samples: &Sampler,
    trials: usize,
) -> Result<f64, AlgebraError> {
    let chart = ctx.pair.e().chart().clone();
    let e_lambda = ctx.pair.e().wedge(ctx.pair.lambda())?;
    let mut rng = trial_rng(samples, 2);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let (f, g, h) = three_random(&chart, &mut rng);
        let lhs = jacobiator(ctx, BracketKind::Jacobi, &f, &g, &h);
        let (df, dg, dh) = (d(&f), d(&g), d(&h));
        let three = df.wedge(&dg)?.wedge(&dh)?;
        let top = &three.hook(&ctx.bracket_ll)?.as_scalar().scale(0.5)
            + &three.hook(&e_lambda)?.as_scalar();
        let correction = dg
            .wedge(&dh)?
            .scale_field(&f)
            .add(&dh.wedge(&df)?.scale_field(&g))
            .add(&df.wedge(&dg)?.scale_field(&h));
        let rhs = &top + &correction.hook(&ctx.bracket_el)?.as_scalar();
        worst = worst.max(crate::expr::field_equal(&lhs, &rhs, samples, f64::INFINITY)?.residual);
    }
    Ok(worst)
}

/// Max residual, over `trials` random polynomial pairs, of the derivation
/// identity
///
/// ```text
/// E.{f,g} = {E.f, g} + {f, E.g} + i_{[E,Λ]}(df∧dg).
/// ```
pub fn check_e_derivation(
    ctx: &BracketContext,
    samples: &Sampler,
    trials: usize,
) -> Result<f64, AlgebraError> {
    let chart = ctx.pair.e().chart().clone();
    let e = ctx.pair.e();
    let mut rng = trial_rng(samples, 3);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let f = crate::expr::random_polynomial(&chart, &mut rng);
        let g = crate::expr::random_polynomial(&chart, &mut rng);
        let lhs = e_dot(e, &poisson_bracket(ctx, &f, &g));
        let two = d(&f).wedge(&d(&g))?;
        let rhs = &(&poisson_bracket(ctx, &e_dot(e, &f), &g)
            + &poisson_bracket(ctx, &f, &e_dot(e, &g)))
            + &two.hook(&ctx.bracket_el)?.as_scalar();
        worst = worst.max(crate::expr::field_equal(&lhs, &rhs, samples, f64::INFINITY)?.residual);
    }
    Ok(worst)
}

/// Outcome of [`check_lift_homomorphism`].
#[derive(Debug, Clone, Copy)]
pub struct LiftCheck {
    /// Residual of ([X_f,X_g] − X_{[f,g]}).h against its closed-form
    /// expansion in the Schouten brackets — this identity holds for
    /// *every* pair.
    pub lemma_residual: f64,
    /// Residual of [X_f,X_g] − X_{[f,g]} itself against zero — small
    /// exactly when the lift is a Lie-algebra homomorphism.
    pub defect: f64,
    /// Whether `defect ≤ tol`.
    pub homomorphism: bool,
}

/// Test the Hamiltonian lift two ways, over `trials` random draws:
/// certify the universal expansion
///
/// ```text
/// ([X_f,X_g] − X_{[f,g]}).h = −(½ i_{[Λ,Λ]} + i_{E∧Λ})(df∧dg∧dh)
///                             − f i_{[E,Λ]}(dg∧dh) − g i_{[E,Λ]}(dh∧df)
/// ```
///
/// and report whether the defect [X_f,X_g] − X_{[f,g]} vanishes (it does
/// precisely for Jacobi pairs).
pub fn check_lift_homomorphism(
    ctx: &BracketContext,
    samples: &Sampler,
    trials: usize,
    tol: f64,
) -> Result<LiftCheck, AlgebraError> {
    let chart = ctx.pair.e().chart().clone();
    let e_lambda = ctx.pair.e().wedge(ctx.pair.lambda())?;
    let mut rng = trial_rng(samples, 4);
    let mut lemma_residual = 0.0f64;
    let mut defect = 0.0f64;
    for _ in 0..trials {
        let (f, g, h) = three_random(&chart, &mut rng);
        let xf = hamiltonian_lift(ctx, &f);
        let xg = hamiltonian_lift(ctx, &g);
        let commutator = schouten(&xf, &xg)?;
        let lifted = hamiltonian_lift(ctx, &jacobi_bracket(ctx, &f, &g));
        let diff = commutator.sub(&lifted);
        defect = defect.max(diff.residual_zero(samples)?);

        let lhs = pair(&d(&h), &diff);
        let (df, dg, dh) = (d(&f), d(&g), d(&h));
        let three = df.wedge(&dg)?.wedge(&dh)?;
        let rhs = &(&(&three.hook(&ctx.bracket_ll)?.as_scalar().scale(-0.5)
            - &three.hook(&e_lambda)?.as_scalar())
            - &(&f * &dg.wedge(&dh)?.hook(&ctx.bracket_el)?.as_scalar()))
            - &(&g * &dh.wedge(&df)?.hook(&ctx.bracket_el)?.as_scalar());
        lemma_residual =
            lemma_residual.max(crate::expr::field_equal(&lhs, &rhs, samples, f64::INFINITY)?.residual);
    }
    Ok(LiftCheck {
        lemma_residual,
        defect,
        homomorphism: defect <= tol,
    })
}

/// Max residual, over `trials` random polynomial pairs, of the bracket
/// criterion
///
/// ```text
/// {f,g} = −dω(X_f, X_g)
/// ```
///
/// using the context's one-form. Among compatible triples this criterion
/// holds exactly when the pair is Jacobi, so for other members the
/// returned residual is genuinely large — callers decide what to make of
/// it.
pub fn check_bracket_curvature(
    ctx: &BracketContext,
    samples: &Sampler,
    trials: usize,
) -> Result<f64, AlgebraError> {
    let omega = ctx.omega().ok_or(AlgebraError::MissingOneForm)?;
    let d_omega = omega.d()?;
    let chart = ctx.pair.e().chart().clone();
    let mut rng = trial_rng(samples, 5);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let f = crate::expr::random_polynomial(&chart, &mut rng);
        let g = crate::expr::random_polynomial(&chart, &mut rng);
        let lhs = poisson_bracket(ctx, &f, &g);
        let xf = hamiltonian_lift(ctx, &f);
        let xg = hamiltonian_lift(ctx, &g);
        let rhs = -&pair(&d_omega.hook(&xf)?, &xg);
        worst = worst.max(crate::expr::field_equal(&lhs, &rhs, samples, f64::INFINITY)?.residual);
    }
    Ok(worst)
}
