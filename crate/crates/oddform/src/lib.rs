//! Symbolic-numeric exterior calculus on odd-dimensional coordinate charts.
//!
//! `oddform` implements, classifies, dualizes and verifies the geometric
//! structures that live naturally on manifolds of odd dimension 2n+1:
//!
//! - **covariant pairs** (ω, Ω) — a one-form together with a two-form:
//!   cosymplectic, contact and almost-cosymplectic-contact structures;
//! - **contravariant pairs** (E, Λ) — a vector field together with a
//!   bivector field: coPoisson, Jacobi and almost-coPoisson-Jacobi
//!   structures;
//! - the pointwise **duality** exchanging the two families;
//! - the associated **function algebras**: Poisson and Jacobi brackets,
//!   Hamiltonian lifts, jacobiator diagnostics;
//! - **Darboux normal forms** with closed-form bracket oracles;
//! - two relativistic **phase-space scenarios** (Galilei and Einstein) in
//!   which all of the above arise from a spacetime metric and a linear
//!   connection on a seven-dimensional phase chart.
//!
//! # How verification works
//!
//! Coefficients are exact symbolic expressions ([`expr::ScalarField`]) with
//! exact partial derivatives; *identities* between them are decided by
//! sampling: a seeded [`expr::Sampler`] draws points from a coordinate box
//! (optionally restricted by admissibility constraints) and a relative
//! residual
//!
//! ```text
//! max over samples of |lhs − rhs| / (1 + max(|lhs|, |rhs|))
//! ```
//!
//! is compared against a tolerance. There is no canonical simplifier and no
//! symbolic zero-test; every claim this crate makes is a reported residual.
//!
//! # Module map
//!
//! | module | contents |
//! |--------|----------|
//! | [`expr`] | charts, symbolic scalar fields, parser, differentiation, seeded samplers |
//! | [`exterior`] | k-forms, k-vectors, wedge, interior products, d, Lie derivative, musical maps, Schouten bracket, pointwise rank |
//! | [`structures`] | covariant/contravariant pairs, classification, duality in both directions, fundamental one-form |
//! | [`algebra`] | Poisson/Jacobi brackets, Hamiltonian lifts, jacobiator and homomorphism diagnostics |
//! | [`darboux`] | Darboux normal forms and closed-form bracket oracles |
//! | [`spacetime`] | Galilei and Einstein phase-space constructions and theorem verification |
//! | [`scenario`] | TOML scenario files describing any of the above |
//! | [`report`] | deterministic text/JSON reports |
//! | [`cli`] | the four CLI commands (`classify`, `dualize`, `bracket`, `scenario`) |
//!
//! # Conventions
//!
//! Sign and normalization conventions (interior-product argument order,
//! determinant pairing, Schouten normalization, connection sign) are fixed
//! once and documented in `docs/conventions.md`; the test suite pins each of
//! them with a calibration identity.
//!
//! # Example
//!
//! Classify the contact structure ω = dt − x²dx¹, Ω = dx¹∧dx² on the chart
//! (t, x¹, x²):
//!
//! ```
//! use oddform::expr::{Chart, Sampler};
//! use oddform::exterior::KForm;
//! use oddform::structures::{classify_covariant, CovariantPair, StructureKind};
//!
//! let chart = Chart::new(&["t", "x1", "x2"], &[]).unwrap();
//! let omega = KForm::parse(&chart, 1, &[("0", "1"), ("1", "-x2")]).unwrap();
//! let big_omega = KForm::parse(&chart, 2, &[("1 2", "1")]).unwrap();
//! let sampler = Sampler::builder(&chart).seed(42).count(16).build().unwrap();
//!
//! let pair = CovariantPair::new(omega, big_omega, &sampler, 1e-9).unwrap();
//! let report = classify_covariant(&pair, &sampler, 1e-9).unwrap();
//! assert!(report.has_label(StructureKind::Contact));
//! ```

// Indexed loops over tensor components (connection coefficients, metric
// blocks) deliberately mirror the index notation of the formulas they
// implement; iterator rewrites would obscure which index is which.
#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod cli;
pub mod darboux;
pub mod expr;
pub mod exterior;
pub mod report;
pub mod scenario;
pub mod spacetime;
pub mod structures;

/// Version string embedded in every report, for reproducibility.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
