//! Normal-form families on the distinguished chart (t, x¹, …, x²ⁿ).
//!
//! Every regular covariant structure can be written locally, in adapted
//! coordinates, as
//!
//! ```text
//! ω = dt + Σ_{i=1..n} (ωⁱ dxⁱ + ωⁿ⁺ⁱ dxⁿ⁺ⁱ),    Ω = Σ_{i=1..n} dxⁱ∧dxⁿ⁺ⁱ,
//! ```
//!
//! governed by 2n free coefficient functions ω¹, …, ω²ⁿ; the contravariant
//! families of half-rank s take the mirror normal form
//!
//! ```text
//! E = ∂_t,
//! Λ = Σ_{i=1..s} ∂ₓⁿ⁺ⁱ∧∂ₓⁱ − Σ_{i=1..s} (ωⁿ⁺ⁱ ∂_t∧∂ₓⁱ − ωⁱ ∂_t∧∂ₓⁿ⁺ⁱ)
//! ```
//!
//! with the same ω as compatible one-form. A [`DarbouxSpec`] holds one
//! choice of coefficient functions and produces all of these tensors;
//! distinguished choices ([`DarbouxSpec::cosymplectic`],
//! [`DarbouxSpec::contact`], [`DarbouxSpec::random`]) realize each
//! structure class.
//!
//! The module also ships closed-form expressions for the Schouten brackets
//! of the normal-form family ([`oracle_brackets`] and friends). They are
//! *transcribed term by term* from the hand-derived expansions in the
//! coefficient functions — deliberately not computed through the engine's
//! bracket code — so tests can confront the general Schouten implementation
//! with an independent source of truth on every family member.

use thiserror::Error;

use crate::expr::{Chart, ChartError, ScalarField};
use crate::exterior::{ExteriorError, KForm, KVector};
use crate::structures::{AcpjTriple, ContravariantPair, CovariantPair, StructureError};

/// Errors from assembling normal-form families.
#[derive(Debug, Error)]
pub enum DarbouxError {
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    /// n must be at least 1 (chart dimension 2n+1 ≥ 3).
    #[error("n must be at least 1")]
    ZeroN,
    /// The contravariant half-rank s must satisfy 1 ≤ s ≤ n.
    #[error("half-rank s = {s} out of range 1..={n}")]
    BadHalfRank { s: usize, n: usize },
    /// Exactly 2n coefficient functions are required.
    #[error("expected {expected} coefficient functions, got {got}")]
    WrongFunctionCount { expected: usize, got: usize },
    /// A coefficient function lives on a different chart.
    #[error("coefficient function {index} does not live on the family's chart")]
    ForeignFunction { index: usize },
    /// The chart does not have odd dimension 2n+1.
    #[error("chart dimension {dim} is not of the form 2n+1 with n ≥ 1")]
    BadChartDimension { dim: usize },
}

/// The chart (t, x1, …, x2n) that carries the normal forms.
pub fn darboux_chart(n: usize) -> Result<Chart, DarbouxError> {
    if n == 0 {
        return Err(DarbouxError::ZeroN);
    }
    let names: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=2 * n).map(|i| format!("x{i}")))
        .collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    Ok(Chart::new(&refs, &[])?)
}

/// One member of the normal-form family: a chart (t, x¹, …, x²ⁿ), a
/// contravariant half-rank s, and the 2n coefficient functions
/// ω¹, …, ω²ⁿ (stored in that order).
#[derive(Debug, Clone)]
pub struct DarbouxSpec {
    chart: Chart,
    n: usize,
    s: usize,
    omega_funcs: Vec<ScalarField>,
}

impl DarbouxSpec {
    /// Build a family member from explicit coefficient functions on a
    /// chart produced by [`darboux_chart`] (any chart of dimension 2n+1
    /// is accepted; index 0 plays the role of t).
    pub fn from_functions(
        chart: &Chart,
        s: usize,
        omega_funcs: Vec<ScalarField>,
    ) -> Result<Self, DarbouxError> {
        let dim = chart.dim();
        if dim < 3 || dim.is_multiple_of(2) {
            return Err(DarbouxError::BadChartDimension { dim });
        }
        let n = (dim - 1) / 2;
        if s == 0 || s > n {
            return Err(DarbouxError::BadHalfRank { s, n });
        }
        if omega_funcs.len() != 2 * n {
            return Err(DarbouxError::WrongFunctionCount {
                expected: 2 * n,
                got: omega_funcs.len(),
            });
        }
        for (index, f) in omega_funcs.iter().enumerate() {
            if f.chart() != chart {
                return Err(DarbouxError::ForeignFunction { index });
            }
        }
        Ok(DarbouxSpec {
            chart: chart.clone(),
            n,
            s,
            omega_funcs,
        })
    }

    /// The member with all coefficient functions zero: ω = dt,
    /// Ω = ΣdxⁱΛdxⁿ⁺ⁱ is the cosymplectic normal form, and the mirror
    /// (E, Λ) is the coPoisson normal form. Half-rank s = n.
    pub fn cosymplectic(n: usize) -> Result<Self, DarbouxError> {
        let chart = darboux_chart(n)?;
        let zero = ScalarField::zero(&chart);
        let funcs = vec![zero; 2 * n];
        DarbouxSpec::from_functions(&chart, n, funcs)
    }

    /// The member with ωⁱ = −xⁿ⁺ⁱ and ωⁿ⁺ⁱ = 0: ω = dt − Σxⁿ⁺ⁱdxⁱ is the
    /// contact normal form (Ω = dω), and the mirror (E, Λ) is the Jacobi
    /// normal form. Half-rank s = n.
    pub fn contact(n: usize) -> Result<Self, DarbouxError> {
        let chart = darboux_chart(n)?;
        let mut funcs = Vec::with_capacity(2 * n);
        for i in 1..=n {
            funcs.push(-&ScalarField::coord(&chart, n + i));
        }
        for _ in 1..=n {
            funcs.push(ScalarField::zero(&chart));
        }
        DarbouxSpec::from_functions(&chart, n, funcs)
    }

    /// A member with all 2n coefficient functions drawn as random
    /// polynomials (total degree ≤ 2, coefficients in [−1, 1]).
    pub fn random(n: usize, s: usize, rng: &mut impl rand::Rng) -> Result<Self, DarbouxError> {
        let chart = darboux_chart(n)?;
        let funcs: Vec<ScalarField> = (0..2 * n)
            .map(|_| crate::expr::random_polynomial(&chart, rng))
            .collect();
        DarbouxSpec::from_functions(&chart, s, funcs)
    }

    /// The chart (t, x¹, …, x²ⁿ).
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// n with chart dimension 2n+1.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Contravariant half-rank.
    pub fn s(&self) -> usize {
        self.s
    }

    /// Coefficient function ω^k, 1-based (k = 1..=2n).
    pub fn omega_func(&self, k: usize) -> &ScalarField {
        &self.omega_funcs[k - 1]
    }

    /// ω = dt + Σ_{i=1..n} (ωⁱ dxⁱ + ωⁿ⁺ⁱ dxⁿ⁺ⁱ).
    pub fn one_form(&self) -> KForm {
        let mut entries = vec![(vec![0usize], ScalarField::one(&self.chart))];
        for k in 1..=2 * self.n {
            let f = self.omega_func(k);
            if !f.is_literal_zero() {
                entries.push((vec![k], f.clone()));
            }
        }
        KForm::from_coeffs(&self.chart, 1, entries).expect("normal-form one-form is well-formed")
    }

    /// Ω = Σ_{i=1..n} dxⁱ∧dxⁿ⁺ⁱ.
    pub fn two_form(&self) -> KForm {
        let one = ScalarField::one(&self.chart);
        let entries: Vec<(Vec<usize>, ScalarField)> = (1..=self.n)
            .map(|i| (vec![i, self.n + i], one.clone()))
            .collect();
        KForm::from_coeffs(&self.chart, 2, entries).expect("normal-form two-form is well-formed")
    }

    /// E = ∂_t.
    pub fn vector_field(&self) -> KVector {
        KVector::basis(&self.chart, &[0]).expect("normal-form vector field is well-formed")
    }

    /// Λ = Σ_{i≤s} ∂ₓⁿ⁺ⁱ∧∂ₓⁱ − Σ_{i≤s} (ωⁿ⁺ⁱ ∂_t∧∂ₓⁱ − ωⁱ ∂_t∧∂ₓⁿ⁺ⁱ).
    pub fn bivector(&self) -> KVector {
        let n = self.n;
        let mut entries = Vec::new();
        for i in 1..=self.s {
            // ∂ₓⁿ⁺ⁱ∧∂ₓⁱ has sorted components (i, n+i) with coefficient −1.
            entries.push((vec![i, n + i], -&ScalarField::one(&self.chart)));
            let wi = self.omega_func(i);
            let wni = self.omega_func(n + i);
            if !wni.is_literal_zero() {
                entries.push((vec![0, i], -wni));
            }
            if !wi.is_literal_zero() {
                entries.push((vec![0, n + i], wi.clone()));
            }
        }
        KVector::from_coeffs(&self.chart, 2, entries)
            .expect("normal-form bivector is well-formed")
    }

    /// Validate (ω, Ω) as a covariant pair.
    pub fn covariant_pair(
        &self,
        samples: &crate::expr::Sampler,
        tol: f64,
    ) -> Result<CovariantPair, StructureError> {
        CovariantPair::new(self.one_form(), self.two_form(), samples, tol)
    }

    /// Validate (E, Λ) as a contravariant pair.
    pub fn contravariant_pair(
        &self,
        samples: &crate::expr::Sampler,
        tol: f64,
    ) -> Result<ContravariantPair, StructureError> {
        ContravariantPair::new(self.vector_field(), self.bivector(), samples, tol)
    }

    /// Validate (E, Λ, ω) as a compatible triple.
    pub fn triple(
        &self,
        samples: &crate::expr::Sampler,
        tol: f64,
    ) -> Result<AcpjTriple, StructureError> {
        AcpjTriple::new(
            self.vector_field(),
            self.bivector(),
            self.one_form(),
            samples,
            tol,
        )
    }
}

/// Shorthand for ∂/∂t f.
fn dt(f: &ScalarField) -> ScalarField {
    f.diff(0)
}

/// Closed-form Schouten brackets of the normal-form family:
/// returns ([E,Λ], [Λ,Λ]).
///
/// ```text
/// [E,Λ] = ∂_t ∧ Σ_{i≤s} (−∂_tωⁿ⁺ⁱ ∂ₓⁱ + ∂_tωⁱ ∂ₓⁿ⁺ⁱ)
/// [Λ,Λ] = 2 ∂_t ∧ Σ_{i,j≤s} (aᵢⱼ ∂ₓⁱ∧∂ₓʲ + bᵢⱼ ∂ₓⁱ∧∂ₓⁿ⁺ʲ + cᵢⱼ ∂ₓⁿ⁺ⁱ∧∂ₓⁿ⁺ʲ)
///   aᵢⱼ = ωⁿ⁺ʲ ∂_tωⁿ⁺ⁱ + ∂ωⁿ⁺ʲ/∂xⁿ⁺ⁱ
///   bᵢⱼ = ωⁿ⁺ⁱ ∂_tωʲ − ωʲ ∂_tωⁿ⁺ⁱ + ∂ωⁿ⁺ⁱ/∂xʲ − ∂ωʲ/∂xⁿ⁺ⁱ
///   cᵢⱼ = ωʲ ∂_tωⁱ + ∂ωʲ/∂xⁱ
/// ```
///
/// These expansions never touch the engine's bracket code, so comparing
/// them against [`crate::exterior::schouten`] exercises two independent
/// derivations of the same tensors.
pub fn oracle_brackets(spec: &DarbouxSpec) -> Result<(KVector, KVector), DarbouxError> {
    let chart = spec.chart();
    let n = spec.n();
    let s = spec.s();
    let e = spec.vector_field();

    let mut el = KVector::zero(chart, 2)?;
    for i in 1..=s {
        let wi = spec.omega_func(i);
        let wni = spec.omega_func(n + i);
        let mut inner = KVector::zero(chart, 1)?;
        inner = inner.sub(&KVector::basis(chart, &[i])?.scale_field(&dt(wni)));
        inner = inner.add(&KVector::basis(chart, &[n + i])?.scale_field(&dt(wi)));
        el = el.add(&e.wedge(&inner)?);
    }

    let mut inner2 = KVector::zero(chart, 2)?;
    for i in 1..=s {
        for j in 1..=s {
            let wi = spec.omega_func(i);
            let wj = spec.omega_func(j);
            let wni = spec.omega_func(n + i);
            let wnj = spec.omega_func(n + j);

            let a = &(wnj * &dt(wni)) + &wnj.diff(n + i);
            let b = &(&(wni * &dt(wj)) - &(wj * &dt(wni))) + &(&wni.diff(j) - &wj.diff(n + i));
            let c = &(wj * &dt(wi)) + &wj.diff(i);

            let xi = KVector::basis(chart, &[i])?;
            let xj = KVector::basis(chart, &[j])?;
            let yi = KVector::basis(chart, &[n + i])?;
            let yj = KVector::basis(chart, &[n + j])?;

            inner2 = inner2.add(&xi.wedge(&xj)?.scale_field(&a));
            inner2 = inner2.add(&xi.wedge(&yj)?.scale_field(&b));
            inner2 = inner2.add(&yi.wedge(&yj)?.scale_field(&c));
        }
    }
    let ll = e.wedge(&inner2)?.scale(2.0);
    Ok((el, ll))
}

/// Closed-form expansion of Λ♯(L_Eω) for the normal-form family:
///
/// ```text
/// Σ_{i≤s} ( ∂_tωⁿ⁺ⁱ ∂ₓⁱ − ∂_tωⁱ ∂ₓⁿ⁺ⁱ + (∂_tωⁱ·ωⁿ⁺ⁱ − ∂_tωⁿ⁺ⁱ·ωⁱ) ∂_t )
/// ```
pub fn oracle_sharp_of_lie_omega(spec: &DarbouxSpec) -> Result<KVector, DarbouxError> {
    let chart = spec.chart();
    let n = spec.n();
    let mut out = KVector::zero(chart, 1)?;
    for i in 1..=spec.s() {
        let wi = spec.omega_func(i);
        let wni = spec.omega_func(n + i);
        out = out.add(&KVector::basis(chart, &[i])?.scale_field(&dt(wni)));
        out = out.sub(&KVector::basis(chart, &[n + i])?.scale_field(&dt(wi)));
        let t_coeff = &(&dt(wi) * wni) - &(&dt(wni) * wi);
        out = out.add(&KVector::basis(chart, &[0])?.scale_field(&t_coeff));
    }
    Ok(out)
}

/// Closed-form expansion of the bivector (Λ♯⊗Λ♯)(dω) for the normal-form
/// family: five coefficient groups over i, j ≤ s,
///
/// ```text
/// Σ_j G¹ⱼ ∂_t∧∂ₓʲ + Σ_j G²ⱼ ∂_t∧∂ₓⁿ⁺ʲ
///   + Σ_{i,j} (aᵢⱼ ∂ₓⁱ∧∂ₓʲ + bᵢⱼ ∂ₓⁱ∧∂ₓⁿ⁺ʲ + cᵢⱼ ∂ₓⁿ⁺ⁱ∧∂ₓⁿ⁺ʲ)
/// ```
///
/// with a, b, c as in [`oracle_brackets`] and
///
/// ```text
/// G¹ⱼ = Σ_{i≤s} ( ωⁿ⁺ⁱωⁿ⁺ʲ∂_tωⁱ − ωⁱωⁿ⁺ʲ∂_tωⁿ⁺ⁱ − ωⁱ ∂ωⁿ⁺ʲ/∂xⁿ⁺ⁱ
///                + ωⁿ⁺ⁱ ∂ωⁿ⁺ʲ/∂xⁱ − ωⁿ⁺ⁱ ∂ωⁱ/∂xⁿ⁺ʲ + ωⁱ ∂ωⁿ⁺ⁱ/∂xⁿ⁺ʲ )
/// G²ⱼ = Σ_{i≤s} ( −ωⁿ⁺ⁱωʲ∂_tωⁱ + ωⁱωʲ∂_tωⁿ⁺ⁱ + ωⁿ⁺ⁱ ∂ωⁱ/∂xʲ
///                − ωⁿ⁺ⁱ ∂ωʲ/∂xⁱ − ωⁱ ∂ωⁿ⁺ⁱ/∂xʲ + ωⁱ ∂ωʲ/∂xⁿ⁺ⁱ )
/// ```
///
/// The i, j ≤ s groups reproduce the inner bivector of [Λ,Λ]/2 — visible
/// confirmation that the family satisfies [Λ,Λ] = 2E∧(Λ♯⊗Λ♯)(dω) up to
/// terms absorbed by the ∂_t wedge.
pub fn oracle_sharp_sharp_d_omega(spec: &DarbouxSpec) -> Result<KVector, DarbouxError> {
    let chart = spec.chart();
    let n = spec.n();
    let s = spec.s();
    let e = spec.vector_field();

    let mut out = KVector::zero(chart, 2)?;
    for j in 1..=s {
        let wj = spec.omega_func(j);
        let wnj = spec.omega_func(n + j);
        let mut g1 = ScalarField::zero(chart);
        let mut g2 = ScalarField::zero(chart);
        for i in 1..=s {
            let wi = spec.omega_func(i);
            let wni = spec.omega_func(n + i);
            g1 = &g1 + &(&(wni * wnj) * &dt(wi));
            g1 = &g1 - &(&(wi * wnj) * &dt(wni));
            g1 = &g1 - &(wi * &wnj.diff(n + i));
            g1 = &g1 + &(wni * &wnj.diff(i));
            g1 = &g1 - &(wni * &wi.diff(n + j));
            g1 = &g1 + &(wi * &wni.diff(n + j));

            g2 = &g2 - &(&(wni * wj) * &dt(wi));
            g2 = &g2 + &(&(wi * wj) * &dt(wni));
            g2 = &g2 + &(wni * &wi.diff(j));
            g2 = &g2 - &(wni * &wj.diff(i));
            g2 = &g2 - &(wi * &wni.diff(j));
            g2 = &g2 + &(wi * &wj.diff(n + i));
        }
        out = out.add(&e.wedge(&KVector::basis(chart, &[j])?)?.scale_field(&g1));
        out = out.add(&e.wedge(&KVector::basis(chart, &[n + j])?)?.scale_field(&g2));
    }
    for i in 1..=s {
        for j in 1..=s {
            let wi = spec.omega_func(i);
            let wj = spec.omega_func(j);
            let wni = spec.omega_func(n + i);
            let wnj = spec.omega_func(n + j);
            let a = &(wnj * &dt(wni)) + &wnj.diff(n + i);
            let b = &(&(wni * &dt(wj)) - &(wj * &dt(wni))) + &(&wni.diff(j) - &wj.diff(n + i));
            let c = &(wj * &dt(wi)) + &wj.diff(i);
            let xi = KVector::basis(chart, &[i])?;
            let xj = KVector::basis(chart, &[j])?;
            let yi = KVector::basis(chart, &[n + i])?;
            let yj = KVector::basis(chart, &[n + j])?;
            out = out.add(&xi.wedge(&xj)?.scale_field(&a));
            out = out.add(&xi.wedge(&yj)?.scale_field(&b));
            out = out.add(&yi.wedge(&yj)?.scale_field(&c));
        }
    }
    Ok(out)
}
