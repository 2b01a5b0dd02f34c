//! Antisymmetric tensor calculus on a chart.
//!
//! k-forms ([`KForm`]) and k-vectors ([`KVector`]) are stored sparsely: a
//! map from strictly increasing index tuples to symbolic coefficients, an
//! absent tuple meaning an identically-zero component. On top of that this
//! module implements the wedge product, interior products in both
//! directions, the exterior derivative, the Lie derivative, the musical
//! maps, the Schouten bracket on degrees ≤ 2, insertion of tangent-valued
//! one-forms, and pointwise rank.
//!
//! # Conventions (see also `docs/conventions.md`)
//!
//! - **Determinant pairing.** Basis pairing is `⟨dx^I, ∂_J⟩ = δ^I_J` on
//!   strictly increasing tuples, so `(β₁∧β₂)(X₁,X₂) = det[βₐ(X_b)]` with no
//!   1/k! factor anywhere.
//! - **Interior-product order.** For a decomposable k-vector,
//!   `i_{X₁∧…∧X_k}β = i_{X_k}∘…∘i_{X₁} β`, i.e. the *first* wedge factor is
//!   inserted into the *first* slot: `(i_Pβ)(Y…) = β(X₁,…,X_k,Y…)`.
//!   The dual insertion of forms into multivectors mirrors this.
//! - **Schouten normalization.** `schouten` is implemented by direct
//!   coordinate formulas; the overall signs are the unique ones satisfying
//!   the contraction identities
//!   `i_{[E,Λ]}β = i_E d i_Λ β − i_Λ d i_E β` (β a closed 2-form) and
//!   `i_{[Λ,Λ]}β = 2 i_Λ d i_Λ β` (β a closed 3-form),
//!   which the test suite pins numerically (conventions in the literature
//!   differ; the calibration test is the authority here).

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::expr::{
    parse_expr, Chart, EvalError, ParseError, Point, Sampler, ScalarField,
};

/// Errors from exterior-algebra operations.
#[derive(Debug, Error)]
pub enum ExteriorError {
    /// Requested degree outside `0..=dim`.
    #[error("degree {degree} out of range for a {dim}-dimensional chart")]
    DegreeOutOfRange { degree: usize, dim: usize },
    /// Wedge would exceed the chart dimension.
    #[error("wedge of degrees {p} and {q} exceeds chart dimension {dim}")]
    DegreeOverflow { p: usize, q: usize, dim: usize },
    /// Interior product needs the contracting degree ≤ the contracted one.
    #[error("cannot contract degree {k} into degree {r}")]
    ContractionDegree { k: usize, r: usize },
    /// An index tuple is not strictly increasing / in range / of the right length.
    #[error("invalid index tuple {tuple:?} for degree {degree} on a {dim}-dimensional chart")]
    BadIndexTuple {
        tuple: Vec<usize>,
        degree: usize,
        dim: usize,
    },
    /// Same index tuple given twice in a constructor.
    #[error("duplicate index tuple {0:?}")]
    DuplicateIndexTuple(Vec<usize>),
    /// The Schouten bracket is implemented for degrees (1,1), (1,2), (2,1), (2,2) only.
    #[error("Schouten bracket not implemented for degree pair ({p}, {q})")]
    UnsupportedDegreePair { p: usize, q: usize },
    /// Tangent-valued insertion is implemented for degrees 1 and 2 only.
    #[error("tangent-valued insertion not implemented for degree {0}")]
    UnsupportedInsertionDegree(usize),
    /// Expression parsing failed inside a constructor.
    #[error(transparent)]
    Parse(#[from] ParseError),
    /// A matrix of fields has the wrong shape.
    #[error("expected a {expected}×{expected} matrix of fields, got {rows} rows / row {row} has {cols} entries")]
    BadMatrixShape {
        expected: usize,
        rows: usize,
        row: usize,
        cols: usize,
    },
}

// ---------------------------------------------------------------------------
// Index tuples
// ---------------------------------------------------------------------------

fn validate_tuple(idx: &[usize], degree: usize, dim: usize) -> Result<(), ExteriorError> {
    let bad = || ExteriorError::BadIndexTuple {
        tuple: idx.to_vec(),
        degree,
        dim,
    };
    if idx.len() != degree {
        return Err(bad());
    }
    for w in idx.windows(2) {
        if w[0] >= w[1] {
            return Err(bad());
        }
    }
    if idx.iter().any(|&i| i >= dim) {
        return Err(bad());
    }
    Ok(())
}

/// Merge two strictly increasing tuples into one, returning the sign of the
/// permutation that sorts the concatenation `I ⧺ J`; `None` if they overlap.
fn merge_sign(i: &[usize], j: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut out = Vec::with_capacity(i.len() + j.len());
    let (mut a, mut b) = (0usize, 0usize);
    let mut sign = 1.0f64;
    while a < i.len() && b < j.len() {
        if i[a] < j[b] {
            out.push(i[a]);
            a += 1;
        } else if i[a] > j[b] {
            // j[b] jumps over the remaining elements of I.
            if (i.len() - a) % 2 == 1 {
                sign = -sign;
            }
            out.push(j[b]);
            b += 1;
        } else {
            return None;
        }
    }
    out.extend_from_slice(&i[a..]);
    out.extend_from_slice(&j[b..]);
    Some((out, sign))
}

/// Is `i` a subset of the strictly increasing tuple `l`? If so, return the
/// complement `l ∖ i`.
fn subset_complement(i: &[usize], l: &[usize]) -> Option<Vec<usize>> {
    let mut out = Vec::with_capacity(l.len() - i.len());
    let mut a = 0usize;
    for &x in l {
        if a < i.len() && i[a] == x {
            a += 1;
        } else {
            out.push(x);
        }
    }
    if a == i.len() {
        Some(out)
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Shared sparse antisymmetric tensor
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct Alt {
    chart: Chart,
    degree: usize,
    coeffs: BTreeMap<Vec<usize>, ScalarField>,
}

impl Alt {
    fn zero(chart: &Chart, degree: usize) -> Result<Self, ExteriorError> {
        if degree > chart.dim() {
            return Err(ExteriorError::DegreeOutOfRange {
                degree,
                dim: chart.dim(),
            });
        }
        Ok(Alt {
            chart: chart.clone(),
            degree,
            coeffs: BTreeMap::new(),
        })
    }

    fn add_term(&mut self, idx: Vec<usize>, f: ScalarField) {
        debug_assert!(validate_tuple(&idx, self.degree, self.chart.dim()).is_ok());
        if f.is_literal_zero() {
            return;
        }
        match self.coeffs.remove(&idx) {
            Some(old) => {
                let sum = &old + &f;
                if !sum.is_literal_zero() {
                    self.coeffs.insert(idx, sum);
                }
            }
            None => {
                self.coeffs.insert(idx, f);
            }
        }
    }

    fn prune(mut self) -> Self {
        self.coeffs.retain(|_, f| !f.is_literal_zero());
        self
    }

    /// Signed component with antisymmetric extension: indices in any order,
    /// repeated indices give the zero field.
    fn component(&self, indices: &[usize]) -> ScalarField {
        let mut sorted: Vec<usize> = indices.to_vec();
        // Sort while tracking the permutation sign (insertion sort; tuples are tiny).
        let mut sign = 1.0f64;
        for i in 1..sorted.len() {
            let mut j = i;
            while j > 0 && sorted[j - 1] > sorted[j] {
                sorted.swap(j - 1, j);
                sign = -sign;
                j -= 1;
            }
        }
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return ScalarField::zero(&self.chart);
        }
        match self.coeffs.get(&sorted) {
            Some(f) => f.scale(sign),
            None => ScalarField::zero(&self.chart),
        }
    }

    fn wedge(&self, other: &Alt) -> Result<Alt, ExteriorError> {
        assert_eq!(self.chart, other.chart, "chart mismatch in wedge");
        let degree = self.degree + other.degree;
        if degree > self.chart.dim() {
            return Err(ExteriorError::DegreeOverflow {
                p: self.degree,
                q: other.degree,
                dim: self.chart.dim(),
            });
        }
        let mut out = Alt::zero(&self.chart, degree)?;
        for (i, fa) in &self.coeffs {
            for (j, fb) in &other.coeffs {
                if let Some((k, sign)) = merge_sign(i, j) {
                    out.add_term(k, (fa * fb).scale(sign));
                }
            }
        }
        Ok(out.prune())
    }

    /// Contract `con` (degree k) into `self` (degree r ≥ k):
    /// `out_J = Σ_I con_I · sign(I,J) · self_{sorted(I∪J)}`.
    fn contract(&self, con: &Alt) -> Result<Alt, ExteriorError> {
        assert_eq!(self.chart, con.chart, "chart mismatch in contraction");
        if con.degree > self.degree {
            return Err(ExteriorError::ContractionDegree {
                k: con.degree,
                r: self.degree,
            });
        }
        let mut out = Alt::zero(&self.chart, self.degree - con.degree)?;
        for (l, fl) in &self.coeffs {
            for (i, fi) in &con.coeffs {
                if let Some(j) = subset_complement(i, l) {
                    let (_, sign) = merge_sign(i, &j).expect("disjoint by construction");
                    out.add_term(j, (fi * fl).scale(sign));
                }
            }
        }
        Ok(out.prune())
    }

    fn d(&self) -> Result<Alt, ExteriorError> {
        let dim = self.chart.dim();
        if self.degree + 1 > dim {
            return Err(ExteriorError::DegreeOverflow {
                p: self.degree,
                q: 1,
                dim,
            });
        }
        let mut out = Alt::zero(&self.chart, self.degree + 1)?;
        for (i, f) in &self.coeffs {
            for m in 0..dim {
                if i.contains(&m) {
                    continue;
                }
                let df = f.diff(m);
                if df.is_literal_zero() {
                    continue;
                }
                let (k, sign) = merge_sign(&[m], i).expect("m not in tuple");
                out.add_term(k, df.scale(sign));
            }
        }
        Ok(out.prune())
    }

    fn scale_field(&self, f: &ScalarField) -> Alt {
        let mut out = self.clone();
        out.coeffs = self
            .coeffs
            .iter()
            .map(|(k, c)| (k.clone(), c * f))
            .collect();
        out.prune()
    }

    fn scale(&self, k: f64) -> Alt {
        self.scale_field(&ScalarField::constant(&self.chart, k))
    }

    fn add(&self, other: &Alt) -> Alt {
        assert_eq!(self.chart, other.chart, "chart mismatch in add");
        assert_eq!(self.degree, other.degree, "degree mismatch in add");
        let mut out = self.clone();
        for (k, f) in &other.coeffs {
            out.add_term(k.clone(), f.clone());
        }
        out.prune()
    }

    fn residual(&self, other: &Alt, samples: &Sampler) -> Result<f64, EvalError> {
        assert_eq!(self.chart, other.chart, "chart mismatch in residual");
        assert_eq!(self.degree, other.degree, "degree mismatch in residual");
        let keys: std::collections::BTreeSet<&Vec<usize>> =
            self.coeffs.keys().chain(other.coeffs.keys()).collect();
        let mut residual = 0.0f64;
        for p in samples.points() {
            for k in &keys {
                let a = match self.coeffs.get(*k) {
                    Some(f) => f.eval(p)?,
                    None => 0.0,
                };
                let b = match other.coeffs.get(*k) {
                    Some(f) => f.eval(p)?,
                    None => 0.0,
                };
                let r = (a - b).abs() / (1.0 + a.abs().max(b.abs()));
                residual = residual.max(r);
            }
        }
        Ok(residual)
    }

    /// Smallest over samples of the largest coefficient magnitude: a
    /// pointwise nonvanishing witness (a tensor is "nonvanishing at all
    /// samples" when this is bounded away from zero).
    fn min_magnitude(&self, samples: &Sampler) -> Result<f64, EvalError> {
        let mut min = f64::INFINITY;
        for p in samples.points() {
            let mut largest = 0.0f64;
            for f in self.coeffs.values() {
                largest = largest.max(f.eval(p)?.abs());
            }
            min = min.min(largest);
        }
        Ok(min)
    }

    /// Antisymmetric coefficient matrix at a point (degree-2 only).
    fn matrix_at(&self, p: &Point) -> Result<DMatrix<f64>, EvalError> {
        debug_assert_eq!(self.degree, 2);
        let dim = self.chart.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (idx, f) in &self.coeffs {
            let v = f.eval(p)?;
            m[(idx[0], idx[1])] = v;
            m[(idx[1], idx[0])] = -v;
        }
        Ok(m)
    }

    fn rank_at(&self, p: &Point) -> Result<usize, EvalError> {
        let m = self.matrix_at(p)?;
        let svs = m.singular_values();
        let largest = svs.iter().cloned().fold(0.0f64, f64::max);
        let threshold = 1e-8 * largest.max(1.0);
        Ok(svs.iter().filter(|&&s| s > threshold).count())
    }
}

// ---------------------------------------------------------------------------
// KForm / KVector
// ---------------------------------------------------------------------------

macro_rules! shared_impl {
    ($T:ident, $basis_prefix:literal) => {
        impl $T {
            /// The zero tensor of the given degree.
            pub fn zero(chart: &Chart, degree: usize) -> Result<Self, ExteriorError> {
                Alt::zero(chart, degree).map($T)
            }

            /// Degree-0 tensor wrapping a scalar field.
            pub fn from_scalar(f: ScalarField) -> Self {
                let mut alt = Alt::zero(f.chart(), 0).expect("degree 0 always valid");
                alt.add_term(Vec::new(), f);
                $T(alt)
            }

            /// Build from explicit `(strictly increasing tuple, coefficient)`
            /// pairs; rejects malformed or duplicate tuples.
            pub fn from_coeffs(
                chart: &Chart,
                degree: usize,
                entries: Vec<(Vec<usize>, ScalarField)>,
            ) -> Result<Self, ExteriorError> {
                let mut alt = Alt::zero(chart, degree)?;
                for (idx, f) in entries {
                    validate_tuple(&idx, degree, chart.dim())?;
                    if alt.coeffs.contains_key(&idx) {
                        return Err(ExteriorError::DuplicateIndexTuple(idx));
                    }
                    alt.add_term(idx, f);
                }
                Ok($T(alt.prune()))
            }

            /// Build from `(index list, expression)` strings, e.g.
            /// `("0 2", "t*x1")` for the coefficient of the tuple (0, 2).
            /// For degree 0 use the empty index string.
            pub fn parse(
                chart: &Chart,
                degree: usize,
                entries: &[(&str, &str)],
            ) -> Result<Self, ExteriorError> {
                let mut parsed = Vec::with_capacity(entries.len());
                for (idx_text, expr_text) in entries {
                    let idx: Vec<usize> = idx_text
                        .split_whitespace()
                        .map(|t| {
                            t.parse::<usize>().map_err(|_| ExteriorError::BadIndexTuple {
                                tuple: Vec::new(),
                                degree,
                                dim: chart.dim(),
                            })
                        })
                        .collect::<Result<_, _>>()?;
                    let f = parse_expr(expr_text, chart)?;
                    parsed.push((idx, f));
                }
                Self::from_coeffs(chart, degree, parsed)
            }

            /// Single basis tensor with coefficient 1 on `idx`.
            pub fn basis(chart: &Chart, idx: &[usize]) -> Result<Self, ExteriorError> {
                Self::from_coeffs(
                    chart,
                    idx.len(),
                    vec![(idx.to_vec(), ScalarField::one(chart))],
                )
            }

            /// The chart this tensor lives on.
            pub fn chart(&self) -> &Chart {
                &self.0.chart
            }

            /// Antisymmetry degree.
            pub fn degree(&self) -> usize {
                self.0.degree
            }

            /// Stored (strictly increasing tuple, coefficient) pairs.
            pub fn coeffs(&self) -> impl Iterator<Item = (&[usize], &ScalarField)> {
                self.0.coeffs.iter().map(|(k, v)| (k.as_slice(), v))
            }

            /// Coefficient of a strictly increasing tuple (zero if absent).
            pub fn coeff(&self, idx: &[usize]) -> ScalarField {
                match self.0.coeffs.get(idx) {
                    Some(f) => f.clone(),
                    None => ScalarField::zero(&self.0.chart),
                }
            }

            /// Signed component with antisymmetric extension (indices in any
            /// order; repeated indices give zero).
            pub fn component(&self, indices: &[usize]) -> ScalarField {
                self.0.component(indices)
            }

            /// True when no coefficients are stored (syntactic zero).
            pub fn is_empty(&self) -> bool {
                self.0.coeffs.is_empty()
            }

            /// The scalar behind a degree-0 tensor.
            ///
            /// # Panics
            /// If the degree is not 0.
            pub fn as_scalar(&self) -> ScalarField {
                assert_eq!(self.0.degree, 0, "as_scalar on degree > 0");
                self.coeff(&[])
            }

            /// Wedge product.
            pub fn wedge(&self, other: &Self) -> Result<Self, ExteriorError> {
                self.0.wedge(&other.0).map($T)
            }

            /// Repeated wedge power (`k = 0` gives the constant 1 of degree 0).
            pub fn wedge_pow(&self, k: usize) -> Result<Self, ExteriorError> {
                let mut acc = Self::from_scalar(ScalarField::one(&self.0.chart));
                for _ in 0..k {
                    acc = acc.wedge(self)?;
                }
                Ok(acc)
            }

            /// Coefficient-wise sum.
            pub fn add(&self, other: &Self) -> Self {
                $T(self.0.add(&other.0))
            }

            /// Coefficient-wise difference.
            pub fn sub(&self, other: &Self) -> Self {
                self.add(&other.neg())
            }

            /// Coefficient-wise negation.
            pub fn neg(&self) -> Self {
                $T(self.0.scale(-1.0))
            }

            /// Multiply every coefficient by a number.
            pub fn scale(&self, k: f64) -> Self {
                $T(self.0.scale(k))
            }

            /// Multiply every coefficient by a scalar field.
            pub fn scale_field(&self, f: &ScalarField) -> Self {
                $T(self.0.scale_field(f))
            }

            /// Largest relative pointwise deviation from `other` over the samples.
            pub fn residual(&self, other: &Self, samples: &Sampler) -> Result<f64, EvalError> {
                self.0.residual(&other.0, samples)
            }

            /// Largest relative pointwise deviation from zero over the samples.
            pub fn residual_zero(&self, samples: &Sampler) -> Result<f64, EvalError> {
                let zero = Alt::zero(&self.0.chart, self.0.degree).expect("degree valid");
                self.0.residual(&zero, samples)
            }

            /// Smallest over samples of the largest coefficient magnitude
            /// (pointwise nonvanishing witness).
            pub fn min_magnitude(&self, samples: &Sampler) -> Result<f64, EvalError> {
                self.0.min_magnitude(samples)
            }

            /// Rank of the antisymmetric coefficient matrix at a point
            /// (degree-2 tensors; singular values below `1e−8 · max(σ_max, 1)`
            /// count as zero).
            ///
            /// # Panics
            /// If the degree is not 2.
            pub fn rank_at(&self, p: &Point) -> Result<usize, EvalError> {
                assert_eq!(self.0.degree, 2, "rank is defined for degree-2 tensors");
                self.0.rank_at(p)
            }

            /// Rank over all samples plus whether it was the same everywhere.
            pub fn constant_rank(&self, samples: &Sampler) -> Result<(usize, bool), EvalError> {
                let mut rank = 0usize;
                let mut constant = true;
                for (i, p) in samples.points().iter().enumerate() {
                    let r = self.rank_at(p)?;
                    if i == 0 {
                        rank = r;
                    } else if r != rank {
                        constant = false;
                        rank = rank.max(r);
                    }
                }
                Ok((rank, constant))
            }

            /// Antisymmetric coefficient matrix at a point (degree-2).
            pub fn matrix_at(&self, p: &Point) -> Result<DMatrix<f64>, EvalError> {
                assert_eq!(self.0.degree, 2, "matrix_at is defined for degree-2 tensors");
                self.0.matrix_at(p)
            }

            /// Component vector at a point (degree-1).
            pub fn vector_at(&self, p: &Point) -> Result<nalgebra::DVector<f64>, EvalError> {
                assert_eq!(self.0.degree, 1, "vector_at is defined for degree-1 tensors");
                let dim = self.0.chart.dim();
                let mut v = nalgebra::DVector::zeros(dim);
                for (idx, f) in &self.0.coeffs {
                    v[idx[0]] = f.eval(p)?;
                }
                Ok(v)
            }
        }

        impl fmt::Display for $T {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                if self.0.coeffs.is_empty() {
                    return write!(f, "0");
                }
                for (n, (idx, c)) in self.0.coeffs.iter().enumerate() {
                    if n > 0 {
                        write!(f, " + ")?;
                    }
                    if idx.is_empty() {
                        write!(f, "{c}")?;
                        continue;
                    }
                    write!(f, "({c}) ")?;
                    for (m, i) in idx.iter().enumerate() {
                        if m > 0 {
                            write!(f, "^")?;
                        }
                        write!(f, "{}{}", $basis_prefix, self.0.chart.coord_name(*i))?;
                    }
                }
                Ok(())
            }
        }
    };
}

/// A differential k-form with symbolic coefficients.
#[derive(Debug, Clone)]
pub struct KForm(Alt);

/// A k-vector field (antisymmetric contravariant tensor) with symbolic
/// coefficients.
#[derive(Debug, Clone)]
pub struct KVector(Alt);

shared_impl!(KForm, "d:");
shared_impl!(KVector, "@:");

impl KForm {
    /// Exterior derivative.
    pub fn d(&self) -> Result<KForm, ExteriorError> {
        self.0.d().map(KForm)
    }

    /// Interior product of a multivector into this form:
    /// `P.hook` inserts the factors of `P` into the *leading* slots,
    /// `(i_Pβ)(Y…) = β(X₁,…,X_k,Y…)`.
    pub fn hook(&self, p: &KVector) -> Result<KForm, ExteriorError> {
        self.0.contract(&p.0).map(KForm)
    }
}

impl KVector {
    /// Dual interior product of a form into this multivector.
    pub fn hook(&self, alpha: &KForm) -> Result<KVector, ExteriorError> {
        self.0.contract(&alpha.0).map(KVector)
    }
}

/// Cartan's formula: `L_X β = i_X dβ + d i_X β`.
pub fn lie_derivative(x: &KVector, beta: &KForm) -> Result<KForm, ExteriorError> {
    assert_eq!(x.degree(), 1, "Lie derivative along a vector field");
    let a = beta.d()?.hook(x)?;
    let b = beta.hook(x)?.d()?;
    Ok(a.add(&b))
}

/// Musical sharp: `Λ♯(α) = i_αΛ`, i.e. `(α♯)^j = Σ_i α_i Λ^{ij}`.
pub fn sharp(lambda: &KVector, alpha: &KForm) -> Result<KVector, ExteriorError> {
    assert_eq!(lambda.degree(), 2, "sharp expects a bivector");
    assert_eq!(alpha.degree(), 1, "sharp expects a one-form");
    lambda.hook(alpha)
}

/// Musical flat: `Ω♭(X) = i_XΩ`, i.e. `(X♭)_j = Σ_i X^i Ω_{ij}`.
pub fn flat(omega2: &KForm, x: &KVector) -> Result<KForm, ExteriorError> {
    assert_eq!(omega2.degree(), 2, "flat expects a two-form");
    assert_eq!(x.degree(), 1, "flat expects a vector field");
    omega2.hook(x)
}

/// Pairing of a one-form with a vector field: `⟨α, X⟩ = Σ_i α_i X^i`.
pub fn pair(alpha: &KForm, x: &KVector) -> ScalarField {
    assert_eq!(alpha.degree(), 1, "pair expects a one-form");
    assert_eq!(x.degree(), 1, "pair expects a vector field");
    alpha
        .hook(x)
        .expect("degree 1 into degree 1 cannot fail")
        .as_scalar()
}

// ---------------------------------------------------------------------------
// Schouten bracket
// ---------------------------------------------------------------------------

/// Per-coordinate partial derivatives of every stored coefficient,
/// precomputed once per bracket evaluation.
struct PartialTable {
    parts: BTreeMap<Vec<usize>, Vec<ScalarField>>,
}

impl PartialTable {
    fn new(t: &Alt) -> Self {
        let dim = t.chart.dim();
        let parts = t
            .coeffs
            .iter()
            .map(|(k, f)| (k.clone(), (0..dim).map(|m| f.diff(m)).collect()))
            .collect();
        PartialTable { parts }
    }
}

/// Signed degree-2 component accessor backed by a partial-derivative table.
struct Deg2<'a> {
    t: &'a Alt,
    table: PartialTable,
}

impl<'a> Deg2<'a> {
    fn new(t: &'a Alt) -> Self {
        Deg2 {
            t,
            table: PartialTable::new(t),
        }
    }

    /// `T^{ab}` with antisymmetric extension; `None` when zero.
    fn comp(&self, a: usize, b: usize) -> Option<(f64, &ScalarField)> {
        if a == b {
            return None;
        }
        let (key, sign) = if a < b {
            (vec![a, b], 1.0)
        } else {
            (vec![b, a], -1.0)
        };
        self.t.coeffs.get(&key).map(|f| (sign, f))
    }

    /// `∂_l T^{ab}` with antisymmetric extension; `None` when zero.
    fn dcomp(&self, l: usize, a: usize, b: usize) -> Option<(f64, &ScalarField)> {
        if a == b {
            return None;
        }
        let (key, sign) = if a < b {
            (vec![a, b], 1.0)
        } else {
            (vec![b, a], -1.0)
        };
        let parts = self.table.parts.get(&key)?;
        let df = &parts[l];
        if df.is_literal_zero() {
            None
        } else {
            Some((sign, df))
        }
    }
}

/// Signed degree-1 component accessor backed by a partial-derivative table.
struct Deg1<'a> {
    t: &'a Alt,
    table: PartialTable,
}

impl<'a> Deg1<'a> {
    fn new(t: &'a Alt) -> Self {
        Deg1 {
            t,
            table: PartialTable::new(t),
        }
    }

    fn comp(&self, a: usize) -> Option<&ScalarField> {
        self.t.coeffs.get(&vec![a])
    }

    fn dcomp(&self, l: usize, a: usize) -> Option<&ScalarField> {
        let parts = self.table.parts.get(&vec![a])?;
        let df = &parts[l];
        if df.is_literal_zero() {
            None
        } else {
            Some(df)
        }
    }
}

fn acc(terms: &mut Vec<ScalarField>, sign: f64, a: (f64, &ScalarField), b: (f64, &ScalarField)) {
    let s = sign * a.0 * b.0;
    terms.push((a.1 * b.1).scale(s));
}

fn sum_terms(chart: &Chart, terms: Vec<ScalarField>) -> ScalarField {
    let mut acc = ScalarField::zero(chart);
    for t in terms {
        acc = &acc + &t;
    }
    acc
}

/// Schouten bracket on the degree pairs (1,1), (1,2), (2,1) and (2,2).
///
/// Coordinate formulas (all sums over `l`, components antisymmetrically
/// extended):
///
/// - `[X,Y]^j    = X^l ∂_l Y^j − Y^l ∂_l X^j` — the Lie bracket;
/// - `[E,Λ]^{ij} = E^l ∂_l Λ^{ij} − Λ^{lj} ∂_l E^i − Λ^{il} ∂_l E^j` — the
///   Lie derivative of the bivector, with `[Λ,E] = [E,Λ]`;
/// - `[P,Q]^{ijk} = Σ_l ( P^{lk}∂_lQ^{ij} + P^{li}∂_lQ^{jk} + P^{lj}∂_lQ^{ki}
///   + (P ↔ Q) )`, so `[Λ,Λ]^{ijk} = 2 Σ_l (Λ^{lk}∂_lΛ^{ij} + Λ^{li}∂_lΛ^{jk}
///   + Λ^{lj}∂_lΛ^{ki})`.
///
/// The normalization and signs are pinned by the contraction identities in
/// the module docs; the calibration tests verify them numerically.
pub fn schouten(p: &KVector, q: &KVector) -> Result<KVector, ExteriorError> {
    assert_eq!(p.chart(), q.chart(), "chart mismatch in schouten");
    let chart = p.chart().clone();
    let dim = chart.dim();
    match (p.degree(), q.degree()) {
        (1, 1) => {
            let x = Deg1::new(&p.0);
            let y = Deg1::new(&q.0);
            let mut out = Alt::zero(&chart, 1)?;
            for j in 0..dim {
                let mut terms = Vec::new();
                for l in 0..dim {
                    if let (Some(xl), Some(dyj)) = (x.comp(l), y.dcomp(l, j)) {
                        terms.push(xl * dyj);
                    }
                    if let (Some(yl), Some(dxj)) = (y.comp(l), x.dcomp(l, j)) {
                        terms.push((yl * dxj).scale(-1.0));
                    }
                }
                out.add_term(vec![j], sum_terms(&chart, terms));
            }
            Ok(KVector(out.prune()))
        }
        (1, 2) | (2, 1) => {
            let (e_alt, l_alt) = if p.degree() == 1 { (&p.0, &q.0) } else { (&q.0, &p.0) };
            let e = Deg1::new(e_alt);
            let lam = Deg2::new(l_alt);
            let mut out = Alt::zero(&chart, 2)?;
            for i in 0..dim {
                for j in (i + 1)..dim {
                    let mut terms = Vec::new();
                    for l in 0..dim {
                        if let (Some(el), Some(dl)) = (e.comp(l), lam.dcomp(l, i, j)) {
                            acc(&mut terms, 1.0, (1.0, el), dl);
                        }
                        if let (Some(llj), Some(dei)) = (lam.comp(l, j), e.dcomp(l, i)) {
                            acc(&mut terms, -1.0, llj, (1.0, dei));
                        }
                        if let (Some(lil), Some(dej)) = (lam.comp(i, l), e.dcomp(l, j)) {
                            acc(&mut terms, -1.0, lil, (1.0, dej));
                        }
                    }
                    out.add_term(vec![i, j], sum_terms(&chart, terms));
                }
            }
            Ok(KVector(out.prune()))
        }
        (2, 2) => {
            let a = Deg2::new(&p.0);
            let b = Deg2::new(&q.0);
            let mut out = Alt::zero(&chart, 3)?;
            for i in 0..dim {
                for j in (i + 1)..dim {
                    for k in (j + 1)..dim {
                        let mut terms = Vec::new();
                        for l in 0..dim {
                            for (u, v) in [(&a, &b), (&b, &a)] {
                                if let (Some(c), Some(dc)) = (u.comp(l, k), v.dcomp(l, i, j)) {
                                    acc(&mut terms, 1.0, c, dc);
                                }
                                if let (Some(c), Some(dc)) = (u.comp(l, i), v.dcomp(l, j, k)) {
                                    acc(&mut terms, 1.0, c, dc);
                                }
                                if let (Some(c), Some(dc)) = (u.comp(l, j), v.dcomp(l, k, i)) {
                                    acc(&mut terms, 1.0, c, dc);
                                }
                            }
                        }
                        out.add_term(vec![i, j, k], sum_terms(&chart, terms));
                    }
                }
            }
            Ok(KVector(out.prune()))
        }
        (p_deg, q_deg) => Err(ExteriorError::UnsupportedDegreePair { p: p_deg, q: q_deg }),
    }
}

// ---------------------------------------------------------------------------
// Tangent-valued one-forms
// ---------------------------------------------------------------------------

/// A tangent-valued one-form `A`, stored as the matrix `A^ν_λ` with
/// `A(∂_λ) = Σ_ν A^ν_λ ∂_ν`.
#[derive(Debug, Clone)]
pub struct TangentValuedOneForm {
    chart: Chart,
    /// `rows[ν][λ] = A^ν_λ`.
    rows: Vec<Vec<ScalarField>>,
}

impl TangentValuedOneForm {
    /// Build from the full matrix `rows[ν][λ] = A^ν_λ`.
    pub fn from_matrix(
        chart: &Chart,
        rows: Vec<Vec<ScalarField>>,
    ) -> Result<Self, ExteriorError> {
        let dim = chart.dim();
        if rows.len() != dim {
            return Err(ExteriorError::BadMatrixShape {
                expected: dim,
                rows: rows.len(),
                row: 0,
                cols: 0,
            });
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(ExteriorError::BadMatrixShape {
                    expected: dim,
                    rows: rows.len(),
                    row: r,
                    cols: row.len(),
                });
            }
        }
        Ok(TangentValuedOneForm {
            chart: chart.clone(),
            rows,
        })
    }

    /// The identity tangent-valued one-form.
    pub fn identity(chart: &Chart) -> Self {
        let dim = chart.dim();
        let rows = (0..dim)
            .map(|nu| {
                (0..dim)
                    .map(|la| {
                        if nu == la {
                            ScalarField::one(chart)
                        } else {
                            ScalarField::zero(chart)
                        }
                    })
                    .collect()
            })
            .collect();
        TangentValuedOneForm {
            chart: chart.clone(),
            rows,
        }
    }

    /// The zero tangent-valued one-form.
    pub fn zero(chart: &Chart) -> Self {
        let dim = chart.dim();
        let rows = vec![vec![ScalarField::zero(chart); dim]; dim];
        TangentValuedOneForm {
            chart: chart.clone(),
            rows,
        }
    }

    /// The chart.
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// `A^ν_λ`.
    pub fn entry(&self, nu: usize, lambda: usize) -> &ScalarField {
        &self.rows[nu][lambda]
    }

    /// Apply to a vector field: `(A X)^ν = Σ_λ A^ν_λ X^λ`.
    pub fn apply(&self, x: &KVector) -> KVector {
        assert_eq!(x.degree(), 1, "tangent-valued forms act on vector fields");
        let dim = self.chart.dim();
        let mut out = Alt::zero(&self.chart, 1).expect("degree 1 valid");
        for nu in 0..dim {
            let mut terms = Vec::new();
            for (idx, xl) in x.coeffs() {
                let la = idx[0];
                terms.push(&self.rows[nu][la] * xl);
            }
            out.add_term(vec![nu], sum_terms(&self.chart, terms));
        }
        KVector(out.prune())
    }

    /// Matrix composition `(A ∘ B)^ν_λ = Σ_μ A^ν_μ B^μ_λ`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.chart, other.chart, "chart mismatch in compose");
        let dim = self.chart.dim();
        let rows = (0..dim)
            .map(|nu| {
                (0..dim)
                    .map(|la| {
                        let mut acc = ScalarField::zero(&self.chart);
                        for mu in 0..dim {
                            acc = &acc + &(&self.rows[nu][mu] * &other.rows[mu][la]);
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        TangentValuedOneForm {
            chart: self.chart.clone(),
            rows,
        }
    }

    /// Entry-wise difference (for operator-identity residuals).
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.chart, other.chart, "chart mismatch in sub");
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(r, s)| r.iter().zip(s).map(|(a, b)| a - b).collect())
            .collect();
        TangentValuedOneForm {
            chart: self.chart.clone(),
            rows,
        }
    }

    /// Largest relative entry magnitude over the samples.
    pub fn residual_zero(&self, samples: &Sampler) -> Result<f64, EvalError> {
        let mut residual = 0.0f64;
        for p in samples.points() {
            for row in &self.rows {
                for f in row {
                    let v = f.eval(p)?;
                    residual = residual.max(v.abs() / (1.0 + v.abs()));
                }
            }
        }
        Ok(residual)
    }
}

/// Insertion of a tangent-valued one-form into a k-form (degrees 1 and 2):
/// `(i_Aβ)(X₁,…,X_k) = Σ_i β(X₁,…,A(X_i),…,X_k)`, i.e.
/// `(i_Aβ)_λ = Σ_ν A^ν_λ β_ν` and
/// `(i_Aβ)_{λμ} = Σ_ν (A^ν_λ β_{νμ} + A^ν_μ β_{λν})`.
pub fn insert_tv(a: &TangentValuedOneForm, beta: &KForm) -> Result<KForm, ExteriorError> {
    assert_eq!(a.chart(), beta.chart(), "chart mismatch in insert_tv");
    let chart = a.chart().clone();
    let dim = chart.dim();
    match beta.degree() {
        1 => {
            let mut out = Alt::zero(&chart, 1)?;
            for la in 0..dim {
                let mut terms = Vec::new();
                for (idx, bnu) in beta.coeffs() {
                    let nu = idx[0];
                    terms.push(a.entry(nu, la) * bnu);
                }
                out.add_term(vec![la], sum_terms(&chart, terms));
            }
            Ok(KForm(out.prune()))
        }
        2 => {
            let mut out = Alt::zero(&chart, 2)?;
            for la in 0..dim {
                for mu in (la + 1)..dim {
                    let mut terms = Vec::new();
                    for nu in 0..dim {
                        let b1 = beta.component(&[nu, mu]);
                        if !b1.is_literal_zero() {
                            terms.push(a.entry(nu, la) * &b1);
                        }
                        let b2 = beta.component(&[la, nu]);
                        if !b2.is_literal_zero() {
                            terms.push(a.entry(nu, mu) * &b2);
                        }
                    }
                    out.add_term(vec![la, mu], sum_terms(&chart, terms));
                }
            }
            Ok(KForm(out.prune()))
        }
        k => Err(ExteriorError::UnsupportedInsertionDegree(k)),
    }
}

/// Lie derivative of a one-form along a tangent-valued one-form:
/// `L_A τ = i_A(dτ) − d(i_A τ)`.
pub fn lie_tv(a: &TangentValuedOneForm, tau: &KForm) -> Result<KForm, ExteriorError> {
    assert_eq!(tau.degree(), 1, "lie_tv expects a one-form");
    let first = insert_tv(a, &tau.d()?)?;
    let second = insert_tv(a, tau)?.d()?;
    Ok(first.sub(&second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Sampler;

    fn chart3() -> Chart {
        Chart::new(&["t", "x1", "x2"], &[]).unwrap()
    }

    fn sampler(chart: &Chart) -> Sampler {
        Sampler::builder(chart).count(8).build().unwrap()
    }

    #[test]
    fn wedge_of_basis_one_forms() {
        let ch = chart3();
        let dx1 = KForm::basis(&ch, &[1]).unwrap();
        let dx2 = KForm::basis(&ch, &[2]).unwrap();
        let w = dx1.wedge(&dx2).unwrap();
        let p = ch.point(&[0.0; 3]).unwrap();
        assert_eq!(w.coeff(&[1, 2]).eval(&p).unwrap(), 1.0);
        // Antisymmetry: dx2 ∧ dx1 = −dx1 ∧ dx2.
        let w2 = dx2.wedge(&dx1).unwrap();
        assert_eq!(w2.coeff(&[1, 2]).eval(&p).unwrap(), -1.0);
    }

    #[test]
    fn wedge_with_self_vanishes() {
        // Coefficients cancel numerically, not syntactically: the engine does
        // no symbolic simplification beyond constant folding.
        let ch = chart3();
        let s = sampler(&ch);
        let omega = KForm::parse(&ch, 1, &[("0", "1"), ("1", "-x2")]).unwrap();
        let w = omega.wedge(&omega).unwrap();
        assert!(w.residual_zero(&s).unwrap() <= 1e-12);
    }

    #[test]
    fn wedge_contact_form() {
        // (dt − x2·dx1) ∧ (dx1∧dx2) = dt∧dx1∧dx2.
        let ch = chart3();
        let omega = KForm::parse(&ch, 1, &[("0", "1"), ("1", "-x2")]).unwrap();
        let vol2 = KForm::basis(&ch, &[1, 2]).unwrap();
        let w = omega.wedge(&vol2).unwrap();
        let p = ch.point(&[0.3, 0.7, -0.2]).unwrap();
        assert_eq!(w.coeff(&[0, 1, 2]).eval(&p).unwrap(), 1.0);
        assert_eq!(w.coeffs().count(), 1);
    }

    #[test]
    fn interior_product_basis_contractions() {
        let ch = chart3();
        let dt_dx1 = KForm::basis(&ch, &[0, 1]).unwrap();
        let e_t = KVector::basis(&ch, &[0]).unwrap();
        let res = dt_dx1.hook(&e_t).unwrap();
        let p = ch.point(&[0.0; 3]).unwrap();
        assert_eq!(res.coeff(&[1]).eval(&p).unwrap(), 1.0);

        // i_{∂_t∧∂_{x1}}(dt∧dx1) = (dt∧dx1)(∂_t, ∂_{x1}) = 1.
        let bi = KVector::basis(&ch, &[0, 1]).unwrap();
        let full = dt_dx1.hook(&bi).unwrap();
        assert_eq!(full.as_scalar().eval(&p).unwrap(), 1.0);

        // i_{∂_{x1}}(dt) = 0.
        let dt = KForm::basis(&ch, &[0]).unwrap();
        let e_x1 = KVector::basis(&ch, &[1]).unwrap();
        assert!(dt.hook(&e_x1).unwrap().is_empty());
    }

    #[test]
    fn interior_order_convention() {
        // For P = X∧Y, i_Pβ = β(X, Y): first factor in first slot.
        let ch = chart3();
        let beta = KForm::parse(&ch, 2, &[("0 1", "t"), ("0 2", "x1"), ("1 2", "x2")]).unwrap();
        let x = KVector::parse(&ch, 1, &[("0", "2"), ("1", "1")]).unwrap();
        let y = KVector::parse(&ch, 1, &[("1", "3"), ("2", "-1")]).unwrap();
        let p = ch.point(&[0.4, -0.3, 0.8]).unwrap();

        // β(X,Y) by explicit double contraction Σ β_{ab} X^a Y^b.
        let mut direct = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let bab = beta.component(&[a, b]).eval(&p).unwrap();
                let xa = x.component(&[a]).eval(&p).unwrap();
                let yb = y.component(&[b]).eval(&p).unwrap();
                direct += bab * xa * yb;
            }
        }
        let pvec = x.wedge(&y).unwrap();
        let via_hook = beta.hook(&pvec).unwrap().as_scalar().eval(&p).unwrap();
        assert!((direct - via_hook).abs() < 1e-12);
    }

    #[test]
    fn dual_interior_mirrors() {
        let ch = chart3();
        let dt = KForm::basis(&ch, &[0]).unwrap();
        let bi = KVector::basis(&ch, &[0, 1]).unwrap();
        let res = bi.hook(&dt).unwrap();
        let p = ch.point(&[0.0; 3]).unwrap();
        assert_eq!(res.coeff(&[1]).eval(&p).unwrap(), 1.0);

        let dx2 = KForm::basis(&ch, &[2]).unwrap();
        let e_t = KVector::basis(&ch, &[0]).unwrap();
        assert!(e_t.hook(&dx2).unwrap().is_empty());
    }

    #[test]
    fn exterior_derivative_basics() {
        let ch = chart3();
        // d(t·dx1) = dt∧dx1.
        let f = KForm::parse(&ch, 1, &[("1", "t")]).unwrap();
        let df = f.d().unwrap();
        let p = ch.point(&[0.0; 3]).unwrap();
        assert_eq!(df.coeff(&[0, 1]).eval(&p).unwrap(), 1.0);
        assert_eq!(df.coeffs().count(), 1);

        // d(dt − x2 dx1) = dx1∧dx2 (wedge sign: −dx2∧dx1 = +dx1∧dx2... )
        let omega = KForm::parse(&ch, 1, &[("0", "1"), ("1", "-x2")]).unwrap();
        let domega = omega.d().unwrap();
        assert_eq!(domega.coeff(&[1, 2]).eval(&p).unwrap(), 1.0);
    }

    #[test]
    fn d_squared_vanishes() {
        let ch = chart3();
        let s = sampler(&ch);
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let f = crate::expr::random_polynomial(&ch, &mut rng);
        let alpha = KForm::from_coeffs(
            &ch,
            1,
            vec![
                (vec![0], f.clone()),
                (vec![1], crate::expr::random_polynomial(&ch, &mut rng)),
                (vec![2], crate::expr::random_polynomial(&ch, &mut rng)),
            ],
        )
        .unwrap();
        let dda = alpha.d().unwrap().d().unwrap();
        assert!(dda.residual_zero(&s).unwrap() <= 1e-12);
    }

    #[test]
    fn lie_derivative_basics() {
        let ch = chart3();
        let e_t = KVector::basis(&ch, &[0]).unwrap();
        let dt = KForm::basis(&ch, &[0]).unwrap();
        assert!(lie_derivative(&e_t, &dt).unwrap().is_empty());

        let tdx1 = KForm::parse(&ch, 1, &[("1", "t")]).unwrap();
        let l = lie_derivative(&e_t, &tdx1).unwrap();
        let p = ch.point(&[5.0, 0.0, 0.0]).unwrap();
        assert_eq!(l.coeff(&[1]).eval(&p).unwrap(), 1.0);
        assert_eq!(l.coeffs().count(), 1);
    }

    #[test]
    fn sharp_flat_basics() {
        let ch = chart3();
        let p = ch.point(&[0.0; 3]).unwrap();
        // Λ = ∂_{x2}∧∂_{x1} stored as coeff (1,2) → −1.
        let lambda = KVector::parse(&ch, 2, &[("1 2", "-1")]).unwrap();
        let dx1 = KForm::basis(&ch, &[1]).unwrap();
        let sharp1 = sharp(&lambda, &dx1).unwrap();
        assert_eq!(sharp1.coeff(&[2]).eval(&p).unwrap(), -1.0);

        let dt = KForm::basis(&ch, &[0]).unwrap();
        assert!(sharp(&lambda, &dt).unwrap().is_empty());

        let omega2 = KForm::basis(&ch, &[1, 2]).unwrap();
        let e_x1 = KVector::basis(&ch, &[1]).unwrap();
        let f = flat(&omega2, &e_x1).unwrap();
        assert_eq!(f.coeff(&[2]).eval(&p).unwrap(), 1.0);
    }

    #[test]
    fn sharp_flat_adjointness() {
        let ch = chart3();
        let s = sampler(&ch);
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let rnd1 = |rng: &mut rand_chacha::ChaCha8Rng| {
            KForm::from_coeffs(
                &ch,
                1,
                (0..3)
                    .map(|i| (vec![i], crate::expr::random_polynomial(&ch, rng)))
                    .collect(),
            )
            .unwrap()
        };
        let alpha = rnd1(&mut rng);
        let beta = rnd1(&mut rng);
        let lambda = KVector::from_coeffs(
            &ch,
            2,
            vec![
                (vec![0, 1], crate::expr::random_polynomial(&ch, &mut rng)),
                (vec![0, 2], crate::expr::random_polynomial(&ch, &mut rng)),
                (vec![1, 2], crate::expr::random_polynomial(&ch, &mut rng)),
            ],
        )
        .unwrap();
        // ⟨β, Λ♯α⟩ = Λ(α, β) = i_{β∧α... } — compare against the full
        // contraction of α∧β into Λ.
        let lhs = pair(&beta, &sharp(&lambda, &alpha).unwrap());
        let ab = alpha.wedge(&beta).unwrap();
        let rhs = lambda.hook(&ab).unwrap().as_scalar();
        let cmp = crate::expr::field_equal(&lhs, &rhs, &s, 1e-9).unwrap();
        assert!(cmp.equal, "residual {}", cmp.residual);
    }

    #[test]
    fn schouten_constant_coefficients_vanish() {
        let ch = chart3();
        let e = KVector::basis(&ch, &[0]).unwrap();
        let lam = KVector::parse(&ch, 2, &[("1 2", "-1")]).unwrap();
        assert!(schouten(&e, &lam).unwrap().is_empty());
        assert!(schouten(&lam, &lam).unwrap().is_empty());
    }

    #[test]
    fn schouten_lie_bracket() {
        let ch = chart3();
        // [t∂_t, ∂_t] = −∂_t.
        let x = KVector::parse(&ch, 1, &[("0", "t")]).unwrap();
        let y = KVector::basis(&ch, &[0]).unwrap();
        let br = schouten(&x, &y).unwrap();
        let p = ch.point(&[2.0, 0.0, 0.0]).unwrap();
        assert_eq!(br.coeff(&[0]).eval(&p).unwrap(), -1.0);
    }

    #[test]
    fn schouten_e_lambda_is_lie_derivative() {
        let ch = chart3();
        let s = sampler(&ch);
        // E = ∂_t; components of [E,Λ] are ∂_t of Λ's components.
        let lam = KVector::parse(
            &ch,
            2,
            &[("0 1", "t*x1"), ("0 2", "t^2"), ("1 2", "t*x2 + x1")],
        )
        .unwrap();
        let e = KVector::basis(&ch, &[0]).unwrap();
        let br = schouten(&e, &lam).unwrap();
        let oracle = KVector::parse(&ch, 2, &[("0 1", "x1"), ("0 2", "2*t"), ("1 2", "x2")]).unwrap();
        assert!(br.residual(&oracle, &s).unwrap() <= 1e-12);
        // (2,1) ordering agrees.
        let br2 = schouten(&lam, &e).unwrap();
        assert!(br2.residual(&oracle, &s).unwrap() <= 1e-12);
    }

    #[test]
    fn schouten_rejects_high_degrees() {
        let ch = chart3();
        let tri = KVector::basis(&ch, &[0, 1, 2]).unwrap();
        let e = KVector::basis(&ch, &[0]).unwrap();
        assert!(matches!(
            schouten(&tri, &e),
            Err(ExteriorError::UnsupportedDegreePair { p: 3, q: 1 })
        ));
    }

    #[test]
    fn insert_identity_scales_by_degree() {
        let ch = chart3();
        let s = sampler(&ch);
        let id = TangentValuedOneForm::identity(&ch);
        let alpha = KForm::parse(&ch, 1, &[("0", "t"), ("1", "x2")]).unwrap();
        let res = insert_tv(&id, &alpha).unwrap();
        assert!(res.residual(&alpha, &s).unwrap() <= 1e-12);

        let beta = KForm::parse(&ch, 2, &[("0 1", "t"), ("1 2", "x1")]).unwrap();
        let res2 = insert_tv(&id, &beta).unwrap();
        assert!(res2.residual(&beta.scale(2.0), &s).unwrap() <= 1e-12);
    }

    #[test]
    fn lie_tv_of_identity_is_d() {
        let ch = chart3();
        let s = sampler(&ch);
        let id = TangentValuedOneForm::identity(&ch);
        let tau = KForm::parse(&ch, 1, &[("0", "x1*x2"), ("1", "t"), ("2", "x1^2")]).unwrap();
        let l = lie_tv(&id, &tau).unwrap();
        let dtau = tau.d().unwrap();
        assert!(l.residual(&dtau, &s).unwrap() <= 1e-12);

        let z = TangentValuedOneForm::zero(&ch);
        assert!(lie_tv(&z, &tau).unwrap().residual_zero(&s).unwrap() <= 1e-12);
    }

    #[test]
    fn rank_detection() {
        let ch = chart3();
        let s = sampler(&ch);
        let omega2 = KForm::basis(&ch, &[1, 2]).unwrap();
        let (rank, constant) = omega2.constant_rank(&s).unwrap();
        assert_eq!((rank, constant), (2, true));

        let zero = KForm::zero(&ch, 2).unwrap();
        let (rank0, const0) = zero.constant_rank(&s).unwrap();
        assert_eq!((rank0, const0), (0, true));
    }

    /// The sign/normalization gate for `schouten`: for closed β,
    /// `i_{[E,Λ]}β = i_E d i_Λ β − i_Λ d i_E β` (β a 2-form) and
    /// `i_{[Λ,Λ]}β = 2 i_Λ d i_Λ β` (β a 3-form). Every term on the right
    /// uses only `d` and interior products, never the bracket itself.
    #[test]
    fn schouten_contraction_calibration() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for dim in [3usize, 5] {
            let names: Vec<String> = (0..dim).map(|i| format!("u{i}")).collect();
            let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
            let ch = Chart::new(&name_refs, &[]).unwrap();
            let s = Sampler::builder(&ch).count(8).seed(3).build().unwrap();
            for _trial in 0..3 {
                let e = KVector::from_coeffs(
                    &ch,
                    1,
                    (0..dim)
                        .map(|i| (vec![i], crate::expr::random_polynomial(&ch, &mut rng)))
                        .collect(),
                )
                .unwrap();
                let mut lam_entries = Vec::new();
                for i in 0..dim {
                    for j in (i + 1)..dim {
                        lam_entries.push((vec![i, j], crate::expr::random_polynomial(&ch, &mut rng)));
                    }
                }
                let lam = KVector::from_coeffs(&ch, 2, lam_entries).unwrap();

                // Closed 2-form β = dμ with μ a random 1-form.
                let mu = KForm::from_coeffs(
                    &ch,
                    1,
                    (0..dim)
                        .map(|i| (vec![i], crate::expr::random_polynomial(&ch, &mut rng)))
                        .collect(),
                )
                .unwrap();
                let beta2 = mu.d().unwrap();

                let lhs = beta2.hook(&schouten(&e, &lam).unwrap()).unwrap().as_scalar();
                let t1 = beta2.hook(&lam).unwrap().d().unwrap().hook(&e).unwrap().as_scalar();
                let t2 = beta2.hook(&e).unwrap().d().unwrap().hook(&lam).unwrap().as_scalar();
                let rhs = &t1 - &t2;
                let cmp = crate::expr::field_equal(&lhs, &rhs, &s, 1e-9).unwrap();
                assert!(cmp.equal, "[E,Λ] calibration dim {dim}: residual {}", cmp.residual);

                // Closed 3-form β = dν with ν a random 2-form.
                let mut nu_entries = Vec::new();
                for i in 0..dim {
                    for j in (i + 1)..dim {
                        nu_entries.push((vec![i, j], crate::expr::random_polynomial(&ch, &mut rng)));
                    }
                }
                let nu = KForm::from_coeffs(&ch, 2, nu_entries).unwrap();
                let beta3 = nu.d().unwrap();

                let lhs3 = beta3.hook(&schouten(&lam, &lam).unwrap()).unwrap().as_scalar();
                let rhs3 = beta3
                    .hook(&lam)
                    .unwrap()
                    .d()
                    .unwrap()
                    .hook(&lam)
                    .unwrap()
                    .as_scalar()
                    .scale(2.0);
                let cmp3 = crate::expr::field_equal(&lhs3, &rhs3, &s, 1e-9).unwrap();
                assert!(cmp3.equal, "[Λ,Λ] calibration dim {dim}: residual {}", cmp3.residual);
            }
        }
    }

    #[test]
    fn leibniz_rule_for_d() {
        use rand::SeedableRng;
        let ch = chart3();
        let s = sampler(&ch);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let alpha = KForm::from_coeffs(
            &ch,
            1,
            (0..3)
                .map(|i| (vec![i], crate::expr::random_polynomial(&ch, &mut rng)))
                .collect(),
        )
        .unwrap();
        let beta = KForm::from_coeffs(
            &ch,
            1,
            (0..3)
                .map(|i| (vec![i], crate::expr::random_polynomial(&ch, &mut rng)))
                .collect(),
        )
        .unwrap();
        let lhs = alpha.wedge(&beta).unwrap().d().unwrap();
        let rhs = alpha
            .d()
            .unwrap()
            .wedge(&beta)
            .unwrap()
            .add(&alpha.wedge(&beta.d().unwrap()).unwrap().neg());
        assert!(lhs.residual(&rhs, &s).unwrap() <= 1e-9);
    }
}
