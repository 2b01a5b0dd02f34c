//! Seeded, reproducible point sampling over coordinate boxes.
//!
//! All identity verification in this crate is sampling-based, so the point
//! generator must be bit-for-bit reproducible: the same `(box, constraints,
//! seed, count)` always yields the same point list, on every platform.
//! ChaCha8 provides the deterministic byte stream; the stream→point mapping
//! (`lo + u·(hi−lo)` with `u ∈ [0,1)`) is pinned here rather than delegated
//! to a distribution type whose implementation might change.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Chart, Point, ScalarField, DEFAULT_SAMPLES, DEFAULT_SEED};

/// Hard cap on rejection-sampling draws; keeps constrained domains total.
const MAX_DRAWS: usize = 100_000;

/// Errors from sampler construction.
#[derive(Debug, Error)]
pub enum SamplerError {
    /// The box has the wrong number of intervals for the chart.
    #[error("box has {got} intervals but the chart has {expected} coordinates")]
    BoxDimensionMismatch { expected: usize, got: usize },
    /// An interval is inverted or not finite.
    #[error("invalid interval [{lo}, {hi}] for coordinate `{coord}`")]
    InvalidInterval { coord: String, lo: f64, hi: f64 },
    /// A constraint lives on a different chart.
    #[error("constraint field lives on a different chart")]
    ConstraintChartMismatch,
    /// Rejection sampling found too few admissible points within the cap.
    #[error(
        "could not find {want} admissible points in {MAX_DRAWS} draws (found {found}); \
         the constrained region is too small for the box"
    )]
    TooFewAdmissible { want: usize, found: usize },
    /// `count` must be at least 1.
    #[error("sample count must be at least 1")]
    ZeroCount,
}

/// A frozen, reproducible list of admissible sample points.
///
/// Build via [`Sampler::builder`]. A point is admissible when every
/// constraint field evaluates to a strictly negative value there; points
/// where a constraint fails to evaluate are treated as inadmissible and
/// rejected (this is how e.g. a timelike-region constraint excludes points
/// outside its domain).
#[derive(Debug, Clone)]
pub struct Sampler {
    chart: Chart,
    box_: Vec<(f64, f64)>,
    seed: u64,
    count: usize,
    points: Vec<Point>,
}

/// Builder for [`Sampler`]; unset fields use the crate defaults
/// (box [−1,1] per coordinate, seed 42, 32 points, no constraints).
pub struct SamplerBuilder {
    chart: Chart,
    box_: Option<Vec<(f64, f64)>>,
    constraints: Vec<ScalarField>,
    seed: u64,
    count: usize,
}

impl Sampler {
    /// Start building a sampler for `chart`.
    pub fn builder(chart: &Chart) -> SamplerBuilder {
        SamplerBuilder {
            chart: chart.clone(),
            box_: None,
            constraints: Vec::new(),
            seed: DEFAULT_SEED,
            count: DEFAULT_SAMPLES,
        }
    }

    /// The chart points are drawn on.
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// The admissible points, in generation order.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// The seed the point list was generated from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of points.
    pub fn count(&self) -> usize {
        self.count
    }

    /// The sampling box, one `(lo, hi)` pair per coordinate.
    pub fn bounding_box(&self) -> &[(f64, f64)] {
        &self.box_
    }
}

impl SamplerBuilder {
    /// Use the given per-coordinate closed intervals.
    pub fn bounding_box(mut self, intervals: &[(f64, f64)]) -> Self {
        self.box_ = Some(intervals.to_vec());
        self
    }

    /// Restrict to points where `constraint < 0` (may be called repeatedly;
    /// all constraints must hold).
    pub fn constraint(mut self, constraint: ScalarField) -> Self {
        self.constraints.push(constraint);
        self
    }

    /// Set the RNG seed.
    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Set the number of points.
    pub fn count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    /// Draw the points; fails if the box is invalid or the constrained
    /// region yields too few admissible points within the draw cap.
    pub fn build(self) -> Result<Sampler, SamplerError> {
        let dim = self.chart.dim();
        let box_ = self.box_.unwrap_or_else(|| vec![(-1.0, 1.0); dim]);
        if box_.len() != dim {
            return Err(SamplerError::BoxDimensionMismatch {
                expected: dim,
                got: box_.len(),
            });
        }
        for (i, (lo, hi)) in box_.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(SamplerError::InvalidInterval {
                    coord: self.chart.coord_name(i).to_owned(),
                    lo: *lo,
                    hi: *hi,
                });
            }
        }
        for c in &self.constraints {
            if c.chart() != &self.chart {
                return Err(SamplerError::ConstraintChartMismatch);
            }
        }
        if self.count == 0 {
            return Err(SamplerError::ZeroCount);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut points = Vec::with_capacity(self.count);
        let mut draws = 0;
        let mut values = vec![0.0f64; dim];
        while points.len() < self.count && draws < MAX_DRAWS {
            draws += 1;
            for (v, (lo, hi)) in values.iter_mut().zip(&box_) {
                let u: f64 = rng.gen();
                *v = lo + u * (hi - lo);
            }
            let p = self
                .chart
                .point(&values)
                .expect("dimension already validated");
            let admissible = self.constraints.iter().all(|c| match c.eval(&p) {
                Ok(v) => v < 0.0,
                Err(_) => false,
            });
            if admissible {
                points.push(p);
            }
        }
        if points.len() < self.count {
            return Err(SamplerError::TooFewAdmissible {
                want: self.count,
                found: points.len(),
            });
        }
        Ok(Sampler {
            chart: self.chart,
            box_,
            seed: self.seed,
            count: self.count,
            points,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn chart() -> Chart {
        Chart::new(&["t", "x1", "x2"], &[]).unwrap()
    }

    #[test]
    fn same_seed_same_points() {
        let ch = chart();
        let a = Sampler::builder(&ch).seed(7).count(16).build().unwrap();
        let b = Sampler::builder(&ch).seed(7).count(16).build().unwrap();
        for (p, q) in a.points().iter().zip(b.points()) {
            assert_eq!(p.values(), q.values()); // bitwise
        }
    }

    #[test]
    fn different_seeds_differ() {
        let ch = chart();
        let a = Sampler::builder(&ch).seed(1).count(4).build().unwrap();
        let b = Sampler::builder(&ch).seed(2).count(4).build().unwrap();
        assert_ne!(a.points()[0].values(), b.points()[0].values());
    }

    #[test]
    fn points_respect_box() {
        let ch = chart();
        let s = Sampler::builder(&ch)
            .bounding_box(&[(0.0, 1.0), (2.0, 3.0), (-1.0, -0.5)])
            .count(64)
            .build()
            .unwrap();
        for p in s.points() {
            assert!(p.value(0) >= 0.0 && p.value(0) < 1.0);
            assert!(p.value(1) >= 2.0 && p.value(1) < 3.0);
            assert!(p.value(2) >= -1.0 && p.value(2) < -0.5);
        }
    }

    #[test]
    fn constraint_restricts_points() {
        let ch = chart();
        // Admissible iff x1² + x2² < 1/4.
        let c = parse_expr("x1^2 + x2^2 - 0.25", &ch).unwrap();
        let s = Sampler::builder(&ch)
            .constraint(c)
            .count(16)
            .build()
            .unwrap();
        for p in s.points() {
            assert!(p.value(1).powi(2) + p.value(2).powi(2) < 0.25);
        }
    }

    #[test]
    fn impossible_constraint_fails_with_cap() {
        let ch = chart();
        let c = parse_expr("x1^2 + 1", &ch).unwrap(); // never negative
        let err = Sampler::builder(&ch).constraint(c).build().unwrap_err();
        assert!(matches!(err, SamplerError::TooFewAdmissible { .. }));
    }

    #[test]
    fn invalid_interval_is_rejected() {
        let ch = chart();
        let err = Sampler::builder(&ch)
            .bounding_box(&[(1.0, 0.0), (0.0, 1.0), (0.0, 1.0)])
            .build()
            .unwrap_err();
        assert!(matches!(err, SamplerError::InvalidInterval { .. }));
    }
}
