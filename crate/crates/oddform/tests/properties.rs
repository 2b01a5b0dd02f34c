//! Randomized cross-module invariants: the algebraic laws that every
//! combination of the symbolic engine's operations must satisfy, checked
//! on randomly drawn fields rather than hand-picked fixtures.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oddform::algebra::{jacobi_bracket, poisson_bracket, BracketContext};
use oddform::darboux::DarbouxSpec;
use oddform::expr::{field_residual, parse_expr, random_polynomial, Chart, Sampler};
use oddform::exterior::{schouten, KForm, KVector};
use oddform::structures::{dualize_contravariant_at, dualize_covariant_at, StructureKind};

const TOL: f64 = 1e-9;

fn chart(dim: usize) -> Chart {
    let names: Vec<String> = (0..dim).map(|i| format!("y{i}")).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    Chart::new(&refs, &[]).expect("chart")
}

fn sampler(chart: &Chart, seed: u64) -> Sampler {
    Sampler::builder(chart)
        .seed(seed)
        .count(8)
        .build()
        .expect("sampler")
}

/// Every increasing index tuple of the given length.
fn tuples(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..degree).collect();
    loop {
        out.push(idx.clone());
        let mut k = degree;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] + (degree - k) < dim {
                idx[k] += 1;
                for j in k + 1..degree {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn random_form(chart: &Chart, degree: usize, rng: &mut impl Rng) -> KForm {
    let entries = tuples(chart.dim(), degree)
        .into_iter()
        .map(|idx| (idx, random_polynomial(chart, rng)))
        .collect();
    KForm::from_coeffs(chart, degree, entries).expect("random form")
}

fn random_vector(chart: &Chart, degree: usize, rng: &mut impl Rng) -> KVector {
    let entries = tuples(chart.dim(), degree)
        .into_iter()
        .map(|idx| (idx, random_polynomial(chart, rng)))
        .collect();
    KVector::from_coeffs(chart, degree, entries).expect("random vector")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// d(d(anything)) = 0 for random forms of every degree that leaves
    /// room for two derivatives.
    #[test]
    fn d_squared_vanishes(seed in any::<u64>(), dim in 3usize..=5, degree in 0usize..=3) {
        let chart = chart(dim);
        let samples = sampler(&chart, seed ^ 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha = random_form(&chart, degree.min(dim - 2), &mut rng);
        let residual = alpha.d().unwrap().d().unwrap().residual_zero(&samples).unwrap();
        prop_assert!(residual <= TOL, "d(d(alpha)) = {residual:.3e}");
    }

    /// alpha ^ beta = (-1)^(pq) beta ^ alpha.
    #[test]
    fn wedge_is_graded_commutative(seed in any::<u64>(), p in 1usize..=2, q in 1usize..=2) {
        let chart = chart(5);
        let samples = sampler(&chart, seed ^ 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha = random_form(&chart, p, &mut rng);
        let beta = random_form(&chart, q, &mut rng);
        let sign = if p * q % 2 == 0 { 1.0 } else { -1.0 };
        let residual = alpha
            .wedge(&beta)
            .unwrap()
            .sub(&beta.wedge(&alpha).unwrap().scale(sign))
            .residual_zero(&samples)
            .unwrap();
        prop_assert!(residual <= TOL, "graded commutativity off by {residual:.3e}");
    }

    /// d(alpha ^ beta) = d(alpha) ^ beta + (-1)^p alpha ^ d(beta).
    #[test]
    fn d_is_a_graded_derivation(seed in any::<u64>(), p in 1usize..=2) {
        let chart = chart(4);
        let samples = sampler(&chart, seed ^ 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha = random_form(&chart, p, &mut rng);
        let beta = random_form(&chart, 1, &mut rng);
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        let lhs = alpha.wedge(&beta).unwrap().d().unwrap();
        let rhs = alpha
            .d()
            .unwrap()
            .wedge(&beta)
            .unwrap()
            .add(&alpha.wedge(&beta.d().unwrap()).unwrap().scale(sign));
        let residual = lhs.sub(&rhs).residual_zero(&samples).unwrap();
        prop_assert!(residual <= TOL, "Leibniz rule off by {residual:.3e}");
    }

    /// Hooking with a decomposable two-vector inserts the factors one at
    /// a time, first factor innermost: i_{X^Y} = i_Y after i_X.
    #[test]
    fn hook_inserts_factors_in_order(seed in any::<u64>()) {
        let chart = chart(4);
        let samples = sampler(&chart, seed ^ 4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gamma = random_form(&chart, 3, &mut rng);
        let x = random_vector(&chart, 1, &mut rng);
        let y = random_vector(&chart, 1, &mut rng);
        let xy = x.wedge(&y).unwrap();
        let lhs = gamma.hook(&xy).unwrap();
        let rhs = gamma.hook(&x).unwrap().hook(&y).unwrap();
        let residual = lhs.sub(&rhs).residual_zero(&samples).unwrap();
        prop_assert!(residual <= TOL, "insertion order off by {residual:.3e}");
    }

    /// The commutator of vector fields is antisymmetric.
    #[test]
    fn vector_bracket_is_antisymmetric(seed in any::<u64>(), dim in 3usize..=5) {
        let chart = chart(dim);
        let samples = sampler(&chart, seed ^ 5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_vector(&chart, 1, &mut rng);
        let y = random_vector(&chart, 1, &mut rng);
        let residual = schouten(&x, &y)
            .unwrap()
            .add(&schouten(&y, &x).unwrap())
            .residual_zero(&samples)
            .unwrap();
        prop_assert!(residual <= TOL, "[X,Y] + [Y,X] = {residual:.3e}");
    }

    /// Both function brackets are antisymmetric, and the uncorrected one
    /// is a derivation in its second argument.
    #[test]
    fn function_brackets_are_antisymmetric_derivations(seed in any::<u64>(), n in 1usize..=2) {
        let spec = DarbouxSpec::contact(n).unwrap();
        let samples = Sampler::builder(spec.chart()).seed(seed ^ 6).count(8).build().unwrap();
        let pair = spec.contravariant_pair(&samples, TOL).unwrap();
        let ctx = BracketContext::new(pair).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_polynomial(spec.chart(), &mut rng);
        let g = random_polynomial(spec.chart(), &mut rng);
        let h = random_polynomial(spec.chart(), &mut rng);

        let anti_poisson = field_residual(
            &(&poisson_bracket(&ctx, &f, &g) + &poisson_bracket(&ctx, &g, &f)),
            &samples,
        )
        .unwrap();
        let anti_jacobi = field_residual(
            &(&jacobi_bracket(&ctx, &f, &g) + &jacobi_bracket(&ctx, &g, &f)),
            &samples,
        )
        .unwrap();
        let leibniz = field_residual(
            &(&poisson_bracket(&ctx, &f, &(&g * &h))
                - &(&(&poisson_bracket(&ctx, &f, &g) * &h) + &(&g * &poisson_bracket(&ctx, &f, &h)))),
            &samples,
        )
        .unwrap();
        prop_assert!(anti_poisson <= TOL, "{{f,g}} + {{g,f}} = {anti_poisson:.3e}");
        prop_assert!(anti_jacobi <= TOL, "[f,g] + [g,f] = {anti_jacobi:.3e}");
        prop_assert!(leibniz <= TOL, "derivation rule off by {leibniz:.3e}");
    }

    /// Printing a field and parsing it back yields the same function.
    #[test]
    fn printed_fields_reparse_to_the_same_function(seed in any::<u64>(), dim in 3usize..=5) {
        let chart = chart(dim);
        let samples = sampler(&chart, seed ^ 7);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_polynomial(&chart, &mut rng);
        let printed = f.to_string();
        let reparsed = parse_expr(&printed, &chart).unwrap();
        let residual = field_residual(&(&f - &reparsed), &samples).unwrap();
        prop_assert!(residual <= TOL, "{printed:?} reparsed {residual:.3e} away");
    }

    /// Pointwise dualization round-trips and satisfies the pairing
    /// normalization, for numeric pairs kept safely regular.
    #[test]
    fn pointwise_duality_round_trips(
        w0 in 0.5f64..1.5,
        w1 in -0.5f64..0.5,
        w2 in -0.5f64..0.5,
        o12 in 0.5f64..2.0,
        o01 in -0.1f64..0.1,
        o02 in -0.1f64..0.1,
    ) {
        let omega = DVector::from_vec(vec![w0, w1, w2]);
        let mut big = DMatrix::zeros(3, 3);
        big[(0, 1)] = o01;
        big[(1, 0)] = -o01;
        big[(0, 2)] = o02;
        big[(2, 0)] = -o02;
        big[(1, 2)] = o12;
        big[(2, 1)] = -o12;

        let (e, lambda) = dualize_covariant_at(&omega, &big).unwrap();
        prop_assert!((omega.dot(&e) - 1.0).abs() <= 1e-9, "omega(E) != 1");
        let (omega_rt, big_rt) = dualize_contravariant_at(&e, &lambda).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + a.abs().max(b.abs()));
        let mut worst = 0.0f64;
        for i in 0..3 {
            worst = worst.max(rel(omega_rt[i], omega[i]));
            for j in 0..3 {
                worst = worst.max(rel(big_rt[(i, j)], big[(i, j)]));
            }
        }
        prop_assert!(worst <= 1e-9, "round trip off by {worst:.3e}");
    }

    /// Every regular random member of the normal-form family is at least
    /// pre-cosymplectic and pre-coPoisson.
    #[test]
    fn random_regular_members_get_the_pre_labels(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = DarbouxSpec::random(n, n, &mut rng).unwrap();
        let samples = Sampler::builder(spec.chart()).seed(seed ^ 8).count(8).build().unwrap();
        let cov = oddform::structures::classify_covariant(
            &spec.covariant_pair(&samples, TOL).unwrap(),
            &samples,
            TOL,
        )
        .unwrap();
        let one_form = spec.one_form();
        let contra = oddform::structures::classify_contravariant(
            &spec.contravariant_pair(&samples, TOL).unwrap(),
            Some(&one_form),
            &samples,
            TOL,
        )
        .unwrap();
        prop_assert!(cov.labels.contains(&StructureKind::PreCosymplectic));
        prop_assert!(contra.labels.contains(&StructureKind::PreCoPoisson));
    }
}
