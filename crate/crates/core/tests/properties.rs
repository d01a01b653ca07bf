use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use qdcorr::asymptotics::{asymptotic, EstimatorPairSpec, QuantileKind, TransformSpec};
use qdcorr::distributions::Distribution;
use qdcorr::estimators::{
    abs_central_moment, sample_mad, sample_median_ad, sample_quantile, sample_variance, DispersionKind, Sample,
};

const KINDS: [QuantileKind; 3] =
    [QuantileKind::SampleQuantile, QuantileKind::LocScaleUnknownMean, QuantileKind::LocScaleKnownMean];
const DISPERSIONS: [DispersionKind; 5] = [
    DispersionKind::Variance,
    DispersionKind::Mad,
    DispersionKind::MedianAd,
    DispersionKind::AbsCentralMoment(3),
    DispersionKind::AbsCentralMoment(4),
];

fn family(i: usize) -> Distribution {
    match i {
        0 => Distribution::standard_gaussian(),
        1 => Distribution::standard_student(2.5).unwrap(),
        2 => Distribution::standard_student(3.0).unwrap(),
        3 => Distribution::standard_student(5.0).unwrap(),
        4 => Distribution::standard_student(10.0).unwrap(),
        _ => Distribution::standard_student(30.0).unwrap(),
    }
}

fn grid() -> impl Iterator<Item = f64> {
    (1..100).map(|i| f64::from(i) / 100.0)
}

fn corr(d: &Distribution, k: QuantileKind, p: f64, disp: DispersionKind) -> Option<f64> {
    match asymptotic(d, &EstimatorPairSpec::new(k, p, disp).unwrap()) {
        Ok(r) => Some(r.corr),
        Err(e) if e.is_moment_unavailable() => None,
        Err(e) => panic!("{k:?} {disp:?} p={p}: {e}"),
    }
}

#[test]
fn cdf_quantile_round_trip_on_grid() {
    for i in 0..6 {
        let d = family(i);
        for p in grid() {
            let q = d.quantile(p).unwrap();
            assert!((d.cdf(q) - p).abs() <= 1e-10, "{} p={p}", d.name());
        }
    }
}

#[test]
fn standardized_first_two_moments() {
    for i in [0, 2, 3, 4, 5] {
        let d = family(i);
        assert_abs_diff_eq!(d.standardized_moment(1).unwrap(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(d.standardized_moment(2).unwrap(), 1.0, epsilon = 1e-10);
    }
}

#[test]
fn student_approaches_gaussian() {
    let t = Distribution::standard_student(1e6).unwrap();
    let g = Distribution::standard_gaussian();
    for k in 1..=6 {
        let (a, b) = (t.standardized_moment(k).unwrap(), g.standardized_moment(k).unwrap());
        assert!((a - b).abs() < 1e-3, "k={k}: {a} vs {b}");
    }
    for r in 1..=4 {
        let (a, b) = (t.standardized_abs_moment(r).unwrap(), g.standardized_abs_moment(r).unwrap());
        assert!((a - b).abs() < 1e-3, "r={r}: {a} vs {b}");
    }
}

#[test]
fn known_mean_correlation_is_flat() {
    for i in [0, 4, 5] {
        let d = family(i);
        for disp in DISPERSIONS {
            let reference = corr(&d, QuantileKind::LocScaleKnownMean, 0.9, disp).unwrap().abs();
            for p in grid().filter(|p| (p - 0.5).abs() > 1e-12) {
                let c = corr(&d, QuantileKind::LocScaleKnownMean, p, disp).unwrap();
                assert!((c.abs() - reference).abs() < 1e-9, "{} {disp:?} p={p}", d.name());
                assert_eq!(c.signum(), (p - 0.5).signum());
            }
        }
    }
}

#[test]
fn gaussian_tail_decay() {
    let g = Distribution::standard_gaussian();
    for disp in [DispersionKind::Variance, DispersionKind::Mad, DispersionKind::MedianAd] {
        let cs: Vec<f64> = [0.99, 0.9999, 1.0 - 1e-6]
            .iter()
            .map(|&p| corr(&g, QuantileKind::SampleQuantile, p, disp).unwrap().abs())
            .collect();
        assert!(cs[0] > cs[1] && cs[1] > cs[2], "{disp:?}: {cs:?}");
    }
}

#[test]
fn correlation_bound_on_grid() {
    for i in 0..6 {
        let d = family(i);
        for k in KINDS {
            for disp in DISPERSIONS {
                for p in grid() {
                    if let Some(c) = corr(&d, k, p, disp) {
                        assert!(c.abs() <= 1.0, "{} {k:?} {disp:?} p={p}: {c}", d.name());
                    }
                }
            }
        }
    }
}

fn any_kind() -> impl Strategy<Value = QuantileKind> {
    prop::sample::select(KINDS.to_vec())
}

fn any_dispersion() -> impl Strategy<Value = DispersionKind> {
    prop::sample::select(DISPERSIONS.to_vec())
}

fn sample_values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, 1..60)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantile_is_location_scale_consistent(i in 0usize..6, a in 0.05..20.0f64, b in -50.0..50.0f64, j in 1u32..100) {
        let p = f64::from(j) / 100.0;
        let base = family(i);
        let moved = base.with_location_scale(b, a).unwrap();
        let (q0, q1) = (base.quantile(p).unwrap(), moved.quantile(p).unwrap());
        prop_assert!((q1 - (b + a * q0)).abs() <= 1e-9 * (1.0 + q1.abs()));
    }

    #[test]
    fn partial_expectation_is_additive(i in 0usize..6, k in 0u32..4, a in -8.0..8.0f64, w1 in 0.0..5.0f64, w2 in 0.0..5.0f64) {
        let d = family(i);
        prop_assume!(d.moment_availability(k).exists);
        let (b, c) = (a + w1, a + w1 + w2);
        let left = d.partial_expectation(k, a, b).unwrap() + d.partial_expectation(k, b, c).unwrap();
        prop_assert!((left - d.partial_expectation(k, a, c).unwrap()).abs() <= 1e-9);
        let below = d.partial_expectation(k, f64::NEG_INFINITY, a);
        if let (Ok(lo), Ok(hi)) = (below, d.partial_expectation(k, a, f64::INFINITY)) {
            prop_assert!((lo + hi - d.standardized_moment(k).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn correlation_bounded(i in 0usize..6, k in any_kind(), disp in any_dispersion(), p in 0.001..0.999f64) {
        if let Some(c) = corr(&family(i), k, p, disp) {
            prop_assert!(c.abs() <= 1.0);
        }
    }

    #[test]
    fn symmetric_families_are_antisymmetric(i in 0usize..6, k in any_kind(), disp in any_dispersion(), p in 0.005..0.995f64) {
        let d = family(i);
        if let (Some(a), Some(b)) = (corr(&d, k, p, disp), corr(&d, k, 1.0 - p, disp)) {
            prop_assert!((a + b).abs() <= 1e-9, "{} vs {}", a, b);
        }
    }

    #[test]
    fn correlation_ignores_location_and_scale(i in 0usize..6, k in any_kind(), disp in any_dispersion(),
                                              p in 0.01..0.99f64, mu in -20.0..20.0f64, sigma in 0.01..50.0f64) {
        let d = family(i);
        let moved = d.with_location_scale(mu, sigma).unwrap();
        if let Some(a) = corr(&d, k, p, disp) {
            let b = corr(&moved, k, p, disp).unwrap();
            prop_assert!((a - b).abs() <= 1e-10, "{} vs {}", a, b);
        }
    }

    #[test]
    fn affine_transform_only_moves_sign(i in 0usize..6, k in any_kind(), disp in any_dispersion(),
                                        p in 0.01..0.99f64, a in -10.0..10.0f64) {
        prop_assume!(a.abs() > 1e-3);
        let d = family(i);
        let plain = EstimatorPairSpec::new(k, p, disp).unwrap();
        let Ok(base) = asymptotic(&d, &plain) else { return Ok(()); };
        let scaled = asymptotic(&d, &plain.with_transforms(TransformSpec::custom(None, a).unwrap(), TransformSpec::identity())).unwrap();
        prop_assert_eq!(scaled.corr, a.signum() * base.corr);
        prop_assert!((scaled.cov[0][0] - a * a * base.cov[0][0]).abs() <= 1e-12 * scaled.cov[0][0].abs());
        prop_assert_eq!(scaled.cov[1][1], base.cov[1][1]);
    }

    #[test]
    fn medianad_correlation_is_distribution_free(p in 0.01..0.99f64) {
        let reference = corr(&family(0), QuantileKind::SampleQuantile, p, DispersionKind::MedianAd).unwrap();
        for i in 1..6 {
            let c = corr(&family(i), QuantileKind::SampleQuantile, p, DispersionKind::MedianAd).unwrap();
            prop_assert!((c - reference).abs() <= 1e-8);
        }
    }

    #[test]
    fn estimators_are_equivariant(xs in sample_values(), a in 0.01..100.0f64, b in -100.0..100.0f64, j in 1u32..100) {
        let p = f64::from(j) / 100.0;
        let s = Sample::new(xs.clone()).unwrap();
        let t = Sample::new(xs.iter().map(|x| a * x + b).collect()).unwrap();
        let tol = |v: f64| 1e-9 * (1.0 + v.abs());
        let q = a * sample_quantile(&s, p).unwrap() + b;
        prop_assert!((sample_quantile(&t, p).unwrap() - q).abs() <= tol(q));
        let m = a * sample_mad(&s);
        prop_assert!((sample_mad(&t) - m).abs() <= tol(m) * 10.0);
        let md = a * sample_median_ad(&s);
        prop_assert!((sample_median_ad(&t) - md).abs() <= tol(md) * 10.0);
        if xs.len() > 1 {
            let v = a * a * sample_variance(&s).unwrap();
            prop_assert!((sample_variance(&t).unwrap() - v).abs() <= 1e-8 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn estimators_ignore_order(xs in sample_values(), seed in any::<u64>(), j in 1u32..100) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let p = f64::from(j) / 100.0;
        let mut ys = xs.clone();
        ys.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let (s, t) = (Sample::new(xs).unwrap(), Sample::new(ys).unwrap());
        prop_assert_eq!(sample_quantile(&s, p).unwrap(), sample_quantile(&t, p).unwrap());
        prop_assert_eq!(sample_median_ad(&s), sample_median_ad(&t));
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-10 * (1.0 + a.abs());
        prop_assert!(close(sample_mad(&s), sample_mad(&t)));
        prop_assert!(close(abs_central_moment(&s, 3).unwrap(), abs_central_moment(&t, 3).unwrap()));
        if s.len() > 1 {
            prop_assert!(close(sample_variance(&s).unwrap(), sample_variance(&t).unwrap()));
        }
    }

    #[test]
    fn abs_moment_identities(xs in sample_values()) {
        let s = Sample::new(xs.clone()).unwrap();
        prop_assert_eq!(abs_central_moment(&s, 1).unwrap(), sample_mad(&s));
        if xs.len() > 1 {
            let n = xs.len() as f64;
            let v = sample_variance(&s).unwrap();
            prop_assert!((abs_central_moment(&s, 2).unwrap() * n / (n - 1.0) - v).abs() <= 1e-12 * (1.0 + v));
        }
    }

    #[test]
    fn singleton_medianad_is_zero(x in -1e6..1e6f64) {
        prop_assert_eq!(sample_median_ad(&Sample::new(vec![x]).unwrap()), 0.0);
    }
}
