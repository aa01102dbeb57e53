mod common;

use common::dim;
use hypershoot::{characteristic_roots, classify_exponents, embedding_range, sobolev_pair_interval, ExponentField};
use num_rational::Ratio;
use proptest::prelude::*;

type Q = Ratio<i64>;

/// Rational exponent in `(1, 13]` with a small denominator.
fn exponent() -> impl Strategy<Value = Q> {
    (1_i64..=12, 1_i64..=12, 1_i64..=12)
        .prop_map(|(whole, num, den)| Q::from_integer(whole) + Q::new(num.min(den), den))
}

fn q(a: i64, b: i64) -> Q {
    Q::new(a, b)
}

proptest! {
    #[test]
    fn existence_iff_sobolev_pair_has_interior(n in 3_u32..9, p in exponent(), r in exponent()) {
        let c = classify_exponents(dim(n), p, r).unwrap();
        let zero = Q::from_integer(0);
        match c.sobolev_interval {
            Some(i) => {
                prop_assert_eq!(i.has_interior(), c.hyperbola_margin > zero);
                // unclipped length is N times the margin
                prop_assert_eq!(i.length(), Q::from_integer(n as i64) * c.hyperbola_margin);
            }
            None => prop_assert!(c.hyperbola_margin < zero),
        }
        prop_assert_eq!(c.verdicts.existence_hypothesis, c.hyperbola_margin > zero);
    }

    #[test]
    fn swapping_exponents_reflects_the_pair(n in 3_u32..9, p in exponent(), r in exponent()) {
        let two = Q::from_integer(2);
        let a = sobolev_pair_interval(dim(n), p, r).unwrap();
        let b = sobolev_pair_interval(dim(n), r, p).unwrap();
        prop_assert_eq!(a.map(|i| (two - i.hi, two - i.lo)), b.map(|i| (i.lo, i.hi)));
        let (ca, cb) = (classify_exponents(dim(n), p, r).unwrap(), classify_exponents(dim(n), r, p).unwrap());
        prop_assert_eq!(ca.hyperbola_margin, cb.hyperbola_margin);
        prop_assert_eq!(ca.verdicts, cb.verdicts);
    }

    #[test]
    fn feasible_pairs_reach_the_needed_lebesgue_spaces(n in 3_u32..9, p in exponent(), r in exponent()) {
        let one = Q::from_integer(1);
        let two = Q::from_integer(2);
        if let Some(i) = sobolev_pair_interval(dim(n), p, r).unwrap() {
            for s in [i.lo, (i.lo + i.hi) / two, i.hi] {
                prop_assert!(embedding_range(dim(n), s).unwrap().is_continuous(r + one));
                prop_assert!(embedding_range(dim(n), two - s).unwrap().is_continuous(p + one));
            }
        }
    }

    #[test]
    fn diagonal_reduces_to_the_scalar_threshold(n in 3_u32..9, p in exponent()) {
        let c = classify_exponents(dim(n), p, p).unwrap();
        prop_assert_eq!(c.verdicts.existence_hypothesis, p < c.critical_exponent);
        prop_assert_eq!(c.verdicts.ground_state_hypothesis_strict, p < c.critical_exponent);
        prop_assert_eq!(c.pointwise_subcritical, p <= c.critical_exponent);
    }

    #[test]
    fn margin_decreases_in_each_exponent(n in 3_u32..9, p in exponent(), r in exponent(), d in 1_i64..5) {
        let step = q(d, 7);
        let base = classify_exponents(dim(n), p, r).unwrap().hyperbola_margin;
        prop_assert!(classify_exponents(dim(n), p + step, r).unwrap().hyperbola_margin < base);
        prop_assert!(classify_exponents(dim(n), p, r + step).unwrap().hyperbola_margin < base);
    }

    #[test]
    fn characteristic_roots_are_ordered(n in 3_u32..9, frac in 0.0_f64..0.999) {
        let m = (n - 1) as f64;
        let eps = frac * m * m / 4.0;
        let r = characteristic_roots(dim(n), eps).unwrap();
        prop_assert!(r.mu_minus <= r.nu_minus && r.nu_minus <= r.nu_plus && r.nu_plus <= r.mu_plus);
        // Vieta for nu^2 + (N-1) nu + eps
        prop_assert!((r.nu_minus + r.nu_plus + m).abs() <= 1e-12 * m);
        prop_assert!((r.nu_minus * r.nu_plus - eps).abs() <= 1e-12 * m * m);
        prop_assert!((r.mu_minus * (r.mu_minus + m * (1.0 + eps))).abs() <= 1e-12 * m * m * 4.0);
    }

    #[test]
    fn characteristic_roots_tend_to_the_linear_rate(n in 3_u32..9, k in 4_i32..12) {
        let eps = 10f64.powi(-k);
        let m = (n - 1) as f64;
        let r = characteristic_roots(dim(n), eps).unwrap();
        prop_assert!((r.mu_minus + m).abs() <= 2.0 * m * eps);
        prop_assert!((r.nu_minus + m).abs() <= 2.0 * eps / m);
        prop_assert!(r.nu_plus.abs() <= 2.0 * eps / m);
    }
}

#[test]
fn rational_and_float_classification_agree_off_the_boundary() {
    for (n, p, r) in [(3, q(2, 1), q(4, 1)), (4, q(5, 2), q(3, 2)), (5, q(7, 3), q(3, 1)), (6, q(2, 1), q(2, 1))] {
        let exact = classify_exponents(dim(n), p, r).unwrap();
        let float = classify_exponents(dim(n), p.to_f64_lossy(), r.to_f64_lossy()).unwrap();
        assert_eq!(exact.verdicts, float.verdicts);
        assert!((exact.hyperbola_margin.to_f64_lossy() - float.hyperbola_margin).abs() < 1e-15);
    }
}

#[test]
fn single_precision_classification() {
    let c = classify_exponents(dim(3), 2.0_f32, 4.0).unwrap();
    assert!(c.verdicts.existence_hypothesis);
    assert!((c.hyperbola_margin - (1.0 / 3.0 + 0.2 - 1.0 / 3.0)).abs() < 1e-6);
}

#[test]
fn critical_hyperbola_is_exact() {
    // 1/(p+1) + 1/(q+1) = 1/3 at N = 3: (p, q) = (3, 11) and (5, 5)
    for (p, r) in [(q(3, 1), q(11, 1)), (q(5, 1), q(5, 1)), (q(11, 1), q(3, 1))] {
        let c = classify_exponents(dim(3), p, r).unwrap();
        assert_eq!(c.hyperbola_margin, Q::from_integer(0));
        assert!(!c.verdicts.existence_hypothesis);
        let i = c.sobolev_interval.unwrap();
        assert_eq!(i.lo, i.hi);
    }
}
