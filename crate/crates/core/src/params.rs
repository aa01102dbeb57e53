//! Exponent arithmetic for `(N, p, q)`: pointwise subcriticality, position
//! relative to the critical hyperbola, feasibility of the Sobolev pair
//! `(s, 2 - s)`, embedding ranges, and the characteristic roots governing
//! the far-field comparison functions.
//!
//! Classification is generic over [`ExponentField`] so that boundary cases
//! can be decided in exact rational arithmetic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SpaceDim;
use crate::scalar::{ExponentField, Scalar};

fn lit<F: ExponentField>(x: u32) -> F {
    F::from_u32(x).expect("small integers are representable")
}

/// A closed interval `[lo, hi]`, possibly a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedInterval<F> {
    pub lo: F,
    pub hi: F,
}

impl<F: ExponentField> ClosedInterval<F> {
    pub fn contains(&self, x: F) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn length(&self) -> F {
        self.hi - self.lo
    }

    pub fn has_interior(&self) -> bool {
        self.lo < self.hi
    }
}

/// Which hypotheses on `(p, q)` of the qualitative results hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeVerdicts {
    /// `p, q <= (N+2)/(N-2)`: positive finite-energy solutions are radially
    /// symmetric about some point.
    pub symmetry_hypothesis: bool,
    /// `p, q <= (N+2)/(N-2)`: positive radial solutions decrease and decay
    /// at the rate `-2(N-1)` in the log-squared sense.
    pub decay_hypothesis: bool,
    /// `1/(p+1) + 1/(q+1) > (N-2)/N` (strict): a radial solution exists.
    pub existence_hypothesis: bool,
    /// Ground state hypothesis read as stated, `p, q <= (N+2)/(N-2)`.
    pub ground_state_hypothesis_nonstrict: bool,
    /// Ground state hypothesis as used by the action argument,
    /// `p, q < (N+2)/(N-2)`.
    pub ground_state_hypothesis_strict: bool,
}

/// Classification of one exponent triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentRegime<F> {
    pub n: SpaceDim,
    pub p: F,
    pub q: F,
    /// `(N+2)/(N-2)`.
    pub critical_exponent: F,
    /// `(N+2)/(N-2) - p`.
    pub slack_p: F,
    /// `(N+2)/(N-2) - q`.
    pub slack_q: F,
    /// Both slacks non-negative.
    pub pointwise_subcritical: bool,
    /// `1/(p+1) + 1/(q+1) - (N-2)/N`.
    pub hyperbola_margin: F,
    /// Feasible `s` with `t = 2 - s`, or `None` when empty.
    pub sobolev_interval: Option<ClosedInterval<F>>,
    pub verdicts: RegimeVerdicts,
}

fn check_domain<F: ExponentField>(p: F, q: F) -> Result<()> {
    let one = F::one();
    for (name, x) in [("p", p), ("q", q)] {
        // `x > 1` is false for NaN as well
        if !(x > one) || !x.to_f64_lossy().is_finite() {
            return Err(Error::InvalidInput(format!("exponent {name} = {x:?} must be finite and > 1")));
        }
    }
    Ok(())
}

/// Classifies `(N, p, q)`.
pub fn classify_exponents<F: ExponentField>(n: SpaceDim, p: F, q: F) -> Result<ExponentRegime<F>> {
    check_domain(p, q)?;
    let nn: F = lit(n.get());
    let two: F = lit(2);
    let critical = (nn + two) / (nn - two);
    let slack_p = critical - p;
    let slack_q = critical - q;
    let margin = F::one() / (p + F::one()) + F::one() / (q + F::one()) - (nn - two) / nn;
    let zero = F::zero();
    let non_strict = slack_p >= zero && slack_q >= zero;
    let strict = slack_p > zero && slack_q > zero;
    Ok(ExponentRegime {
        n,
        p,
        q,
        critical_exponent: critical,
        slack_p,
        slack_q,
        pointwise_subcritical: non_strict,
        hyperbola_margin: margin,
        sobolev_interval: sobolev_pair_interval(n, p, q)?,
        verdicts: RegimeVerdicts {
            symmetry_hypothesis: non_strict,
            decay_hypothesis: non_strict,
            existence_hypothesis: margin > zero,
            ground_state_hypothesis_nonstrict: non_strict,
            ground_state_hypothesis_strict: strict,
        },
    })
}

/// Range of `s` such that both `H^s` and `H^(2-s)` embed into the Lebesgue
/// spaces the nonlinearities require: `[N/2 - N/(q+1), 2 - N/2 + N/(p+1)]`
/// intersected with `(0, 2)`; `None` when empty. The length of the unclipped
/// interval is `N` times the hyperbola margin.
pub fn sobolev_pair_interval<F: ExponentField>(n: SpaceDim, p: F, q: F) -> Result<Option<ClosedInterval<F>>> {
    check_domain(p, q)?;
    let nn: F = lit(n.get());
    let two: F = lit(2);
    let half_n = nn / two;
    let lo = half_n - nn / (q + F::one());
    let hi = two - half_n + nn / (p + F::one());
    // for p, q > 1 we have lo > 0 and hi < 2, so the clip only matters when
    // the interval is empty anyway
    let lo = if lo > F::zero() { lo } else { F::zero() };
    let hi = if hi < two { hi } else { two };
    Ok((lo <= hi).then_some(ClosedInterval { lo, hi }))
}

/// Lebesgue exponents `r` reached by the embedding of `H^s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EmbeddingRange<F> {
    /// Continuous for `2 <= r <= upper`, compact for `2 < r < upper`.
    Bounded { lower: F, upper: F },
    /// `s >= N/2`: every `r >= 2` is reached.
    Unbounded { lower: F },
}

impl<F: ExponentField> EmbeddingRange<F> {
    pub fn is_continuous(&self, r: F) -> bool {
        match *self {
            EmbeddingRange::Bounded { lower, upper } => lower <= r && r <= upper,
            EmbeddingRange::Unbounded { lower } => lower <= r,
        }
    }

    pub fn is_compact(&self, r: F) -> bool {
        match *self {
            EmbeddingRange::Bounded { lower, upper } => lower < r && r < upper,
            EmbeddingRange::Unbounded { lower } => lower < r,
        }
    }
}

/// Embedding range `[2, 2N/(N - 2s)]` of `H^s(H^N)`.
pub fn embedding_range<F: ExponentField>(n: SpaceDim, s: F) -> Result<EmbeddingRange<F>> {
    if !(s > F::zero()) {
        return Err(Error::InvalidInput(format!("smoothness s = {s:?} must be positive")));
    }
    let nn: F = lit(n.get());
    let two: F = lit(2);
    if two * s >= nn {
        return Ok(EmbeddingRange::Unbounded { lower: two });
    }
    Ok(EmbeddingRange::Bounded { lower: two, upper: two * nn / (nn - two * s) })
}

/// Roots of the two characteristic polynomials bounding `u + v` in the far
/// field: `mu^2 + (N-1)(1+eps) mu = 0` and `nu^2 + (N-1) nu + eps = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicRoots<T> {
    pub eps: T,
    /// `-(N-1)(1+eps)`.
    pub mu_minus: T,
    /// `0`.
    pub mu_plus: T,
    /// `(-(N-1) - sqrt((N-1)^2 - 4 eps)) / 2`.
    pub nu_minus: T,
    /// `(-(N-1) + sqrt((N-1)^2 - 4 eps)) / 2`.
    pub nu_plus: T,
}

/// Characteristic roots for `0 <= eps < (N-1)^2 / 4`.
pub fn characteristic_roots<T: Scalar>(n: SpaceDim, eps: T) -> Result<CharacteristicRoots<T>> {
    let m = n.damping::<T>();
    let bound = m * m / T::c(4.0);
    if !(eps >= T::zero() && eps < bound) {
        return Err(Error::InvalidInput(format!("eps = {eps} outside [0, {bound})")));
    }
    let disc = (m * m - T::c(4.0) * eps).sqrt();
    let two = T::c(2.0);
    Ok(CharacteristicRoots {
        eps,
        mu_minus: -m * (T::one() + eps),
        mu_plus: T::zero(),
        nu_minus: (-m - disc) / two,
        nu_plus: (-m + disc) / two,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    fn n(x: u32) -> SpaceDim {
        SpaceDim::new(x).unwrap()
    }

    fn r(a: i64, b: i64) -> Q {
        Q::new(a, b)
    }

    #[test]
    fn classification_examples() {
        let c = classify_exponents(n(3), r(2, 1), r(2, 1)).unwrap();
        assert_eq!(c.hyperbola_margin, r(1, 3));
        assert_eq!((c.slack_p, c.slack_q), (r(3, 1), r(3, 1)));
        let v = c.verdicts;
        assert!(v.symmetry_hypothesis && v.decay_hypothesis && v.existence_hypothesis);
        assert!(v.ground_state_hypothesis_nonstrict && v.ground_state_hypothesis_strict);

        let c = classify_exponents(n(3), r(5, 1), r(5, 1)).unwrap();
        assert_eq!(c.hyperbola_margin, r(0, 1));
        assert!(!c.verdicts.existence_hypothesis);
        assert!(c.pointwise_subcritical);
        assert!(c.verdicts.ground_state_hypothesis_nonstrict && !c.verdicts.ground_state_hypothesis_strict);

        let c = classify_exponents(n(4), r(3, 2), r(3, 2)).unwrap();
        assert_eq!(c.hyperbola_margin, r(3, 10));
        assert_eq!(c.critical_exponent, r(3, 1));
        assert!(c.pointwise_subcritical);
    }

    #[test]
    fn boundary_is_exact_in_f64_too() {
        let c = classify_exponents(n(3), 5.0_f64, 5.0).unwrap();
        assert_eq!(c.hyperbola_margin, 0.0);
        assert_eq!(c.sobolev_interval, Some(ClosedInterval { lo: 1.0, hi: 1.0 }));
    }

    #[test]
    fn domain_errors() {
        assert!(classify_exponents(n(3), 1.0_f64, 2.0).is_err());
        assert!(classify_exponents(n(3), f64::NAN, 2.0).is_err());
        assert!(classify_exponents(n(3), 2.0, f64::INFINITY).is_err());
        assert!(sobolev_pair_interval(n(3), r(1, 1), r(2, 1)).is_err());
    }

    #[test]
    fn sobolev_interval_examples() {
        let i = sobolev_pair_interval(n(3), r(2, 1), r(2, 1)).unwrap().unwrap();
        assert_eq!((i.lo, i.hi), (r(1, 2), r(3, 2)));
        assert!(i.contains(r(1, 1)));
        let i = sobolev_pair_interval(n(3), r(5, 1), r(5, 1)).unwrap().unwrap();
        assert_eq!((i.lo, i.hi), (r(1, 1), r(1, 1)));
        assert!(!i.has_interior());
        assert_eq!(sobolev_pair_interval(n(5), r(10, 1), r(6, 5)).unwrap(), None);
    }

    #[test]
    fn embedding_examples() {
        assert_eq!(embedding_range(n(3), r(1, 1)).unwrap(), EmbeddingRange::Bounded { lower: r(2, 1), upper: r(6, 1) });
        let e = embedding_range(n(3), r(1, 1)).unwrap();
        assert!(e.is_continuous(r(6, 1)) && !e.is_compact(r(6, 1)) && e.is_compact(r(3, 1)));
        assert_eq!(embedding_range(n(4), r(1, 1)).unwrap(), EmbeddingRange::Bounded { lower: r(2, 1), upper: r(4, 1) });
        assert_eq!(embedding_range(n(3), r(3, 2)).unwrap(), EmbeddingRange::Unbounded { lower: r(2, 1) });
        assert!(embedding_range(n(3), r(0, 1)).is_err());
    }

    #[test]
    fn root_examples() {
        let z = characteristic_roots(n(3), 0.0_f64).unwrap();
        assert_eq!((z.mu_minus, z.nu_minus, z.nu_plus, z.mu_plus), (-2.0, -2.0, 0.0, 0.0));
        let r = characteristic_roots(n(3), 0.75_f64).unwrap();
        assert_eq!((r.nu_minus, r.nu_plus, r.mu_minus), (-1.5, -0.5, -3.5));
        assert!(characteristic_roots(n(3), 1.0_f64).is_err());
        assert!(characteristic_roots(n(3), -0.1_f64).is_err());
    }
}
