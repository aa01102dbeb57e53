//! The reduced radial system
//!
//! ```text
//! u'' + (N-1) coth(t) u' + |v|^(p-1) v = 0
//! v'' + (N-1) coth(t) v' + |u|^(q-1) u = 0
//! ```
//!
//! and its regular series start at the singular origin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SpaceDim;
use crate::scalar::{odd_pow, Scalar};

/// Exponents `(p, q)` of the nonlinearities, both `> 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair<T> {
    p: T,
    q: T,
}

impl<T: Scalar> ExponentPair<T> {
    pub fn new(p: T, q: T) -> Result<Self> {
        for (name, x) in [("p", p), ("q", q)] {
            if !x.is_finite() || x <= T::one() {
                return Err(Error::Domain(format!("exponent {name} = {x} must be finite and > 1")));
            }
        }
        Ok(ExponentPair { p, q })
    }

    /// Exponent of `v` in the `u` equation.
    pub fn p(&self) -> T {
        self.p
    }

    /// Exponent of `u` in the `v` equation.
    pub fn q(&self) -> T {
        self.q
    }

    pub fn is_symmetric(&self) -> bool {
        self.p == self.q
    }
}

/// One point `(t, u, u', v, v')` of a radial profile.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RadialState<T> {
    pub t: T,
    pub u: T,
    pub du: T,
    pub v: T,
    pub dv: T,
}

impl<T: Scalar> RadialState<T> {
    pub fn new(t: T, u: T, du: T, v: T, dv: T) -> Self {
        RadialState { t, u, du, v, dv }
    }

    pub(crate) fn from_vec(t: T, y: &[T; 4]) -> Self {
        RadialState { t, u: y[0], du: y[1], v: y[2], dv: y[3] }
    }

    pub(crate) fn to_vec(self) -> [T; 4] {
        [self.u, self.du, self.v, self.dv]
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.u.is_finite() && self.du.is_finite() && self.v.is_finite() && self.dv.is_finite()
    }
}

/// Time derivative `(u', u'', v', v'')` of a [`RadialState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative<T> {
    pub du: T,
    pub ddu: T,
    pub dv: T,
    pub ddv: T,
}

/// Right-hand side of the first-order form of the system.
pub fn rhs<T: Scalar>(s: &RadialState<T>, n: SpaceDim, pq: &ExponentPair<T>) -> Result<Derivative<T>> {
    if !s.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite state {s:?}")));
    }
    if s.t == T::zero() {
        return Err(Error::Singularity);
    }
    if s.t < T::zero() {
        return Err(Error::Domain(format!("state at negative t = {}", s.t)));
    }
    let y = field(n, *pq)(s.t, &s.to_vec());
    Ok(Derivative { du: y[0], ddu: y[1], dv: y[2], ddv: y[3] })
}

/// The vector field as a closure over `[u, u', v, v']`, unchecked.
pub(crate) fn field<T: Scalar>(n: SpaceDim, pq: ExponentPair<T>) -> impl Fn(T, &[T; 4]) -> [T; 4] + Copy {
    let damping = n.damping::<T>();
    move |t: T, y: &[T; 4]| {
        let c = damping / t.tanh();
        [y[1], -c * y[1] - odd_pow(y[2], pq.p), y[3], -c * y[3] - odd_pow(y[0], pq.q)]
    }
}

/// Largest admissible series-start point.
pub const MAX_T0: f64 = 0.1;

/// State at `t0` from the even power series about the origin with
/// `u(0) = a`, `v(0) = b`, `u'(0) = v'(0) = 0`, including the `t^4` terms.
pub fn taylor_start<T: Scalar>(a: T, b: T, n: SpaceDim, pq: &ExponentPair<T>, t0: T) -> Result<RadialState<T>> {
    if !(a > T::zero() && b > T::zero() && a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("initial values a = {a}, b = {b} must be positive")));
    }
    if !(t0 > T::zero() && t0 <= T::c(MAX_T0)) {
        return Err(Error::InvalidInput(format!("series start t0 = {t0} outside (0, {MAX_T0}]")));
    }
    let nn = n.as_scalar::<T>();
    let m = n.damping::<T>();
    let two = T::c(2.0);
    let four = T::c(4.0);
    // u = a + alpha t^2 + beta t^4,  v = b + gamma t^2 + delta t^4
    let alpha = -odd_pow(b, pq.p) / (two * nn);
    let gamma = -odd_pow(a, pq.q) / (two * nn);
    // (N-1) coth t u' = (N-1)(2 alpha + (4 beta + 2 alpha / 3) t^2) + O(t^4)
    let denom = four * (nn + two);
    let beta = -(two * m * alpha / T::c(3.0) + pq.p * b.powf(pq.p - T::one()) * gamma) / denom;
    let delta = -(two * m * gamma / T::c(3.0) + pq.q * a.powf(pq.q - T::one()) * alpha) / denom;
    let t2 = t0 * t0;
    let state = RadialState {
        t: t0,
        u: a + (alpha + beta * t2) * t2,
        du: (two * alpha + four * beta * t2) * t0,
        v: b + (gamma + delta * t2) * t2,
        dv: (two * gamma + four * delta * t2) * t0,
    };
    if !state.is_finite() {
        return Err(Error::Domain(format!("series start overflows for a = {a}, b = {b}")));
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(n: u32) -> SpaceDim {
        SpaceDim::new(n).unwrap()
    }

    #[test]
    fn exponents_must_exceed_one() {
        assert!(ExponentPair::new(1.0, 2.0).is_err());
        assert!(ExponentPair::new(2.0, f64::NAN).is_err());
        assert!(ExponentPair::new(1.5, 2.0).is_ok());
    }

    #[test]
    fn rhs_examples() {
        let pq = ExponentPair::new(2.0, 2.0).unwrap();
        let d = rhs(&RadialState::new(1.0, 1.0, 0.0, 1.0, 0.0), dim(3), &pq).unwrap();
        assert_eq!((d.ddu, d.ddv), (-1.0, -1.0));
        assert_eq!((d.du, d.dv), (0.0, 0.0));

        let d = rhs(&RadialState::new(1.0, 1.0, -0.1, 1.0, 0.0), dim(3), &pq).unwrap();
        assert!((d.ddu - (2.0 * 0.1 / 1.0_f64.tanh() - 1.0)).abs() < 1e-15);
        assert!((d.ddu + 0.73740).abs() < 1e-5);

        let d = rhs(&RadialState::new(1.0, 1.0, 0.0, -0.5, 0.0), dim(3), &pq).unwrap();
        assert_eq!(d.ddu, 0.25);
    }

    #[test]
    fn rhs_rejects_origin_and_nan() {
        let pq = ExponentPair::new(2.0, 2.0).unwrap();
        assert_eq!(rhs(&RadialState::new(0.0, 1.0, 0.0, 1.0, 0.0), dim(3), &pq), Err(Error::Singularity));
        assert!(matches!(
            rhs(&RadialState::new(1.0, f64::NAN, 0.0, 1.0, 0.0), dim(3), &pq),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn taylor_start_examples() {
        let pq = ExponentPair::new(2.0, 2.0).unwrap();
        let s: RadialState<f64> = taylor_start(1.0, 1.0, dim(3), &pq, 0.01).unwrap();
        assert!((s.u - (1.0 - 1e-4 / 6.0)).abs() < 1e-9);
        assert!((s.du + 0.01 / 3.0).abs() < 1e-6);
        assert_eq!(s.u, s.v);
        assert_eq!(s.du, s.dv);

        let pq = ExponentPair::new(3.0, 2.0).unwrap();
        let s: RadialState<f64> = taylor_start(2.0, 1.0, dim(4), &pq, 0.05).unwrap();
        assert!((s.u - 1.9996875).abs() < 1e-5);
        assert!((s.v - 0.99875).abs() < 1e-5);
    }

    #[test]
    fn taylor_start_fourth_order_terms() {
        // a = b = 1, N = 3, p = q = 2: alpha = -1/6, beta = (2/9 + 1/3)/20 = 1/36
        let pq = ExponentPair::new(2.0, 2.0).unwrap();
        let s: RadialState<f64> = taylor_start(1.0, 1.0, dim(3), &pq, 0.01).unwrap();
        let t: f64 = 0.01;
        assert!((s.u - (1.0 - t * t / 6.0 + t.powi(4) / 36.0)).abs() < 1e-16);
        assert!((s.du - (-t / 3.0 + t.powi(3) / 9.0)).abs() < 1e-16);
    }

    #[test]
    fn taylor_start_validates_inputs() {
        let pq = ExponentPair::new(2.0, 2.0).unwrap();
        assert!(taylor_start(1.0, 1.0, dim(3), &pq, 0.0).is_err());
        assert!(taylor_start(1.0, 1.0, dim(3), &pq, 0.2).is_err());
        assert!(taylor_start(0.0, 1.0, dim(3), &pq, 0.01).is_err());
    }
}
