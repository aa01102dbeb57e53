//! Poincaré-ball and geodesic-polar coordinates, the radial volume weight
//! `(sinh t)^(N-1)`, and weighted quadrature on the half line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dimension `N >= 3` of the hyperbolic space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct SpaceDim(u32);

impl SpaceDim {
    pub fn new(n: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("dimension N = {n} must be at least 3")));
        }
        Ok(SpaceDim(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn as_scalar<T: Scalar>(self) -> T {
        T::c(self.0 as f64)
    }

    /// `N - 1`, the damping coefficient of the radial operator.
    pub fn damping<T: Scalar>(self) -> T {
        T::c((self.0 - 1) as f64)
    }

    /// Critical Sobolev exponent `(N+2)/(N-2)`.
    pub fn critical_exponent<T: Scalar>(self) -> T {
        T::c((self.0 + 2) as f64) / T::c((self.0 - 2) as f64)
    }
}

impl TryFrom<u32> for SpaceDim {
    type Error = Error;
    fn try_from(n: u32) -> Result<Self> {
        SpaceDim::new(n)
    }
}

impl From<SpaceDim> for u32 {
    fn from(n: SpaceDim) -> u32 {
        n.0
    }
}

/// A point of the Poincaré ball, stored by its Euclidean radius `rho` and the
/// gap `1 - rho`.
///
/// Both are kept because `rho` rounds to exactly one in floating point long
/// before the geodesic distance becomes large (`t > 37` in `f64`); the gap
/// carries the information there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallRadius<T> {
    rho: T,
    gap: T,
}

impl<T: Scalar> BallRadius<T> {
    pub fn new(rho: T) -> Result<Self> {
        if !rho.is_finite() || rho < T::zero() || rho >= T::one() {
            return Err(Error::Domain(format!("ball radius {rho} outside [0, 1)")));
        }
        Ok(BallRadius { rho, gap: T::one() - rho })
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    /// `1 - rho`, accurate even when `rho` rounds to one.
    pub fn gap(&self) -> T {
        self.gap
    }
}

/// `rho = tanh(t / 2)`.
pub fn ball_radius_from_geodesic<T: Scalar>(t: T) -> Result<BallRadius<T>> {
    if !t.is_finite() || t < T::zero() {
        return Err(Error::Domain(format!("geodesic distance {t} must be finite and >= 0")));
    }
    let two = T::c(2.0);
    let e = (-t).exp();
    let gap = two * e / (T::one() + e);
    if gap <= T::zero() {
        return Err(Error::Domain(format!("geodesic distance {t} too large: ball radius indistinguishable from 1")));
    }
    Ok(BallRadius { rho: (t / two).tanh(), gap })
}

/// `t = 2 artanh(rho)`.
pub fn geodesic_from_ball_radius<T: Scalar>(r: BallRadius<T>) -> T {
    let two = T::c(2.0);
    if r.rho < T::c(0.5) {
        // 2 artanh(rho) = ln1p(2 rho / (1 - rho))
        (two * r.rho / (T::one() - r.rho)).ln_1p()
    } else {
        ((two - r.gap) / r.gap).ln()
    }
}

/// Radial volume weight `k(t) = (sinh t)^(N-1)`.
pub fn weight_k<T: Scalar>(t: T, n: SpaceDim) -> Result<T> {
    if !t.is_finite() || t < T::zero() {
        return Err(Error::Domain(format!("weight requested at t = {t}")));
    }
    Ok(weight_k_unchecked(t, n))
}

pub(crate) fn weight_k_unchecked<T: Scalar>(t: T, n: SpaceDim) -> T {
    let m = n.get() as i32 - 1;
    if t > T::c(20.0) {
        // ln sinh t = t + ln(1 - e^{-2t}) - ln 2
        let ln_sinh = t + (-(-T::c(2.0) * t).exp()).ln_1p() - T::LN_2();
        (T::c(m as f64) * ln_sinh).exp()
    } else {
        t.sinh().powi(m)
    }
}

/// Surface area of the unit sphere `S^(N-1)`: `2 pi^(N/2) / Gamma(N/2)`.
pub fn sphere_area<T: Scalar>(n: SpaceDim) -> T {
    let n = n.get();
    // Gamma(N/2) by upward recurrence from Gamma(1) or Gamma(1/2).
    let (mut x, mut gamma) = if n.is_multiple_of(2) { (T::one(), T::one()) } else { (T::c(0.5), T::PI().sqrt()) };
    let half_n = T::c(n as f64 / 2.0);
    while x < half_n {
        gamma = gamma * x;
        x = x + T::one();
    }
    T::c(2.0) * T::PI().powf(half_n) / gamma
}

/// Strictly increasing nodes on the half line with one sample per node.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid<T, V = T> {
    nodes: Vec<T>,
    values: Vec<V>,
}

impl<T: Scalar, V> RadialGrid<T, V> {
    pub fn new(nodes: Vec<T>, values: Vec<V>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::InvalidInput(format!("{} nodes but {} values", nodes.len(), values.len())));
        }
        if let Some(first) = nodes.first() {
            if !first.is_finite() || *first < T::zero() {
                return Err(Error::InvalidInput(format!("first node {first} must be >= 0")));
            }
        }
        if let Some(i) = nodes.windows(2).position(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::InvalidInput(format!("nodes not strictly increasing at index {}", i + 1)));
        }
        Ok(RadialGrid { nodes, values })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `omega_(N-1) * integral of k(t) f(t) dt` over the span of the grid.
///
/// Piecewise quadratic (Simpson) rule on consecutive node pairs, which
/// reduces to trapezoid plus one Richardson pass on uniform nodes. A trailing
/// odd interval uses the quadratic through the last three nodes.
pub fn radial_integral<T: Scalar>(grid: &RadialGrid<T>, n: SpaceDim) -> Result<T> {
    if grid.len() < 3 {
        return Err(Error::InvalidInput(format!("radial quadrature needs at least 3 nodes, got {}", grid.len())));
    }
    if let Some(i) = grid.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite sample at node {i}")));
    }
    let integrand: Vec<T> = grid
        .nodes
        .iter()
        .zip(&grid.values)
        .map(|(&t, &f)| if f == T::zero() { T::zero() } else { weight_k_unchecked(t, n) * f })
        .collect();
    Ok(sphere_area::<T>(n) * simpson_nonuniform(&grid.nodes, &integrand))
}

/// Composite Simpson rule on non-uniform nodes (`x.len() >= 3`).
pub(crate) fn simpson_nonuniform<T: Scalar>(x: &[T], f: &[T]) -> T {
    let six = T::c(6.0);
    let two = T::c(2.0);
    let n = x.len();
    let mut acc = T::zero();
    let mut i = 0;
    while i + 2 < n {
        let h1 = x[i + 1] - x[i];
        let h2 = x[i + 2] - x[i + 1];
        let s = h1 + h2;
        acc = acc + s / six * ((two - h2 / h1) * f[i] + s * s / (h1 * h2) * f[i + 1] + (two - h1 / h2) * f[i + 2]);
        i += 2;
    }
    if i + 1 < n {
        // last interval [x[n-2], x[n-1]] from the quadratic through the last three nodes
        let (x0, x1, x2) = (x[n - 3], x[n - 2], x[n - 1]);
        let h1 = x1 - x0;
        let h2 = x2 - x1;
        let three = T::c(3.0);
        let w0 = -h2 * h2 * h2 / (six * h1 * (h1 + h2));
        let w1 = h2 * (h2 + three * h1) / (six * h1);
        let w2 = h2 * (two * h2 + three * h1) / (six * (h1 + h2));
        acc = acc + w0 * f[n - 3] + w1 * f[n - 2] + w2 * f[n - 1];
    }
    acc
}

/// `omega_(N-1) * integral over [t_end, inf) of k(t) f(t) dt` for a tail
/// `f(t) = f_end exp(rate (t - t_end))`, closed in terms of the
/// asymptotic weight `k(t) ~ k(t_end) exp((N-1)(t - t_end))`.
pub fn tail_integral<T: Scalar>(t_end: T, f_end: T, rate: T, n: SpaceDim) -> Result<T> {
    let total_rate = rate + n.damping::<T>();
    if f_end == T::zero() {
        return Ok(T::zero());
    }
    if !(total_rate < T::zero()) {
        return Err(Error::Domain(format!("tail with log-rate {rate} is not integrable against the volume weight")));
    }
    Ok(sphere_area::<T>(n) * weight_k(t_end, n)? * f_end / (-total_rate))
}
