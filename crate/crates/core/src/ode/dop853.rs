//! Dormand–Prince 8(5,3) embedded Runge–Kutta pair with 7th order dense
//! output (Hairer, Nørsett & Wanner's DOP853 tableau) and a
//! proportional-integral step controller.
//!
//! The driver is generic over the scalar type and the state dimension and
//! integrates in either direction of time.
#![allow(clippy::excessive_precision, clippy::too_many_arguments)]

use crate::scalar::Scalar;

pub(crate) type Vector<T, const D: usize> = [T; D];

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Tolerance<T> {
    pub rel: T,
    pub abs: T,
}

/// Step-acceptance statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

impl StepStats {
    pub fn merge(self, other: StepStats) -> StepStats {
        StepStats {
            accepted: self.accepted + other.accepted,
            rejected: self.rejected + other.rejected,
            rhs_evals: self.rhs_evals + other.rhs_evals,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum DriveFailure<T> {
    StepUnderflow { t: T, h: T },
    TooManySteps { t: T },
}

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;
/// Lund stabilisation weight of the PI controller.
const BETA: f64 = 0.04;
const MAX_STEPS: usize = 2_000_000;

#[inline]
fn axpy<T: Scalar, const D: usize>(y: &Vector<T, D>, h: T, terms: &[(f64, &Vector<T, D>)]) -> Vector<T, D> {
    let mut out = *y;
    for i in 0..D {
        let mut acc = T::zero();
        for (c, k) in terms {
            acc = acc + T::c(*c) * k[i];
        }
        out[i] = out[i] + h * acc;
    }
    out
}

#[inline]
fn comb<T: Scalar, const D: usize>(terms: &[(f64, &Vector<T, D>)]) -> Vector<T, D> {
    let mut out = [T::zero(); D];
    for i in 0..D {
        for (c, k) in terms {
            out[i] = out[i] + T::c(*c) * k[i];
        }
    }
    out
}

/// Everything an accepted step leaves behind; enough to build the dense
/// output on demand.
#[derive(Debug, Clone)]
pub(crate) struct StepData<T, const D: usize> {
    pub t_old: T,
    pub t_new: T,
    pub h: T,
    pub y_old: Vector<T, D>,
    pub y_new: Vector<T, D>,
    k1: Vector<T, D>,
    k6: Vector<T, D>,
    k7: Vector<T, D>,
    k8: Vector<T, D>,
    k9: Vector<T, D>,
    k10: Vector<T, D>,
    k11: Vector<T, D>,
    k12: Vector<T, D>,
    f_new: Vector<T, D>,
}

/// Continuous extension over one accepted step.
#[derive(Debug, Clone)]
pub(crate) struct Dense<T, const D: usize> {
    t_old: T,
    h: T,
    cont: [Vector<T, D>; 8],
}

impl<T: Scalar, const D: usize> Dense<T, D> {
    pub fn eval(&self, t: T) -> Vector<T, D> {
        let s = (t - self.t_old) / self.h;
        let s1 = T::one() - s;
        let c = &self.cont;
        let mut y = [T::zero(); D];
        for i in 0..D {
            let conpar = c[4][i] + (c[5][i] + (c[6][i] + c[7][i] * s) * s1) * s;
            y[i] = c[0][i] + (c[1][i] + (c[2][i] + (c[3][i] + conpar * s1) * s) * s1) * s;
        }
        y
    }
}

impl<T: Scalar, const D: usize> StepData<T, D> {
    /// Builds the 7th order interpolant; costs three extra right-hand side
    /// evaluations.
    pub fn dense<F>(&self, f: &F) -> Dense<T, D>
    where
        F: Fn(T, &Vector<T, D>) -> Vector<T, D>,
    {
        let (t, h, y) = (self.t_old, self.h, &self.y_old);
        let (k1, k6, k7, k8, k9, k10, k11, k12, k13) =
            (&self.k1, &self.k6, &self.k7, &self.k8, &self.k9, &self.k10, &self.k11, &self.k12, &self.f_new);
        let k14 = f(
            t + T::c(C14) * h,
            &axpy(
                y,
                h,
                &[
                    (A141, k1),
                    (A147, k7),
                    (A148, k8),
                    (A149, k9),
                    (A1410, k10),
                    (A1411, k11),
                    (A1412, k12),
                    (A1413, k13),
                ],
            ),
        );
        let k15 = f(
            t + T::c(C15) * h,
            &axpy(
                y,
                h,
                &[
                    (A151, k1),
                    (A156, k6),
                    (A157, k7),
                    (A158, k8),
                    (A1511, k11),
                    (A1512, k12),
                    (A1513, k13),
                    (A1514, &k14),
                ],
            ),
        );
        let k16 = f(
            t + T::c(C16) * h,
            &axpy(
                y,
                h,
                &[
                    (A161, k1),
                    (A166, k6),
                    (A167, k7),
                    (A168, k8),
                    (A169, k9),
                    (A1613, k13),
                    (A1614, &k14),
                    (A1615, &k15),
                ],
            ),
        );
        let mut cont = [[T::zero(); D]; 8];
        for i in 0..D {
            let ydiff = self.y_new[i] - y[i];
            let bspl = h * k1[i] - ydiff;
            cont[0][i] = y[i];
            cont[1][i] = ydiff;
            cont[2][i] = bspl;
            cont[3][i] = ydiff - h * k13[i] - bspl;
        }
        let rows: [[f64; 16]; 4] = [
            [D41, 0.0, 0.0, 0.0, 0.0, D46, D47, D48, D49, D410, D411, D412, D413, D414, D415, D416],
            [D51, 0.0, 0.0, 0.0, 0.0, D56, D57, D58, D59, D510, D511, D512, D513, D514, D515, D516],
            [D61, 0.0, 0.0, 0.0, 0.0, D66, D67, D68, D69, D610, D611, D612, D613, D614, D615, D616],
            [D71, 0.0, 0.0, 0.0, 0.0, D76, D77, D78, D79, D710, D711, D712, D713, D714, D715, D716],
        ];
        for (r, d) in rows.iter().enumerate() {
            let v = comb(&[
                (d[0], k1),
                (d[5], k6),
                (d[6], k7),
                (d[7], k8),
                (d[8], k9),
                (d[9], k10),
                (d[10], k11),
                (d[11], k12),
                (d[12], k13),
                (d[13], &k14),
                (d[14], &k15),
                (d[15], &k16),
            ]);
            for i in 0..D {
                cont[4 + r][i] = h * v[i];
            }
        }
        Dense { t_old: t, h, cont }
    }
}

struct Attempt<T, const D: usize> {
    y_new: Vector<T, D>,
    err: T,
    stages: [Vector<T, D>; 8],
}

/// The twelve stages of one trial step; `err` is the scaled error norm
/// (`None` tolerance skips the estimate).
fn attempt<T: Scalar, const D: usize, F>(
    f: &F,
    t: T,
    y: &Vector<T, D>,
    k1: &Vector<T, D>,
    h: T,
    tol: Option<Tolerance<T>>,
) -> Attempt<T, D>
where
    F: Fn(T, &Vector<T, D>) -> Vector<T, D>,
{
    let k2 = f(t + T::c(C2) * h, &axpy(y, h, &[(A21, k1)]));
    let k3 = f(t + T::c(C3) * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(t + T::c(C4) * h, &axpy(y, h, &[(A41, k1), (A43, &k3)]));
    let k5 = f(t + T::c(C5) * h, &axpy(y, h, &[(A51, k1), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + T::c(C6) * h, &axpy(y, h, &[(A61, k1), (A64, &k4), (A65, &k5)]));
    let k7 = f(t + T::c(C7) * h, &axpy(y, h, &[(A71, k1), (A74, &k4), (A75, &k5), (A76, &k6)]));
    let k8 = f(t + T::c(C8) * h, &axpy(y, h, &[(A81, k1), (A84, &k4), (A85, &k5), (A86, &k6), (A87, &k7)]));
    let k9 = f(t + T::c(C9) * h, &axpy(y, h, &[(A91, k1), (A94, &k4), (A95, &k5), (A96, &k6), (A97, &k7), (A98, &k8)]));
    let k10 = f(
        t + T::c(C10) * h,
        &axpy(y, h, &[(A101, k1), (A104, &k4), (A105, &k5), (A106, &k6), (A107, &k7), (A108, &k8), (A109, &k9)]),
    );
    let k11 = f(
        t + T::c(C11) * h,
        &axpy(
            y,
            h,
            &[(A111, k1), (A114, &k4), (A115, &k5), (A116, &k6), (A117, &k7), (A118, &k8), (A119, &k9), (A1110, &k10)],
        ),
    );
    let yy1 = axpy(
        y,
        h,
        &[
            (A121, k1),
            (A124, &k4),
            (A125, &k5),
            (A126, &k6),
            (A127, &k7),
            (A128, &k8),
            (A129, &k9),
            (A1210, &k10),
            (A1211, &k11),
        ],
    );
    let k12 = f(t + h, &yy1);
    let sum = comb(&[(B1, k1), (B6, &k6), (B7, &k7), (B8, &k8), (B9, &k9), (B10, &k10), (B11, &k11), (B12, &k12)]);
    let mut y_new = *y;
    for i in 0..D {
        y_new[i] = y[i] + h * sum[i];
    }

    let err = match tol {
        None => T::zero(),
        Some(tol) => {
            let mut err = T::zero();
            let mut err2 = T::zero();
            for i in 0..D {
                let sk = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
                let e2 = sum[i] - T::c(BHH1) * k1[i] - T::c(BHH2) * k9[i] - T::c(BHH3) * k12[i];
                err2 = err2 + (e2 / sk) * (e2 / sk);
                let e = T::c(ER1) * k1[i]
                    + T::c(ER6) * k6[i]
                    + T::c(ER7) * k7[i]
                    + T::c(ER8) * k8[i]
                    + T::c(ER9) * k9[i]
                    + T::c(ER10) * k10[i]
                    + T::c(ER11) * k11[i]
                    + T::c(ER12) * k12[i];
                err = err + (e / sk) * (e / sk);
            }
            let mut deno = err + T::c(0.01) * err2;
            if deno <= T::zero() {
                deno = T::one();
            }
            let e = h.abs() * err * (T::one() / (deno * T::c(D as f64))).sqrt();
            if e.is_finite() && y_new.iter().all(|v| v.is_finite()) {
                e
            } else {
                T::infinity()
            }
        }
    };
    Attempt { y_new, err, stages: [k6, k7, k8, k9, k10, k11, k12, sum] }
}

/// Hairer's starting step heuristic for an order-8 method.
fn initial_step<T: Scalar, const D: usize, F>(
    f: &F,
    t: T,
    y: &Vector<T, D>,
    f0: &Vector<T, D>,
    direction: T,
    h_max: T,
    tol: Tolerance<T>,
) -> T
where
    F: Fn(T, &Vector<T, D>) -> Vector<T, D>,
{
    let mut dnf = T::zero();
    let mut dny = T::zero();
    for i in 0..D {
        let sk = tol.abs + tol.rel * y[i].abs();
        dnf = dnf + (f0[i] / sk) * (f0[i] / sk);
        dny = dny + (y[i] / sk) * (y[i] / sk);
    }
    let mut h = if dnf <= T::c(1e-10) || dny <= T::c(1e-10) { T::c(1e-6) } else { (dny / dnf).sqrt() * T::c(0.01) };
    h = h.min(h_max) * direction;
    let y1 = axpy(y, h, &[(1.0, f0)]);
    let f1 = f(t + h, &y1);
    let mut der2 = T::zero();
    for i in 0..D {
        let sk = tol.abs + tol.rel * y[i].abs();
        let d = (f1[i] - f0[i]) / sk;
        der2 = der2 + d * d;
    }
    let der2 = der2.sqrt() / h.abs();
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= T::c(1e-15) {
        T::c(1e-6).max(h.abs() * T::c(1e-3))
    } else {
        (T::c(0.01) / der12).powf(T::c(1.0 / 8.0))
    };
    (T::c(100.0) * h.abs()).min(h1).min(h_max) * direction
}

/// Adaptive integration of `y' = f(t, y)` from `t0` to `t_end`, calling
/// `observer` after every accepted step. The observer may stop early.
pub(crate) fn drive<T, const D: usize, F, O>(
    f: &F,
    t0: T,
    y0: Vector<T, D>,
    t_end: T,
    tol: Tolerance<T>,
    mut observer: O,
) -> Result<StepStats, (DriveFailure<T>, StepStats)>
where
    T: Scalar,
    F: Fn(T, &Vector<T, D>) -> Vector<T, D>,
    O: FnMut(&StepData<T, D>, &F) -> Flow,
{
    let mut stats = StepStats::default();
    if t_end == t0 {
        return Ok(stats);
    }
    let direction = (t_end - t0).signum();
    let span = (t_end - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    stats.rhs_evals += 1;
    let mut h = initial_step(f, t, &y, &k1, direction, span, tol);
    stats.rhs_evals += 1;
    let expo1 = T::c(1.0 / 8.0 - BETA * 0.2);
    let mut facold = T::c(1e-4);
    let mut last_rejected = false;

    loop {
        if stats.accepted + stats.rejected >= MAX_STEPS {
            return Err((DriveFailure::TooManySteps { t }, stats));
        }
        if T::c(0.1) * h.abs() <= t.abs() * T::epsilon() || h == T::zero() {
            return Err((DriveFailure::StepUnderflow { t, h }, stats));
        }
        let mut last = false;
        if (t + T::c(1.01) * h - t_end) * direction > T::zero() {
            h = t_end - t;
            last = true;
        }
        // use the exactly representable step so a replay on the mesh agrees
        h = (t + h) - t;
        let trial = attempt(f, t, &y, &k1, h, Some(tol));
        stats.rhs_evals += 11;
        let err = trial.err;

        let fac11 = err.powf(expo1);
        let fac = (fac11 / facold.powf(T::c(BETA)) / T::c(SAFE)).min(T::c(1.0 / FAC_MIN)).max(T::c(1.0 / FAC_MAX));
        let mut h_new = h / fac;

        if err <= T::one() {
            facold = err.max(T::c(1e-4));
            stats.accepted += 1;
            let t_new = if last { t_end } else { t + h };
            let f_new = f(t_new, &trial.y_new);
            stats.rhs_evals += 1;
            let [k6, k7, k8, k9, k10, k11, k12, _] = trial.stages;
            let step =
                StepData { t_old: t, t_new, h, y_old: y, y_new: trial.y_new, k1, k6, k7, k8, k9, k10, k11, k12, f_new };
            let flow = observer(&step, f);
            t = t_new;
            y = trial.y_new;
            k1 = f_new;
            if flow == Flow::Stop || last {
                return Ok(stats);
            }
            if last_rejected {
                h_new = direction * h_new.abs().min(h.abs());
            }
            last_rejected = false;
        } else {
            let shrink = (fac11 / T::c(SAFE)).min(T::c(1.0 / FAC_MIN));
            h_new = if err.is_finite() { h / shrink } else { h * T::c(FAC_MIN) };
            stats.rejected += 1;
            last_rejected = true;
        }
        h = h_new;
    }
}

/// Integrates through the prescribed `mesh` (first entry is the start time)
/// with one unchecked step per interval. Returns the state at every mesh node.
pub(crate) fn replay<T, const D: usize, F>(f: &F, mesh: &[T], y0: Vector<T, D>) -> Vec<Vector<T, D>>
where
    T: Scalar,
    F: Fn(T, &Vector<T, D>) -> Vector<T, D>,
{
    let mut out = Vec::with_capacity(mesh.len());
    let mut y = y0;
    out.push(y);
    for w in mesh.windows(2) {
        let k1 = f(w[0], &y);
        y = attempt(f, w[0], &y, &k1, w[1] - w[0], None).y_new;
        out.push(y);
    }
    out
}

// Butcher Tableau for DOP853
const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;

const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;

const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;

const A141: f64 = 5.61675022830479523392909219681E-2;
const A147: f64 = 2.53500210216624811088794765333E-1;
const A148: f64 = -2.46239037470802489917441475441E-1;
const A149: f64 = -1.24191423263816360469010140626E-1;
const A1410: f64 = 1.5329179827876569731206322685E-1;
const A1411: f64 = 8.20105229563468988491666602057E-3;
const A1412: f64 = 7.56789766054569976138603589584E-3;
const A1413: f64 = -8.298E-3;

const A151: f64 = 3.18346481635021405060768473261E-2;
const A156: f64 = 2.83009096723667755288322961402E-2;
const A157: f64 = 5.35419883074385676223797384372E-2;
const A158: f64 = -5.49237485713909884646569340306E-2;
const A1511: f64 = -1.08347328697249322858509316994E-4;
const A1512: f64 = 3.82571090835658412954920192323E-4;
const A1513: f64 = -3.40465008687404560802977114492E-4;
const A1514: f64 = 1.41312443674632500278074618366E-1;
const A161: f64 = -4.28896301583791923408573538692E-1;
const A166: f64 = -4.69762141536116384314449447206E0;
const A167: f64 = 7.68342119606259904184240953878E0;
const A168: f64 = 4.06898981839711007970213554331E0;
const A169: f64 = 3.56727187455281109270669543021E-1;
const A1613: f64 = -1.39902416515901462129418009734E-3;
const A1614: f64 = 2.9475147891527723389556272149E0;
const A1615: f64 = -9.15095847217987001081870187138E0;

const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;

const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;

const C2: f64 = 0.526001519587677318785587544488E-01;
const C3: f64 = 0.789002279381515978178381316732E-01;
const C4: f64 = 0.118350341907227396726757197510E+00;
const C5: f64 = 0.281649658092772603273242802490E+00;
const C6: f64 = 0.333333333333333333333333333333E+00;
const C7: f64 = 0.25E+00;
const C8: f64 = 0.307692307692307692307692307692E+00;
const C9: f64 = 0.651282051282051282051282051282E+00;
const C10: f64 = 0.6E+00;
const C11: f64 = 0.857142857142857142857142857142E+00;
const C14: f64 = 0.1E+00;
const C15: f64 = 0.2E+00;
const C16: f64 = 0.777777777777777777777777777778E+00;

const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;

const D41: f64 = -0.84289382761090128651353491142E+01;
const D46: f64 = 0.56671495351937776962531783590E+00;
const D47: f64 = -0.30689499459498916912797304727E+01;
const D48: f64 = 0.23846676565120698287728149680E+01;
const D49: f64 = 0.21170345824450282767155149946E+01;
const D410: f64 = -0.87139158377797299206789907490E+00;
const D411: f64 = 0.22404374302607882758541771650E+01;
const D412: f64 = 0.63157877876946881815570249290E+00;
const D413: f64 = -0.88990336451333310820698117400E-01;
const D414: f64 = 0.18148505520854727256656404962E+02;
const D415: f64 = -0.91946323924783554000451984436E+01;
const D416: f64 = -0.44360363875948939664310572000E+01;

const D51: f64 = 0.10427508642579134603413151009E+02;
const D56: f64 = 0.24228349177525818288430175319E+03;
const D57: f64 = 0.16520045171727028198505394887E+03;
const D58: f64 = -0.37454675472269020279518312152E+03;
const D59: f64 = -0.22113666853125306036270938578E+02;
const D510: f64 = 0.77334326684722638389603898808E+01;
const D511: f64 = -0.30674084731089398182061213626E+02;
const D512: f64 = -0.93321305264302278729567221706E+01;
const D513: f64 = 0.15697238121770843886131091075E+02;
const D514: f64 = -0.31139403219565177677282850411E+02;
const D515: f64 = -0.93529243588444783865713862664E+01;
const D516: f64 = 0.35816841486394083752465898540E+02;

const D61: f64 = 0.19985053242002433820987653617E+02;
const D66: f64 = -0.38703730874935176555105901742E+03;
const D67: f64 = -0.18917813819516756882830838328E+03;
const D68: f64 = 0.52780815920542364900561016686E+03;
const D69: f64 = -0.11573902539959630126141871134E+02;
const D610: f64 = 0.68812326946963000169666922661E+01;
const D611: f64 = -0.10006050966910838403183860980E+01;
const D612: f64 = 0.77771377980534432092869265740E+00;
const D613: f64 = -0.27782057523535084065932004339E+01;
const D614: f64 = -0.60196695231264120758267380846E+02;
const D615: f64 = 0.84320405506677161018159903784E+02;
const D616: f64 = 0.11992291136182789328035130030E+02;

const D71: f64 = -0.25693933462703749003312586129E+02;
const D76: f64 = -0.15418974869023643374053993627E+03;
const D77: f64 = -0.23152937917604549567536039109E+03;
const D78: f64 = 0.35763911791061412378285349910E+03;
const D79: f64 = 0.93405324183624310003907691704E+02;
const D710: f64 = -0.37458323136451633156875139351E+02;
const D711: f64 = 0.10409964950896230045147246184E+03;
const D712: f64 = 0.29840293426660503123344363579E+02;
const D713: f64 = -0.43533456590011143754432175058E+02;
const D714: f64 = 0.96324553959188282948394950600E+02;
const D715: f64 = -0.39177261675615439165231486172E+02;
const D716: f64 = -0.14972683625798562581422125276E+03;
#[cfg(test)]
mod tests {
    use super::*;

    fn tol(x: f64) -> Tolerance<f64> {
        Tolerance { rel: x, abs: x }
    }

    #[test]
    fn harmonic_oscillator_forward_and_backward() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut last = (0.0, [1.0, 0.0]);
        drive(&f, 0.0, [1.0, 0.0], 10.0, tol(1e-12), |s: &StepData<f64, 2>, _: &_| {
            last = (s.t_new, s.y_new);
            Flow::Continue
        })
        .unwrap();
        assert_eq!(last.0, 10.0);
        assert!((last.1[0] - 10.0_f64.cos()).abs() < 1e-10);
        assert!((last.1[1] + 10.0_f64.sin()).abs() < 1e-10);

        let mut back = [0.0; 2];
        drive(&f, 10.0, last.1, 0.0, tol(1e-12), |s: &StepData<f64, 2>, _: &_| {
            back = s.y_new;
            Flow::Continue
        })
        .unwrap();
        assert!((back[0] - 1.0).abs() < 1e-9 && back[1].abs() < 1e-9);
    }

    #[test]
    fn tighter_tolerance_reduces_global_error() {
        let f = |t: f64, y: &[f64; 1]| [-2.0 * t * y[0]];
        let err = |x: f64| {
            let mut end = 0.0;
            drive(&f, 0.0, [1.0], 2.0, tol(x), |s: &StepData<f64, 1>, _: &_| {
                end = s.y_new[0];
                Flow::Continue
            })
            .unwrap();
            (end - (-4.0_f64).exp()).abs()
        };
        assert!(err(1e-6) < 1e-5);
        assert!(err(1e-11) < 1e-10);
    }

    #[test]
    fn dense_output_is_accurate_inside_steps() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut worst: f64 = 0.0;
        drive(&f, 0.0, [0.0, 1.0], 6.0, tol(1e-11), |s: &StepData<f64, 2>, f: &_| {
            let d = s.dense(f);
            for j in 1..10 {
                let t = s.t_old + s.h * j as f64 / 10.0;
                worst = worst.max((d.eval(t)[0] - t.sin()).abs());
            }
            // interpolant reproduces the step end points
            assert!((d.eval(s.t_new)[0] - s.y_new[0]).abs() < 1e-14);
            Flow::Continue
        })
        .unwrap();
        assert!(worst < 1e-9, "dense output error {worst}");
    }

    #[test]
    fn replay_reproduces_adaptive_states() {
        let f = |t: f64, y: &[f64; 1]| [y[0].cos() + t];
        let mut mesh = vec![0.0];
        let mut states = vec![[0.5]];
        drive(&f, 0.0, [0.5], 3.0, tol(1e-9), |s: &StepData<f64, 1>, _: &_| {
            mesh.push(s.t_new);
            states.push(s.y_new);
            Flow::Continue
        })
        .unwrap();
        let replayed = replay(&f, &mesh, [0.5]);
        assert_eq!(replayed, states);
    }
}
