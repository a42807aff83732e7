//! Certified evaluation of `j` and Siegel functions on the upper half plane.
//!
//! Every series or product is truncated at an index where a proven
//! geometric tail bound falls below `2^{-P-16}`; the bound is added to the
//! radius of the result. Points far from the cusp at infinity are first
//! moved into the standard fundamental domain.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{egcd, gcd};
use crate::ball::{Ball, ErrorBall};
use crate::cusps::{CuspClass, CuspStructure};
use crate::error::{Error, Result};
use crate::modnt::ResidueMatrix;
use crate::par::Exec;
use crate::units::{bernoulli2, ell, TorsionIndex};

pub const DEFAULT_PRECISION: usize = 128;
pub const MAX_PRECISION: usize = 1024;
const MAX_TERMS: usize = 200_000;
/// Above this `|q|` evaluation goes through the fundamental domain.
const REDUCE_ABOVE: f64 = 0.05;

/// An integer matrix `(a b; c d)` of determinant 1.
pub type Sl2z = [i64; 4];

pub const IDENTITY: Sl2z = [1, 0, 0, 1];
pub const S: Sl2z = [0, -1, 1, 0];

pub fn sl2_mul(x: Sl2z, y: Sl2z) -> Sl2z {
    [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ]
}

pub fn sl2_inv(x: Sl2z) -> Sl2z {
    [x[3], -x[1], -x[2], x[0]]
}

pub fn translation(n: i64) -> Sl2z {
    [1, n, 0, 1]
}

/// `(a tau + b) / (c tau + d)` on balls.
pub fn mobius(g: Sl2z, tau: &ErrorBall) -> ErrorBall {
    let p = tau.prec();
    let k = |x: i64| ErrorBall::real(Ball::from_i64(x, p));
    let num = tau.mul(&k(g[0])).add(&k(g[1]));
    let den = tau.mul(&k(g[2])).add(&k(g[3]));
    num.div(&den)
}

type Source = Arc<dyn Fn(usize) -> ErrorBall + Send + Sync>;

/// A point of the upper half plane with a certified positive imaginary
/// part and its cached `q = e^{2 pi i tau}`.
#[derive(Clone)]
pub struct UpperHalfPoint {
    tau: ErrorBall,
    q: ErrorBall,
    source: Option<Source>,
}

impl fmt::Debug for UpperHalfPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UpperHalfPoint").field("tau", &self.tau).finish()
    }
}

impl UpperHalfPoint {
    pub fn new(tau: ErrorBall) -> Result<Self> {
        if !tau.im.is_positive() {
            return Err(Error::NotInUpperHalfPlane);
        }
        let q = tau.e2pi();
        Ok(UpperHalfPoint { tau, q, source: None })
    }

    /// A point given by a recipe that can be re-run at any precision.
    pub fn from_fn<F>(f: F, prec: usize) -> Result<Self>
    where
        F: Fn(usize) -> ErrorBall + Send + Sync + 'static,
    {
        let source: Source = Arc::new(f);
        let mut pt = Self::new(source(prec))?;
        pt.source = Some(source);
        Ok(pt)
    }

    pub fn from_f64(x: f64, y: f64, prec: usize) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::NotInUpperHalfPlane);
        }
        Self::from_fn(move |p| ErrorBall::from_f64(x, y, p), prec)
    }

    /// `e^{2 pi i / 3} + i eps`.
    pub fn rho(eps: f64, prec: usize) -> Result<Self> {
        Self::from_fn(
            move |p| {
                let h = Ball::from_i64(3, p).sqrt().expect("sqrt 3").div_i64(2);
                ErrorBall::new(Ball::from_ratio(-1, 2, p), h.add(&Ball::from_f64(eps, p)))
            },
            prec,
        )
    }

    pub fn tau(&self) -> &ErrorBall {
        &self.tau
    }

    pub fn q(&self) -> &ErrorBall {
        &self.q
    }

    pub fn prec(&self) -> usize {
        self.tau.prec()
    }

    pub fn is_refinable(&self) -> bool {
        self.source.is_some()
    }

    /// Recompute at precision `p` when the point has a recipe; otherwise
    /// keep the enclosure and only raise the working precision.
    pub fn at_precision(&self, p: usize) -> Result<Self> {
        match &self.source {
            Some(src) => {
                let mut pt = Self::new(src(p))?;
                pt.source = Some(src.clone());
                Ok(pt)
            }
            None => {
                let tau = ErrorBall::new(self.tau.re.with_prec(p), self.tau.im.with_prec(p));
                Self::new(tau)
            }
        }
    }

    /// `g tau`, keeping the recipe.
    pub fn apply(&self, g: Sl2z) -> Result<Self> {
        let p = self.prec();
        match &self.source {
            Some(src) => {
                let src = src.clone();
                Self::from_fn(move |q| mobius(g, &src(q)), p)
            }
            None => Self::new(mobius(g, &self.tau)),
        }
    }

    /// Upper bound for `|q|`.
    pub fn q_abs_upper(&self) -> f64 {
        self.q.abs().upper_f64()
    }
}

/// Move `tau` into the standard fundamental domain `-1/2 <= Re < 1/2`,
/// `|tau| >= 1`, with `Re <= 0` on the unit circle. Returns `(g tau, g)`.
pub fn reduce_fundamental(tau: &UpperHalfPoint) -> Result<(UpperHalfPoint, Sl2z)> {
    let p = tau.prec();
    let one = Ball::from_i64(1, p);
    let mut g = IDENTITY;
    for _ in 0..10_000 {
        let t = mobius(g, tau.tau());
        if !t.is_finite() {
            return Err(Error::PrecisionExhausted(p));
        }
        let (x, _) = t.mid_f64();
        let mut n = (x + 0.5).floor();
        if n == 0.0 {
            let half = Ball::from_ratio(1, 2, p);
            if t.re.lt(&half.neg()) == Some(true) {
                n = -1.0;
            } else if t.re.lt(&half) == Some(false) {
                n = 1.0;
            }
        }
        if n != 0.0 {
            if !n.is_finite() || n.abs() > 1e15 {
                return Err(Error::PrecisionExhausted(p));
            }
            g = sl2_mul(translation(-(n as i64)), g);
            continue;
        }
        let norm = t.norm_sqr();
        match norm.lt(&one) {
            Some(true) => {
                g = sl2_mul(S, g);
                continue;
            }
            Some(false) => {}
            None => {
                // On the unit circle up to ball width: keep the left half.
                if t.re.is_positive() {
                    g = sl2_mul(S, g);
                }
            }
        }
        let reduced = tau.apply(g)?;
        let rt = reduced.tau();
        let half = Ball::from_ratio(1, 2, p);
        let outside = rt.norm_sqr().lt(&one) == Some(true)
            || rt.re.lt(&half.neg()) == Some(true)
            || rt.re.lt(&half) == Some(false);
        if outside {
            return Err(Error::PrecisionExhausted(p));
        }
        return Ok((reduced, g));
    }
    Err(Error::PrecisionExhausted(p))
}

fn sigma3_table(m: usize) -> Vec<i64> {
    let mut s = vec![0i64; m + 1];
    for d in 1..=m {
        let d3 = (d as i64).pow(3);
        let mut k = d;
        while k <= m {
            s[k] += d3;
            k += d;
        }
    }
    s
}

/// Smallest `m` with `c m^k r^m / (1 - rho) < 2^{-target_bits}` in logs.
fn choose_terms(log_r: f64, log_c: f64, k: f64, target_bits: usize) -> Result<usize> {
    let target = -(target_bits as f64 + 2.0) * std::f64::consts::LN_2;
    if log_r.is_nan() || log_r >= 0.0 {
        return Err(Error::PrecisionExhausted(target_bits));
    }
    for m in 1..MAX_TERMS {
        let mf = m as f64 + 1.0;
        let rho = ((mf + 1.0) / mf).powf(k) * log_r.exp();
        if rho >= 0.5 {
            continue;
        }
        if log_c + k * mf.ln() + mf * log_r + 2f64.ln() < target {
            return Ok(m);
        }
    }
    Err(Error::PrecisionExhausted(target_bits))
}

/// Rigorous upper bound for `c * (m+1)^k * r^{m+1} / (1 - rho)` with
/// `rho = ((m+2)/(m+1))^k r`, as a BigFloat.
fn tail_bound(r: &Ball, m: usize, k: u32, c: f64) -> Result<Ball> {
    let p = r.prec();
    let mf = Ball::from_i64(m as i64 + 1, p);
    let ratio = Ball::from_i64(m as i64 + 2, p).div(&mf).powi(k).mul(r);
    let one = Ball::from_i64(1, p);
    if ratio.lt(&one) != Some(true) {
        return Err(Error::PrecisionExhausted(p));
    }
    let t = Ball::from_f64(c, p)
        .mul(&mf.powi(k))
        .mul(&r.powi(m as u32 + 1))
        .div(&one.sub(&ratio));
    Ok(t)
}

fn r_upper(q: &ErrorBall) -> Ball {
    let a = q.abs();
    Ball::exact(a.upper(), 64)
}

/// The series part of `j`, without reduction.
fn eval_j_series(q: &ErrorBall, prec: usize) -> Result<ErrorBall> {
    let r = r_upper(q);
    let rf = r.upper_f64();
    if rf.is_nan() || rf >= 0.5 {
        return Err(Error::PrecisionExhausted(prec));
    }
    let bits = prec + 16;
    let m_e4 = choose_terms(rf.ln(), (288.6f64).ln(), 3.0, bits)?;
    let m_p = choose_terms(rf.ln(), (33.4f64 / (1.0 - rf)).ln(), 0.0, bits)?;
    let m = m_e4.max(m_p);

    let sig = sigma3_table(m);
    let one = ErrorBall::one(prec);
    // E4 = 1 + 240 sum sigma3(n) q^n, by Horner.
    let mut h = ErrorBall::real(Ball::from_i64(sig[m], prec));
    for n in (1..m).rev() {
        h = h.mul(q).add(&ErrorBall::real(Ball::from_i64(sig[n], prec)));
    }
    let mut e4 = one.add(&h.mul(q).scale(&Ball::from_i64(240, prec)));
    let e4_tail = tail_bound(&r, m, 3, 288.6)?.upper();
    e4 = ErrorBall::new(e4.re.add_error(&e4_tail), e4.im.add_error(&e4_tail));

    // P = prod (1 - q^n); P^24 with a relative tail factor.
    let mut prod = one.clone();
    let mut qn = one.clone();
    for _ in 1..=m {
        qn = qn.mul(q);
        prod = prod.mul(&one.sub(&qn));
    }
    let rm1 = r.powi(m as u32 + 1);
    if rm1.upper_f64() > 0.5 {
        return Err(Error::PrecisionExhausted(prec));
    }
    let l = rm1
        .mul(&Ball::from_f64(24.0 * 1.39, 64))
        .div(&Ball::from_i64(1, 64).sub(&r));
    if l.upper_f64() > 0.5 {
        return Err(Error::PrecisionExhausted(prec));
    }
    let delta = l.mul_i64(2).upper();
    let factor = ErrorBall::new(
        Ball::from_i64(1, prec).add_error(&delta),
        Ball::zero(prec).add_error(&delta),
    );
    let p24 = prod.powi(24).mul(&factor);
    Ok(e4.powi(3).div(&q.mul(&p24)))
}

/// `j(tau)` as a ball, evaluated at working precision `prec`.
pub fn eval_j(tau: &UpperHalfPoint, prec: usize) -> Result<ErrorBall> {
    let tau = tau.at_precision(prec)?;
    if tau.q_abs_upper() <= REDUCE_ABOVE {
        return eval_j_series(tau.q(), prec);
    }
    let (reduced, _) = reduce_fundamental(&tau)?;
    eval_j_series(reduced.q(), prec)
}

/// Coefficients of `q j(q) = 1 + 744 q + 196884 q^2 + ...`, computed from
/// `E4^3 / prod (1 - q^n)^24` as exact integer power series.
pub fn j_q_expansion(terms: usize) -> Vec<BigInt> {
    let k = terms;
    let sig = sigma3_table(k.max(1));
    let mut e4: Vec<BigInt> = (0..k).map(|n| BigInt::from(if n == 0 { 1 } else { 240 * sig[n] })).collect();
    e4.truncate(k);
    let mul = |a: &[BigInt], b: &[BigInt]| -> Vec<BigInt> {
        (0..k)
            .map(|n| (0..=n).map(|i| &a[i] * &b[n - i]).sum())
            .collect()
    };
    let e4_3 = mul(&mul(&e4, &e4), &e4);
    let mut prod = vec![BigInt::zero(); k];
    prod[0] = BigInt::one();
    for n in 1..k {
        for i in (n..k).rev() {
            let v = prod[i - n].clone();
            prod[i] -= v;
        }
    }
    let mut p24 = prod.clone();
    for _ in 1..24 {
        p24 = mul(&p24, &prod);
    }
    let mut inv = vec![BigInt::zero(); k];
    inv[0] = BigInt::one();
    for n in 1..k {
        let s: BigInt = (1..=n).map(|i| &p24[i] * &inv[n - i]).sum();
        inv[n] = -s;
    }
    mul(&e4_3, &inv)
}

/// `g_a(tau)` from the product formula, for the representative with
/// `0 <= a1 < 1`. The phase is only defined up to a root of unity.
pub fn eval_siegel(a: &TorsionIndex, tau: &UpperHalfPoint, prec: usize) -> Result<ErrorBall> {
    let tau = tau.at_precision(prec)?;
    let p = prec;
    let n = a.n as i64;
    let a1 = Rational64::new(a.a1 as i64, n);
    let a2 = Rational64::new(a.a2 as i64, n);
    let rat = |x: Rational64| Ball::from_ratio(*x.numer(), *x.denom(), p);

    let q = tau.q();
    let r = r_upper(q);
    let rf = r.upper_f64();
    if rf.is_nan() || rf >= 0.999_999 {
        return Err(Error::PrecisionExhausted(p));
    }
    let bits = p + 16;
    let m = choose_terms(rf.ln(), (2.78f64 / (1.0 - rf)).ln() - rf.ln(), 0.0, bits)?;

    let t = tau.tau();
    let lead = t.scale(&rat(bernoulli2(a1) / 2)).e2pi();
    let phase = ErrorBall::real(rat(a2 * (a1 - 1) / 2)).e2pi();
    let z = t.scale(&rat(a1)).add(&ErrorBall::real(rat(a2)));
    let qz = z.e2pi();
    let qz_inv = z.neg().e2pi();
    let one = ErrorBall::one(p);

    let mut prod = one.sub(&qz);
    let mut qn = one.clone();
    for _ in 1..=m {
        qn = qn.mul(q);
        prod = prod.mul(&one.sub(&qn.mul(&qz))).mul(&one.sub(&qn.mul(&qz_inv)));
    }
    // Tail: sum over n > m of r^{n+a1} + r^{n-a1} <= 2 r^m / (1 - r).
    let rm = r.powi(m as u32);
    if rm.upper_f64() > 0.5 {
        return Err(Error::PrecisionExhausted(p));
    }
    let l = rm.mul(&Ball::from_f64(2.0 * 1.39, 64)).div(&Ball::from_i64(1, 64).sub(&r));
    let delta = l.mul_i64(2).upper();
    let factor = ErrorBall::new(
        Ball::from_i64(1, p).add_error(&delta),
        Ball::zero(p).add_error(&delta),
    );
    Ok(lead.mul(&phase).mul(&prod).mul(&factor).neg())
}

/// `a gamma^{-1}` for an integer matrix, reduced mod N.
fn act_inverse(a: &TorsionIndex, g: Sl2z) -> TorsionIndex {
    let inv = sl2_inv(g);
    a.act(&ResidueMatrix::new(a.n, inv[0], inv[1], inv[2], inv[3]))
}

/// `log |g_a(tau)|`, through the fundamental domain when `|q|` is large,
/// using `|g_a(tau)| = |g_{a g^{-1}}(g tau)|`.
pub fn siegel_log_abs(a: &TorsionIndex, tau: &UpperHalfPoint, prec: usize) -> Result<Ball> {
    let tau = tau.at_precision(prec)?;
    let g = if tau.q_abs_upper() <= REDUCE_ABOVE {
        eval_siegel(a, &tau, prec)?
    } else {
        let (reduced, gamma) = reduce_fundamental(&tau)?;
        eval_siegel(&act_inverse(a, gamma), &reduced, prec)?
    };
    g.log_abs().ok_or(Error::PrecisionExhausted(prec))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Indeterminate,
}

/// Outcome of one certified inequality check. `margin` is a lower bound
/// for `rhs - lhs` (negative only on a certified violation or when
/// indeterminate).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub verdict: Verdict,
    pub holds: bool,
    pub margin: f64,
    pub precision: usize,
}

impl CheckReport {
    fn from_diff(check: &str, diff: &Ball, precision: usize) -> Self {
        let verdict = match Ball::zero(precision).le(diff) {
            Some(true) => Verdict::Holds,
            Some(false) => Verdict::Violated,
            None => Verdict::Indeterminate,
        };
        let margin = if verdict == Verdict::Violated { diff.upper_f64() } else { diff.lower_f64() };
        CheckReport {
            check: check.to_string(),
            verdict,
            holds: verdict == Verdict::Holds,
            margin,
            precision,
        }
    }
}

/// Run `f` at doubling precisions until the verdict is determinate.
fn escalate<F>(start: usize, f: F) -> Result<CheckReport>
where
    F: Fn(usize) -> Result<CheckReport>,
{
    let mut p = start.max(64);
    let mut last;
    loop {
        match f(p) {
            Ok(r) if r.verdict != Verdict::Indeterminate => return Ok(r),
            Ok(r) => last = Some(Ok(r)),
            Err(Error::PrecisionExhausted(_)) => last = Some(Err(Error::PrecisionExhausted(p))),
            Err(e) => return Err(e),
        }
        if p >= MAX_PRECISION {
            return last.expect("at least one attempt");
        }
        p = (p * 2).min(MAX_PRECISION);
    }
}

fn certainly_gt(x: &Ball, bound: &Ball) -> bool {
    bound.lt(x) == Some(true)
}

/// `|j - 1/q - 744| <= 330000 |q|` for `|q| <= 0.005`.
pub fn verify_pqj(tau: &UpperHalfPoint) -> Result<CheckReport> {
    escalate(tau.prec(), |p| {
        let t = tau.at_precision(p)?;
        let qa = t.q().abs();
        if certainly_gt(&qa, &Ball::from_ratio(5, 1000, p)) {
            return Err(Error::Precondition("|q| > 0.005".into()));
        }
        let j = eval_j_series(t.q(), p)?;
        let lhs = j.sub(&t.q().recip()).sub(&ErrorBall::real(Ball::from_i64(744, p))).abs();
        let rhs = qa.mul_i64(330_000);
        Ok(CheckReport::from_diff("pqj", &rhs.sub(&lhs), p))
    })
}

/// For `tau` in the fundamental domain: `|j| <= 2500` or `|q| < 0.001`.
pub fn verify_cdplus(tau: &UpperHalfPoint) -> Result<CheckReport> {
    escalate(tau.prec(), |p| {
        let t = tau.at_precision(p)?;
        let x = &t.tau().re;
        let half = Ball::from_ratio(1, 2, p);
        if x.lt(&half.neg()) == Some(true)
            || x.le(&half) == Some(false)
            || t.tau().norm_sqr().lt(&Ball::from_i64(1, p)) == Some(true)
        {
            return Err(Error::Precondition("point is outside the fundamental domain".into()));
        }
        let j = eval_j(&t, p)?.abs();
        let qa = t.q().abs();
        let d1 = Ball::from_i64(2500, p).sub(&j);
        let d2 = Ball::from_ratio(1, 1000, p).sub(&qa);
        let r1 = CheckReport::from_diff("cdplus", &d1, p);
        let mut r2 = CheckReport::from_diff("cdplus", &d2, p);
        // |q| < 0.001 must be strict.
        if r2.verdict == Verdict::Holds && !d2.is_positive() {
            r2.verdict = Verdict::Indeterminate;
            r2.holds = false;
        }
        let verdict = match (r1.verdict, r2.verdict) {
            (Verdict::Holds, _) | (_, Verdict::Holds) => Verdict::Holds,
            (Verdict::Violated, Verdict::Violated) => Verdict::Violated,
            _ => Verdict::Indeterminate,
        };
        Ok(CheckReport {
            check: "cdplus".into(),
            verdict,
            holds: verdict == Verdict::Holds,
            margin: r1.margin.max(r2.margin),
            precision: p,
        })
    })
}

/// The two estimates for `log |g_a|`: near the cusp (`ega1` when
/// `a1 != 0`, `ega0` when `a1 = 0`) and the global `esmallj`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiegelReport {
    pub near_cusp: Option<CheckReport>,
    pub global: CheckReport,
}

/// Check of the near-cusp estimate for `log |g_a|`. Fails with
/// `Precondition` when `|q|` is certainly outside its region.
pub fn verify_siegel_near_cusp(a: &TorsionIndex, tau: &UpperHalfPoint) -> Result<CheckReport> {
    let n = a.n as i64;
    let name = if a.a1 == 0 { "ega0" } else { "ega1" };
    escalate(tau.prec(), |p| {
        let t = tau.at_precision(p)?;
        let qa = t.q().abs();
        let limit = if a.a1 == 0 {
            Ball::from_ratio(1, 10, p)
        } else {
            Ball::from_i64(10, p).powi(a.n).recip()
        };
        if certainly_gt(&qa, &limit) {
            return Err(Error::Precondition(format!("|q| outside the {name} region")));
        }
        let log_q = qa.ln().ok_or(Error::PrecisionExhausted(p))?;
        let l = ell(a);
        let main = log_q.mul(&Ball::from_ratio(*l.numer(), *l.denom(), p));
        let log_g = eval_siegel(a, &t, p)?.log_abs().ok_or(Error::PrecisionExhausted(p))?;
        let (lhs, rhs) = if a.a1 == 0 {
            let zeta = ErrorBall::real(Ball::from_ratio(a.a2 as i64, n, p)).e2pi();
            let c = ErrorBall::one(p).sub(&zeta).log_abs().ok_or(Error::PrecisionExhausted(p))?;
            (log_g.sub(&main).sub(&c).abs(), qa.mul_i64(3))
        } else {
            let root = log_q.div_i64(n).exp();
            (log_g.sub(&main).abs(), root.mul_i64(3))
        };
        Ok(CheckReport::from_diff(name, &rhs.sub(&lhs), p))
    })
}

/// `|log |g_a(tau)|| <= log(|j| + 2200)/12 + log N + 0.1`, `N` the exact
/// order of `a`.
pub fn verify_siegel_global(a: &TorsionIndex, tau: &UpperHalfPoint) -> Result<CheckReport> {
    let order = a.order() as i64;
    escalate(tau.prec(), |p| {
        let t = tau.at_precision(p)?;
        let lhs = siegel_log_abs(a, &t, p)?.abs();
        let j = eval_j(&t, p)?.abs();
        let rhs = j
            .add_i64(2200)
            .ln()
            .ok_or(Error::PrecisionExhausted(p))?
            .div_i64(12)
            .add(&Ball::from_i64(order, p).ln().ok_or(Error::PrecisionExhausted(p))?)
            .add(&Ball::from_ratio(1, 10, p));
        Ok(CheckReport::from_diff("esmallj", &rhs.sub(&lhs), p))
    })
}

pub fn verify_siegel_bounds(a: &TorsionIndex, tau: &UpperHalfPoint) -> Result<SiegelReport> {
    let near_cusp = match verify_siegel_near_cusp(a, tau) {
        Ok(r) => Some(r),
        Err(Error::Precondition(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(SiegelReport { near_cusp, global: verify_siegel_global(a, tau)? })
}

/// Where `tau` sits relative to the cusps of X_G.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearestCusp {
    pub cusp: CuspClass,
    pub cusp_index: usize,
    pub gamma: Sl2z,
    /// Upper bound for `|q|` at the reduced point.
    pub q_abs_upper: f64,
}

/// The cusp `c` with `tau` in the neighbourhood `|q_c| < 0.001`; requires
/// `|j(tau)| > 2500`.
pub fn nearest_cusp(cs: &CuspStructure, tau: &UpperHalfPoint) -> Result<NearestCusp> {
    let mut p = tau.prec().max(64);
    loop {
        let t = tau.at_precision(p)?;
        let certified = match eval_j(&t, p) {
            Ok(j) => Ball::from_i64(2500, p).lt(&j.abs()),
            Err(Error::PrecisionExhausted(_)) => None,
            Err(e) => return Err(e),
        };
        match certified {
            Some(true) => {
                let (reduced, gamma) = reduce_fundamental(&t)?;
                let inv = sl2_inv(gamma);
                let n = cs.n as i64;
                let v = (inv[0].rem_euclid(n) as u32, inv[2].rem_euclid(n) as u32);
                let idx = cs
                    .cusp_index_of(v)
                    .ok_or_else(|| Error::Precondition(format!("{v:?} is not primitive")))?;
                return Ok(NearestCusp {
                    cusp: cs.cusps()[idx].clone(),
                    cusp_index: idx,
                    gamma,
                    q_abs_upper: reduced.q_abs_upper(),
                });
            }
            Some(false) => return Err(Error::NotInPlusRegion),
            None if p >= MAX_PRECISION || !t.is_refinable() => return Err(Error::NotInPlusRegion),
            None => p *= 2,
        }
    }
}

/// `(3/2)|j| >= |1/q_c| >= (1/2)|j|`, with `q_c` the parameter at the
/// nearest cusp.
pub fn verify_everysimple(tau: &UpperHalfPoint) -> Result<CheckReport> {
    escalate(tau.prec(), |p| {
        let t = tau.at_precision(p)?;
        let j = eval_j(&t, p)?.abs();
        if j.le(&Ball::from_i64(2500, p)) == Some(true) {
            return Err(Error::NotInPlusRegion);
        }
        let (reduced, _) = reduce_fundamental(&t)?;
        let inv_q = reduced.q().abs().recip();
        let upper = j.mul(&Ball::from_ratio(3, 2, p)).sub(&inv_q);
        let lower = inv_q.sub(&j.div_i64(2));
        let r1 = CheckReport::from_diff("everysimple", &upper, p);
        let r2 = CheckReport::from_diff("everysimple", &lower, p);
        let verdict = match (r1.verdict, r2.verdict) {
            (Verdict::Violated, _) | (_, Verdict::Violated) => Verdict::Violated,
            (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
            _ => Verdict::Indeterminate,
        };
        Ok(CheckReport {
            check: "everysimple".into(),
            verdict,
            holds: verdict == Verdict::Holds,
            margin: r1.margin.min(r2.margin),
            precision: p,
        })
    })
}

/// Exact `v(g_a(q))` for a non-archimedean `v` with `v(p) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicOrder {
    pub value: Rational64,
    /// `vq/12 + (1/(p-1) if v | N)`.
    pub bound: Rational64,
    pub within_bound: bool,
}

/// `v(1 - zeta_m)` for a primitive `m`-th root of unity.
pub fn valuation_one_minus_zeta(m: u32, p: u64) -> Rational64 {
    match crate::arith::prime_power(m as u64) {
        Some((q, k)) if q == p => Rational64::new(1, (p.pow(k - 1) * (p - 1)) as i64),
        _ => Rational64::zero(),
    }
}

pub fn padic_siegel_order(
    a: &TorsionIndex,
    vq: Rational64,
    p: u64,
    v_divides_n: bool,
) -> Result<PadicOrder> {
    if vq <= Rational64::zero() {
        return Err(Error::Precondition("v(q) must be positive".into()));
    }
    if !crate::arith::is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not prime")));
    }
    let mut value = ell(a) * vq;
    if a.a1 == 0 {
        let m = a.n / gcd(a.a2 as u64, a.n as u64) as u32;
        value += valuation_one_minus_zeta(m, p);
    }
    let mut bound = vq / 12;
    if v_divides_n {
        bound += Rational64::new(1, p as i64 - 1);
    }
    let within_bound = value.abs() <= bound;
    Ok(PadicOrder { value, bound, within_bound })
}

/// The analytic checks covered by the seeded sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepCheck {
    Pqj,
    Cdplus,
    Psiar,
    Esmallj,
    Everysimple,
}

impl SweepCheck {
    pub const ALL: [SweepCheck; 5] =
        [Self::Pqj, Self::Cdplus, Self::Psiar, Self::Esmallj, Self::Everysimple];

    pub fn name(self) -> &'static str {
        match self {
            Self::Pqj => "pqj",
            Self::Cdplus => "cdplus",
            Self::Psiar => "psiar",
            Self::Esmallj => "esmallj",
            Self::Everysimple => "everysimple",
        }
    }

    fn id(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub check: String,
    pub checked: usize,
    pub holds: usize,
    pub violated: usize,
    pub indeterminate: usize,
    /// Samples whose precondition was certainly violated.
    pub skipped: usize,
    pub worst_margin: f64,
    pub max_precision: usize,
}

/// Per-sample generator: depends only on `(seed, check, index)`.
pub fn sample_rng(seed: u64, check: SweepCheck, index: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&check.id().to_le_bytes());
    bytes[16..24].copy_from_slice(&index.to_le_bytes());
    bytes[24..].copy_from_slice(b"runge-sw");
    ChaCha8Rng::from_seed(bytes)
}

fn random_index<R: Rng>(rng: &mut R, n: u32) -> TorsionIndex {
    loop {
        let a1 = rng.gen_range(0..n);
        let a2 = rng.gen_range(0..n);
        if a1 != 0 || a2 != 0 {
            return TorsionIndex { n, a1, a2 };
        }
    }
}

fn random_sl2<R: Rng>(rng: &mut R, bound: i64) -> Sl2z {
    loop {
        let c = rng.gen_range(-bound..=bound);
        let d = rng.gen_range(-bound..=bound);
        if (c == 0 && d == 0) || gcd(c.unsigned_abs(), d.unsigned_abs()) != 1 {
            continue;
        }
        // a d - b c = 1
        let (_, x, y) = egcd(d, -c);
        let (a, b) = (x, y);
        let g = [a, b, c, d];
        if a * d - b * c == 1 {
            return g;
        }
        let g = [-a, -b, c, d];
        if g[0] * d - g[1] * c == 1 {
            return g;
        }
    }
}

/// Run one sample of a sweep.
pub fn sweep_sample(check: SweepCheck, seed: u64, index: u64, prec: usize) -> Result<CheckReport> {
    let mut rng = sample_rng(seed, check, index);
    let two_pi = 2.0 * std::f64::consts::PI;
    match check {
        SweepCheck::Pqj => {
            let lo = 200f64.ln() / two_pi;
            let y = rng.gen_range(lo..3.8);
            let x = rng.gen_range(-0.5..0.5);
            verify_pqj(&UpperHalfPoint::from_f64(x, y, prec)?)
        }
        SweepCheck::Cdplus => {
            let x: f64 = rng.gen_range(-0.5..0.5);
            let y = rng.gen_range((1.0 - x * x).sqrt()..3.0);
            verify_cdplus(&UpperHalfPoint::from_f64(x, y, prec)?)
        }
        SweepCheck::Psiar => {
            let n = rng.gen_range(2..=7u32);
            let a = random_index(&mut rng, n);
            let lo = n as f64 * 10f64.ln() / two_pi;
            let y = rng.gen_range(lo..lo + 3.0);
            let x = rng.gen_range(-0.5..0.5);
            verify_siegel_near_cusp(&a, &UpperHalfPoint::from_f64(x, y, prec)?)
        }
        SweepCheck::Esmallj => {
            let n = rng.gen_range(2..=7u32);
            let a = random_index(&mut rng, n);
            let y = rng.gen_range(0.02..3.0);
            let x = rng.gen_range(-0.5..0.5);
            verify_siegel_global(&a, &UpperHalfPoint::from_f64(x, y, prec)?)
        }
        SweepCheck::Everysimple => {
            let y = rng.gen_range(1.3..6.0);
            let x = rng.gen_range(-0.5..0.5);
            let g = random_sl2(&mut rng, 6);
            let base = UpperHalfPoint::from_f64(x, y, prec)?;
            verify_everysimple(&base.apply(sl2_inv(g))?)
        }
    }
}

/// Run `samples` seeded samples of one check. The summary does not depend
/// on the execution mode.
pub fn sweep(check: SweepCheck, samples: usize, seed: u64, prec: usize, exec: Exec) -> SweepSummary {
    let results = exec.map_range(samples, |i| sweep_sample(check, seed, i as u64, prec));
    let mut s = SweepSummary {
        check: check.name().to_string(),
        checked: 0,
        holds: 0,
        violated: 0,
        indeterminate: 0,
        skipped: 0,
        worst_margin: f64::INFINITY,
        max_precision: 0,
    };
    for r in results {
        match r {
            Ok(rep) => {
                s.checked += 1;
                s.max_precision = s.max_precision.max(rep.precision);
                match rep.verdict {
                    Verdict::Holds => {
                        s.holds += 1;
                        s.worst_margin = s.worst_margin.min(rep.margin);
                    }
                    Verdict::Violated => s.violated += 1,
                    Verdict::Indeterminate => s.indeterminate += 1,
                }
            }
            Err(Error::Precondition(_)) | Err(Error::NotInPlusRegion) => s.skipped += 1,
            Err(_) => {
                s.checked += 1;
                s.indeterminate += 1;
                s.max_precision = MAX_PRECISION;
            }
        }
    }
    s
}

pub fn verify_analytic(samples: usize, seed: u64, prec: usize, exec: Exec) -> Vec<SweepSummary> {
    SweepCheck::ALL.iter().map(|&c| sweep(c, samples, seed, prec, exec)).collect()
}
