//! Explicit bounds for integral points and the split Cartan application.
//!
//! Every real quantity is computed as a [`Ball`] and exported as an
//! [`Interval`] with outward rounding; the upper end is the bound that is
//! meant to be used. Exact integers are reported alongside when the bound
//! has no transcendental part.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, is_probable_prime, prime_factors};
use crate::ball::Ball;
use crate::cusps::CuspStructure;
use crate::error::{Error, Result};
use crate::modnt::{det_image, SubgroupG};

pub const DEFAULT_PRECISION: usize = 128;

/// The constant in the level cap: the cyclic isogeny degree bound over a
/// field of degree 2, `10^82 * 2^4 * max(1, log 2)^2`.
pub const KAPPA_DESCRIPTION: &str = "16*10^82 (isogeny degree bound with d = 2; not stated explicitly)";

fn kappa(prec: usize) -> Ball {
    Ball::from_bigint(&(BigInt::from(16) * BigInt::from(10).pow(82)), prec.max(320))
}

/// A closed real interval with outward-rounded `f64` ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl From<&Ball> for Interval {
    fn from(b: &Ball) -> Self {
        Interval { lower: b.lower_f64(), upper: b.upper_f64() }
    }
}

fn is_exact_zero(b: &Ball) -> bool {
    b.lower_f64() == 0.0 && b.upper_f64() == 0.0
}

fn ln(b: &Ball) -> Ball {
    b.ln().expect("logarithm of a positive quantity")
}

fn ln_int(x: &BigInt, prec: usize) -> Ball {
    let bits = x.bits() as usize;
    ln(&Ball::from_bigint(x, prec.max(bits + 16)).with_prec(prec))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: BTreeMap<String, String>,
    /// Certified enclosure; the upper end is the bound.
    pub value_log: Interval,
    pub value_exact_form: String,
    /// The value as an exact expression in integers and logs, when short.
    pub value_exact: Option<String>,
    pub applicable: bool,
    pub reason: Option<String>,
}

fn inputs(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// `h(j) = log max(|num|, |den|)`.
pub fn height_rational(j: &BigRational, prec: usize) -> Ball {
    let m = j.numer().abs().max(j.denom().abs());
    if m.is_one() {
        return Ball::zero(prec);
    }
    ln_int(&m, prec)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveInput {
    pub j: String,
    pub height: Interval,
    pub is_integer: bool,
}

pub fn curve_input(j: &BigRational, prec: usize) -> CurveInput {
    CurveInput {
        j: j.to_string(),
        height: Interval::from(&height_rational(j, prec)),
        is_integer: j.is_integer(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalR {
    pub n: u32,
    pub primes_used: Vec<u64>,
    pub value: Interval,
    /// `log N`, which always dominates the sum.
    pub cap: Interval,
    pub within_cap: bool,
}

/// `sum (log p)/(p - 1)` over the primes of `finite_primes` dividing `n`.
pub fn calr_ball(n: u32, finite_primes: &[u64], prec: usize) -> Ball {
    let mut total = Ball::zero(prec);
    for p in prime_factors(n as u64) {
        if finite_primes.contains(&p) {
            total = total.add(&ln(&Ball::from_i64(p as i64, prec)).div_i64(p as i64 - 1));
        }
    }
    total
}

pub fn calr(n: u32, finite_primes: &[u64], prec: usize) -> CalR {
    let value = calr_ball(n, finite_primes, prec);
    let cap = ln(&Ball::from_i64(n as i64, prec));
    let mut used: Vec<u64> =
        prime_factors(n as u64).into_iter().filter(|p| finite_primes.contains(p)).collect();
    used.dedup();
    CalR {
        n,
        primes_used: used,
        value: Interval::from(&value),
        cap: Interval::from(&cap),
        within_cap: value.le(&cap) != Some(false),
    }
}

/// `log|j(P)| <= 30 |G| N^2 log N` for integral points.
pub fn bound_th1(g: &SubgroupG, prec: usize) -> Result<BoundReport> {
    let n = g.n;
    if n < 2 {
        return Err(Error::HypothesisFailed("level must be at least 2".into()));
    }
    if !det_image(g).is_full {
        return Err(Error::HypothesisFailed("det G is not all of (Z/NZ)^*".into()));
    }
    let orbits = CuspStructure::new(g).galois_orbits()?;
    if orbits.len() < 2 {
        return Err(Error::HypothesisFailed(
            "Galois acts transitively on the cusps".into(),
        ));
    }
    let coeff = 30u64 * g.order() as u64 * (n as u64) * (n as u64);
    let value = ln(&Ball::from_i64(n as i64, prec)).mul(&Ball::from_i64(coeff as i64, prec));
    Ok(BoundReport {
        name: "th1".into(),
        inputs: inputs(&[("G_order", g.order().to_string()), ("N", n.to_string())]),
        value_log: Interval::from(&value),
        value_exact_form: "30·|G|·N²·log N".into(),
        value_exact: Some(format!("{coeff}·log {n}")),
        applicable: true,
        reason: None,
    })
}

/// `h(P) <= s^{s/2+1} (g N^2)^s N (R + 30)`.
pub fn bound_tbo(s: u32, g_order: u64, n: u32, r: &Ball, via_g: bool, prec: usize) -> Result<BoundReport> {
    if s == 0 || g_order == 0 || n < 2 {
        return Err(Error::Precondition("s, |G'| must be positive and N >= 2".into()));
    }
    if r.is_negative() {
        return Err(Error::Precondition("R must be nonnegative".into()));
    }
    let gn2 = BigInt::from(g_order) * BigInt::from(n) * BigInt::from(n);
    let core_int = gn2.pow(s) * BigInt::from(n);
    // s^{s/2+1} is an integer when s is even or a perfect square.
    let root = (s as f64).sqrt().round() as u32;
    let s_pow_exact = if s.is_multiple_of(2) {
        Some(BigInt::from(s).pow(s / 2 + 1))
    } else if root * root == s {
        Some(BigInt::from(root).pow(s + 2))
    } else {
        None
    };
    let wide = prec.max(core_int.bits() as usize + 64);
    let s_pow = match &s_pow_exact {
        Some(x) => Ball::from_bigint(x, wide),
        None => Ball::from_i64(s as i64, wide).sqrt().expect("sqrt").powi(s + 2),
    };
    let value = s_pow
        .mul(&Ball::from_bigint(&core_int, wide))
        .mul(&r.with_prec(wide).add_i64(30));
    let exact = match (&s_pow_exact, is_exact_zero(r)) {
        (Some(sp), true) => Some((sp * &core_int * BigInt::from(30)).to_string()),
        _ => None,
    };
    Ok(BoundReport {
        name: "tbo".into(),
        inputs: inputs(&[
            ("s", s.to_string()),
            (if via_g { "G_order" } else { "G_prime_order" }, g_order.to_string()),
            ("N", n.to_string()),
            ("R_upper", format!("{:e}", r.upper_f64())),
        ]),
        value_log: Interval::from(&value),
        value_exact_form: "s^(s/2+1)·(|G'|·N²)^s·N·(R+30)".into(),
        value_exact: exact,
        applicable: true,
        reason: None,
    })
}

fn check_odd_prime(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not an odd prime")));
    }
    Ok(())
}

pub fn tspto_ball(p: u64, prec: usize) -> Ball {
    ln(&Ball::from_i64(p as i64, prec)).mul(&Ball::from_i64(23 * p as i64, prec))
}

/// `log|j(P)| <= 23 p log p` on the split Cartan curve of prime level.
pub fn bound_tspto(p: u64, prec: usize) -> Result<BoundReport> {
    check_odd_prime(p)?;
    Ok(BoundReport {
        name: "tspto".into(),
        inputs: inputs(&[("p", p.to_string())]),
        value_log: Interval::from(&tspto_ball(p, prec)),
        value_exact_form: "23·p·log p".into(),
        value_exact: Some(format!("{}·log {p}", 23 * p)),
        applicable: true,
        reason: None,
    })
}

/// `60 p^2 (p-1)^2 log p`, the general bound specialised to the split
/// Cartan normalizer of prime level.
pub fn th1_split_specialization(p: u64, prec: usize) -> Ball {
    let c = BigInt::from(60) * BigInt::from(p).pow(2) * BigInt::from(p - 1).pow(2);
    ln(&Ball::from_i64(p as i64, prec)).mul(&Ball::from_bigint(&c, prec.max(128)))
}

/// `10^82 d^4 max(1, log d)^2 (1 + h)^2`.
pub fn pellarin_degree(d: u32, h: &Ball, prec: usize) -> Result<BoundReport> {
    if d == 0 || h.is_negative() {
        return Err(Error::Precondition("need d >= 1 and h >= 0".into()));
    }
    let wide = prec.max(320);
    let ten82 = BigInt::from(10).pow(82);
    let base = Ball::from_bigint(&(&ten82 * BigInt::from(d).pow(4)), wide);
    let log_d = ln(&Ball::from_i64(d as i64, wide));
    // log d < 1 for d <= 2
    let m = if d <= 2 { Ball::from_i64(1, wide) } else { log_d.max(&Ball::from_i64(1, wide)) };
    let value = base.mul(&m.sqr()).mul(&h.with_prec(wide).add_i64(1).sqr());
    let exact = (d <= 2 && is_exact_zero(h)).then(|| (ten82 * BigInt::from(d).pow(4)).to_string());
    Ok(BoundReport {
        name: "pellarin_degree".into(),
        inputs: inputs(&[("d", d.to_string()), ("h_upper", format!("{:e}", h.upper_f64()))]),
        value_log: Interval::from(&value),
        value_exact_form: "10^82·d^4·max(1, log d)^2·(1+h)^2".into(),
        value_exact: exact,
        applicable: true,
        reason: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelCap {
    pub h: Interval,
    pub kappa: String,
    pub cap: Interval,
    pub p: Option<u64>,
    /// Largest `n` with `p^n` not certainly above the cap.
    pub max_n: Option<u32>,
}

pub fn level_cap_ball(h: &Ball, prec: usize) -> Ball {
    kappa(prec).mul(&h.with_prec(prec.max(320)).add_i64(1).sqr())
}

/// Largest `n` such that `p^n <= cap` is not certainly false.
pub fn max_exponent_under(p: &BigUint, cap: &Ball) -> u32 {
    let p = BigInt::from(p.clone());
    let mut n = 0u32;
    let mut pn = p.clone();
    loop {
        let wide = cap.prec().max(pn.bits() as usize + 16);
        if Ball::from_bigint(&pn, wide).le(cap) == Some(false) {
            return n;
        }
        n += 1;
        pn *= &p;
    }
}

/// `p^n <= kappa (1 + h)^2`.
pub fn split_cartan_level_cap(h: &Ball, p: Option<u64>, prec: usize) -> Result<LevelCap> {
    if h.is_negative() {
        return Err(Error::Precondition("h must be nonnegative".into()));
    }
    let cap = level_cap_ball(h, prec);
    let max_n = p.map(|p| max_exponent_under(&BigUint::from(p), &cap));
    Ok(LevelCap {
        h: Interval::from(h),
        kappa: KAPPA_DESCRIPTION.into(),
        cap: Interval::from(&cap),
        p,
        max_n,
    })
}

/// `2^8 3^5 j^2 (j - 1728)^2`.
pub fn conductor_cap(j: &BigInt) -> Result<BigInt> {
    if j.is_zero() || *j == BigInt::from(1728) {
        return Err(Error::DegenerateJ(j.to_string()));
    }
    let d = j - BigInt::from(1728);
    Ok(BigInt::from(256 * 243) * j * j * &d * &d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrhCap {
    pub conductor_cap: String,
    /// `log N (log log 2N)^6` with the unknown constant set to 1.
    pub value_kappa_one: Interval,
    pub grh_constant_unknown: bool,
}

pub fn grh_level_cap(j: &BigInt, prec: usize) -> Result<GrhCap> {
    let nc = conductor_cap(j)?;
    let log_n = ln_int(&nc, prec);
    let loglog = ln(&ln_int(&(BigInt::from(2) * &nc), prec));
    Ok(GrhCap {
        conductor_cap: nc.to_string(),
        value_kappa_one: Interval::from(&log_n.mul(&loglog.powi(6))),
        grh_constant_unknown: true,
    })
}

/// The quadratic twist `y^2 + xy = x^3 + a4 x + a6` with `j`-invariant `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistCurve {
    pub a1: BigRational,
    pub a2: BigRational,
    pub a3: BigRational,
    pub a4: BigRational,
    pub a6: BigRational,
    pub discriminant: BigRational,
    pub j_invariant: BigRational,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn twist_equation(j: &BigRational) -> Result<TwistCurve> {
    if j.is_zero() || *j == rat(1728) {
        return Err(Error::DegenerateJ(j.to_string()));
    }
    let t = j - rat(1728);
    let (a1, a2, a3) = (rat(1), rat(0), rat(0));
    let a4 = -rat(36) / &t;
    let a6 = -rat(1) / &t;
    let b2 = &a1 * &a1 + rat(4) * &a2;
    let b4 = rat(2) * &a4 + &a1 * &a3;
    let b6 = &a3 * &a3 + rat(4) * &a6;
    let b8 = &a1 * &a1 * &a6 + rat(4) * &a2 * &a6 - &a1 * &a3 * &a4 + &a2 * &a3 * &a3 - &a4 * &a4;
    let disc = -(&b2 * &b2 * &b8) - rat(8) * &b4 * &b4 * &b4 - rat(27) * &b6 * &b6
        + rat(9) * &b2 * &b4 * &b6;
    let c4 = &b2 * &b2 - rat(24) * &b4;
    let j_inv = &c4 * &c4 * &c4 / &disc;
    if disc != j * j / (&t * &t * &t) || j_inv != *j {
        return Err(Error::Precondition(format!("twist of j = {j} is inconsistent")));
    }
    Ok(TwistCurve { a1, a2, a3, a4, a6, discriminant: disc, j_invariant: j_inv })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SerreReport {
    pub p: u64,
    pub j: String,
    /// `log max(|j|, 1)`.
    pub log_abs_j: Interval,
    pub tspto: BoundReport,
    /// `log|j| <= 23 p log p`; false only when certainly violated.
    pub consistent: bool,
    pub level_cap: LevelCap,
    /// The cap with `h` replaced by the bound `23 p log p`.
    pub level_cap_from_bound: LevelCap,
    pub grh: Option<GrhCap>,
}

/// Chain `23 p log p -> level cap -> max n` for an integral `j`.
pub fn serre_check(p: u64, j: &BigInt, prec: usize) -> Result<SerreReport> {
    check_odd_prime(p)?;
    let h = if j.abs() <= BigInt::one() { Ball::zero(prec) } else { ln_int(&j.abs(), prec) };
    let bound = tspto_ball(p, prec);
    let consistent = h.le(&bound) != Some(false);
    let grh = match grh_level_cap(j, prec) {
        Ok(g) => Some(g),
        Err(Error::DegenerateJ(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(SerreReport {
        p,
        j: j.to_string(),
        log_abs_j: Interval::from(&h),
        tspto: bound_tspto(p, prec)?,
        consistent,
        level_cap: split_cartan_level_cap(&h, Some(p), prec)?,
        level_cap_from_bound: split_cartan_level_cap(&bound, Some(p), prec)?,
        grh,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreePrimeCheck {
    pub p: String,
    pub q: String,
    pub r: String,
    /// `pqr > kappa (1 + 23 p log p)^2` certified.
    pub rejected: bool,
}

/// Three deficient primes `11 <= p < q < r` force
/// `pqr <= kappa (1 + 23 p log p)^2`.
pub fn three_prime_check(p: &BigUint, q: &BigUint, r: &BigUint, prec: usize) -> Result<ThreePrimeCheck> {
    if !(*p >= BigUint::from(11u32) && p < q && q < r) {
        return Err(Error::Precondition("need 11 <= p < q < r".into()));
    }
    for x in [p, q, r] {
        if !is_probable_prime(x) {
            return Err(Error::Precondition(format!("{x} is not prime")));
        }
    }
    let prod = BigInt::from(p * q * r);
    let wide = prec.max(prod.bits() as usize + 64);
    let pb = Ball::from_bigint(&BigInt::from(p.clone()), wide);
    let h = ln(&pb).mul(&pb).mul_i64(23);
    let cap = level_cap_ball(&h, wide);
    let rejected = Ball::from_bigint(&prod, wide).le(&cap) == Some(false);
    Ok(ThreePrimeCheck { p: p.to_string(), q: q.to_string(), r: r.to_string(), rejected })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreePrimeThreshold {
    /// Enclosure of the real root of `x^3 = kappa (1 + 23 x log x)^2`.
    pub root: Interval,
    /// Every `p` at least this large has `p^3` above the cap.
    pub threshold: String,
}

/// `f(t) = 3t - log kappa - 2 log(1 + 23 t e^t)`, increasing for `t > 2`.
fn threshold_fn(t: &Ball, prec: usize) -> Ball {
    let inner = t.exp().mul(t).mul_i64(23).add_i64(1);
    t.mul_i64(3).sub(&ln(&kappa(prec))).sub(&ln(&inner).mul_i64(2))
}

pub fn three_prime_threshold(prec: usize) -> ThreePrimeThreshold {
    let prec = prec.max(128);
    let (mut lo, mut hi) = (11f64.ln(), 400.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match Ball::zero(prec).lt(&threshold_fn(&Ball::from_f64(mid, prec), prec)) {
            Some(true) => hi = mid,
            _ => lo = mid,
        }
    }
    let root = Ball::from_interval(lo, hi, prec).exp();
    let upper = root.upper_f64().ceil();
    let threshold = BigUint::from_f64(upper).expect("finite threshold");
    ThreePrimeThreshold { root: Interval::from(&root), threshold: threshold.to_string() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SerreBatch {
    pub reports: Vec<SerreReport>,
    /// `max n` from the `j`-height cap never increases along the sorted primes.
    pub max_n_nonincreasing: bool,
    pub triples: Vec<ThreePrimeCheck>,
    pub threshold: ThreePrimeThreshold,
}

pub fn serre_batch(primes: &[u64], j: &BigInt, prec: usize) -> Result<SerreBatch> {
    let mut ps = primes.to_vec();
    ps.sort_unstable();
    ps.dedup();
    let reports = ps.iter().map(|&p| serre_check(p, j, prec)).collect::<Result<Vec<_>>>()?;
    let ns: Vec<u32> = reports.iter().filter_map(|r| r.level_cap.max_n).collect();
    let max_n_nonincreasing = ns.windows(2).all(|w| w[1] <= w[0]);
    let big: Vec<BigUint> = ps.iter().filter(|&&p| p >= 11).map(|&p| BigUint::from(p)).collect();
    let mut triples = Vec::new();
    for a in 0..big.len() {
        for b in a + 1..big.len() {
            for c in b + 1..big.len() {
                triples.push(three_prime_check(&big[a], &big[b], &big[c], prec)?);
            }
        }
    }
    Ok(SerreBatch { reports, max_n_nonincreasing, triples, threshold: three_prime_threshold(prec) })
}

/// Parse an integer or a fraction `a/b`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse = |t: &str| t.trim().parse::<BigInt>().map_err(|e| Error::Parse(format!("{t}: {e}")));
    match s.split_once('/') {
        Some((a, b)) => {
            let d = parse(b)?;
            if d.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            Ok(BigRational::new(parse(a)?, d))
        }
        None => Ok(BigRational::from_integer(parse(s)?)),
    }
}
