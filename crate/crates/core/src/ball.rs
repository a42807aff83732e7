//! Midpoint-radius ball arithmetic over `astro_float::BigFloat`.
//!
//! A [`Ball`] is a real interval `[mid - rad, mid + rad]`; an [`ErrorBall`]
//! is a complex rectangle given by a real ball for each coordinate. Every
//! operation widens the radius by the propagated input error plus a bound
//! for the rounding error of the midpoint computation. Radii are kept at 64
//! bits and always rounded upwards.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, RoundingMode, Sign, INF_POS};

const RP: usize = 64;
const RM: RoundingMode = RoundingMode::ToEven;
const UP: RoundingMode = RoundingMode::Up;
const DOWN: RoundingMode = RoundingMode::Down;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

fn with_cc<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// `2^e` exactly.
pub fn pow2(e: i32) -> BigFloat {
    let mut x = BigFloat::from_word(1, RP);
    x.set_exponent(e + 1);
    x
}

fn rounded(x: &BigFloat, rm: RoundingMode) -> BigFloat {
    let mut y = x.clone();
    if y.set_precision(RP, rm).is_err() {
        return INF_POS;
    }
    y
}

/// `|x|` rounded up to radius precision.
fn abs_up(x: &BigFloat) -> BigFloat {
    rounded(&x.abs(), UP)
}

fn abs_down(x: &BigFloat) -> BigFloat {
    rounded(&x.abs(), DOWN)
}

fn radd(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.add(b, RP, UP)
}

fn rmul(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.mul(b, RP, UP)
}

fn is_lt(a: &BigFloat, b: &BigFloat) -> bool {
    matches!(a.cmp(b), Some(c) if c < 0)
}

fn is_le(a: &BigFloat, b: &BigFloat) -> bool {
    matches!(a.cmp(b), Some(c) if c <= 0)
}

fn finite(x: &BigFloat) -> bool {
    !x.is_nan() && !x.is_inf()
}

/// Rounding error bound for a correctly rounded basic operation.
fn ulp_err(x: &BigFloat, p: usize) -> BigFloat {
    if !finite(x) {
        return INF_POS;
    }
    rmul(&abs_up(x), &pow2(1 - p as i32))
}

/// Error bound for a library transcendental, with a few ulps of slack
/// and an absolute floor for results near zero.
fn trans_err(x: &BigFloat, p: usize) -> BigFloat {
    if !finite(x) {
        return INF_POS;
    }
    let e = pow2(4 - p as i32);
    radd(&rmul(&abs_up(x), &e), &e)
}

/// Directed conversion of a BigFloat to `f64`.
pub fn to_f64(x: &BigFloat, rm: RoundingMode) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let Some((words, _, sign, e, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let negative = sign == Sign::Neg;
    let up_mag = match (rm, negative) {
        (RoundingMode::Up, false) | (RoundingMode::Down, true) => Some(true),
        (RoundingMode::Down, false) | (RoundingMode::Up, true) => Some(false),
        _ => None,
    };
    let Some(&top) = words.last() else {
        return 0.0;
    };
    if top == 0 {
        return 0.0;
    }
    let rest_nonzero = words[..words.len() - 1].iter().any(|&w| w != 0);
    let mut f = top as f64;
    let fi = f as u128;
    let t = top as u128;
    match up_mag {
        Some(true) if fi < t || (fi == t && rest_nonzero) => f = next_up(f),
        Some(false) if fi > t => f = next_down(f),
        _ => {}
    }
    let shift = e as i64 - 64;
    let mag = if shift > 960 {
        if up_mag == Some(false) {
            f64::MAX
        } else {
            f64::INFINITY
        }
    } else if shift < -960 {
        if up_mag == Some(true) {
            f64::MIN_POSITIVE
        } else {
            0.0
        }
    } else {
        f * 2f64.powi(shift as i32)
    };
    if negative {
        -mag
    } else {
        mag
    }
}

fn next_up(f: f64) -> f64 {
    if f.is_nan() || f == f64::INFINITY {
        return f;
    }
    if f == 0.0 {
        return f64::from_bits(1);
    }
    let b = f.to_bits();
    f64::from_bits(if f > 0.0 { b + 1 } else { b - 1 })
}

fn next_down(f: f64) -> f64 {
    -next_up(-f)
}

/// A real ball `mid ± rad`.
#[derive(Clone)]
pub struct Ball {
    mid: BigFloat,
    rad: BigFloat,
    prec: usize,
}

impl fmt::Debug for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} ± {:e}", self.mid_f64(), self.rad_f64())
    }
}

impl Ball {
    pub fn new(mid: BigFloat, rad: BigFloat, prec: usize) -> Self {
        let rad = if finite(&mid) && finite(&rad) { abs_up(&rad) } else { INF_POS };
        Ball { mid, rad, prec }
    }

    pub fn exact(mid: BigFloat, prec: usize) -> Self {
        Ball { mid, rad: BigFloat::from_word(0, RP), prec }
    }

    pub fn zero(prec: usize) -> Self {
        Self::exact(BigFloat::from_word(0, prec), prec)
    }

    pub fn from_f64(x: f64, prec: usize) -> Self {
        Self::exact(BigFloat::from_f64(x, prec.max(64)), prec)
    }

    pub fn from_i64(x: i64, prec: usize) -> Self {
        Self::exact(BigFloat::from_i64(x, prec.max(64)), prec)
    }

    /// An integer of any size; exact when it fits in `prec` bits.
    pub fn from_bigint(x: &num_bigint::BigInt, prec: usize) -> Self {
        let base = Self::from_f64(4294967296.0, prec);
        let mut acc = Self::zero(prec);
        for d in x.magnitude().to_u32_digits().iter().rev() {
            acc = acc.mul(&base).add(&Self::from_i64(*d as i64, prec));
        }
        if x.sign() == num_bigint::Sign::Minus {
            acc.neg()
        } else {
            acc
        }
    }

    pub fn from_ratio(num: i64, den: i64, prec: usize) -> Self {
        Self::from_i64(num, prec).div(&Self::from_i64(den, prec))
    }

    /// The interval `[lo, hi]` for finite `lo <= hi`.
    pub fn from_interval(lo: f64, hi: f64, prec: usize) -> Self {
        let l = Self::from_f64(lo, prec);
        let h = Self::from_f64(hi, prec);
        let mid = l.mid.add(&h.mid, prec, RM).div(&BigFloat::from_word(2, RP), prec, RM);
        let r = rounded(&h.mid.sub(&mid, prec, UP), UP);
        let r2 = rounded(&mid.sub(&l.mid, prec, UP), UP);
        let rad = if is_lt(&r, &r2) { r2 } else { r };
        Ball { mid, rad, prec }
    }

    pub fn pi(prec: usize) -> Self {
        let m = with_cc(|cc| cc.pi(prec, RM));
        let r = ulp_err(&m, prec);
        Ball::new(m, r, prec)
    }

    pub fn ln2(prec: usize) -> Self {
        let m = with_cc(|cc| cc.ln_2(prec, RM));
        let r = ulp_err(&m, prec);
        Ball::new(m, r, prec)
    }

    pub fn mid(&self) -> &BigFloat {
        &self.mid
    }

    pub fn rad(&self) -> &BigFloat {
        &self.rad
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn with_prec(&self, prec: usize) -> Self {
        Ball { prec, ..self.clone() }
    }

    pub fn mid_f64(&self) -> f64 {
        to_f64(&self.mid, RoundingMode::ToEven)
    }

    pub fn rad_f64(&self) -> f64 {
        to_f64(&self.rad, UP)
    }

    pub fn is_finite(&self) -> bool {
        finite(&self.mid) && finite(&self.rad)
    }

    /// Lower endpoint, rounded down.
    pub fn lower(&self) -> BigFloat {
        self.mid.sub(&self.rad, self.prec, DOWN)
    }

    /// Upper endpoint, rounded up.
    pub fn upper(&self) -> BigFloat {
        self.mid.add(&self.rad, self.prec, UP)
    }

    pub fn lower_f64(&self) -> f64 {
        if !self.is_finite() {
            return f64::NEG_INFINITY;
        }
        to_f64(&self.lower(), DOWN)
    }

    pub fn upper_f64(&self) -> f64 {
        if !self.is_finite() {
            return f64::INFINITY;
        }
        to_f64(&self.upper(), UP)
    }

    /// Widen the radius by a nonnegative amount.
    pub fn add_error(&self, e: &BigFloat) -> Self {
        Ball::new(self.mid.clone(), radd(&self.rad, e), self.prec)
    }

    pub fn add_error_f64(&self, e: f64) -> Self {
        self.add_error(&BigFloat::from_f64(e.abs(), RP))
    }

    /// True if `x` lies in the ball.
    pub fn contains(&self, x: &BigFloat) -> bool {
        is_le(&self.lower(), x) && is_le(x, &self.upper())
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.contains(&BigFloat::from_f64(x, 64))
    }

    /// True if `o` is contained in `self`.
    pub fn contains_ball(&self, o: &Ball) -> bool {
        is_le(&self.lower(), &o.lower()) && is_le(&o.upper(), &self.upper())
    }

    /// Certified comparison: `Some(Ordering)` when every point of `self`
    /// compares the same way with every point of `o`, `None` otherwise.
    pub fn cmp_certified(&self, o: &Ball) -> Option<Ordering> {
        if !self.is_finite() || !o.is_finite() {
            return None;
        }
        if is_lt(&self.upper(), &o.lower()) {
            Some(Ordering::Less)
        } else if is_lt(&o.upper(), &self.lower()) {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    /// `Some(true)` if `self < o` everywhere, `Some(false)` if `self >= o`
    /// everywhere, `None` otherwise.
    pub fn lt(&self, o: &Ball) -> Option<bool> {
        if !self.is_finite() || !o.is_finite() {
            return None;
        }
        if is_lt(&self.upper(), &o.lower()) {
            Some(true)
        } else if is_le(&o.upper(), &self.lower()) {
            Some(false)
        } else {
            None
        }
    }

    /// `Some(true)` if `self <= o` everywhere, `Some(false)` if `self > o`
    /// everywhere, `None` otherwise.
    pub fn le(&self, o: &Ball) -> Option<bool> {
        if !self.is_finite() || !o.is_finite() {
            return None;
        }
        if is_le(&self.upper(), &o.lower()) {
            Some(true)
        } else if is_lt(&o.upper(), &self.lower()) {
            Some(false)
        } else {
            None
        }
    }

    pub fn is_positive(&self) -> bool {
        self.is_finite() && self.lower().is_positive() && !self.lower().is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.is_finite() && self.upper().is_negative() && !self.upper().is_zero()
    }

    fn p2(&self, o: &Ball) -> usize {
        self.prec.max(o.prec)
    }

    pub fn neg(&self) -> Self {
        Ball { mid: self.mid.neg(), rad: self.rad.clone(), prec: self.prec }
    }

    pub fn abs(&self) -> Self {
        Ball { mid: self.mid.abs(), rad: self.rad.clone(), prec: self.prec }
    }

    pub fn add(&self, o: &Ball) -> Self {
        let p = self.p2(o);
        let m = self.mid.add(&o.mid, p, RM);
        let r = radd(&radd(&self.rad, &o.rad), &ulp_err(&m, p));
        Ball::new(m, r, p)
    }

    pub fn sub(&self, o: &Ball) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Ball) -> Self {
        let p = self.p2(o);
        let m = self.mid.mul(&o.mid, p, RM);
        let r = radd(
            &radd(&rmul(&abs_up(&self.mid), &o.rad), &rmul(&abs_up(&o.mid), &self.rad)),
            &radd(&rmul(&self.rad, &o.rad), &ulp_err(&m, p)),
        );
        Ball::new(m, r, p)
    }

    pub fn sqr(&self) -> Self {
        self.mul(self)
    }

    pub fn div(&self, o: &Ball) -> Self {
        let p = self.p2(o);
        let den_lo = abs_down(&o.mid).sub(&o.rad, RP, DOWN);
        if !den_lo.is_positive() || den_lo.is_zero() {
            return Ball::new(BigFloat::from_word(0, p), INF_POS, p);
        }
        let m = self.mid.div(&o.mid, p, RM);
        let num = radd(&rmul(&abs_up(&self.mid), &o.rad), &rmul(&abs_up(&o.mid), &self.rad));
        let den = abs_down(&o.mid).mul(&den_lo, RP, DOWN);
        let r = radd(&num.div(&den, RP, UP), &ulp_err(&m, p));
        Ball::new(m, r, p)
    }

    pub fn recip(&self) -> Self {
        Ball::from_i64(1, self.prec).div(self)
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        self.mul(&Ball::from_i64(k, self.prec))
    }

    pub fn add_i64(&self, k: i64) -> Self {
        self.add(&Ball::from_i64(k, self.prec))
    }

    pub fn div_i64(&self, k: i64) -> Self {
        self.div(&Ball::from_i64(k, self.prec))
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut result = Ball::from_i64(1, self.prec);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            base = base.sqr();
            e >>= 1;
        }
        result
    }

    pub fn exp(&self) -> Self {
        let p = self.prec;
        let m = with_cc(|cc| self.mid.exp(p, RM, cc));
        // |exp(x) - exp(m)| <= exp(m) (exp(r) - 1)
        // e^r - 1 <= r + r^2 for r <= 1
        let one = BigFloat::from_word(1, RP);
        let growth = if is_le(&self.rad, &one) {
            radd(&self.rad, &rmul(&self.rad, &self.rad))
        } else {
            let g = with_cc(|cc| self.rad.exp(RP, UP, cc)).sub(&one, RP, UP);
            rmul(&g, &radd(&one, &pow2(-40)))
        };
        // exp is evaluated to a relative error, so no absolute floor here.
        let slack = rmul(&abs_up(&m), &pow2(4 - p as i32));
        let r = radd(&rmul(&abs_up(&m), &growth), &slack);
        Ball::new(m, r, p)
    }

    /// Natural logarithm; `None` unless the ball is certainly positive.
    pub fn ln(&self) -> Option<Self> {
        let p = self.prec;
        let lo = rounded(&self.lower(), DOWN);
        if !self.is_finite() || !lo.is_positive() || lo.is_zero() {
            return None;
        }
        let m = with_cc(|cc| self.mid.ln(p, RM, cc));
        let r = radd(&self.rad.div(&lo, RP, UP), &trans_err(&m, p));
        Some(Ball::new(m, r, p))
    }

    /// Square root; `None` if the ball is certainly negative.
    pub fn sqrt(&self) -> Option<Self> {
        let p = self.prec;
        if !self.is_finite() || self.is_negative() {
            return None;
        }
        let lo = rounded(&self.lower(), DOWN);
        if lo.is_positive() && !lo.is_zero() {
            let m = self.mid.sqrt(p, RM);
            let den = lo.sqrt(RP, DOWN);
            let r = radd(&self.rad.div(&den, RP, UP), &ulp_err(&m, p));
            Some(Ball::new(m, r, p))
        } else {
            // Ball touches zero: enclose [0, sqrt(hi)].
            let hi = self.upper().sqrt(RP, UP);
            let m = hi.div(&BigFloat::from_word(2, RP), p, RM);
            Some(Ball::new(m.clone(), radd(&m, &pow2(-(p as i32))), p))
        }
    }

    pub fn sin(&self) -> Self {
        let p = self.prec;
        let m = with_cc(|cc| self.mid.sin(p, RM, cc));
        let r = radd(&self.rad, &trans_err(&m, p));
        Ball::new(m, r, p)
    }

    pub fn cos(&self) -> Self {
        let p = self.prec;
        let m = with_cc(|cc| self.mid.cos(p, RM, cc));
        let r = radd(&self.rad, &trans_err(&m, p));
        Ball::new(m, r, p)
    }

    pub fn max(&self, o: &Ball) -> Self {
        match self.cmp_certified(o) {
            Some(Ordering::Less) => o.clone(),
            Some(_) => self.clone(),
            None => {
                let p = self.p2(o);
                let hi = if is_lt(&self.upper(), &o.upper()) { o.upper() } else { self.upper() };
                let lo = if is_lt(&self.lower(), &o.lower()) { o.lower() } else { self.lower() };
                let m = hi.add(&lo, p, RM).div(&BigFloat::from_word(2, RP), p, RM);
                let r = radd(&rounded(&hi.sub(&m, p, UP), UP), &pow2(-(p as i32)));
                Ball::new(m, r, p)
            }
        }
    }
}

/// A complex ball: a rectangle `re × im` of real balls.
#[derive(Clone, Debug)]
pub struct ErrorBall {
    pub re: Ball,
    pub im: Ball,
}

impl ErrorBall {
    pub fn new(re: Ball, im: Ball) -> Self {
        ErrorBall { re, im }
    }

    pub fn from_f64(re: f64, im: f64, prec: usize) -> Self {
        ErrorBall { re: Ball::from_f64(re, prec), im: Ball::from_f64(im, prec) }
    }

    pub fn real(re: Ball) -> Self {
        let p = re.prec();
        ErrorBall { re, im: Ball::zero(p) }
    }

    pub fn one(prec: usize) -> Self {
        Self::real(Ball::from_i64(1, prec))
    }

    pub fn prec(&self) -> usize {
        self.re.prec().max(self.im.prec())
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    /// Upper bound for the distance from the midpoint to any point.
    pub fn radius(&self) -> f64 {
        let a = self.re.rad_f64();
        let b = self.im.rad_f64();
        next_up(a.hypot(b) * (1.0 + 2.0 * f64::EPSILON))
    }

    pub fn mid_f64(&self) -> (f64, f64) {
        (self.re.mid_f64(), self.im.mid_f64())
    }

    pub fn contains_f64(&self, re: f64, im: f64) -> bool {
        self.re.contains_f64(re) && self.im.contains_f64(im)
    }

    pub fn neg(&self) -> Self {
        ErrorBall { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn conj(&self) -> Self {
        ErrorBall { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn add(&self, o: &Self) -> Self {
        ErrorBall { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        ErrorBall { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn mul(&self, o: &Self) -> Self {
        ErrorBall {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub fn scale(&self, k: &Ball) -> Self {
        ErrorBall { re: self.re.mul(k), im: self.im.mul(k) }
    }

    pub fn norm_sqr(&self) -> Ball {
        self.re.sqr().add(&self.im.sqr())
    }

    pub fn div(&self, o: &Self) -> Self {
        let d = o.norm_sqr();
        let n = self.mul(&o.conj());
        ErrorBall { re: n.re.div(&d), im: n.im.div(&d) }
    }

    pub fn recip(&self) -> Self {
        Self::one(self.prec()).div(self)
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut result = Self::one(self.prec());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        result
    }

    pub fn exp(&self) -> Self {
        let m = self.re.exp();
        ErrorBall { re: m.mul(&self.im.cos()), im: m.mul(&self.im.sin()) }
    }

    /// `e(w) = exp(2 pi i w)`.
    pub fn e2pi(&self) -> Self {
        let two_pi = Ball::pi(self.prec()).mul_i64(2);
        let m = self.im.mul(&two_pi).neg().exp();
        let t = self.re.mul(&two_pi);
        ErrorBall { re: m.mul(&t.cos()), im: m.mul(&t.sin()) }
    }

    /// `|z|`, using that the modulus is 1-Lipschitz.
    pub fn abs(&self) -> Ball {
        let p = self.prec();
        let (rm, im) = (&self.re.mid, &self.im.mid);
        let s = rm.mul(rm, p, RM).add(&im.mul(im, p, RM), p, RM);
        let m = s.sqrt(p, RM);
        let rr = rmul(&self.re.rad, &self.re.rad);
        let ri = rmul(&self.im.rad, &self.im.rad);
        let lip = radd(&rr, &ri).sqrt(RP, UP);
        let r = radd(&lip, &rmul(&abs_up(&m), &pow2(3 - p as i32)));
        Ball::new(m, r, p)
    }

    /// `log |z|`; `None` unless `z` is certainly nonzero.
    pub fn log_abs(&self) -> Option<Ball> {
        self.abs().ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_enclose_f64_values() {
        let pi = Ball::pi(128);
        assert!(pi.add_error_f64(1e-15).contains_f64(std::f64::consts::PI));
        assert!(pi.rad_f64() < 1e-35);
        let e = Ball::from_i64(1, 128).exp();
        assert!((e.mid_f64() - std::f64::consts::E).abs() < 1e-15);
        let l = Ball::ln2(128);
        assert!((l.mid_f64() - std::f64::consts::LN_2).abs() < 1e-16);
    }

    #[test]
    fn field_operations_enclose_results() {
        let third = Ball::from_ratio(1, 3, 128);
        assert!(third.mul_i64(3).contains_f64(1.0));
        let s2 = Ball::from_i64(2, 192).sqrt().unwrap();
        assert!(s2.sqr().contains_f64(2.0));
        assert!(s2.rad_f64() < 1e-50);
        let x = Ball::from_f64(0.7, 128);
        let id = x.sin().sqr().add(&x.cos().sqr());
        assert!(id.contains_f64(1.0));
        let l = Ball::from_f64(10.0, 128).ln().unwrap();
        assert!(l.exp().contains_f64(10.0));
    }

    #[test]
    fn directed_conversion() {
        let third = Ball::from_ratio(1, 3, 128);
        let lo = third.lower_f64();
        let hi = third.upper_f64();
        assert!(lo < hi);
        assert!(lo <= 1.0 / 3.0 && 1.0 / 3.0 <= hi);
        assert!(hi - lo < 1e-15);
        let neg = third.neg();
        assert_eq!(neg.upper_f64(), -lo);
        assert_eq!(to_f64(&BigFloat::from_f64(1.5, 64), UP), 1.5);
        assert_eq!(to_f64(&BigFloat::from_f64(-2.0e300, 64), DOWN), -2.0e300);
        let tiny = pow2(-2000);
        assert!(to_f64(&tiny, UP) > 0.0);
        assert_eq!(to_f64(&tiny, DOWN), 0.0);
    }

    #[test]
    fn certified_comparisons() {
        let a = Ball::from_f64(1.0, 128);
        let b = Ball::from_f64(2.0, 128);
        assert_eq!(a.lt(&b), Some(true));
        assert_eq!(b.lt(&a), Some(false));
        let wide = a.add_error_f64(5.0);
        assert_eq!(wide.lt(&b), None);
        assert_eq!(a.le(&a), Some(true));
        assert_eq!(a.lt(&a), Some(false));
        assert!(Ball::from_f64(0.0, 128).add_error_f64(1.0).ln().is_none());
        assert!(!a.div(&Ball::zero(128).add_error_f64(0.1)).is_finite());
    }

    #[test]
    fn complex_operations() {
        let z = ErrorBall::from_f64(3.0, 4.0, 128);
        assert!(z.abs().contains_f64(5.0));
        let w = z.div(&z);
        assert!(w.contains_f64(1.0, 0.0));
        let i = ErrorBall::from_f64(0.0, 1.0, 128);
        assert!(i.powi(4).contains_f64(1.0, 0.0));
        // e(1/4) = i
        let q = ErrorBall::from_f64(0.25, 0.0, 128).e2pi();
        assert!(q.contains_f64(0.0, 1.0));
        assert!(q.radius() < 1e-30);
        let lz = z.log_abs().unwrap();
        assert!(lz.add_error_f64(1e-15).contains_f64(5f64.ln()));
    }
}
