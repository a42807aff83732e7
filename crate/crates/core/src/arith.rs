//! Small-integer number theory used throughout the crate.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Extended gcd: returns `(g, x, y)` with `a*x + b*y = g`.
pub fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.abs(), a.signum(), 0)
    } else {
        let (g, x, y) = egcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

pub fn mod_inv(a: u32, n: u32) -> Option<u32> {
    let (g, x, _) = egcd(a as i64, n as i64);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(n as i64) as u32)
}

pub fn reduce(x: i64, n: u32) -> u32 {
    x.rem_euclid(n as i64) as u32
}

/// Distinct prime divisors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d != n / d {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

pub fn euler_phi(n: u64) -> u64 {
    prime_factors(n)
        .into_iter()
        .fold(n, |acc, p| acc / p * (p - 1))
}

/// `(p, k)` when `n = p^k` with `p` prime and `k >= 1`.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    let f = prime_factors(n);
    if f.len() != 1 {
        return None;
    }
    let p = f[0];
    let mut k = 0;
    let mut m = n;
    while m.is_multiple_of(p) {
        m /= p;
        k += 1;
    }
    Some((p, k))
}

/// |GL_2(Z/nZ)| = n^4 prod_{p|n} (1 - 1/p)(1 - 1/p^2).
pub fn gl2_order(n: u64) -> u64 {
    let mut order = n.pow(4);
    for p in prime_factors(n) {
        order = order / p.pow(3) * ((p - 1) * (p * p - 1));
    }
    order
}

/// |SL_2(Z/nZ)| = n^3 prod_{p|n} (1 - 1/p^2).
pub fn sl2_order(n: u64) -> u64 {
    let mut order = n.pow(3);
    for p in prime_factors(n) {
        order = order / (p * p) * (p * p - 1);
    }
    order
}

const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin with a fixed base set; deterministic below 3.3e24 and a
/// probable-prime test beyond.
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &p in &MR_BASES {
        let bp = BigUint::from(p);
        if (n % &bp).is_zero() {
            return *n == bp;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'outer: for &a in &MR_BASES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Smallest probable prime `>= n`.
pub fn next_probable_prime(n: &BigUint) -> BigUint {
    let mut c = n.clone();
    if c <= BigUint::from(2u32) {
        return BigUint::from(2u32);
    }
    if c.is_even() {
        c += 1u32;
    }
    while !is_probable_prime(&c) {
        c += 2u32;
    }
    c
}

/// Smallest quadratic non-residue modulo an odd prime.
pub fn least_nonresidue(p: u64) -> u64 {
    (2..p)
        .find(|&e| pow_mod(e, (p - 1) / 2, p) == p - 1)
        .expect("odd prime has a non-residue")
}
