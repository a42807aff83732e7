use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use runge_core::arith::{is_prime, next_probable_prime};
use runge_core::ball::Ball;
use runge_core::bounds;
use runge_core::modnt::{preset_subgroup, PresetKind};

const P: usize = 128;

fn r(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[test]
fn tspto_below_general_bound_up_to_ten_thousand() {
    for p in (3..=10_000u64).filter(|&p| is_prime(p)) {
        let lhs = bounds::tspto_ball(p, P);
        let rhs = bounds::th1_split_specialization(p, P);
        assert_eq!(lhs.lt(&rhs), Some(true), "p = {p}");
    }
}

#[test]
fn th1_matches_split_specialization() {
    for p in [5u64, 7, 11] {
        let g = preset_subgroup(PresetKind::SplitNormalizer, p, 1).unwrap();
        let rep = bounds::bound_th1(&g, P).unwrap();
        let spec = bounds::th1_split_specialization(p, P);
        assert!(rep.value_log.lower <= spec.upper_f64() && spec.lower_f64() <= rep.value_log.upper);
        // 30 * 2 (p-1)^2 * p^2
        assert_eq!(rep.value_exact, Some(format!("{}·log {p}", 60 * p * p * (p - 1) * (p - 1))));
    }
}

#[test]
fn th1_rejects_transitive_and_small_det() {
    let full = preset_subgroup(PresetKind::Full, 7, 1).unwrap();
    assert!(bounds::bound_th1(&full, P).is_err());
}

#[test]
fn tbo_exact_values() {
    // s = 1: 1 * (|G'| N^2) * N * 30
    let rep = bounds::bound_tbo(1, 72, 7, &Ball::zero(P), false, P).unwrap();
    assert_eq!(rep.value_exact.as_deref(), Some((72 * 49 * 7 * 30).to_string().as_str()));
    // s = 4: 4^3 (g N^2)^4 N 30
    let rep = bounds::bound_tbo(4, 2, 3, &Ball::zero(P), true, P).unwrap();
    let want = BigInt::from(64) * BigInt::from(18).pow(4) * BigInt::from(90);
    assert_eq!(rep.value_exact, Some(want.to_string()));
}

#[test]
fn max_exponent_matches_float_logs() {
    for h in [0.0f64, 1.0, 10.0, 1000.0] {
        let cap = bounds::level_cap_ball(&Ball::from_f64(h, P), P);
        let lcap = 1.6f64.ln() + 83.0 * 10f64.ln() + 2.0 * (1.0 + h).ln();
        for p in [3u64, 11, 101, 9973] {
            let n = bounds::max_exponent_under(&BigUint::from(p), &cap);
            let want = (lcap / (p as f64).ln()).floor() as u32;
            assert_eq!(n, want, "p = {p}, h = {h}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tspto_monotone(p in 3u64..5000, gap in 1u64..500) {
        let a = bounds::tspto_ball(p, P);
        let b = bounds::tspto_ball(p + gap, P);
        prop_assert_eq!(a.lt(&b), Some(true));
    }

    #[test]
    fn tbo_monotone(s in 1u32..5, g in 1u64..200, n in 2u32..20, r1 in 0.0f64..50.0, dr in 0.01f64..50.0) {
        let a = bounds::bound_tbo(s, g, n, &Ball::from_f64(r1, P), false, P).unwrap();
        let b = bounds::bound_tbo(s, g, n, &Ball::from_f64(r1 + dr, P), false, P).unwrap();
        let c = bounds::bound_tbo(s, g + 1, n, &Ball::from_f64(r1, P), false, P).unwrap();
        let d = bounds::bound_tbo(s + 1, g, n, &Ball::from_f64(r1, P), false, P).unwrap();
        prop_assert!(a.value_log.upper < b.value_log.lower);
        prop_assert!(a.value_log.upper < c.value_log.lower);
        prop_assert!(a.value_log.upper < d.value_log.lower);
    }

    #[test]
    fn level_cap_and_pellarin_monotone(h in 0.0f64..1e6, dh in 1e-3f64..1e3, d in 1u32..20) {
        let x = Ball::from_f64(h, P);
        let y = Ball::from_f64(h + dh, P);
        prop_assert_eq!(bounds::level_cap_ball(&x, P).lt(&bounds::level_cap_ball(&y, P)), Some(true));
        let a = bounds::pellarin_degree(d, &x, P).unwrap();
        let b = bounds::pellarin_degree(d, &y, P).unwrap();
        let c = bounds::pellarin_degree(d + 1, &x, P).unwrap();
        prop_assert!(a.value_log.upper < b.value_log.lower);
        prop_assert!(a.value_log.upper < c.value_log.lower);
    }

    #[test]
    fn intervals_round_outward(p in 3u64..100_000) {
        prop_assume!(is_prime(p));
        let rep = bounds::bound_tspto(p, P).unwrap();
        let f = 23.0 * p as f64 * (p as f64).ln();
        prop_assert!(rep.value_log.lower <= f * (1.0 + 1e-14));
        prop_assert!(rep.value_log.upper >= f * (1.0 - 1e-14));
        prop_assert!(rep.value_log.lower <= rep.value_log.upper);
    }

    #[test]
    fn twist_via_c4_c6(num in -10_000_000i64..10_000_000, den in 1i64..100_000) {
        let j = BigRational::new(BigInt::from(num), BigInt::from(den));
        prop_assume!(!j.is_zero() && j != r(1728));
        let c = bounds::twist_equation(&j).unwrap();
        let b2 = &c.a1 * &c.a1 + r(4) * &c.a2;
        let b4 = r(2) * &c.a4 + &c.a1 * &c.a3;
        let b6 = &c.a3 * &c.a3 + r(4) * &c.a6;
        let c4 = &b2 * &b2 - r(24) * &b4;
        let c6 = -(&b2 * &b2 * &b2) + r(36) * &b2 * &b4 - r(216) * &b6;
        let disc = (&c4 * &c4 * &c4 - &c6 * &c6) / r(1728);
        prop_assert_eq!(&disc, &c.discriminant);
        prop_assert_eq!(&c4 * &c4 * &c4 / &disc, j);
    }

    #[test]
    fn three_primes_above_threshold_rejected(scale in 1u32..10_000, off in any::<u64>()) {
        let t: BigUint = bounds::three_prime_threshold(P).threshold.parse().unwrap();
        let p = next_probable_prime(&(&t * BigUint::from(scale) + BigUint::from(off)));
        let q = next_probable_prime(&(&p + 1u32));
        let r = next_probable_prime(&(&q + 1u32));
        prop_assert!(bounds::three_prime_check(&p, &q, &r, P).unwrap().rejected);
    }

    #[test]
    fn calr_below_log_n(n in 2u32..100_000) {
        let all: Vec<u64> = (2..=n as u64).filter(|&p| (n as u64).is_multiple_of(p) && is_prime(p)).collect();
        let c = bounds::calr(n, &all, P);
        prop_assert!(c.within_cap);
        let oracle: f64 = all.iter().map(|&p| (p as f64).ln() / (p - 1) as f64).sum();
        prop_assert!(c.value.lower <= oracle + 1e-12 && oracle - 1e-12 <= c.value.upper);
    }
}

#[test]
fn threshold_is_tight() {
    let th = bounds::three_prime_threshold(P);
    let t: BigUint = th.threshold.parse().unwrap();
    let x = t.to_f64().unwrap();
    assert!((3.0 * x.ln() - (1.6e83f64.ln() + 2.0 * (1.0 + 23.0 * x * x.ln()).ln())).abs() < 1e-9);
}
