//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` are still run and still reported
//! as FAIL; they do not change the exit status. Anything else failing makes
//! the binary exit nonzero.

use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use runge_core::analytic::{self, SweepCheck};
use runge_core::arith::next_probable_prime;
use runge_core::ball::Ball;
use runge_core::bounds;
use runge_core::cusps::CuspStructure;
use runge_core::linalg;
use runge_core::modnt::{preset_subgroup, PresetKind, SubgroupG};
use runge_core::par::Exec;
use runge_core::units::{self, TorsionIndex};

/// Criteria that cannot hold as stated, with the reason.
const KNOWN_UNATTAINABLE: &[(u32, &str)] = &[(
    2,
    "at the (p-1)/2 conjugate cusps degree zero forces ord = -2 ord_inf/(p-1), \
     so the two stated values and |ord| >= p|G| hold only at the cusp at infinity",
)];

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn ok(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn primes_upto(n: u64) -> Vec<u64> {
    let mut sieve = vec![true; n as usize + 1];
    let mut out = Vec::new();
    for i in 2..=n as usize {
        if sieve[i] {
            out.push(i as u64);
            let mut k = i * i;
            while k <= n as usize {
                sieve[k] = false;
                k += i;
            }
        }
    }
    out
}

fn split(p: u64) -> SubgroupG {
    preset_subgroup(PresetKind::SplitNormalizer, p, 1).unwrap()
}

/// `B_2({x})/2` for a residue `x` mod `n`, computed independently.
fn half_b2(x: i64, n: i64) -> Rational64 {
    let t = Rational64::new(x.rem_euclid(n), n);
    (t * t - t + Rational64::new(1, 6)) / 2
}

fn c1_cusp_counts() -> Outcome {
    for p in primes_upto(101).into_iter().filter(|&p| p > 2) {
        let orbits = match CuspStructure::new(&split(p)).galois_orbits() {
            Ok(o) => o,
            Err(e) => return ok(false, format!("p = {p}: {e}")),
        };
        let total: usize = orbits.iter().map(|o| o.members.len()).sum();
        let mut degs: Vec<usize> = orbits.iter().map(|o| o.degree).collect();
        degs.sort_unstable();
        let mut want = vec![1, (p as usize - 1) / 2];
        want.sort_unstable();
        if total != (p as usize).div_ceil(2) || degs != want {
            return ok(false, format!("p = {p}: {total} cusps, degrees {degs:?}"));
        }
    }
    ok(true, "all odd p <= 101")
}

fn c2_lord() -> Outcome {
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    let mut at_infinity_ok = true;
    let mut below_bound = 0usize;
    for p in [3u64, 5, 7, 11, 13] {
        let g = split(p);
        let cs = CuspStructure::new(&g);
        let pi = p as i64;
        let g_order = g.order() as i64;
        for a in TorsionIndex::all(p as u32) {
            for (i, c) in cs.cusps().iter().enumerate() {
                let t = a.act(&c.lift);
                let expect = if t.a1 != 0 && t.a2 != 0 { -2 * pi * (pi - 1).pow(2) } else { pi * (pi - 1).pow(3) };
                let got = units::ord_w(&g, &a, c).unwrap();
                checked += 1;
                if got != expect {
                    mismatches += 1;
                    if i == 0 {
                        at_infinity_ok = false;
                    }
                }
                if got.abs() < pi * g_order {
                    below_bound += 1;
                }
            }
        }
    }
    ok(
        mismatches == 0 && below_bound == 0,
        format!(
            "{mismatches}/{checked} (a, c) pairs differ from the two values, {below_bound} below p|G|; \
             cusp at infinity exact: {at_infinity_ok}"
        ),
    )
}

fn c3_rank() -> Outcome {
    let cases: Vec<(PresetKind, u64)> = vec![
        (PresetKind::SplitNormalizer, 3),
        (PresetKind::SplitNormalizer, 5),
        (PresetKind::SplitNormalizer, 7),
        (PresetKind::SplitNormalizer, 11),
        (PresetKind::Borel, 5),
        (PresetKind::Borel, 7),
        (PresetKind::Full, 3),
        (PresetKind::Full, 5),
        (PresetKind::Full, 7),
    ];
    let mut ranks = Vec::new();
    for (kind, p) in cases {
        let g = preset_subgroup(kind, p, 1).unwrap();
        let m = units::divisor_matrix(&g).unwrap();
        let r = units::divisor_rank(&m);
        ranks.push(format!("{}:{p}={r}", kind.short_name()));
        if r + 1 != m.row_cusps.len() {
            return ok(false, format!("{}:{p} rank {r}, {} orbits", kind.short_name(), m.row_cusps.len()));
        }
    }
    ok(true, ranks.join(" "))
}

fn plus_minus_primitive_classes(n: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if x.gcd(&y).gcd(&n) != 1 {
                continue;
            }
            let (nx, ny) = ((n - x) % n, (n - y) % n);
            if (x, y) <= (nx, ny) {
                out.push((x, y));
            }
        }
    }
    out
}

fn c4_degree_zero() -> Outcome {
    // Degree zero on X(N): sum over +-classes of B_2({(a1 x + a2 y)/N}).
    for n in [3i64, 4, 5, 7] {
        let classes = plus_minus_primitive_classes(n);
        for a1 in 0..n {
            for a2 in 0..n {
                if a1 == 0 && a2 == 0 {
                    continue;
                }
                let total: Rational64 = classes.iter().map(|&(x, y)| half_b2(a1 * x + a2 * y, n)).sum();
                if !total.is_zero() {
                    return ok(false, format!("N = {n}, a = ({a1}, {a2})"));
                }
                let a = TorsionIndex::new(n as u32, a1, a2).unwrap();
                let g = runge_core::modnt::generate_subgroup(
                    n as u32,
                    &[runge_core::modnt::ResidueMatrix::minus_one(n as u32)],
                )
                .unwrap();
                let cs = CuspStructure::new(&g);
                let lib: i64 = cs.cusps().iter().map(|c| units::ord_u(n as u32, &a, c).unwrap()).sum();
                if lib != 0 {
                    return ok(false, format!("library sum at N = {n}, a = ({a1}, {a2}) is {lib}"));
                }
            }
        }
    }
    let presets = [
        (PresetKind::SplitNormalizer, 3),
        (PresetKind::SplitNormalizer, 5),
        (PresetKind::SplitNormalizer, 7),
        (PresetKind::SplitNormalizer, 11),
        (PresetKind::Borel, 5),
        (PresetKind::Borel, 7),
        (PresetKind::Full, 5),
        (PresetKind::NonsplitNormalizer, 5),
        (PresetKind::NonsplitNormalizer, 7),
    ];
    for (kind, p) in presets {
        let g = preset_subgroup(kind, p, 1).unwrap();
        let cs = CuspStructure::new(&g);
        for a in TorsionIndex::all(p as u32) {
            // Over every geometric cusp, then orbit-weighted on representatives.
            let all: i64 = cs.cusps().iter().map(|c| units::ord_w(&g, &a, c).unwrap()).sum();
            let m = units::divisor_matrix(&g).unwrap();
            let col = m.columns.iter().position(|b| {
                g.elements().iter().any(|s| {
                    let t = a.act(s);
                    t == *b || t.neg() == *b
                })
            });
            let weighted: i64 = match col {
                Some(j) => m.row_degrees.iter().zip(&m.entries).map(|(&d, r)| d as i64 * r[j]).sum(),
                None => return ok(false, format!("no column for {a:?}")),
            };
            if all != 0 || weighted != 0 {
                return ok(false, format!("{}:{p} a = {a:?}: {all}, {weighted}", kind.short_name()));
            }
        }
    }
    ok(true, "X(N) for N in {3,4,5,7}; split, borel, full, nonsplit presets")
}

fn c5_runge_unit() -> Outcome {
    for p in [5u64, 7, 11] {
        let g = split(p);
        let cs = CuspStructure::new(&g);
        let n2 = (p * p) as i64;
        let gn2 = BigInt::from(g.order() as i64 * n2);
        for sigma in 0..cs.galois_orbits().unwrap().len() {
            let u = match units::runge_unit(&g, &[sigma], 1) {
                Ok(u) => u,
                Err(e) => return ok(false, format!("p = {p}, sigma = {sigma}: {e}")),
            };
            // Recompute the divisor from the exponents.
            for (i, c) in cs.cusps().iter().enumerate() {
                let mut ord = BigInt::zero();
                for e in &u.exponents {
                    ord += &e.b * BigInt::from(units::ord_w(&g, &e.a, c).unwrap());
                }
                let in_sigma = cs.orbit_index(i) == sigma;
                if in_sigma && !ord.is_positive() {
                    return ok(false, format!("p = {p}: ord {ord} at sigma cusp"));
                }
                if ord.abs() > &u.bound_b * &gn2 {
                    return ok(false, format!("p = {p}: |ord| = {ord} above B|G'|N^2"));
                }
            }
            let l1: BigInt = u.exponents.iter().map(|e| e.b.abs()).sum();
            // s = 1: s^{s/2+1} (|G'|N^2)^{s-1} = 1
            if l1 > BigInt::one() || l1 != u.l1_norm {
                return ok(false, format!("p = {p}: |b|_1 = {l1}"));
            }
        }
    }
    ok(true, "p in {5, 7, 11}, both singletons")
}

fn c6_llia() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x11a);
    let mut done = 0;
    while done < 1000 {
        let s = rng.gen_range(1..=4usize);
        let t = rng.gen_range(s..=8usize);
        let a = rng.gen_range(1..=10i64);
        let m: Vec<Vec<i64>> = (0..s).map(|_| (0..t).map(|_| rng.gen_range(-a..=a)).collect()).collect();
        if linalg::rank(&m) < s {
            continue;
        }
        let max = m.iter().flatten().map(|x| x.abs()).max().unwrap();
        let b = match units::runge_vector(&m, max) {
            Ok(b) => b,
            Err(e) => return ok(false, format!("{m:?}: {e}")),
        };
        for row in &m {
            let v: BigInt = row.iter().zip(&b).map(|(x, y)| BigInt::from(*x) * y).sum();
            if !v.is_positive() {
                return ok(false, format!("{m:?}: M b not positive"));
            }
        }
        let l1: BigInt = b.iter().map(|x| x.abs()).sum();
        // ||b||^2 <= s^{s+2} A^{2s-2}
        let rhs = BigInt::from(s).pow(s as u32 + 2) * BigInt::from(max).pow(2 * s as u32 - 2);
        if &l1 * &l1 > rhs {
            return ok(false, format!("{m:?}: |b|_1 = {l1}"));
        }
        done += 1;
    }
    ok(true, "1000 random full-rank matrices")
}

fn c7_sweeps() -> Outcome {
    let mut details = Vec::new();
    let mut passed = true;
    for c in SweepCheck::ALL {
        let s = analytic::sweep(c, 1000, 2024, analytic::DEFAULT_PRECISION, Exec::default());
        passed &= s.violated == 0 && s.indeterminate == 0 && s.checked + s.skipped == 1000;
        details.push(format!(
            "{}: {}/{} holds, {} skipped, max {} bits",
            s.check, s.holds, s.checked, s.skipped, s.max_precision
        ));
    }
    ok(passed, details.join("; "))
}

fn c8_bounds() -> Outcome {
    let p = bounds::DEFAULT_PRECISION;
    let tbo = bounds::bound_tbo(1, 72, 7, &Ball::zero(p), false, p).unwrap();
    let pel = bounds::pellarin_degree(1, &Ball::zero(p), p).unwrap();
    let cmp = bounds::tspto_ball(7, p).lt(&bounds::th1_split_specialization(7, p));
    let tbo_ok = tbo.value_exact.as_deref() == Some("740880") && tbo.value_log.lower <= 740880.0 && 740880.0 <= tbo.value_log.upper;
    let pel_ok = pel.value_exact == Some(BigInt::from(10).pow(82).to_string());
    ok(
        tbo_ok && pel_ok && cmp == Some(true),
        format!("tbo = {:?}, tspto(7) < 60p^2(p-1)^2 log p: {:?}, pellarin exact: {pel_ok}", tbo.value_exact, cmp),
    )
}

fn c9_twist() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7157);
    let r = |n: i64| BigRational::from_integer(BigInt::from(n));
    let mut done = 0;
    while done < 100 {
        let num = rng.gen_range(-1_000_000i64..1_000_000);
        let den = rng.gen_range(1i64..5000);
        let j = BigRational::new(BigInt::from(num), BigInt::from(den));
        if j.is_zero() || j == r(1728) {
            continue;
        }
        let c = bounds::twist_equation(&j).unwrap();
        // Oracle: c4, c6 and 1728 disc = c4^3 - c6^2.
        let b2 = &c.a1 * &c.a1 + r(4) * &c.a2;
        let b4 = r(2) * &c.a4 + &c.a1 * &c.a3;
        let b6 = &c.a3 * &c.a3 + r(4) * &c.a6;
        let c4 = &b2 * &b2 - r(24) * &b4;
        let c6 = -(&b2 * &b2 * &b2) + r(36) * &b2 * &b4 - r(216) * &b6;
        let disc = (&c4 * &c4 * &c4 - &c6 * &c6) / r(1728);
        let t = &j - r(1728);
        if disc != &j * &j / (&t * &t * &t) || &c4 * &c4 * &c4 / &disc != j || disc != c.discriminant {
            return ok(false, format!("j = {j}"));
        }
        done += 1;
    }
    ok(true, "100 random rational j")
}

fn c10_serre() -> Outcome {
    let prec = bounds::DEFAULT_PRECISION;
    let primes: Vec<u64> = primes_upto(2000).into_iter().filter(|&p| p > 2).collect();
    for j in [BigInt::zero(), BigInt::one(), BigInt::from(-3375), BigInt::from(10).pow(40)] {
        let mut last = u32::MAX;
        for &p in &primes {
            let r = bounds::serre_check(p, &j, prec).unwrap();
            let n = r.level_cap.max_n.unwrap();
            if n > last {
                return ok(false, format!("max n increases at p = {p}, j = {j}"));
            }
            last = n;
        }
    }
    let th = bounds::three_prime_threshold(prec);
    let t: BigUint = th.threshold.parse().unwrap();
    // Independent check of the root with f64 logs: 3 log x = log kappa + 2 log(23 x log x).
    let x = th.root.upper;
    let lhs = 3.0 * x.ln();
    let rhs = (1.6e83f64).ln() + 2.0 * (1.0 + 23.0 * x * x.ln()).ln();
    if (lhs - rhs).abs() > 1e-9 * lhs {
        return ok(false, format!("root {x:e} does not solve the threshold equation"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x3e);
    for _ in 0..40 {
        let off: u64 = rng.gen();
        let scale: u32 = rng.gen_range(1..1000);
        let start = &t * BigUint::from(scale) + BigUint::from(off);
        let p = next_probable_prime(&start);
        let q = next_probable_prime(&(&p + 1u32));
        let r = next_probable_prime(&(&q + 1u32));
        let c = bounds::three_prime_check(&p, &q, &r, prec).unwrap();
        if !c.rejected {
            return ok(false, format!("triple starting at {p} not rejected"));
        }
    }
    // Below the threshold the inequality can hold.
    let low = next_probable_prime(&(&t / BigUint::from(100u32)));
    let q = next_probable_prime(&(&low + 1u32));
    let r = next_probable_prime(&(&q + 1u32));
    if bounds::three_prime_check(&low, &q, &r, prec).unwrap().rejected {
        return ok(false, "triple well below the threshold rejected".to_string());
    }
    ok(
        true,
        format!(
            "max n nonincreasing for p < 2000; threshold ~ {:.3e}; 40 triples above rejected",
            t.to_f64().unwrap_or(f64::INFINITY)
        ),
    )
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "cusp combinatorics", Duration::from_secs(10), c1_cusp_counts),
        (2, "exact orders on the split Cartan curve", Duration::from_secs(30), c2_lord),
        (3, "divisor rank", Duration::from_secs(30), c3_rank),
        (4, "degree zero and weighted relation", Duration::from_secs(60), c4_degree_zero),
        (5, "Runge unit contract", Duration::from_secs(60), c5_runge_unit),
        (6, "Runge vector property", Duration::from_secs(10), c6_llia),
        (7, "analytic sweeps", Duration::from_secs(120), c7_sweeps),
        (8, "bound values", Duration::from_secs(10), c8_bounds),
        (9, "twist equation", Duration::from_secs(10), c9_twist),
        (10, "Serre check consistency", Duration::from_secs(10), c10_serre),
    ];
    let mut unexpected = 0;
    for (id, name, limit, f) in criteria {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let passed = out.passed && in_time;
        let known = KNOWN_UNATTAINABLE.iter().find(|(k, _)| *k == id);
        println!(
            "[{}] {:>2} {} ({:.2}s / {}s): {}",
            if passed { "PASS" } else { "FAIL" },
            id,
            name,
            elapsed.as_secs_f64(),
            limit.as_secs(),
            out.detail
        );
        if !passed {
            match known {
                Some((_, why)) => println!("       known: {why}"),
                None => unexpected += 1,
            }
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed");
        std::process::exit(1);
    }
}
