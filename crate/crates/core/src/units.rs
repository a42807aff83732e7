//! Divisors of Siegel units and their traces over G.
//!
//! For `a = (a1/N, a2/N)` the Siegel unit `u_a = g_a^{12N}` lives on X(N)
//! and has order `12 N^2 l_a` at the cusp at infinity, measured in the
//! parameter `q^{1/N}`, where `l_a = B_2({a1}) / 2`. Orders at other cusps
//! are obtained by moving `a` with an SL_2 lift of the cusp. The unit
//! `w_a = prod_{s in G} u_{a s}` descends to X_G.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::gcd;
use crate::cusps::{CuspClass, CuspStructure};
use crate::error::{Error, Result};
use crate::linalg;
use crate::modnt::{ResidueMatrix, SubgroupG};
use crate::par::Exec;

/// `a = (a1/N, a2/N)`, a nonzero element of `(N^-1 Z / Z)^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TorsionIndex {
    pub n: u32,
    pub a1: u32,
    pub a2: u32,
}

impl TorsionIndex {
    pub fn new(n: u32, a1: i64, a2: i64) -> Result<Self> {
        let r1 = a1.rem_euclid(n as i64) as u32;
        let r2 = a2.rem_euclid(n as i64) as u32;
        if n < 2 || (r1 == 0 && r2 == 0) {
            return Err(Error::InvalidTorsionIndex(r1, r2, n));
        }
        Ok(TorsionIndex { n, a1: r1, a2: r2 })
    }

    /// Exact order of `a` in `(Q/Z)^2`.
    pub fn order(&self) -> u32 {
        let g = gcd(gcd(self.a1 as u64, self.a2 as u64), self.n as u64);
        self.n / g as u32
    }

    /// Row vector times matrix.
    pub fn act(&self, m: &ResidueMatrix) -> TorsionIndex {
        let (a1, a2) = m.act_right((self.a1, self.a2));
        TorsionIndex { n: self.n, a1, a2 }
    }

    pub fn neg(&self) -> TorsionIndex {
        let n = self.n;
        TorsionIndex { n, a1: (n - self.a1) % n, a2: (n - self.a2) % n }
    }

    /// `{a1}` as an exact rational in `[0, 1)`.
    pub fn frac1(&self) -> Rational64 {
        Rational64::new(self.a1 as i64, self.n as i64)
    }

    pub fn frac2(&self) -> Rational64 {
        Rational64::new(self.a2 as i64, self.n as i64)
    }

    /// All nonzero indices at level `n`, in lexicographic order.
    pub fn all(n: u32) -> Vec<TorsionIndex> {
        (0..n)
            .flat_map(|a1| (0..n).map(move |a2| (a1, a2)))
            .filter(|&(a1, a2)| a1 != 0 || a2 != 0)
            .map(|(a1, a2)| TorsionIndex { n, a1, a2 })
            .collect()
    }
}

/// `B_2(t) = t^2 - t + 1/6`.
pub fn bernoulli2(t: Rational64) -> Rational64 {
    t * t - t + Rational64::new(1, 6)
}

/// `l_a = B_2({a1}) / 2`.
pub fn ell(a: &TorsionIndex) -> Rational64 {
    bernoulli2(a.frac1()) / 2
}

fn twelve_n2_ell(a: &TorsionIndex) -> Result<i64> {
    let n = a.n as i64;
    let v = ell(a) * Rational64::from_integer(12 * n * n);
    if !v.is_integer() {
        return Err(Error::NotIntegral(format!("12 N^2 l_a = {v} for {a:?}")));
    }
    Ok(v.to_integer())
}

/// Order of `u_a` at the cusp `c` of X(N), in the parameter `q^{1/N}`.
pub fn ord_u(n: u32, a: &TorsionIndex, c: &CuspClass) -> Result<i64> {
    if a.n != n || c.n != n {
        return Err(Error::ModulusMismatch { expected: n, found: if a.n != n { a.n } else { c.n } });
    }
    twelve_n2_ell(&a.act(&c.lift))
}

/// Order of `w_a` at the cusp `c` of X_G, in the local parameter of X_G.
pub fn ord_w(g: &SubgroupG, a: &TorsionIndex, c: &CuspClass) -> Result<i64> {
    if a.n != g.n || c.n != g.n {
        return Err(Error::ModulusMismatch { expected: g.n, found: if a.n != g.n { a.n } else { c.n } });
    }
    let mut sum: i64 = 0;
    for s in g.elements() {
        sum += twelve_n2_ell(&a.act(s).act(&c.lift))?;
    }
    let v = Rational64::new(sum * c.width as i64, g.n as i64);
    if !v.is_integer() {
        return Err(Error::NotIntegral(format!("ord_c w_a = {v} for {a:?} at {:?}", c.rep)));
    }
    Ok(v.to_integer())
}

/// Representatives of the nonzero indices modulo the right action of G and
/// `a -> -a`: the lexicographically least element of each orbit, sorted.
pub fn column_representatives(g: &SubgroupG) -> Vec<TorsionIndex> {
    let mut seen = HashSet::new();
    let mut reps = Vec::new();
    for a in TorsionIndex::all(g.n) {
        if seen.contains(&a) {
            continue;
        }
        for s in g.elements() {
            let b = a.act(s);
            seen.insert(b);
            seen.insert(b.neg());
        }
        reps.push(a);
    }
    reps
}

/// The matrix `(ord_c w_a)` with one row per rational orbit of cusps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorMatrix {
    pub n: u32,
    /// Representative cusp of each row's orbit.
    pub row_cusps: Vec<CuspClass>,
    pub row_degrees: Vec<usize>,
    pub columns: Vec<TorsionIndex>,
    pub entries: Vec<Vec<i64>>,
}

impl DivisorMatrix {
    pub fn max_abs_entry(&self) -> i64 {
        self.entries.iter().flatten().map(|x| x.abs()).max().unwrap_or(0)
    }
}

pub fn divisor_matrix(g: &SubgroupG) -> Result<DivisorMatrix> {
    divisor_matrix_with(g, &CuspStructure::new(g), Exec::default())
}

pub fn divisor_matrix_with(g: &SubgroupG, cs: &CuspStructure, exec: Exec) -> Result<DivisorMatrix> {
    let orbits = cs.galois_orbits()?;
    let row_cusps: Vec<CuspClass> = orbits.iter().map(|o| o.members[0].clone()).collect();
    let columns = column_representatives(g);
    let cols: Vec<Result<Vec<i64>>> = exec.map(&columns, |a| {
        row_cusps.iter().map(|c| ord_w(g, a, c)).collect()
    });
    let cols = cols.into_iter().collect::<Result<Vec<_>>>()?;
    let entries = (0..row_cusps.len())
        .map(|r| cols.iter().map(|col| col[r]).collect())
        .collect();
    Ok(DivisorMatrix {
        n: g.n,
        row_degrees: orbits.iter().map(|o| o.degree).collect(),
        row_cusps,
        columns,
        entries,
    })
}

pub fn divisor_rank(m: &DivisorMatrix) -> usize {
    linalg::rank(&m.entries)
}

/// Integer vector `b` with `M b > 0` componentwise and
/// `||b||_1 <= s^{s/2+1} A^{s-1}`, for an `s x t` matrix of rank `s` with
/// entries bounded by `A`.
///
/// The first nonsingular `s x s` minor in column order is used; on its
/// columns `b` is given by Cramer's rule against the all-ones vector, scaled
/// by the determinant's sign so that `M b = (|d|, ..., |d|)`.
pub fn runge_vector(m: &[Vec<i64>], a_bound: i64) -> Result<Vec<BigInt>> {
    let s = m.len();
    let t = m.first().map_or(0, |r| r.len());
    let pivots = linalg::pivot_columns(m);
    if pivots.len() < s {
        return Err(Error::RankDeficient { rank: pivots.len(), expected: s });
    }
    let sub: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| pivots.iter().map(|&j| BigInt::from(r[j])).collect())
        .collect();
    let d = linalg::det(&sub);
    let sign = if d.is_negative() { -BigInt::one() } else { BigInt::one() };
    let mut b = vec![BigInt::zero(); t];
    for (k, &col) in pivots.iter().enumerate() {
        let mut replaced = sub.clone();
        for row in replaced.iter_mut() {
            row[k] = BigInt::one();
        }
        b[col] = &sign * linalg::det(&replaced);
    }
    let norm = linalg::l1_norm(&b);
    if !within_llia_bound(&norm, s, &BigInt::from(a_bound)) {
        return Err(Error::BoundViolated { norm: norm.to_string(), s, a: a_bound.to_string() });
    }
    debug_assert!(linalg::mat_vec(m, &b).iter().all(|x| x.is_positive()));
    Ok(b)
}

/// `x <= s^{s/2+1} A^{s-1}`, compared exactly by squaring.
pub fn within_llia_bound(x: &BigInt, s: usize, a: &BigInt) -> bool {
    let sb = BigInt::from(s);
    let lhs = x * x;
    let rhs = num_traits::pow(sb, s + 2) * num_traits::pow(a.clone(), 2 * s.saturating_sub(1));
    lhs <= rhs
}

/// `floor(s^{s/2+1} (g N^2)^{s-1})`, exact.
pub fn bound_b(s: usize, g_order: usize, n: u32) -> BigInt {
    let a = BigInt::from(g_order as u64 * n as u64 * n as u64);
    let sq = num_traits::pow(BigInt::from(s), s + 2) * num_traits::pow(a, 2 * (s - 1));
    sq.sqrt()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitExponent {
    pub a: TorsionIndex,
    pub b: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CuspOrder {
    pub cusp: CuspClass,
    pub orbit_id: usize,
    pub ord: BigInt,
}

/// Height budget for the constant `lambda` of the Runge unit.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaBudget {
    /// `12 B |G| N`; the budget is this times `log 2`.
    pub log2_coefficient: BigInt,
    /// Upper bound for `12 B |G| N log 2` as a float.
    pub log2_form: f64,
    /// The relaxed integer budget `9 B |G| N`.
    pub relaxed: BigInt,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RungeUnit {
    pub s: usize,
    pub sigma: Vec<usize>,
    pub exponents: Vec<UnitExponent>,
    pub divisor: Vec<CuspOrder>,
    pub l1_norm: BigInt,
    pub bound_b: BigInt,
    pub lambda_height_budget: LambdaBudget,
}

/// A unit on X_G with positive order at every cusp whose rational orbit is
/// in `sigma` (given as orbit ids).
pub fn runge_unit(g: &SubgroupG, sigma: &[usize], s: usize) -> Result<RungeUnit> {
    runge_unit_with(g, &CuspStructure::new(g), sigma, s, Exec::default())
}

pub fn runge_unit_with(
    g: &SubgroupG,
    cs: &CuspStructure,
    sigma: &[usize],
    s: usize,
    exec: Exec,
) -> Result<RungeUnit> {
    let orbits = cs.galois_orbits()?;
    let mut sig = sigma.to_vec();
    sig.sort_unstable();
    sig.dedup();
    if sig.is_empty() || sig.len() >= orbits.len() || sig.iter().any(|&i| i >= orbits.len()) {
        return Err(Error::SigmaNotProper(format!(
            "{:?} among {} orbits",
            sigma,
            orbits.len()
        )));
    }
    if s == 0 || orbits.len() <= s {
        return Err(Error::RungeConditionFailed { orbits: orbits.len(), s });
    }
    if sig.len() > s {
        return Err(Error::SigmaNotProper(format!("|sigma| = {} exceeds s = {s}", sig.len())));
    }

    let dm = divisor_matrix_with(g, cs, exec)?;
    let sub: Vec<Vec<i64>> = sig.iter().map(|&i| dm.entries[i].clone()).collect();
    let n2g = g.order() as i64 * g.n as i64 * g.n as i64;
    let b = runge_vector(&sub, n2g)?;

    let bound = bound_b(s, g.order(), g.n);
    let l1 = linalg::l1_norm(&b);
    if l1 > bound {
        return Err(Error::BoundViolated { norm: l1.to_string(), s, a: n2g.to_string() });
    }
    let exponents: Vec<UnitExponent> = dm
        .columns
        .iter()
        .zip(&b)
        .filter(|(_, x)| !x.is_zero())
        .map(|(a, x)| UnitExponent { a: *a, b: x.clone() })
        .collect();

    let ord_cap = &bound * BigInt::from(n2g);
    let divisor = exec
        .map(cs.cusps(), |c| -> Result<BigInt> {
            let mut total = BigInt::zero();
            for e in &exponents {
                total += BigInt::from(ord_w(g, &e.a, c)?) * &e.b;
            }
            Ok(total)
        })
        .into_iter()
        .enumerate()
        .map(|(i, ord)| {
            Ok(CuspOrder { cusp: cs.cusps()[i].clone(), orbit_id: cs.orbit_index(i), ord: ord? })
        })
        .collect::<Result<Vec<_>>>()?;
    for c in &divisor {
        if sig.contains(&c.orbit_id) && !c.ord.is_positive() {
            return Err(Error::HypothesisFailed(format!("order {} at {:?}", c.ord, c.cusp.rep)));
        }
        if c.ord.abs() > ord_cap {
            return Err(Error::BoundViolated { norm: c.ord.to_string(), s, a: n2g.to_string() });
        }
    }

    let coeff = BigInt::from(12) * &bound * BigInt::from(g.order() as u64 * g.n as u64);
    let log2_form = big_to_f64_up(&coeff) * std::f64::consts::LN_2 * (1.0 + 4.0 * f64::EPSILON);
    Ok(RungeUnit {
        s,
        sigma: sig,
        exponents,
        divisor,
        l1_norm: l1,
        lambda_height_budget: LambdaBudget {
            relaxed: BigInt::from(9) * &bound * BigInt::from(g.order() as u64 * g.n as u64),
            log2_coefficient: coeff,
            log2_form,
        },
        bound_b: bound,
    })
}

fn big_to_f64_up(x: &BigInt) -> f64 {
    let v: f64 = x.to_string().parse().unwrap_or(f64::INFINITY);
    v * (1.0 + 2.0 * f64::EPSILON)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cusps::enumerate_cusps;
    use crate::modnt::{preset_subgroup, PresetKind};

    fn q(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli2(q(0, 1)), q(1, 6));
        assert_eq!(bernoulli2(q(1, 2)), q(-1, 12));
        for n in 2..12i64 {
            let s: Rational64 = (1..n).map(|k| bernoulli2(q(k, n))).sum();
            assert_eq!(s, q(-(n - 1), 6 * n));
        }
    }

    #[test]
    fn ell_values() {
        assert_eq!(ell(&TorsionIndex::new(5, 0, 1).unwrap()), q(1, 12));
        assert_eq!(ell(&TorsionIndex::new(5, 1, 0).unwrap()), q(1, 300));
        assert_eq!(ell(&TorsionIndex::new(6, 3, 2).unwrap()), q(-1, 24));
        assert_eq!(ell(&TorsionIndex::new(5, 6, -4).unwrap()), q(1, 300));
        assert!(TorsionIndex::new(5, 5, 10).is_err());
        assert_eq!(TorsionIndex::new(6, 2, 4).unwrap().order(), 3);
    }

    #[test]
    fn ord_u_at_infinity() {
        let g = preset_subgroup(PresetKind::Full, 5, 1).unwrap();
        let inf = enumerate_cusps(&g).remove(0);
        assert_eq!(ord_u(5, &TorsionIndex::new(5, 1, 0).unwrap(), &inf).unwrap(), 1);
        assert_eq!(ord_u(5, &TorsionIndex::new(5, 0, 1).unwrap(), &inf).unwrap(), 25);
        let alt = CuspClass { lift: ResidueMatrix::new(5, 1, 3, 0, 1), ..inf.clone() };
        for a in TorsionIndex::all(5) {
            assert_eq!(ord_u(5, &a, &inf).unwrap(), ord_u(5, &a, &alt).unwrap());
        }
    }

    #[test]
    fn split_cartan_orders() {
        let g = preset_subgroup(PresetKind::SplitNormalizer, 5, 1).unwrap();
        let inf = enumerate_cusps(&g).remove(0);
        assert_eq!(ord_w(&g, &TorsionIndex::new(5, 1, 2).unwrap(), &inf).unwrap(), -160);
        assert_eq!(ord_w(&g, &TorsionIndex::new(5, 0, 1).unwrap(), &inf).unwrap(), 320);
        let g3 = preset_subgroup(PresetKind::SplitNormalizer, 3, 1).unwrap();
        let inf3 = enumerate_cusps(&g3).remove(0);
        assert_eq!(ord_w(&g3, &TorsionIndex::new(3, 1, 1).unwrap(), &inf3).unwrap(), -24);
    }

    #[test]
    fn divisor_matrices() {
        let g = preset_subgroup(PresetKind::SplitNormalizer, 5, 1).unwrap();
        let m = divisor_matrix(&g).unwrap();
        assert_eq!(m.row_degrees, vec![1, 2]);
        for j in 0..m.columns.len() {
            assert_eq!(m.entries[0][j] + 2 * m.entries[1][j], 0);
        }
        assert_eq!(divisor_rank(&m), 1);
        assert!(m.max_abs_entry() <= 32 * 25);

        let full = preset_subgroup(PresetKind::Full, 5, 1).unwrap();
        let m = divisor_matrix(&full).unwrap();
        assert_eq!(m.entries.len(), 1);
        assert!(m.entries[0].iter().all(|&x| x == 0));
        assert_eq!(divisor_rank(&m), 0);

        let borel = preset_subgroup(PresetKind::Borel, 5, 1).unwrap();
        assert_eq!(divisor_rank(&divisor_matrix(&borel).unwrap()), 1);
        let split7 = preset_subgroup(PresetKind::SplitNormalizer, 7, 1).unwrap();
        assert_eq!(divisor_rank(&divisor_matrix(&split7).unwrap()), 1);
    }

    #[test]
    fn sequential_and_parallel_matrices_agree() {
        let g = preset_subgroup(PresetKind::Borel, 7, 1).unwrap();
        let cs = CuspStructure::new(&g);
        assert_eq!(
            divisor_matrix_with(&g, &cs, Exec::Sequential).unwrap(),
            divisor_matrix_with(&g, &cs, Exec::Parallel).unwrap()
        );
    }

    #[test]
    fn runge_vector_examples() {
        let big = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        assert_eq!(runge_vector(&[vec![1, -1]], 1).unwrap(), big(&[1, 0]));
        assert_eq!(runge_vector(&[vec![1, 0], vec![0, 1]], 1).unwrap(), big(&[1, 1]));
        assert_eq!(runge_vector(&[vec![2, 1], vec![1, 1]], 2).unwrap(), big(&[0, 1]));
        assert_eq!(runge_vector(&[vec![-3, 5]], 5).unwrap(), big(&[-1, 0]));
        assert!(matches!(
            runge_vector(&[vec![1, 2], vec![2, 4]], 4),
            Err(Error::RankDeficient { rank: 1, expected: 2 })
        ));
    }

    #[test]
    fn runge_units_for_split_cartan() {
        let g = preset_subgroup(PresetKind::SplitNormalizer, 5, 1).unwrap();
        let u = runge_unit(&g, &[0], 1).unwrap();
        assert_eq!(u.exponents.len(), 1);
        assert_eq!(u.exponents[0].a, TorsionIndex::new(5, 0, 1).unwrap());
        assert_eq!(u.exponents[0].b, BigInt::one());
        assert_eq!(u.divisor[0].ord, BigInt::from(320));
        assert_eq!(u.bound_b, BigInt::one());

        let g7 = preset_subgroup(PresetKind::SplitNormalizer, 7, 1).unwrap();
        let u = runge_unit(&g7, &[1], 1).unwrap();
        let on_sigma: Vec<_> = u.divisor.iter().filter(|c| c.orbit_id == 1).collect();
        assert_eq!(on_sigma.len(), 3);
        assert!(on_sigma.iter().all(|c| c.ord.is_positive()));
        assert_eq!(u.lambda_height_budget.relaxed, BigInt::from(9 * 72 * 7));
    }

    #[test]
    fn runge_unit_errors() {
        let full = preset_subgroup(PresetKind::Full, 5, 1).unwrap();
        assert!(matches!(runge_unit(&full, &[0], 1), Err(Error::SigmaNotProper(_))));
        let g = preset_subgroup(PresetKind::SplitNormalizer, 5, 1).unwrap();
        assert!(matches!(runge_unit(&g, &[0, 1], 1), Err(Error::SigmaNotProper(_))));
        assert!(matches!(
            runge_unit(&g, &[0], 2),
            Err(Error::RungeConditionFailed { orbits: 2, s: 2 })
        ));
    }

    #[test]
    fn bound_b_values() {
        assert_eq!(bound_b(1, 72, 7), BigInt::one());
        // 2^2 * (32*25) = 3200
        assert_eq!(bound_b(2, 32, 5), BigInt::from(3200));
        // floor(3^{2.5} * 100^2)
        assert_eq!(bound_b(3, 1, 10).to_string(), "155884");
    }
}
