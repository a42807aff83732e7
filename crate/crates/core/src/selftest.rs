//! A fast pass over the main invariants, used by `runge selftest`.

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, SweepCheck};
use crate::ball::Ball;
use crate::bounds;
use crate::cusps::CuspStructure;
use crate::error::Result;
use crate::modnt::{generate_subgroup, preset_subgroup, PresetKind, ResidueMatrix};
use crate::par::Exec;
use crate::units::{self, TorsionIndex};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn record(name: &str, r: Result<(bool, String)>) -> SelftestResult {
    match r {
        Ok((passed, detail)) => SelftestResult { name: name.into(), passed, detail },
        Err(e) => SelftestResult { name: name.into(), passed: false, detail: e.to_string() },
    }
}

fn split(p: u64) -> Result<crate::modnt::SubgroupG> {
    preset_subgroup(PresetKind::SplitNormalizer, p, 1)
}

fn cusp_counts() -> Result<(bool, String)> {
    for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        let orbits = CuspStructure::new(&split(p)?).galois_orbits()?;
        let total: usize = orbits.iter().map(|o| o.degree).sum();
        let mut degs: Vec<usize> = orbits.iter().map(|o| o.degree).collect();
        degs.sort_unstable();
        let want = if p == 3 { vec![1, 1] } else { vec![1, (p as usize - 1) / 2] };
        if total != (p as usize).div_ceil(2) || degs != want {
            return Ok((false, format!("p = {p}: degrees {degs:?}")));
        }
    }
    Ok((true, "split normalizer p <= 31".into()))
}

/// Exact values of `ord_c w_a` on the split Cartan normalizer: at the cusp
/// at infinity `-2p(p-1)^2` when both coordinates of `a` are nonzero and
/// `p(p-1)^3` otherwise; at the `(p-1)/2` remaining (conjugate) cusps the
/// value is forced by degree zero to be `-2/(p-1)` times that.
pub fn lord_values_hold(p: u64) -> Result<bool> {
    let g = split(p)?;
    let cs = CuspStructure::new(&g);
    let pi = p as i64;
    for a in TorsionIndex::all(g.n) {
        let at_inf = if a.a1 != 0 && a.a2 != 0 { -2 * pi * (pi - 1).pow(2) } else { pi * (pi - 1).pow(3) };
        for (i, c) in cs.cusps().iter().enumerate() {
            let expect = if i == 0 { at_inf } else { -2 * at_inf / (pi - 1) };
            if units::ord_w(&g, &a, c)? != expect {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn lord() -> Result<(bool, String)> {
    for p in [3u64, 5, 7] {
        if !lord_values_hold(p)? {
            return Ok((false, format!("p = {p}")));
        }
    }
    Ok((true, "p in {3, 5, 7}".into()))
}

fn ranks() -> Result<(bool, String)> {
    let cases = [
        (PresetKind::SplitNormalizer, 5),
        (PresetKind::SplitNormalizer, 7),
        (PresetKind::Borel, 5),
        (PresetKind::Full, 5),
    ];
    for (kind, p) in cases {
        let g = preset_subgroup(kind, p, 1)?;
        let m = units::divisor_matrix(&g)?;
        if units::divisor_rank(&m) != m.row_cusps.len() - 1 {
            return Ok((false, format!("{}:{p}", kind.short_name())));
        }
    }
    Ok((true, "rank = #orbits - 1".into()))
}

/// `sum_c ord_c u_a = 0` over the cusps of X(N).
pub fn degree_zero_holds(n: u32) -> Result<bool> {
    let g = generate_subgroup(n, &[ResidueMatrix::minus_one(n)])?;
    let cs = CuspStructure::new(&g);
    for a in TorsionIndex::all(n) {
        let mut total = 0i64;
        for c in cs.cusps() {
            total += units::ord_u(n, &a, c)?;
        }
        if total != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn degree_zero() -> Result<(bool, String)> {
    for n in [3u32, 4, 5, 7] {
        if !degree_zero_holds(n)? {
            return Ok((false, format!("N = {n}")));
        }
    }
    Ok((true, "N in {3, 4, 5, 7}".into()))
}

fn runge_units() -> Result<(bool, String)> {
    let g = split(5)?;
    for sigma in [0usize, 1] {
        let u = units::runge_unit(&g, &[sigma], 1)?;
        for d in &u.divisor {
            if (d.orbit_id == sigma) != d.ord.is_positive() {
                return Ok((false, format!("sigma = {sigma}")));
            }
        }
    }
    Ok((true, "split 5, both singletons".into()))
}

fn bound_values() -> Result<(bool, String)> {
    let p = bounds::DEFAULT_PRECISION;
    let tbo = bounds::bound_tbo(1, 72, 7, &Ball::zero(p), false, p)?;
    let pel = bounds::pellarin_degree(1, &Ball::zero(p), p)?;
    let cmp = bounds::tspto_ball(7, p).lt(&bounds::th1_split_specialization(7, p));
    let ok = tbo.value_exact.as_deref() == Some("740880")
        && pel.value_exact == Some(BigInt::from(10).pow(82).to_string())
        && cmp == Some(true);
    Ok((ok, "tbo, pellarin, tspto comparison".into()))
}

fn twist() -> Result<(bool, String)> {
    for j in [1729i64, 1726, -1, 5, 100000] {
        let jr = num_rational::BigRational::from_integer(BigInt::from(j));
        let c = bounds::twist_equation(&jr)?;
        if c.j_invariant != jr {
            return Ok((false, format!("j = {j}")));
        }
    }
    Ok((true, "five values of j".into()))
}

fn sweeps(prec: usize) -> Result<(bool, String)> {
    for c in SweepCheck::ALL {
        let s = analytic::sweep(c, 20, 1, prec, Exec::default());
        if s.violated > 0 || s.indeterminate > 0 {
            return Ok((false, format!("{s:?}")));
        }
    }
    Ok((true, "20 samples per check".into()))
}

pub fn run_all(prec: usize) -> Vec<SelftestResult> {
    vec![
        record("cusp_counts", cusp_counts()),
        record("lord_values", lord()),
        record("divisor_rank", ranks()),
        record("degree_zero", degree_zero()),
        record("runge_unit", runge_units()),
        record("bound_values", bound_values()),
        record("twist_equation", twist()),
        record("analytic_sweeps", sweeps(prec)),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn selftest_passes() {
        for r in super::run_all(128) {
            assert!(r.passed, "{r:?}");
        }
    }
}
