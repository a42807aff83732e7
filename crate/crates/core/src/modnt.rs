//! Arithmetic in Z/NZ and finite subgroups of GL_2(Z/NZ).
//!
//! Subgroups are always fully enumerated. Every later sum over a group
//! (traces of modular units, cusp orbits) runs over this element list.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{self, gcd, mod_inv, reduce};
use crate::error::{Error, Result};

/// Hard cap on the number of elements we are willing to enumerate.
pub const DEFAULT_ORDER_CAP: u64 = 2_000_000;

/// Largest prime-power modulus accepted by the presets.
pub const PRESET_MODULUS_CAP: u64 = 343;

/// A 2x2 matrix `(a b; c d)` over Z/NZ, entries stored as least
/// nonnegative residues.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResidueMatrix {
    pub n: u32,
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
}

impl fmt::Debug for ResidueMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {}; {} {}] mod {}", self.a, self.b, self.c, self.d, self.n)
    }
}

impl fmt::Display for ResidueMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.a, self.b, self.c, self.d)
    }
}

impl ResidueMatrix {
    pub fn new(n: u32, a: i64, b: i64, c: i64, d: i64) -> Self {
        assert!(n >= 1, "modulus must be positive");
        ResidueMatrix {
            n,
            a: reduce(a, n),
            b: reduce(b, n),
            c: reduce(c, n),
            d: reduce(d, n),
        }
    }

    pub fn identity(n: u32) -> Self {
        Self::new(n, 1, 0, 0, 1)
    }

    pub fn minus_one(n: u32) -> Self {
        Self::new(n, -1, 0, 0, -1)
    }

    pub fn diag(n: u32, x: i64, y: i64) -> Self {
        Self::new(n, x, 0, 0, y)
    }

    pub fn antidiag(n: u32, x: i64, y: i64) -> Self {
        Self::new(n, 0, x, y, 0)
    }

    /// The unipotent `(1 e; 0 1)`.
    pub fn translation(n: u32, e: i64) -> Self {
        Self::new(n, 1, e, 0, 1)
    }

    pub fn det(&self) -> u32 {
        let n = self.n as u64;
        let ad = self.a as u64 * self.d as u64 % n;
        let bc = self.b as u64 * self.c as u64 % n;
        ((ad + n - bc) % n) as u32
    }

    pub fn is_invertible(&self) -> bool {
        gcd(self.det() as u64, self.n as u64) == 1
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.n, o.n);
        let n = self.n as u64;
        let (a, b, c, d) = (self.a as u64, self.b as u64, self.c as u64, self.d as u64);
        let (e, f, g, h) = (o.a as u64, o.b as u64, o.c as u64, o.d as u64);
        ResidueMatrix {
            n: self.n,
            a: ((a * e + b * g) % n) as u32,
            b: ((a * f + b * h) % n) as u32,
            c: ((c * e + d * g) % n) as u32,
            d: ((c * f + d * h) % n) as u32,
        }
    }

    pub fn neg(&self) -> Self {
        let n = self.n as i64;
        Self::new(self.n, n - self.a as i64, n - self.b as i64, n - self.c as i64, n - self.d as i64)
    }

    pub fn inverse(&self) -> Option<Self> {
        let inv = mod_inv(self.det(), self.n)? as i64;
        Some(Self::new(
            self.n,
            inv * self.d as i64,
            -inv * self.b as i64,
            -inv * self.c as i64,
            inv * self.a as i64,
        ))
    }

    /// Left action on a column vector.
    pub fn apply(&self, v: (u32, u32)) -> (u32, u32) {
        let n = self.n as u64;
        let (x, y) = (v.0 as u64, v.1 as u64);
        (
            ((self.a as u64 * x + self.b as u64 * y) % n) as u32,
            ((self.c as u64 * x + self.d as u64 * y) % n) as u32,
        )
    }

    /// Right action on a row vector: `(x, y) * self`.
    pub fn act_right(&self, v: (u32, u32)) -> (u32, u32) {
        let n = self.n as u64;
        let (x, y) = (v.0 as u64, v.1 as u64);
        (
            ((x * self.a as u64 + y * self.c as u64) % n) as u32,
            ((x * self.b as u64 + y * self.d as u64) % n) as u32,
        )
    }

    pub fn first_column(&self) -> (u32, u32) {
        (self.a, self.c)
    }
}

/// A fully enumerated subgroup of GL_2(Z/NZ).
#[derive(Clone, Debug)]
pub struct SubgroupG {
    pub n: u32,
    pub generators: Vec<ResidueMatrix>,
    elements: Vec<ResidueMatrix>,
    members: HashSet<ResidueMatrix>,
}

impl SubgroupG {
    fn from_elements(n: u32, generators: Vec<ResidueMatrix>, mut elements: Vec<ResidueMatrix>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        let members = elements.iter().copied().collect();
        SubgroupG {
            n,
            generators,
            elements,
            members,
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[ResidueMatrix] {
        &self.elements
    }

    pub fn contains(&self, m: &ResidueMatrix) -> bool {
        self.members.contains(m)
    }

    pub fn contains_minus_one(&self) -> bool {
        self.contains(&ResidueMatrix::minus_one(self.n))
    }

    /// `<G ∩ SL_2, -1>`, the image of the pulled-back congruence group
    /// together with -1.
    pub fn sl2_part_with_minus_one(&self) -> SubgroupG {
        let minus = ResidueMatrix::minus_one(self.n);
        let mut els: Vec<ResidueMatrix> = self
            .elements
            .iter()
            .filter(|m| m.det() == 1 % self.n)
            .flat_map(|m| [*m, m.mul(&minus)])
            .collect();
        els.sort_unstable();
        els.dedup();
        SubgroupG::from_elements(self.n, Vec::new(), els)
    }

    /// `<G, -1>`.
    pub fn with_minus_one(&self) -> SubgroupG {
        if self.contains_minus_one() {
            return self.clone();
        }
        let minus = ResidueMatrix::minus_one(self.n);
        let els = self
            .elements
            .iter()
            .flat_map(|m| [*m, m.mul(&minus)])
            .collect();
        SubgroupG::from_elements(self.n, self.generators.clone(), els)
    }
}

fn check_modulus(n: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::UnsupportedModulus(format!("N = {n} must be at least 2")));
    }
    Ok(())
}

/// Closure of `gens` under multiplication (breadth-first over products).
pub fn generate_subgroup(n: u32, gens: &[ResidueMatrix]) -> Result<SubgroupG> {
    generate_subgroup_capped(n, gens, DEFAULT_ORDER_CAP)
}

pub fn generate_subgroup_capped(n: u32, gens: &[ResidueMatrix], cap: u64) -> Result<SubgroupG> {
    check_modulus(n)?;
    for g in gens {
        if g.n != n {
            return Err(Error::ModulusMismatch { expected: n, found: g.n });
        }
        if !g.is_invertible() {
            return Err(Error::NonInvertibleGenerator(format!("{g:?}"), n));
        }
    }
    let id = ResidueMatrix::identity(n);
    let mut seen: HashSet<ResidueMatrix> = HashSet::from([id]);
    let mut elements = vec![id];
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = x.mul(g);
            if seen.insert(y) {
                if seen.len() as u64 > cap {
                    return Err(Error::GroupTooLarge {
                        order: seen.len() as u64,
                        cap,
                    });
                }
                elements.push(y);
                queue.push_back(y);
            }
        }
    }
    Ok(SubgroupG::from_elements(n, gens.to_vec(), elements))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetKind {
    SplitNormalizer,
    NonsplitNormalizer,
    Borel,
    Full,
}

impl PresetKind {
    pub fn short_name(self) -> &'static str {
        match self {
            PresetKind::SplitNormalizer => "split",
            PresetKind::NonsplitNormalizer => "nonsplit",
            PresetKind::Borel => "borel",
            PresetKind::Full => "full",
        }
    }

    /// Order of the preset group at level `p^k`, computed without enumeration.
    pub fn expected_order(self, p: u64, k: u32) -> u64 {
        let q = p.pow(k);
        let phi = q / p * (p - 1);
        match self {
            PresetKind::SplitNormalizer => 2 * phi * phi,
            PresetKind::NonsplitNormalizer => 2 * (q / p).pow(2) * (p * p - 1),
            PresetKind::Borel => phi * phi * q,
            PresetKind::Full => arith::gl2_order(q),
        }
    }
}

/// One of the standard subgroups at prime-power level `p^k`, `p` odd.
pub fn preset_subgroup(kind: PresetKind, p: u64, k: u32) -> Result<SubgroupG> {
    if p.is_multiple_of(2) || !arith::is_prime(p) {
        return Err(Error::UnsupportedModulus(format!("{p} is not an odd prime")));
    }
    if k == 0 {
        return Err(Error::UnsupportedModulus("exponent must be at least 1".into()));
    }
    let q = p
        .checked_pow(k)
        .filter(|&q| q <= PRESET_MODULUS_CAP)
        .ok_or_else(|| Error::UnsupportedModulus(format!("{p}^{k} exceeds {PRESET_MODULUS_CAP}")))?;
    let order = kind.expected_order(p, k);
    if order > DEFAULT_ORDER_CAP {
        return Err(Error::GroupTooLarge {
            order,
            cap: DEFAULT_ORDER_CAP,
        });
    }
    let n = q as u32;
    let ni = n as i64;
    let units: Vec<i64> = (1..ni).filter(|&x| x % p as i64 != 0).collect();
    let all: Vec<i64> = (0..ni).collect();
    let mut els = Vec::with_capacity(order as usize);
    let gens = match kind {
        PresetKind::SplitNormalizer => {
            for &x in &units {
                for &y in &units {
                    els.push(ResidueMatrix::diag(n, x, y));
                    els.push(ResidueMatrix::antidiag(n, x, y));
                }
            }
            let g = primitive_root_mod(n);
            vec![
                ResidueMatrix::diag(n, g, 1),
                ResidueMatrix::diag(n, 1, g),
                ResidueMatrix::antidiag(n, 1, 1),
            ]
        }
        PresetKind::NonsplitNormalizer => {
            let eps = arith::least_nonresidue(p) as i64;
            for &a in &all {
                for &b in &all {
                    let m = ResidueMatrix::new(n, a, b * eps, b, a);
                    if m.is_invertible() {
                        els.push(m);
                        els.push(m.mul(&ResidueMatrix::diag(n, 1, -1)));
                    }
                }
            }
            greedy_generators(n, &els)
        }
        PresetKind::Borel => {
            for &a in &units {
                for &d in &units {
                    for &b in &all {
                        els.push(ResidueMatrix::new(n, a, b, 0, d));
                    }
                }
            }
            let g = primitive_root_mod(n);
            vec![
                ResidueMatrix::diag(n, g, 1),
                ResidueMatrix::diag(n, 1, g),
                ResidueMatrix::translation(n, 1),
            ]
        }
        PresetKind::Full => {
            for &a in &all {
                for &b in &all {
                    for &c in &all {
                        for &d in &all {
                            let m = ResidueMatrix::new(n, a, b, c, d);
                            if m.is_invertible() {
                                els.push(m);
                            }
                        }
                    }
                }
            }
            let g = primitive_root_mod(n);
            vec![
                ResidueMatrix::diag(n, g, 1),
                ResidueMatrix::translation(n, 1),
                ResidueMatrix::new(n, 0, -1, 1, 0),
            ]
        }
    };
    let group = SubgroupG::from_elements(n, gens, els);
    debug_assert_eq!(group.order() as u64, order);
    Ok(group)
}

/// Picks generators greedily: an element becomes a generator when it is
/// not already in the span of the previous ones.
fn greedy_generators(n: u32, elements: &[ResidueMatrix]) -> Vec<ResidueMatrix> {
    let mut gens = Vec::new();
    let mut span: HashSet<ResidueMatrix> = HashSet::from([ResidueMatrix::identity(n)]);
    for e in elements {
        if span.len() == elements.len() {
            break;
        }
        if !span.contains(e) {
            gens.push(*e);
            span = generate_subgroup_capped(n, &gens, u64::MAX)
                .map(|g| g.members)
                .unwrap_or_default();
        }
    }
    gens
}

/// A generator of (Z/nZ)^x for n an odd prime power.
fn primitive_root_mod(n: u32) -> i64 {
    let phi = arith::euler_phi(n as u64);
    let factors = arith::prime_factors(phi);
    (2..n as u64)
        .find(|&g| {
            gcd(g, n as u64) == 1
                && factors.iter().all(|&f| pow_small(g, phi / f, n as u64) != 1)
        })
        .unwrap_or(1) as i64
}

fn pow_small(b: u64, mut e: u64, n: u64) -> u64 {
    let (mut r, mut b) = (1 % n, b % n);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % n;
        }
        b = b * b % n;
        e >>= 1;
    }
    r
}

/// Image of the determinant map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetImage {
    pub residues: BTreeSet<u32>,
    pub is_full: bool,
}

pub fn det_image(g: &SubgroupG) -> DetImage {
    let residues: BTreeSet<u32> = g.elements().iter().map(|m| m.det()).collect();
    let is_full = residues.len() as u64 == arith::euler_phi(g.n as u64);
    DetImage { residues, is_full }
}

/// How a group is specified on the command line or in a file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupSpec {
    Preset { kind: PresetKind, p: u64, k: u32 },
    Generators { n: u32, gens: Vec<ResidueMatrix> },
}

impl GroupSpec {
    pub fn build(&self) -> Result<SubgroupG> {
        match self {
            GroupSpec::Preset { kind, p, k } => preset_subgroup(*kind, *p, *k),
            GroupSpec::Generators { n, gens } => generate_subgroup(*n, gens),
        }
    }

    /// Parses the generator text format: a first line `N=<modulus>`, then one
    /// generator per line as four integers `a b c d` in row-major order.
    /// Blank lines and `#` comments are ignored.
    pub fn parse_text(text: &str) -> Result<GroupSpec> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty group definition".into()))?;
        let n: u32 = header
            .strip_prefix("N=")
            .or_else(|| header.strip_prefix("N ="))
            .map(str::trim)
            .ok_or_else(|| Error::Parse(format!("expected `N=<modulus>`, got `{header}`")))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad modulus: {e}")))?;
        check_modulus(n)?;
        let mut gens = Vec::new();
        for line in lines {
            let nums: Vec<i64> = line
                .split_whitespace()
                .map(|t| t.parse::<i64>().map_err(|e| Error::Parse(format!("`{t}`: {e}"))))
                .collect::<Result<_>>()?;
            if nums.len() != 4 {
                return Err(Error::Parse(format!("generator line needs 4 integers: `{line}`")));
            }
            gens.push(ResidueMatrix::new(n, nums[0], nums[1], nums[2], nums[3]));
        }
        Ok(GroupSpec::Generators { n, gens })
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    /// Preset shorthand: `split:p^n`, `nonsplit:p^n`, `borel:p^n`, `full:p^n`
    /// (the `^n` part is optional).
    fn from_str(s: &str) -> Result<GroupSpec> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected `<kind>:p^n`, got `{s}`")))?;
        let kind = match kind.trim() {
            "split" => PresetKind::SplitNormalizer,
            "nonsplit" => PresetKind::NonsplitNormalizer,
            "borel" => PresetKind::Borel,
            "full" => PresetKind::Full,
            other => return Err(Error::Parse(format!("unknown preset `{other}`"))),
        };
        let (p, k) = match rest.split_once('^') {
            Some((p, k)) => (p.trim(), k.trim()),
            None => (rest.trim(), "1"),
        };
        let p = p.parse().map_err(|e| Error::Parse(format!("bad prime `{p}`: {e}")))?;
        let k = k.parse().map_err(|e| Error::Parse(format!("bad exponent `{k}`: {e}")))?;
        Ok(GroupSpec::Preset { kind, p, k })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_invertible(n: u32) -> Vec<ResidueMatrix> {
        let n64 = n as i64;
        let mut v = Vec::new();
        for a in 0..n64 {
            for b in 0..n64 {
                for c in 0..n64 {
                    for d in 0..n64 {
                        let m = ResidueMatrix::new(n, a, b, c, d);
                        if m.is_invertible() {
                            v.push(m);
                        }
                    }
                }
            }
        }
        v
    }

    #[test]
    fn identity_generates_trivial_group() {
        let g = generate_subgroup(5, &[ResidueMatrix::identity(5)]).unwrap();
        assert_eq!(g.order(), 1);
        let d = det_image(&g);
        assert_eq!(d.residues, BTreeSet::from([1]));
        assert!(!d.is_full);
    }

    #[test]
    fn full_group_mod_3_by_enumeration() {
        let gens = all_invertible(3);
        assert_eq!(gens.len(), 48);
        let g = generate_subgroup(3, &gens).unwrap();
        assert_eq!(g.order(), 48);
        assert_eq!(preset_subgroup(PresetKind::Full, 3, 1).unwrap().order(), 48);
    }

    #[test]
    fn split_normalizer_from_generators() {
        let gens = [
            ResidueMatrix::diag(5, 2, 1),
            ResidueMatrix::diag(5, 1, 2),
            ResidueMatrix::antidiag(5, 1, 1),
        ];
        let g = generate_subgroup(5, &gens).unwrap();
        assert_eq!(g.order(), 32);
        let preset = preset_subgroup(PresetKind::SplitNormalizer, 5, 1).unwrap();
        assert_eq!(g.elements(), preset.elements());
    }

    #[test]
    fn preset_orders() {
        for (kind, p, k, order) in [
            (PresetKind::SplitNormalizer, 5, 1, 32),
            (PresetKind::SplitNormalizer, 3, 2, 72),
            (PresetKind::NonsplitNormalizer, 5, 1, 48),
            (PresetKind::NonsplitNormalizer, 3, 2, 144),
            (PresetKind::Borel, 7, 1, 252),
            (PresetKind::Full, 5, 1, 480),
        ] {
            let g = preset_subgroup(kind, p, k).unwrap();
            assert_eq!(g.order(), order, "{kind:?} {p}^{k}");
            assert!(g.contains_minus_one());
            assert!(det_image(&g).is_full);
        }
    }

    #[test]
    fn preset_generators_generate_the_preset() {
        for kind in [
            PresetKind::SplitNormalizer,
            PresetKind::NonsplitNormalizer,
            PresetKind::Borel,
            PresetKind::Full,
        ] {
            let g = preset_subgroup(kind, 7, 1).unwrap();
            let h = generate_subgroup(7, &g.generators).unwrap();
            assert_eq!(g.order(), h.order(), "{kind:?}");
        }
    }

    #[test]
    fn nonsplit_closure_matches_enumeration() {
        let p = 5;
        let eps = arith::least_nonresidue(p) as i64;
        let mut gens = vec![ResidueMatrix::diag(5, 1, -1)];
        for a in 0..5 {
            for b in 0..5 {
                let m = ResidueMatrix::new(5, a, b * eps, b, a);
                if m.is_invertible() {
                    gens.push(m);
                }
            }
        }
        let g = generate_subgroup(5, &gens).unwrap();
        assert_eq!(g.order(), 2 * (25 - 1));
    }

    #[test]
    fn det_image_examples() {
        let split = preset_subgroup(PresetKind::SplitNormalizer, 5, 1).unwrap();
        assert_eq!(det_image(&split).residues, BTreeSet::from([1, 2, 3, 4]));
        let borel = preset_subgroup(PresetKind::Borel, 7, 1).unwrap();
        assert!(det_image(&borel).is_full);
    }

    #[test]
    fn errors() {
        let bad = ResidueMatrix::new(6, 2, 0, 0, 1);
        assert!(matches!(
            generate_subgroup(6, &[bad]),
            Err(Error::NonInvertibleGenerator(..))
        ));
        let other = ResidueMatrix::identity(7);
        assert!(matches!(
            generate_subgroup(5, &[other]),
            Err(Error::ModulusMismatch { expected: 5, found: 7 })
        ));
        assert!(matches!(
            preset_subgroup(PresetKind::SplitNormalizer, 2, 1),
            Err(Error::UnsupportedModulus(_))
        ));
        assert!(matches!(
            preset_subgroup(PresetKind::SplitNormalizer, 9, 1),
            Err(Error::UnsupportedModulus(_))
        ));
        assert!(matches!(
            preset_subgroup(PresetKind::Full, 7, 2),
            Err(Error::GroupTooLarge { .. })
        ));
    }

    #[test]
    fn parse_specs() {
        assert_eq!(
            "split:7".parse::<GroupSpec>().unwrap(),
            GroupSpec::Preset { kind: PresetKind::SplitNormalizer, p: 7, k: 1 }
        );
        assert_eq!(
            "nonsplit:3^2".parse::<GroupSpec>().unwrap(),
            GroupSpec::Preset { kind: PresetKind::NonsplitNormalizer, p: 3, k: 2 }
        );
        assert!("cartan:7".parse::<GroupSpec>().is_err());
        let text = "N=5\n2 0 0 1\n# comment\n1 0 0 2\n0 1 1 0\n";
        let spec = GroupSpec::parse_text(text).unwrap();
        assert_eq!(spec.build().unwrap().order(), 32);
        assert!(GroupSpec::parse_text("5\n1 0 0 1").is_err());
        assert!(GroupSpec::parse_text("N=5\n1 0 0").is_err());
    }

    #[test]
    fn inverse_and_actions() {
        let m = ResidueMatrix::new(7, 2, 3, 1, 4);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), ResidueMatrix::identity(7));
        assert_eq!(m.apply((1, 0)), (2, 1));
        assert_eq!(m.act_right((1, 0)), (2, 3));
        assert!(ResidueMatrix::new(6, 2, 0, 0, 3).inverse().is_none());
    }
}
