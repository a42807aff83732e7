//! Cusps of X_G as orbits on primitive vectors.
//!
//! A cusp of X_G is an orbit of `<G ∩ SL_2, -1>` acting by left
//! multiplication on primitive column vectors `(x, y)` mod N. The cusp at
//! infinity is the class of `(1, 0)`. Rational orbits are modelled as orbits
//! of the full group `<G, -1>`, whose determinant part plays the role of the
//! cyclotomic Galois action.

use std::collections::HashMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::arith::{self, egcd, gcd, mod_inv};
use crate::error::{Error, Result};
use crate::modnt::{det_image, ResidueMatrix, SubgroupG};

pub type Vector = (u32, u32);

/// One cusp of X_G.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CuspClass {
    pub n: u32,
    /// Canonical representative: the lexicographically smaller of `v`, `-v`.
    pub rep: Vector,
    /// Ramification index of X_G -> X(1) at this cusp.
    pub width: u32,
    /// An SL_2(Z/NZ) matrix whose first column is `rep`.
    pub lift: ResidueMatrix,
}

/// A Galois orbit of cusps over Q.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuspOrbit {
    pub id: usize,
    pub members: Vec<CuspClass>,
    pub degree: usize,
}

/// Canonical `±` representative of a vector mod `n`.
pub fn canonical(v: Vector, n: u32) -> Vector {
    let neg = ((n - v.0) % n, (n - v.1) % n);
    v.min(neg)
}

pub fn is_primitive(v: Vector, n: u32) -> bool {
    gcd(gcd(v.0 as u64, v.1 as u64), n as u64) == 1
}

/// Deterministic SL_2 lift of a primitive column `(x, y)`: the matrix
/// `(x b; y d)` with `xd - yb = 1`, taking the smallest `b >= 0` for which
/// the congruence is solvable and then the smallest `d >= 0`.
pub fn sl2_lift(v: Vector, n: u32) -> ResidueMatrix {
    let (x, y) = v;
    let ni = n as i64;
    let (g, _, _) = egcd(x as i64, ni);
    let g = g.max(1);
    let m = ni / g;
    for b in 0..ni {
        let rhs = (1 + y as i64 * b).rem_euclid(ni);
        if rhs % g != 0 {
            continue;
        }
        let d = if m == 1 {
            0
        } else {
            let inv = mod_inv(((x as i64 / g) % m) as u32, m as u32)
                .expect("x/g is a unit modulo n/g") as i64;
            ((rhs / g) * inv).rem_euclid(m)
        };
        let lift = ResidueMatrix::new(n, x as i64, b, y as i64, d);
        debug_assert_eq!(lift.det(), 1 % n);
        return lift;
    }
    panic!("({x}, {y}) is not primitive mod {n}");
}

/// Cusp combinatorics of X_G, computed once and shared by the cusp, unit
/// and analytic layers.
#[derive(Clone, Debug)]
pub struct CuspStructure {
    pub n: u32,
    gamma: SubgroupG,
    cusps: Vec<CuspClass>,
    class_of: HashMap<Vector, usize>,
    orbit_of: Vec<usize>,
    orbits: Vec<Vec<usize>>,
    det_full: bool,
}

impl CuspStructure {
    pub fn new(g: &SubgroupG) -> Self {
        let n = g.n;
        let gamma = g.sl2_part_with_minus_one();
        let mut vectors: Vec<Vector> = (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .filter(|&v| is_primitive(v, n))
            .collect();
        vectors.sort_unstable();
        let start = (1 % n, 0);
        vectors.retain(|&v| v != start);
        vectors.insert(0, start);

        let mut class_of: HashMap<Vector, usize> = HashMap::with_capacity(vectors.len());
        let mut cusps = Vec::new();
        for v in vectors {
            if class_of.contains_key(&v) {
                continue;
            }
            let idx = cusps.len();
            for h in gamma.elements() {
                class_of.insert(h.apply(v), idx);
            }
            let rep = canonical(v, n);
            let lift = sl2_lift(rep, n);
            let width = width_of(&gamma, &lift);
            cusps.push(CuspClass { n, rep, width, lift });
        }

        let full = g.with_minus_one();
        let mut orbit_of = vec![usize::MAX; cusps.len()];
        let mut orbits = Vec::new();
        for i in 0..cusps.len() {
            if orbit_of[i] != usize::MAX {
                continue;
            }
            let id = orbits.len();
            let mut members: Vec<usize> = full
                .elements()
                .iter()
                .map(|s| class_of[&s.apply(cusps[i].rep)])
                .collect();
            members.sort_unstable();
            members.dedup();
            for &m in &members {
                orbit_of[m] = id;
            }
            orbits.push(members);
        }

        CuspStructure {
            n,
            gamma,
            cusps,
            class_of,
            orbit_of,
            orbits,
            det_full: det_image(g).is_full,
        }
    }

    pub fn cusps(&self) -> &[CuspClass] {
        &self.cusps
    }

    pub fn len(&self) -> usize {
        self.cusps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cusps.is_empty()
    }

    /// `<G ∩ SL_2, -1>`.
    pub fn gamma(&self) -> &SubgroupG {
        &self.gamma
    }

    /// Index of the cusp containing a primitive vector.
    pub fn cusp_index_of(&self, v: Vector) -> Option<usize> {
        self.class_of.get(&(v.0 % self.n, v.1 % self.n)).copied()
    }

    pub fn orbit_index(&self, cusp: usize) -> usize {
        self.orbit_of[cusp]
    }

    /// Orbit membership as cusp indices, without the det-image check.
    pub fn orbit_indices(&self) -> &[Vec<usize>] {
        &self.orbits
    }

    pub fn is_defined_over_q(&self) -> bool {
        self.det_full
    }

    pub fn galois_orbits(&self) -> Result<Vec<CuspOrbit>> {
        if !self.det_full {
            return Err(Error::NotDefinedOverQ(self.n));
        }
        Ok(self
            .orbits
            .iter()
            .enumerate()
            .map(|(id, m)| CuspOrbit {
                id,
                members: m.iter().map(|&i| self.cusps[i].clone()).collect(),
                degree: m.len(),
            })
            .collect())
    }

    /// Index `[SL_2(Z/NZ) : <G ∩ SL_2, -1>]`, which equals the index of the
    /// image of the pulled-back group in PSL_2(Z).
    pub fn psl2_index(&self) -> u64 {
        arith::sl2_order(self.n as u64) / self.gamma.order() as u64
    }
}

fn width_of(gamma: &SubgroupG, lift: &ResidueMatrix) -> u32 {
    let n = gamma.n;
    let inv = lift.inverse().expect("lift is in SL_2");
    arith::divisors(n as u64)
        .into_iter()
        .map(|e| e as u32)
        .find(|&e| {
            let conj = lift.mul(&ResidueMatrix::translation(n, e as i64)).mul(&inv);
            gamma.contains(&conj)
        })
        .unwrap_or(n)
}

pub fn enumerate_cusps(g: &SubgroupG) -> Vec<CuspClass> {
    CuspStructure::new(g).cusps
}

/// Smallest `e > 0` with `lift (1 e; 0 1) lift^-1 ∈ <G ∩ SL_2, -1>`.
pub fn cusp_width(g: &SubgroupG, c: &CuspClass) -> u32 {
    width_of(&g.sl2_part_with_minus_one(), &c.lift)
}

pub fn galois_orbits(g: &SubgroupG) -> Result<Vec<CuspOrbit>> {
    CuspStructure::new(g).galois_orbits()
}

/// True iff the number of rational cusp orbits exceeds `s`.
pub fn runge_condition(g: &SubgroupG, s: usize) -> Result<bool> {
    Ok(galois_orbits(g)?.len() > s)
}

/// A value of the form `base^exponent` with a rational exponent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerValue {
    pub base: u64,
    pub exponent: Ratio<i64>,
}

impl PowerValue {
    pub fn to_f64(&self) -> f64 {
        (self.base as f64).powf(*self.exponent.numer() as f64 / *self.exponent.denom() as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaceKind {
    Archimedean,
    Finite,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceConstants {
    pub kind: PlaceKind,
    pub p: Option<u64>,
    pub divides_level: bool,
    pub big_r: PowerValue,
    pub small_r: PowerValue,
}

/// The radii `R_v` and `r_v` used to define the neighbourhoods of cusps.
pub fn place_constants(kind: PlaceKind, p: Option<u64>, n: u32) -> Result<PlaceConstants> {
    match (kind, p) {
        (PlaceKind::Archimedean, None) => Ok(PlaceConstants {
            kind,
            p: None,
            divides_level: false,
            big_r: PowerValue { base: 2500, exponent: Ratio::from_integer(1) },
            small_r: PowerValue { base: 1000, exponent: Ratio::from_integer(-1) },
        }),
        (PlaceKind::Finite, Some(p)) if arith::is_prime(p) => {
            let divides = (n as u64).is_multiple_of(p);
            let big_r = if divides {
                PowerValue { base: p, exponent: Ratio::new(n as i64, p as i64 - 1) }
            } else {
                PowerValue { base: 1, exponent: Ratio::from_integer(1) }
            };
            let small_r = PowerValue { base: big_r.base, exponent: -big_r.exponent };
            Ok(PlaceConstants { kind, p: Some(p), divides_level: divides, big_r, small_r })
        }
        _ => Err(Error::Precondition(format!(
            "inconsistent place description {kind:?} with p = {p:?}"
        ))),
    }
}
