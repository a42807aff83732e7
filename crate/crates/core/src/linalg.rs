//! Exact integer linear algebra by fraction-free (Bareiss) elimination.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

fn to_big(m: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    m.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

/// Bareiss row reduction. Returns the pivot columns, which are the
/// lexicographically first maximal set of linearly independent columns.
pub fn pivot_columns_big(m: &[Vec<BigInt>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut a = m.to_vec();
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = (&a[r][c] * &a[i][j] - &a[i][c] * &a[r][j]) / &prev;
                a[i][j] = v;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn pivot_columns(m: &[Vec<i64>]) -> Vec<usize> {
    pivot_columns_big(&to_big(m))
}

/// Rank over Q.
pub fn rank(m: &[Vec<i64>]) -> usize {
    pivot_columns(m).len()
}

/// Determinant of a square matrix.
pub fn det(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.to_vec();
    let mut prev = BigInt::one();
    let mut sign = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return BigInt::zero();
        };
        if p != k {
            a.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[k][k] * &a[i][j] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

pub fn det_i64(m: &[Vec<i64>]) -> BigInt {
    det(&to_big(m))
}

pub fn mat_vec(m: &[Vec<i64>], v: &[BigInt]) -> Vec<BigInt> {
    m.iter()
        .map(|r| r.iter().zip(v).map(|(&x, y)| BigInt::from(x) * y).sum())
        .collect()
}

pub fn l1_norm(v: &[BigInt]) -> BigInt {
    v.iter().map(|x| x.abs()).sum()
}
