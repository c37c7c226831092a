//! Small dense exact linear algebra over the rationals and integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

pub type Matrix = Vec<Vec<Rational>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect()
}

pub fn to_rational(m: &[Vec<BigInt>]) -> Matrix {
    m.iter()
        .map(|r| r.iter().map(|x| Rational::from_integer(x.clone())).collect())
        .collect()
}

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn mat_vec(m: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    m.iter().map(|r| crate::rational::dot(r, v)).collect()
}

pub fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Matrix {
    let bt = transpose(b);
    a.iter()
        .map(|r| bt.iter().map(|c| crate::rational::dot(r, c)).collect())
        .collect()
}

/// Row-reduces in place; returns pivot columns.
fn row_reduce(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &[Vec<Rational>]) -> usize {
    let mut a = m.to_vec();
    row_reduce(&mut a).len()
}

/// Affine dimension of a point set (−1 encoded as `None` for the empty set).
pub fn affine_dimension(points: &[Vec<Rational>]) -> Option<usize> {
    let first = points.first()?;
    let diffs: Matrix = points[1..]
        .iter()
        .map(|p| p.iter().zip(first).map(|(a, b)| a - b).collect())
        .collect();
    Some(if diffs.is_empty() { 0 } else { rank(&diffs) })
}

pub fn nullspace(m: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let mut a = m.to_vec();
    let pivots = row_reduce(&mut a);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

pub fn det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        for i in c + 1..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] / &a[c][c];
                for j in c..n {
                    let delta = &f * &a[c][j];
                    a[i][j] -= delta;
                }
            }
        }
    }
    d
}

pub fn inverse(m: &[Vec<Rational>]) -> Option<Matrix> {
    let n = m.len();
    let mut aug: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            row
        })
        .collect();
    let pivots = row_reduce(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn solve(m: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let inv = inverse(m)?;
    Some(mat_vec(&inv, b))
}

pub fn det_int(m: &[Vec<BigInt>]) -> BigInt {
    det(&to_rational(m)).to_integer()
}

/// Inverse of an integer matrix with determinant ±1.
pub fn inverse_unimodular(m: &[Vec<BigInt>]) -> Option<Vec<Vec<BigInt>>> {
    let inv = inverse(&to_rational(m))?;
    inv.into_iter()
        .map(|r| r.into_iter().map(|x| x.is_integer().then(|| x.to_integer())).collect())
        .collect()
}

/// Extends a primitive integer vector `v` to a matrix in GL(n, ℤ) whose
/// last row is `v`.
pub fn complete_to_unimodular(v: &[BigInt]) -> Option<Vec<Vec<BigInt>>> {
    let n = v.len();
    let mut w = v.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    // Euclid on the entries, mirrored on the rows of u: afterwards u·v = ±e_i.
    loop {
        let nonzero: Vec<usize> = (0..n).filter(|&i| !w[i].is_zero()).collect();
        if nonzero.is_empty() {
            return None;
        }
        if nonzero.len() == 1 {
            break;
        }
        let i = *nonzero.iter().min_by_key(|&&i| w[i].abs()).unwrap();
        for &j in &nonzero {
            if j == i {
                continue;
            }
            let q = w[j].div_floor(&w[i]);
            w[j] = &w[j] - &q * &w[i];
            let ri = u[i].clone();
            for (x, y) in u[j].iter_mut().zip(ri) {
                *x -= &q * y;
            }
        }
    }
    let i = (0..n).find(|&i| !w[i].is_zero()).unwrap();
    if !w[i].abs().is_one() {
        return None;
    }
    u.swap(0, i);
    w.swap(0, i);
    if w[0].is_negative() {
        for x in u[0].iter_mut() {
            *x = -x.clone();
        }
    }
    // u·v = e_1, so the first column of u⁻¹ is v.
    let b = inverse_unimodular(&u)?;
    let mut g = transpose(&b);
    let first = g.remove(0);
    g.push(first);
    Some(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn determinant_and_inverse() {
        let m = vec![vec![int(2), int(1)], vec![int(1), int(3)]];
        assert_eq!(det(&m), int(5));
        let inv = inverse(&m).unwrap();
        assert_eq!(mat_mul(&m, &inv), identity(2));
        assert_eq!(solve(&m, &[int(3), int(4)]).unwrap(), vec![int(1), int(1)]);
        assert!(inverse(&[vec![int(1), int(2)], vec![int(2), int(4)]]).is_none());
    }

    #[test]
    fn nullspace_of_a_line() {
        let ns = nullspace(&[vec![int(3), int(2)]], 2);
        assert_eq!(ns.len(), 1);
        assert_eq!(crate::rational::dot(&[int(3), int(2)], &ns[0]), int(0));
        assert_eq!(affine_dimension(&[vec![int(0), int(0)], vec![rat(1, 2), int(1)], vec![int(1), int(2)]]), Some(1));
    }

    #[test]
    fn unimodular_completion() {
        for v in [vec![-3, -2], vec![0, 1], vec![6, 10, 15], vec![-1], vec![0, 0, -1], vec![4, 7, 0, 9]] {
            let g = complete_to_unimodular(&ints(&v)).unwrap();
            assert_eq!(g.last().unwrap(), &ints(&v));
            assert!(det_int(&g).abs().is_one(), "{v:?}");
        }
        assert!(complete_to_unimodular(&ints(&[2, 4])).is_none());
    }
}
