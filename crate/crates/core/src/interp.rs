//! Exact univariate interpolation over the rationals.

use num_traits::Zero;

use crate::rational::Rational;

/// Coefficients (ascending powers) of the unique polynomial of degree
/// `< xs.len()` through the given points, via Newton divided differences.
pub fn interpolate(xs: &[Rational], ys: &[Rational]) -> Vec<Rational> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let mut dd = ys.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - level]);
        }
    }
    // Horner-style expansion of the Newton form
    let mut coeffs = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        // coeffs ← coeffs·(x − xs[i]) + dd[i]
        let mut next = vec![Rational::zero(); n];
        for j in 0..n {
            if coeffs[j].is_zero() {
                continue;
            }
            if j + 1 < n {
                next[j + 1] += &coeffs[j];
            }
            next[j] -= &coeffs[j] * &xs[i];
        }
        next[0] += &dd[i];
        coeffs = next;
    }
    coeffs
}

pub fn evaluate(coeffs: &[Rational], x: &Rational) -> Rational {
    coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Drops trailing zero coefficients.
pub fn trim(mut coeffs: Vec<Rational>) -> Vec<Rational> {
    while coeffs.last().is_some_and(Zero::is_zero) {
        coeffs.pop();
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn recovers_a_cubic() {
        let p = vec![rat(1, 2), int(-3), int(0), rat(7, 3)];
        let xs: Vec<Rational> = (1..=4).map(int).collect();
        let ys: Vec<Rational> = xs.iter().map(|x| evaluate(&p, x)).collect();
        assert_eq!(interpolate(&xs, &ys), p);
        let xs5: Vec<Rational> = (1..=5).map(int).collect();
        let ys5: Vec<Rational> = xs5.iter().map(|x| evaluate(&p, x)).collect();
        assert_eq!(trim(interpolate(&xs5, &ys5)), p);
    }
}
