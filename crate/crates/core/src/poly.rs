//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, Rational};

pub type Exponent = Vec<u32>;

/// A polynomial in `nvars` variables. Zero coefficients are never stored and
/// terms are kept in lexicographic exponent order, so `==` is structural.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Exponent, Rational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Rational::one());
        p
    }

    /// `c + Σ coeffs[i] x_i`.
    pub fn affine(coeffs: &[Rational], c: &Rational) -> Self {
        let nvars = coeffs.len();
        let mut p = Self::constant(nvars, c.clone());
        for (i, a) in coeffs.iter().enumerate() {
            let mut e = vec![0; nvars];
            e[i] = 1;
            p.add_term(e, a.clone());
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exponent, Rational)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    found: e.len(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, e: &[u32]) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|x| x == d),
        }
    }

    pub fn add_term(&mut self, e: Exponent, c: Rational) {
        debug_assert_eq!(e.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Homogeneous component of degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() == d)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c * int(e[i] as i64));
        }
        out
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        assert_eq!(x.len(), self.nvars, "evaluation point has wrong dimension");
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(xi.clone(), k as usize);
                }
            }
            total += t;
        }
        total
    }

    /// Evaluation at an integer point, kept in integers until the end.
    pub fn eval_int(&self, x: &[i64]) -> Rational {
        assert_eq!(x.len(), self.nvars, "evaluation point has wrong dimension");
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut m = BigInt::one();
            for (&xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    m *= num_traits::pow(BigInt::from(xi), k as usize);
                }
            }
            total += c * Rational::from_integer(m);
        }
        total
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nvars, "evaluation point has wrong dimension");
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (xi, &k) in x.iter().zip(e) {
                    t *= xi.powi(k as i32);
                }
                t
            })
            .sum()
    }

    /// Substitutes `x = M y + t`, where `M` is `nvars × m`. The result is a
    /// polynomial in the `m` variables `y`.
    pub fn substitute_affine(&self, matrix: &[Vec<Rational>], translation: &[Rational]) -> Self {
        assert_eq!(matrix.len(), self.nvars);
        assert_eq!(translation.len(), self.nvars);
        let m = matrix.first().map_or(0, |r| r.len());
        let images: Vec<Polynomial> = matrix
            .iter()
            .zip(translation)
            .map(|(row, t)| Polynomial::affine(row, t))
            .collect();
        let max_exp: Vec<u32> = (0..self.nvars)
            .map(|i| self.terms.keys().map(|e| e[i]).max().unwrap_or(0))
            .collect();
        let powers: Vec<Vec<Polynomial>> = images
            .iter()
            .zip(&max_exp)
            .map(|(img, &k)| {
                let mut ps = vec![Polynomial::one(m)];
                for j in 0..k as usize {
                    let next = &ps[j] * img;
                    ps.push(next);
                }
                ps
            })
            .collect();
        let mut out = Polynomial::zero(m);
        for (e, c) in &self.terms {
            let mut t = Polynomial::constant(m, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = &t * &powers[i][k as usize];
                }
            }
            out = &out + &t;
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, k) })
                .collect();
            if mono.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "({c})*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut acc: BTreeMap<Exponent, Rational> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(Rational::zero) += c1 * c2;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Polynomial {
            nvars: self.nvars,
            terms: acc,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// On-disk form: `{"nvars": 2, "terms": [{"exp": [2, 0], "coeff": "1"}]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PolynomialSpec {
    pub nvars: usize,
    pub terms: Vec<TermSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermSpec {
    pub exp: Vec<u32>,
    #[serde(with = "crate::rational::serde_rational")]
    pub coeff: Rational,
}

impl TryFrom<&PolynomialSpec> for Polynomial {
    type Error = Error;
    fn try_from(s: &PolynomialSpec) -> Result<Self> {
        Polynomial::from_terms(s.nvars, s.terms.iter().map(|t| (t.exp.clone(), t.coeff.clone())))
    }
}

impl From<&Polynomial> for PolynomialSpec {
    fn from(p: &Polynomial) -> Self {
        PolynomialSpec {
            nvars: p.nvars,
            terms: p
                .terms
                .iter()
                .map(|(e, c)| TermSpec {
                    exp: e.clone(),
                    coeff: c.clone(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use proptest::prelude::*;

    fn x(i: usize) -> Polynomial {
        Polynomial::var(2, i)
    }

    #[test]
    fn cancellation_leaves_no_zero_terms() {
        let p = &x(0) - &x(0);
        assert!(p.is_zero());
        assert_eq!(p, Polynomial::zero(2));
        assert_eq!(p.degree(), None);
    }

    #[test]
    fn product_and_parts() {
        // (1 + x)(2 + x + y)
        let one = Polynomial::one(2);
        let p = &(&one + &x(0)) * &(&(&Polynomial::constant(2, int(2)) + &x(0)) + &x(1));
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.coefficient(&[1, 1]), int(1));
        assert_eq!(p.coefficient(&[1, 0]), int(3));
        assert_eq!(p.homogeneous_part(0), Polynomial::constant(2, int(2)));
        assert!(p.homogeneous_part(2).is_homogeneous());
        assert_eq!(p.partial(1), &one + &x(0));
    }

    #[test]
    fn affine_substitution() {
        // p(x, y) = x^2 y with x = 2s + 1, y = s - t
        let p = &x(0).pow(2) * &x(1);
        let m = vec![vec![int(2), int(0)], vec![int(1), int(-1)]];
        let t = vec![int(1), int(0)];
        let q = p.substitute_affine(&m, &t);
        let s = [rat(1, 3), rat(-2, 5)];
        let xy = [int(2) * &s[0] + int(1), &s[0] - &s[1]];
        assert_eq!(q.eval(&s), p.eval(&xy));
    }

    #[test]
    fn eval_int_matches_eval() {
        let p = &(&x(0).pow(3) * &x(1)).scale(&rat(1, 7)) + &Polynomial::constant(2, int(-4));
        assert_eq!(p.eval_int(&[3, -2]), p.eval(&[int(3), int(-2)]));
    }

    fn small_poly() -> impl Strategy<Value = Polynomial> {
        proptest::collection::vec(((0u32..3, 0u32..3), -5i64..5, 1i64..4), 0..5).prop_map(|ts| {
            Polynomial::from_terms(2, ts.into_iter().map(|((a, b), n, d)| (vec![a, b], rat(n, d)))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn ring_laws_hold_pointwise(p in small_poly(), q in small_poly(), a in -4i64..4, b in 1i64..4) {
            let pt = [rat(a, b), rat(b, 3)];
            prop_assert_eq!((&p * &q).eval(&pt), p.eval(&pt) * q.eval(&pt));
            prop_assert_eq!((&p + &q).eval(&pt), p.eval(&pt) + q.eval(&pt));
            // Euler: Σ x_i ∂_i h = d h for homogeneous h
            let h = (&p * &q).homogeneous_part(2);
            let euler = &(&x(0) * &h.partial(0)) + &(&x(1) * &h.partial(1));
            prop_assert_eq!(euler, h.scale(&int(2)));
        }
    }
}
