use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::linalg;
use crate::error::Result;
use crate::pl::PiecewiseAffine;
use crate::poly::Polynomial;
use crate::polytope::{Point, RationalPolytope};
use crate::rational::Rational;

fn factorial(n: u32) -> BigInt {
    (1..=n as u64).map(BigInt::from).product()
}

/// `∫_{Δ_n} y^a dy = Π a_i! / (n + |a|)!` over the standard simplex.
pub fn standard_simplex_monomial(a: &[u32]) -> Rational {
    let n = a.len() as u32;
    let total: u32 = a.iter().sum();
    let num: BigInt = a.iter().map(|&ai| factorial(ai)).product();
    Rational::new(num, factorial(n + total))
}

/// Exact `∫_S h dμ` over the simplex with vertices `s[0..=n]`.
pub fn integrate_simplex(h: &Polynomial, s: &[Point]) -> Rational {
    let n = s.len() - 1;
    assert_eq!(h.nvars(), n, "integrand and simplex dimensions differ");
    // x = v0 + Σ y_i (v_i − v0)
    let m: Vec<Vec<Rational>> = (0..n)
        .map(|r| (1..=n).map(|c| &s[c][r] - &s[0][r]).collect())
        .collect();
    let jac = linalg::det(&m).abs();
    if jac.is_zero() {
        return Rational::zero();
    }
    let pulled = h.substitute_affine(&m, &s[0]);
    let sum: Rational = pulled
        .terms()
        .map(|(e, c)| c * standard_simplex_monomial(e))
        .sum();
    sum * jac
}

/// Exact `∫_P h dμ`.
pub fn integral_polytope(h: &Polynomial, p: &RationalPolytope) -> Rational {
    let simplices = p.triangulate();
    simplices.par_iter().map(|s| integrate_simplex(h, s)).sum()
}

/// Exact `∫_F h dσ` over one facet.
pub fn facet_integral(h: &Polynomial, p: &RationalPolytope, facet: usize) -> Rational {
    let chart = p.facet_chart(facet);
    match &chart.image {
        None => h.eval(&chart.facet_vertices[0]),
        Some(image) => {
            let (m, t) = chart.embedding();
            integral_polytope(&h.substitute_affine(&m, &t), image)
        }
    }
}

/// Exact `∫_{∂P} h dσ`.
pub fn boundary_integral(h: &Polynomial, p: &RationalPolytope) -> Rational {
    (0..p.facets().len()).map(|f| facet_integral(h, p, f)).sum()
}

/// Exact `∫_P f h dμ`, summing `∫_C (a_i·x + b_i) h dμ` over the linearity
/// cells `C` of `f`.
pub fn integral_pl_poly(f: &PiecewiseAffine, h: &Polynomial, p: &RationalPolytope) -> Result<Rational> {
    let mut total = Rational::zero();
    for (i, cell) in f.linearity_cells(p)? {
        let piece = &f.pieces()[i];
        let affine = Polynomial::affine(&piece.gradient, &piece.constant);
        total += integral_polytope(&(&affine * h), &cell);
    }
    Ok(total)
}

/// Exact `∫_{∂P} f h dσ`.
pub fn boundary_integral_pl_poly(f: &PiecewiseAffine, h: &Polynomial, p: &RationalPolytope) -> Result<Rational> {
    let mut total = Rational::zero();
    for facet in 0..p.facets().len() {
        let chart = p.facet_chart(facet);
        total += match &chart.image {
            None => {
                let v = &chart.facet_vertices[0];
                f.eval(v) * h.eval(v)
            }
            Some(image) => {
                let (m, t) = chart.embedding();
                integral_pl_poly(&f.compose_affine(&m, &t), &h.substitute_affine(&m, &t), image)?
            }
        };
    }
    Ok(total)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::pl::AffinePiece;
    use crate::polytope::PullingOrder;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn pts(v: &[&[i64]]) -> Vec<Point> {
        v.iter().map(|p| p.iter().map(|&x| int(x)).collect()).collect()
    }

    fn x(n: usize, i: usize) -> Polynomial {
        Polynomial::var(n, i)
    }

    /// Iterated 1D antiderivatives over the box/triangle, an oracle
    /// independent of the simplex formula.
    fn integrate_1d(p: &Polynomial, lo: &Rational, hi: &Rational) -> Rational {
        // p univariate
        p.terms()
            .map(|(e, c)| {
                let k = e[0] as usize + 1;
                c * (num_traits::pow(hi.clone(), k) - num_traits::pow(lo.clone(), k)) / int(k as i64)
            })
            .sum()
    }

    #[test]
    fn simplex_formula_against_iterated_integral() {
        // ∫_{Δ2} x1 = 1/6: inner ∫_0^{1-x} dy = 1 - x, outer ∫_0^1 x(1-x) dx
        let tri = RationalPolytope::from_vertices(&pts(&[&[0, 0], &[1, 0], &[0, 1]])).unwrap();
        let inner = &Polynomial::one(1) - &x(1, 0);
        let oracle = integrate_1d(&(&x(1, 0) * &inner), &int(0), &int(1));
        assert_eq!(oracle, rat(1, 6));
        assert_eq!(integral_polytope(&x(2, 0), &tri), oracle);
    }

    #[test]
    fn integral_examples() {
        let seg = RationalPolytope::from_vertices(&pts(&[&[1], &[2]])).unwrap();
        assert_eq!(integral_polytope(&x(1, 0), &seg), rat(3, 2));
        let sq = RationalPolytope::from_vertices(&pts(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]])).unwrap();
        let h = &x(2, 0).pow(2) + &x(2, 1).pow(2);
        assert_eq!(integral_polytope(&h, &sq), rat(2, 3));
        assert_eq!(boundary_integral(&h, &sq), rat(10, 3));
        assert_eq!(boundary_integral(&x(1, 0), &seg), int(3));
        let slanted = RationalPolytope::from_vertices(&pts(&[&[0, 0], &[2, 0], &[0, 3]])).unwrap();
        let slant = slanted.facets().iter().position(|f| f.normal[0] == BigInt::from(-3)).unwrap();
        assert_eq!(facet_integral(&Polynomial::one(2), &slanted, slant), int(1));
    }

    #[test]
    fn pl_examples() {
        let seg = RationalPolytope::from_vertices(&pts(&[&[1], &[2]])).unwrap();
        let kink = PiecewiseAffine::new(
            1,
            vec![AffinePiece::new(vec![int(0)], int(0)), AffinePiece::new(vec![int(2)], int(-3))],
        )
        .unwrap();
        assert_eq!(integral_pl_poly(&kink, &x(1, 0), &seg).unwrap(), rat(11, 24));
        assert_eq!(boundary_integral_pl_poly(&kink, &x(1, 0), &seg).unwrap(), int(2));
        let c = PiecewiseAffine::constant(1, rat(5, 3));
        assert_eq!(
            integral_pl_poly(&c, &x(1, 0), &seg).unwrap(),
            rat(5, 3) * integral_polytope(&x(1, 0), &seg)
        );
    }

    #[test]
    fn pl_on_a_square_with_diagonal_kink() {
        // max(x, y) on [0,1]^2: ∫ = 2/3, boundary ∫ = 1/2 + 1 + 1 + 1/2 = 3
        let sq = RationalPolytope::from_vertices(&pts(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]])).unwrap();
        let f = PiecewiseAffine::new(
            2,
            vec![AffinePiece::new(vec![int(1), int(0)], int(0)), AffinePiece::new(vec![int(0), int(1)], int(0))],
        )
        .unwrap();
        assert_eq!(integral_pl_poly(&f, &Polynomial::one(2), &sq).unwrap(), rat(2, 3));
        assert_eq!(boundary_integral_pl_poly(&f, &Polynomial::one(2), &sq).unwrap(), int(3));
    }

    #[test]
    fn triangulation_independence() {
        let p = RationalPolytope::from_vertices(&pts(&[&[1, 1], &[4, 1], &[5, 3], &[2, 4], &[1, 3]])).unwrap();
        let h = &(&x(2, 0).pow(3) * &x(2, 1)) + &x(2, 1).pow(2);
        let a: Rational = p
            .triangulate_with(PullingOrder::Lexicographic)
            .iter()
            .map(|s| integrate_simplex(&h, s))
            .sum();
        let b: Rational = p
            .triangulate_with(PullingOrder::ReverseLexicographic)
            .iter()
            .map(|s| integrate_simplex(&h, s))
            .sum();
        assert_eq!(a, b);
    }

    #[test]
    fn unimodular_change_of_variables() {
        let p = RationalPolytope::from_vertices(&pts(&[&[1, 1], &[3, 1], &[1, 2]])).unwrap();
        let g: Vec<Vec<BigInt>> = vec![vec![1.into(), 1.into()], vec![0.into(), 1.into()]];
        let gp = p.transform(&g).unwrap();
        let h = &(&x(2, 0).pow(2) * &x(2, 1)) + &x(2, 0);
        let gr = linalg::to_rational(&g);
        let zero = vec![int(0), int(0)];
        // ∫_{gP} h = ∫_P h∘g
        assert_eq!(integral_polytope(&h, &gp), integral_polytope(&h.substitute_affine(&gr, &zero), &p));
        let inv = linalg::to_rational(&linalg::inverse_unimodular(&g).unwrap());
        let h_back = h.substitute_affine(&inv, &zero);
        assert_eq!(boundary_integral(&h, &p), boundary_integral(&h_back, &gp));
    }

    proptest! {
        #[test]
        fn linearity(a in -5i64..5, b in -5i64..5, e1 in 0u32..3, e2 in 0u32..3) {
            let p = RationalPolytope::from_vertices(&pts(&[&[0, 1], &[3, 0], &[2, 2]])).unwrap();
            let h1 = &x(2, 0).pow(e1) * &x(2, 1);
            let h2 = x(2, 1).pow(e2);
            let combo = &h1.scale(&int(a)) + &h2.scale(&int(b));
            prop_assert_eq!(
                integral_polytope(&combo, &p),
                int(a) * integral_polytope(&h1, &p) + int(b) * integral_polytope(&h2, &p)
            );
        }
    }
}
