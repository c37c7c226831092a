//! Weighted volume, average scalar curvature and the Donaldson–Futaki
//! invariant of the test configuration attached to a convex rational
//! piecewise-affine function `f`, computed two ways:
//!
//! * in closed form from exact integrals over `P` and `∂P`,
//! * from the weighted lattice sums `d_k` and `w_k` by exact polynomial
//!   interpolation in `k`, reading off `F₁ = (BC − AD)/C²` from
//!   `d_k = C k^{N+n} + D k^{N+n−1} + …` and `w_k = A k^{N+n+1} + B k^{N+n} + …`.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::conventions::Conventions;
use crate::error::{Error, Result};
use crate::interp;
use crate::pl::PiecewiseAffine;
use crate::poly::Polynomial;
use crate::polytope::RationalPolytope;
use crate::quadrature::{boundary_integral, boundary_integral_pl_poly, integral_pl_poly, integral_polytope};
use crate::rational::{format_point, int, rat, Rational};
use crate::rootsystem::DimensionWeight;

/// Ampleness: every linear factor of `q_N` is positive at every vertex.
pub fn check_positive(weight: &DimensionWeight, p: &RationalPolytope) -> Result<()> {
    if weight.nvars() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: weight.nvars(),
            found: p.dim(),
        });
    }
    for v in p.vertices() {
        for (i, value) in weight.linear_values(v).into_iter().enumerate() {
            if !value.is_positive() {
                return Err(Error::NotPositive {
                    vertex: format_point(v),
                    factor: i,
                    value: value.to_string(),
                });
            }
        }
    }
    Ok(())
}

/// `Vol_W(P) = ∫_P q_N dμ`.
pub fn volume_w(weight: &DimensionWeight, p: &RationalPolytope) -> Result<Rational> {
    check_positive(weight, p)?;
    Ok(integral_polytope(&weight.top(), p))
}

/// `a = 2 (∫_P q_{N−1} dμ + ½ ∫_{∂P} q_N dσ) / ∫_P q_N dμ`.
pub fn average_scalar(weight: &DimensionWeight, p: &RationalPolytope) -> Result<Rational> {
    let vol = volume_w(weight, p)?;
    let inner = integral_polytope(&weight.next(), p) + boundary_integral(&weight.top(), p) / int(2);
    Ok(int(2) * inner / vol)
}

pub fn futaki_closed_form(weight: &DimensionWeight, p: &RationalPolytope, f: &PiecewiseAffine) -> Result<Rational> {
    futaki_closed_form_with(weight, p, f, &Conventions::default())
}

/// `F₁ = −(1 / 2Vol_W) (∫_P f f_G W dμ + ∫_{∂P} f W dσ − a ∫_P f W dμ)`
/// with `W = q_N` and `f_G W = q_{N−1} / c`.
pub fn futaki_closed_form_with(
    weight: &DimensionWeight,
    p: &RationalPolytope,
    f: &PiecewiseAffine,
    conventions: &Conventions,
) -> Result<Rational> {
    if f.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: f.dim(),
        });
    }
    let vol = volume_w(weight, p)?;
    let a = average_scalar(weight, p)?;
    let w = weight.top();
    let fg_w = fg_times_weight(weight, conventions);
    let bracket = integral_pl_poly(f, &fg_w, p)? + boundary_integral_pl_poly(f, &w, p)? - &a * integral_pl_poly(f, &w, p)?;
    Ok(-bracket / (int(2) * vol))
}

/// `d_k = Σ_{λ ∈ kP ∩ ℤⁿ} q(λ) / Π c_α`.
pub fn weighted_count_dk(weight: &DimensionWeight, p: &RationalPolytope, k: u64) -> Rational {
    let parts = p.lattice_fold(k, Rational::zero, |acc, lambda| acc + weight.eval_int(lambda));
    parts.into_iter().sum::<Rational>() / weight.denom()
}

fn check_dilation(k: u64, period: u64) -> Result<()> {
    if k == 0 || !k.is_multiple_of(period) {
        return Err(Error::BadDilation { k, period });
    }
    Ok(())
}

/// `w_k = Σ_{λ ∈ kP ∩ ℤⁿ} q(λ) · k(R − f(λ/k)) / Π c_α`, defined for `k` a
/// multiple of the sampling period of `f` on `P`.
pub fn weighted_weight_wk(
    weight: &DimensionWeight,
    p: &RationalPolytope,
    f: &PiecewiseAffine,
    r: &Rational,
    k: u64,
) -> Result<Rational> {
    check_dilation(k, f.sampling_period(p)?)?;
    let kk = int(k as i64);
    let kr = r * &kk;
    let pieces: Vec<(Vec<Rational>, Rational)> = f
        .pieces()
        .iter()
        .map(|pc| (pc.gradient.clone(), &pc.constant * &kk))
        .collect();
    let parts = p.lattice_fold(k, Rational::zero, |acc, lambda| {
        let lam: Vec<Rational> = lambda.iter().map(|&x| int(x)).collect();
        // k f(λ/k) = max_i (a_i·λ + k b_i)
        let kf = pieces
            .iter()
            .map(|(a, b)| crate::rational::dot(a, &lam) + b)
            .max()
            .unwrap();
        acc + weight.eval(&lam) * (&kr - kf)
    });
    Ok(parts.into_iter().sum::<Rational>() / weight.denom())
}

/// `w_k` through the lifted polytope `Q`: `Σ_{λ ∈ kQ ∩ ℤ^{n+1}} q(π λ) − d_k`
/// with `π` dropping the last coordinate.
pub fn wk_via_lift(
    weight: &DimensionWeight,
    p: &RationalPolytope,
    f: &PiecewiseAffine,
    r: &Rational,
    k: u64,
) -> Result<Rational> {
    if let Some(i) = f.has_integral_gradients() {
        return Err(Error::FractionalGradient(i));
    }
    let period = f.sampling_period(p)?;
    check_dilation(k, period)?;
    if !(r * int(k as i64)).is_integer() {
        return Err(Error::BadDilation {
            k,
            period: r.denom().try_into().unwrap_or(u64::MAX),
        });
    }
    let q = p.lift(f, r)?;
    let n = p.dim();
    let parts = q.lattice_fold(k, Rational::zero, |acc, lambda| acc + weight.eval_int(&lambda[..n]));
    let lifted = parts.into_iter().sum::<Rational>() / weight.denom();
    Ok(lifted - weighted_count_dk(weight, p, k))
}

/// Exact interpolation data for `d_k` and `w_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EhrhartFit {
    #[serde(rename = "R", with = "crate::rational::serde_rational")]
    pub r: Rational,
    pub period: u64,
    pub samples: Vec<u64>,
    #[serde(with = "crate::rational::serde_rational::vec")]
    pub d_values: Vec<Rational>,
    #[serde(with = "crate::rational::serde_rational::vec")]
    pub w_values: Vec<Rational>,
    /// Ascending coefficients of `d(k)`.
    #[serde(with = "crate::rational::serde_rational::vec")]
    pub d_poly: Vec<Rational>,
    /// Ascending coefficients of `w(k)` on multiples of the period.
    #[serde(with = "crate::rational::serde_rational::vec")]
    pub w_poly: Vec<Rational>,
    #[serde(rename = "A", with = "crate::rational::serde_rational")]
    pub a: Rational,
    #[serde(rename = "B", with = "crate::rational::serde_rational")]
    pub b: Rational,
    #[serde(rename = "C", with = "crate::rational::serde_rational")]
    pub c: Rational,
    #[serde(rename = "D", with = "crate::rational::serde_rational")]
    pub d: Rational,
    #[serde(rename = "F0", with = "crate::rational::serde_rational")]
    pub f0: Rational,
    #[serde(rename = "F1", with = "crate::rational::serde_rational")]
    pub f1: Rational,
}

/// `{m, 2m, …, (N + n + 3)m}` with `m` the sampling period.
pub fn default_samples(weight: &DimensionWeight, p: &RationalPolytope, f: &PiecewiseAffine) -> Result<Vec<u64>> {
    let m = f.sampling_period(p)?;
    let top = weight.degree() as u64 + p.dim() as u64 + 3;
    Ok((1..=top).map(|t| t * m).collect())
}

/// Fits polynomial `values` sampled at `k = m t` with the given degree in
/// `k`, checking every sample past the first `degree + 1`.
fn fit_in_k(series: &'static str, samples: &[u64], values: &[Rational], m: u64, degree: usize) -> Result<Vec<Rational>> {
    if samples.len() < degree + 2 {
        return Err(Error::TooFewSamples {
            needed: degree + 2,
            got: samples.len(),
        });
    }
    let ts: Vec<Rational> = samples.iter().map(|&k| rat(k as i64, m as i64)).collect();
    let coeffs_t = interp::interpolate(&ts[..=degree], &values[..=degree]);
    for (t, (k, v)) in ts.iter().zip(samples.iter().zip(values)).skip(degree + 1) {
        if interp::evaluate(&coeffs_t, t) != *v {
            return Err(Error::InterpolationMismatch { series, k: *k });
        }
    }
    let mm = int(m as i64);
    let mut scale = Rational::one();
    Ok(coeffs_t
        .into_iter()
        .map(|c| {
            let out = c / &scale;
            scale *= &mm;
            out
        })
        .collect())
}

pub fn ehrhart_fit(
    weight: &DimensionWeight,
    p: &RationalPolytope,
    f: &PiecewiseAffine,
    r: &Rational,
    samples: &[u64],
) -> Result<EhrhartFit> {
    let period = f.sampling_period(p)?;
    for &k in samples {
        check_dilation(k, period)?;
    }
    let deg = weight.degree() as usize + p.dim();
    let d_values: Vec<Rational> = samples.iter().map(|&k| weighted_count_dk(weight, p, k)).collect();
    let w_values = samples
        .iter()
        .map(|&k| weighted_weight_wk(weight, p, f, r, k))
        .collect::<Result<Vec<_>>>()?;
    let d_poly = fit_in_k("d_k", samples, &d_values, period, deg)?;
    let w_poly = fit_in_k("w_k", samples, &w_values, period, deg + 1)?;
    let c = d_poly[deg].clone();
    let d = d_poly[deg - 1].clone();
    let a = w_poly[deg + 1].clone();
    let b = w_poly[deg].clone();
    let f1 = (&b * &c - &a * &d) / (&c * &c);
    let f0 = &a / &c;
    Ok(EhrhartFit {
        r: r.clone(),
        period,
        samples: samples.to_vec(),
        d_values,
        w_values,
        d_poly: interp::trim(d_poly),
        w_poly: interp::trim(w_poly),
        a,
        b,
        c,
        d,
        f0,
        f1,
    })
}

/// `(A, B, C, D)` predicted from exact integrals, scaled by `1 / Π c_α` to
/// match the lattice sums.
pub fn predicted_coefficients(
    weight: &DimensionWeight,
    p: &RationalPolytope,
    f: &PiecewiseAffine,
    r: &Rational,
) -> Result<[Rational; 4]> {
    let den = weight.denom();
    let top = weight.top();
    let next = weight.next();
    // ∫ q (R − f) = R ∫ q − ∫ f q
    let a = r * integral_polytope(&top, p) - integral_pl_poly(f, &top, p)?;
    let b = r * integral_polytope(&next, p) - integral_pl_poly(f, &next, p)?
        + (r * boundary_integral(&top, p) - boundary_integral_pl_poly(f, &top, p)?) / int(2);
    let c = integral_polytope(&top, p);
    let d = integral_polytope(&next, p) + boundary_integral(&top, p) / int(2);
    Ok([a / &den, b / &den, c / &den, d / &den])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FutakiReport {
    #[serde(with = "crate::rational::serde_rational")]
    pub vol_w: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub a: Rational,
    #[serde(rename = "F1_closed", with = "crate::rational::serde_rational")]
    pub f1_closed: Rational,
    #[serde(rename = "F1_oracle", with = "crate::rational::serde_rational::option")]
    pub f1_oracle: Option<Rational>,
    /// Oracle value at `R + 1`; `F₁` must not depend on `R`.
    #[serde(rename = "F1_oracle_shifted", with = "crate::rational::serde_rational::option")]
    pub f1_oracle_shifted: Option<Rational>,
    pub oracle_details: Option<EhrhartFit>,
    pub agreement: Option<bool>,
}

pub fn futaki_report(weight: &DimensionWeight, p: &RationalPolytope, f: &PiecewiseAffine) -> Result<FutakiReport> {
    Ok(FutakiReport {
        vol_w: volume_w(weight, p)?,
        a: average_scalar(weight, p)?,
        f1_closed: futaki_closed_form(weight, p, f)?,
        f1_oracle: None,
        f1_oracle_shifted: None,
        oracle_details: None,
        agreement: None,
    })
}

/// Closed form against the lattice-sum oracle at `R` and `R + 1`.
/// `samples` defaults to [`default_samples`].
pub fn futaki_cross_check(
    weight: &DimensionWeight,
    p: &RationalPolytope,
    f: &PiecewiseAffine,
    r: &Rational,
    samples: Option<&[u64]>,
) -> Result<FutakiReport> {
    let mut report = futaki_report(weight, p, f)?;
    let owned;
    let samples = match samples {
        Some(s) => s,
        None => {
            owned = default_samples(weight, p, f)?;
            &owned
        }
    };
    let fit = ehrhart_fit(weight, p, f, r, samples)?;
    let shifted = ehrhart_fit(weight, p, f, &(r + Rational::one()), samples)?;
    let agree = fit.f1 == report.f1_closed && shifted.f1 == fit.f1 && &shifted.f0 - &fit.f0 == Rational::one();
    report.f1_oracle = Some(fit.f1.clone());
    report.f1_oracle_shifted = Some(shifted.f1);
    report.oracle_details = Some(fit);
    report.agreement = Some(agree);
    Ok(report)
}

/// `f_G W = q_{N−1} / c`.
pub fn fg_times_weight(weight: &DimensionWeight, conventions: &Conventions) -> Polynomial {
    weight.next().scale(&conventions.qn1_per_p_fg.recip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pl::AffinePiece;
    use crate::rootsystem::{RootSystem, Series};

    fn a1() -> DimensionWeight {
        RootSystem::classical(Series::A, 1).unwrap().weight()
    }

    fn seg(a: i64, b: i64) -> RationalPolytope {
        RationalPolytope::from_vertices(&[vec![int(a)], vec![int(b)]]).unwrap()
    }

    fn identity_fn() -> PiecewiseAffine {
        PiecewiseAffine::affine(vec![int(1)], int(0))
    }

    fn kink() -> PiecewiseAffine {
        PiecewiseAffine::new(
            1,
            vec![AffinePiece::new(vec![int(0)], int(0)), AffinePiece::new(vec![int(2)], int(-3))],
        )
        .unwrap()
    }

    #[test]
    fn volume_and_average() {
        let w = a1();
        assert_eq!(volume_w(&w, &seg(1, 2)).unwrap(), rat(3, 2));
        assert_eq!(average_scalar(&w, &seg(1, 2)).unwrap(), rat(10, 3));
        assert_eq!(volume_w(&w, &seg(1, 3)).unwrap(), int(4));
        assert_eq!(average_scalar(&w, &seg(1, 3)).unwrap(), int(2));
        assert!(matches!(volume_w(&w, &seg(0, 1)), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn closed_form_values() {
        let w = a1();
        assert_eq!(futaki_closed_form(&w, &seg(1, 2), &identity_fn()).unwrap(), rat(-2, 27));
        assert_eq!(futaki_closed_form(&w, &seg(1, 2), &kink()).unwrap(), rat(-35, 108));
        assert_eq!(
            futaki_closed_form(&w, &seg(1, 2), &PiecewiseAffine::constant(1, rat(7, 2))).unwrap(),
            int(0)
        );
    }

    #[test]
    fn lattice_sums() {
        let w = a1();
        let p = seg(1, 2);
        for k in 1..=6i64 {
            let expected = rat(3, 2) * int(k * k) + rat(5, 2) * int(k) + int(1);
            assert_eq!(weighted_count_dk(&w, &p, k as u64), expected);
        }
        assert_eq!(weighted_count_dk(&w, &p, 1), int(5));
        assert_eq!(weighted_weight_wk(&w, &p, &identity_fn(), &int(3), 1).unwrap(), int(7));
        let zero = PiecewiseAffine::constant(1, int(0));
        assert_eq!(
            weighted_weight_wk(&w, &p, &zero, &int(2), 3).unwrap(),
            int(3 * 2) * weighted_count_dk(&w, &p, 3)
        );
        assert!(matches!(
            weighted_weight_wk(&w, &p, &kink(), &int(2), 3),
            Err(Error::BadDilation { k: 3, period: 2 })
        ));
    }

    #[test]
    fn lift_agrees_with_direct_sum() {
        let w = a1();
        let p = seg(1, 2);
        let zero = PiecewiseAffine::constant(1, int(0));
        assert_eq!(wk_via_lift(&w, &p, &zero, &int(1), 1).unwrap(), int(5));
        for k in 1..=6 {
            assert_eq!(
                wk_via_lift(&w, &p, &identity_fn(), &int(3), k).unwrap(),
                weighted_weight_wk(&w, &p, &identity_fn(), &int(3), k).unwrap()
            );
        }
        let half = PiecewiseAffine::affine(vec![rat(1, 2)], int(0));
        assert!(matches!(wk_via_lift(&w, &p, &half, &int(3), 2), Err(Error::FractionalGradient(0))));
    }

    #[test]
    fn fit_reads_off_the_hand_coefficients() {
        let w = a1();
        let p = seg(1, 2);
        let fit = ehrhart_fit(&w, &p, &identity_fn(), &int(3), &(1..=6).collect::<Vec<_>>()).unwrap();
        assert_eq!(fit.a, rat(13, 6));
        assert_eq!(fit.b, rat(7, 2));
        assert_eq!(fit.c, rat(3, 2));
        assert_eq!(fit.d, rat(5, 2));
        assert_eq!(fit.f1, rat(-2, 27));
        assert_eq!(fit.d_poly, vec![int(1), rat(5, 2), rat(3, 2)]);
        let predicted = predicted_coefficients(&w, &p, &identity_fn(), &int(3)).unwrap();
        assert_eq!(predicted, [fit.a.clone(), fit.b.clone(), fit.c.clone(), fit.d.clone()]);
        // held-out prediction of d at k = 7
        assert_eq!(interp::evaluate(&fit.d_poly, &int(7)), weighted_count_dk(&w, &p, 7));
    }

    #[test]
    fn too_few_samples() {
        let w = a1();
        assert!(matches!(
            ehrhart_fit(&w, &seg(1, 2), &identity_fn(), &int(3), &[1, 2, 3]),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn wrong_factor_convention_is_detected() {
        let w = a1();
        let quarter = Conventions {
            qn1_per_p_fg: rat(1, 4),
            ..Default::default()
        };
        let p = seg(1, 2);
        let closed = futaki_closed_form_with(&w, &p, &identity_fn(), &quarter).unwrap();
        let oracle = ehrhart_fit(&w, &p, &identity_fn(), &int(3), &(1..=6).collect::<Vec<_>>()).unwrap();
        assert_ne!(closed, oracle.f1);
    }

    #[test]
    fn cross_check_small_suite() {
        let w = a1();
        let r = futaki_cross_check(&w, &seg(1, 2), &kink(), &int(2), None).unwrap();
        assert_eq!(r.f1_oracle, Some(rat(-35, 108)));
        assert_eq!(r.agreement, Some(true));
    }
}
