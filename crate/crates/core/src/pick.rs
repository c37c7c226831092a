//! Two-term lattice-sum asymptotics over dilated integer polytopes:
//! `Σ_{p ∈ P ∩ (1/k)ℤⁿ} h(p) = (∫_P h dμ) kⁿ + (½ ∫_{∂P} h dσ) k^{n−1} + O(k^{n−2})`,
//! and the facet-count limit that characterizes `dσ`.

use nalgebra::{DMatrix, DVector};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::polytope::RationalPolytope;
use crate::quadrature::{boundary_integral, integral_polytope, pairwise_sum};
use crate::rational::{int, to_f64, Rational};

/// Largest tolerated `|r_{2k}| / |r_k|`. An `O(k^{n−2})` residual doubles
/// `n − 2` times per doubling of `k`; the slack keeps one order of growth
/// more (`2^{n−1}`) out. For `n = 1` the residual only has to stay bounded.
pub fn growth_limit(n: usize) -> f64 {
    if n <= 1 {
        1.125
    } else {
        1.5 * 2f64.powi(n as i32 - 2)
    }
}

/// Exact for polynomial `h`, floating point for callbacks.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Scalar {
    Exact(#[serde(with = "crate::rational::serde_rational")] Rational),
    Float(#[serde(serialize_with = "crate::report::serialize_f64")] f64),
}

impl Scalar {
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => to_f64(q),
            Scalar::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Scalar::Exact(q) => Some(q),
            Scalar::Float(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioDiagnostic {
    pub k: u64,
    /// `log₂ |r_{2k}| − log₂ |r_k|`; `None` when a residual vanishes.
    #[serde(serialize_with = "crate::report::serialize_opt_f64")]
    pub log2_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticFit {
    pub dim: usize,
    pub samples: Vec<u64>,
    pub sums: Vec<Scalar>,
    pub c_top: Scalar,
    pub c_next: Scalar,
    pub residuals: Vec<Scalar>,
    pub diagnostics: Vec<RatioDiagnostic>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PickCheck {
    pub passed: bool,
    /// Set when `h` failed the convexity probe; `passed` is then advisory.
    pub informational: bool,
    pub reason: String,
    pub fit: AsymptoticFit,
}

/// `Σ_{λ ∈ kP ∩ ℤⁿ} h(λ / k)`, exact. Each homogeneous part of `h` is summed
/// over integer points and rescaled once, so no per-point division happens.
pub fn pick_sum(p: &RationalPolytope, h: &Polynomial, k: u64) -> Rational {
    let deg = h.degree().unwrap_or(0);
    let parts: Vec<Polynomial> = (0..=deg).map(|d| h.homogeneous_part(d)).collect();
    let slabs = p.lattice_fold(
        k,
        || vec![Rational::zero(); parts.len()],
        |mut acc, lambda| {
            for (a, part) in acc.iter_mut().zip(&parts) {
                if !part.is_zero() {
                    *a += part.eval_int(lambda);
                }
            }
            acc
        },
    );
    let kk = int(k as i64);
    let mut total = Rational::zero();
    let mut scale = Rational::from_integer(1.into());
    for d in 0..parts.len() {
        let sum: Rational = slabs.iter().map(|s| &s[d]).sum();
        total += sum / &scale;
        scale *= &kk;
    }
    total
}

/// Floating-point sum for an arbitrary callback, reduced pairwise in lattice
/// order.
pub fn pick_sum_f64<H>(p: &RationalPolytope, h: H, k: u64) -> f64
where
    H: Fn(&[f64]) -> f64 + Sync,
{
    let kf = k as f64;
    let slabs = p.lattice_fold(k, Vec::new, |mut acc, lambda| {
        let x: Vec<f64> = lambda.iter().map(|&v| v as f64 / kf).collect();
        acc.push(h(&x));
        acc
    });
    let values: Vec<f64> = slabs.into_iter().flatten().collect();
    pairwise_sum(&values)
}

fn diagnostics(samples: &[u64], residuals: &[f64]) -> Vec<RatioDiagnostic> {
    let mut out = Vec::new();
    for (i, &k) in samples.iter().enumerate() {
        if let Some(j) = samples.iter().position(|&s| s == 2 * k) {
            let (a, b) = (residuals[i].abs(), residuals[j].abs());
            let log2_ratio = if a == 0.0 || b == 0.0 { None } else { Some(b.log2() - a.log2()) };
            out.push(RatioDiagnostic { k, log2_ratio });
        }
    }
    out
}

fn check_samples(samples: &[u64]) -> Result<()> {
    if samples.is_empty() || samples.contains(&0) {
        return Err(Error::TooFewSamples {
            needed: 1,
            got: samples.iter().filter(|&&k| k > 0).count(),
        });
    }
    Ok(())
}

/// Residuals against the exact coefficients `∫_P h dμ` and `½ ∫_{∂P} h dσ`.
pub fn pick_fit(p: &RationalPolytope, h: &Polynomial, samples: &[u64]) -> Result<AsymptoticFit> {
    check_samples(samples)?;
    let n = p.dim() as i32;
    let c_top = integral_polytope(h, p);
    let c_next = boundary_integral(h, p) / int(2);
    let sums: Vec<Rational> = samples.iter().map(|&k| pick_sum(p, h, k)).collect();
    let residuals: Vec<Rational> = samples
        .iter()
        .zip(&sums)
        .map(|(&k, s)| {
            let kk = int(k as i64);
            s - &c_top * pow(&kk, n) - &c_next * pow(&kk, n - 1)
        })
        .collect();
    let res_f: Vec<f64> = residuals.iter().map(to_f64).collect();
    Ok(AsymptoticFit {
        dim: p.dim(),
        samples: samples.to_vec(),
        sums: sums.into_iter().map(Scalar::Exact).collect(),
        c_top: Scalar::Exact(c_top),
        c_next: Scalar::Exact(c_next),
        residuals: residuals.into_iter().map(Scalar::Exact).collect(),
        diagnostics: diagnostics(samples, &res_f),
    })
}

fn pow(k: &Rational, e: i32) -> Rational {
    if e >= 0 {
        num_traits::pow(k.clone(), e as usize)
    } else {
        num_traits::pow(k.recip(), (-e) as usize)
    }
}

/// Least-squares fit of `(c_n, c_{n−1})` from
/// `S_k / k^{n−1} ≈ c_n k + c_{n−1} + c k^{−1}` on the larger half of the
/// samples; the third term soaks up the `O(k^{n−2})` part when at least
/// three samples are used.
pub fn pick_fit_f64<H>(p: &RationalPolytope, h: H, samples: &[u64]) -> Result<AsymptoticFit>
where
    H: Fn(&[f64]) -> f64 + Sync,
{
    check_samples(samples)?;
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let n = p.dim() as i32;
    let sums: Vec<f64> = samples.iter().map(|&k| pick_sum_f64(p, &h, k)).collect();
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by_key(|&i| samples[i]);
    let take = (order.len() - order.len() / 2).max(3).min(order.len());
    let used = &order[order.len() - take..];
    let cols = used.len().min(3);
    let a = DMatrix::from_fn(used.len(), cols, |r, c| (samples[used[r]] as f64).powi(1 - c as i32));
    let b = DVector::from_iterator(
        used.len(),
        used.iter().map(|&i| sums[i] / (samples[i] as f64).powi(n - 1)),
    );
    let sol = (a.transpose() * &a)
        .lu()
        .solve(&(a.transpose() * b))
        .ok_or_else(|| Error::NonFinite("singular least-squares system".into()))?;
    let (c_top, c_next) = (sol[0], sol[1]);
    let residuals: Vec<f64> = samples
        .iter()
        .zip(&sums)
        .map(|(&k, s)| {
            let kf = k as f64;
            s - c_top * kf.powi(n) - c_next * kf.powi(n - 1)
        })
        .collect();
    Ok(AsymptoticFit {
        dim: p.dim(),
        samples: samples.to_vec(),
        sums: sums.into_iter().map(Scalar::Float).collect(),
        c_top: Scalar::Float(c_top),
        c_next: Scalar::Float(c_next),
        diagnostics: diagnostics(samples, &residuals),
        residuals: residuals.into_iter().map(Scalar::Float).collect(),
    })
}

/// Decides whether the residuals are `O(k^{n−2})` from the `(k, 2k)` pairs.
/// No pairs, or any pair growing too fast, is a failure.
pub fn assess(fit: &AsymptoticFit) -> (bool, String) {
    let limit = growth_limit(fit.dim);
    if fit.diagnostics.is_empty() {
        return (false, "inconclusive: no (k, 2k) sample pairs".into());
    }
    let mut worst: f64 = 0.0;
    for d in &fit.diagnostics {
        let i = fit.samples.iter().position(|&s| s == d.k).unwrap();
        let j = fit.samples.iter().position(|&s| s == 2 * d.k).unwrap();
        let (a, b) = (fit.residuals[i].to_f64().abs(), fit.residuals[j].to_f64().abs());
        let ratio = if b == 0.0 {
            0.0
        } else if a == 0.0 {
            f64::INFINITY
        } else {
            b / a
        };
        if !(ratio <= limit) {
            return (false, format!("residual grows by {ratio} from k={} to k={}", d.k, 2 * d.k));
        }
        worst = worst.max(ratio);
    }
    (true, format!("worst residual ratio {worst} <= {limit}"))
}

/// Numerical convexity probe: the Hessian of `h` is checked for positive
/// semidefiniteness at the points of `P ∩ (1/4)ℤⁿ`.
pub fn probe_convex(p: &RationalPolytope, h: &Polynomial) -> bool {
    let n = h.nvars();
    let hess: Vec<Vec<Polynomial>> = (0..n)
        .map(|i| (0..n).map(|j| h.partial(i).partial(j)).collect())
        .collect();
    let points = p.lattice_points(4);
    points.iter().all(|x| {
        let m = DMatrix::from_fn(n, n, |i, j| to_f64(&hess[i][j].eval(x)));
        let scale = m.amax().max(1.0);
        m.symmetric_eigenvalues().iter().all(|&e| e >= -1e-12 * scale)
    })
}

pub fn pick_check(p: &RationalPolytope, h: &Polynomial, samples: &[u64]) -> Result<PickCheck> {
    if !p.is_integral() {
        return Err(Error::Precondition("the two-term asymptotic needs an integer polytope".into()));
    }
    let fit = pick_fit(p, h, samples)?;
    let (passed, reason) = assess(&fit);
    Ok(PickCheck {
        passed,
        informational: !probe_convex(p, h),
        reason,
        fit,
    })
}

pub fn pick_check_f64<H>(p: &RationalPolytope, h: H, samples: &[u64]) -> Result<PickCheck>
where
    H: Fn(&[f64]) -> f64 + Sync,
{
    if !p.is_integral() {
        return Err(Error::Precondition("the two-term asymptotic needs an integer polytope".into()));
    }
    let fit = pick_fit_f64(p, h, samples)?;
    let (passed, reason) = assess(&fit);
    Ok(PickCheck {
        passed,
        informational: false,
        reason,
        fit,
    })
}

/// `|#(F ∩ (1/k)ℤⁿ) / k^{n−1} − dσ(F)|` for each `k`.
pub fn facet_count_errors(p: &RationalPolytope, facet: usize, samples: &[u64]) -> Vec<f64> {
    let measure = to_f64(&p.facet_chart(facet).measure());
    let e = p.dim() as i32 - 1;
    samples
        .iter()
        .map(|&k| {
            let count = p.facet_lattice_count(facet, k).to_f64().unwrap();
            (count / (k as f64).powi(e) - measure).abs()
        })
        .collect()
}

/// Whether each error is half the previous one within ±50 %, for samples
/// that double.
pub fn errors_halve(errors: &[f64]) -> bool {
    errors.windows(2).all(|w| {
        let ratio = w[1] / w[0];
        (0.25..=0.75).contains(&ratio)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn square() -> RationalPolytope {
        RationalPolytope::from_vertices(&[vec![int(0), int(0)], vec![int(1), int(0)], vec![int(0), int(1)], vec![int(1), int(1)]])
            .unwrap()
    }

    fn x2y2() -> Polynomial {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        &x * &x + &y * &y
    }

    #[test]
    fn sums_match_closed_forms() {
        let seg = RationalPolytope::from_vertices(&[vec![int(0)], vec![int(1)]]).unwrap();
        for k in 1..=10 {
            assert_eq!(pick_sum(&seg, &Polynomial::one(1), k), int(k as i64 + 1));
            let expect = rat(2, 3) * int((k * k) as i64) + rat(5, 3) * int(k as i64) + rat(4, 3) + rat(1, 3 * k as i64);
            assert_eq!(pick_sum(&square(), &x2y2(), k), expect);
        }
        let seg12 = RationalPolytope::from_vertices(&[vec![int(1)], vec![int(2)]]).unwrap();
        assert_eq!(pick_sum(&seg12, &Polynomial::var(1, 0), 4), rat(3, 2) * int(4) + rat(3, 2));
    }

    #[test]
    fn float_sum_agrees() {
        let h = x2y2();
        let exact = to_f64(&pick_sum(&square(), &h, 7));
        let approx = pick_sum_f64(&square(), |x| x[0] * x[0] + x[1] * x[1], 7);
        assert!((exact - approx).abs() < 1e-12);
    }

    #[test]
    fn square_fit_and_check() {
        let check = pick_check(&square(), &x2y2(), &[4, 8, 16, 32, 64]).unwrap();
        assert!(check.passed, "{}", check.reason);
        assert!(!check.informational);
        assert_eq!(check.fit.c_top, Scalar::Exact(rat(2, 3)));
        assert_eq!(check.fit.c_next, Scalar::Exact(rat(5, 3)));
        assert_eq!(check.fit.residuals[0], Scalar::Exact(rat(4, 3) + rat(1, 12)));
    }

    #[test]
    fn exact_series_has_zero_residual() {
        let seg12 = RationalPolytope::from_vertices(&[vec![int(1)], vec![int(2)]]).unwrap();
        let check = pick_check(&seg12, &Polynomial::var(1, 0), &[1, 2, 4, 8]).unwrap();
        assert!(check.passed);
        assert!(check.fit.residuals.iter().all(|r| r == &Scalar::Exact(int(0))));
    }

    #[test]
    fn least_squares_recovers_coefficients() {
        let fit = pick_fit_f64(&square(), |x| x[0] * x[0] + x[1] * x[1], &[4, 8, 16, 32, 64]).unwrap();
        assert!((fit.c_top.to_f64() - 2.0 / 3.0).abs() < 1e-3);
        assert!((fit.c_next.to_f64() - 5.0 / 3.0).abs() < 0.1);
    }

    #[test]
    fn growing_residuals_fail() {
        // h = 1 with a wrong boundary coefficient leaves an O(k) residual
        let mut fit = pick_fit(&square(), &Polynomial::one(2), &[4, 8, 16]).unwrap();
        fit.c_next = Scalar::Exact(int(0));
        fit.residuals = fit
            .samples
            .iter()
            .zip(&fit.sums)
            .map(|(&k, s)| Scalar::Exact(s.as_exact().unwrap() - int((k * k) as i64)))
            .collect();
        fit.diagnostics = diagnostics(&fit.samples, &fit.residuals.iter().map(Scalar::to_f64).collect::<Vec<_>>());
        assert!(!assess(&fit).0);
        let no_pairs = pick_fit(&square(), &Polynomial::one(2), &[3, 5]).unwrap();
        assert!(!assess(&no_pairs).0);
    }

    #[test]
    fn nonconvex_is_informational() {
        let h = Polynomial::var(2, 0) * Polynomial::var(2, 1);
        assert!(pick_check(&square(), &h, &[2, 4, 8]).unwrap().informational);
    }
}
