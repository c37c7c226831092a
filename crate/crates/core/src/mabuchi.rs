//! Symplectic potentials `u = u_σ + g` with `u_σ = ½ Σ_F l_F log l_F` and
//! `g` polynomial, the weighted scalar curvature, the Mabuchi functional
//! `𝓕_A(u) = −∫_P log det(u_jk) W dμ + 2 ∫_{∂P} u W dσ − ∫_P u A W dμ`
//! and a finite-difference check of its first variation.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::conventions::Conventions;
use crate::error::{Error, Result};
use crate::futaki;
use crate::poly::{Polynomial, PolynomialSpec};
use crate::polytope::RationalPolytope;
use crate::quadrature::{
    facet_integral, gauss_legendre, graded_integral, pairwise_sum, GradedQuadratureSpec, QuadratureResult,
};
use crate::rational::{to_f64, vec_to_f64, Rational};
use crate::rootsystem::DimensionWeight;

/// Lattice refinement used by the positive-definiteness probe.
const PROBE_REFINEMENT: u64 = 8;

fn l_log_l(l: f64) -> f64 {
    if l == 0.0 {
        0.0
    } else {
        l * l.ln()
    }
}

fn format_f64_point(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Hessian of `u` together with its first and second derivatives at a point.
struct HessianJet {
    h: DMatrix<f64>,
    dh: Vec<DMatrix<f64>>,
    ddh: Vec<Vec<DMatrix<f64>>>,
}

#[derive(Clone, Debug)]
pub struct SymplecticPotential {
    polytope: RationalPolytope,
    canonical: bool,
    perturbation: Polynomial,
    normals: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    d1: Vec<Polynomial>,
    d2: Vec<Vec<Polynomial>>,
    d3: Vec<Vec<Vec<Polynomial>>>,
    d4: Vec<Vec<Vec<Vec<Polynomial>>>>,
}

impl SymplecticPotential {
    /// `u_σ + g` when `canonical`, else just `g`. The Hessian is probed for
    /// positive definiteness at the interior points of `P ∩ (1/8)ℤⁿ` and at
    /// the vertex barycenter.
    pub fn new(polytope: &RationalPolytope, canonical: bool, perturbation: Polynomial) -> Result<Self> {
        let n = polytope.dim();
        if perturbation.nvars() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: perturbation.nvars(),
            });
        }
        let d1: Vec<Polynomial> = (0..n).map(|i| perturbation.partial(i)).collect();
        let d2: Vec<Vec<Polynomial>> = d1.iter().map(|p| (0..n).map(|j| p.partial(j)).collect()).collect();
        let d3: Vec<Vec<Vec<Polynomial>>> = (0..n)
            .map(|a| (0..n).map(|i| (0..n).map(|j| d2[i][j].partial(a)).collect()).collect())
            .collect();
        let d4 = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| (0..n).map(|i| (0..n).map(|j| d3[a][i][j].partial(b)).collect()).collect())
                    .collect()
            })
            .collect();
        let u = SymplecticPotential {
            normals: polytope.facets().iter().map(|f| f.normal_f64()).collect(),
            offsets: polytope.facets().iter().map(|f| to_f64(&f.offset)).collect(),
            polytope: polytope.clone(),
            canonical,
            perturbation,
            d1,
            d2,
            d3,
            d4,
        };
        u.probe()?;
        Ok(u)
    }

    pub fn canonical(polytope: &RationalPolytope) -> Self {
        Self::new(polytope, true, Polynomial::zero(polytope.dim())).expect("u_σ is strictly convex")
    }

    /// `u + φ` for a polynomial `φ`.
    pub fn add_polynomial(&self, phi: &Polynomial) -> Result<Self> {
        Self::new(&self.polytope, self.canonical, &self.perturbation + phi)
    }

    pub fn polytope(&self) -> &RationalPolytope {
        &self.polytope
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    pub fn perturbation(&self) -> &Polynomial {
        &self.perturbation
    }

    pub fn dim(&self) -> usize {
        self.polytope.dim()
    }

    fn probe(&self) -> Result<()> {
        let mut points: Vec<Vec<f64>> = self
            .polytope
            .lattice_points(PROBE_REFINEMENT)
            .iter()
            .map(|p| vec_to_f64(p))
            .filter(|x| self.polytope.contains_f64(x, true))
            .collect();
        let n = self.dim();
        let verts = self.polytope.vertices();
        points.push(
            (0..n)
                .map(|i| verts.iter().map(|v| to_f64(&v[i])).sum::<f64>() / verts.len() as f64)
                .collect(),
        );
        for x in &points {
            let h = self.hessian(x)?;
            if h.cholesky().is_none() {
                return Err(Error::InvalidPotential(format!(
                    "Hessian is not positive definite at {}",
                    format_f64_point(x)
                )));
            }
        }
        Ok(())
    }

    /// `l_F(x)` for every facet; errors unless all are positive.
    fn interior_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let ls: Vec<f64> = self
            .normals
            .iter()
            .zip(&self.offsets)
            .map(|(v, c)| v.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - c)
            .collect();
        if ls.iter().all(|&l| l > 0.0) {
            Ok(ls)
        } else {
            Err(Error::NotInterior(format_f64_point(x)))
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let ls = self.interior_values(x)?;
        Ok(self.eval_with(x, &ls))
    }

    fn eval_with(&self, x: &[f64], ls: &[f64]) -> f64 {
        let sigma = if self.canonical {
            0.5 * ls.iter().map(|&l| l_log_l(l)).sum::<f64>()
        } else {
            0.0
        };
        sigma + self.perturbation.eval_f64(x)
    }

    /// `u` on the closed polytope, with `0 · log 0 = 0` on the boundary.
    pub fn eval_closure(&self, x: &[f64]) -> f64 {
        let ls: Vec<f64> = self
            .normals
            .iter()
            .zip(&self.offsets)
            .map(|(v, c)| (v.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - c).max(0.0))
            .collect();
        self.eval_with(x, &ls)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<DVector<f64>> {
        let ls = self.interior_values(x)?;
        let n = self.dim();
        let mut g = DVector::from_iterator(n, self.d1.iter().map(|p| p.eval_f64(x)));
        if self.canonical {
            for (v, &l) in self.normals.iter().zip(&ls) {
                for i in 0..n {
                    g[i] += 0.5 * v[i] * (l.ln() + 1.0);
                }
            }
        }
        Ok(g)
    }

    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let ls = self.interior_values(x)?;
        Ok(self.hessian_with(x, &ls))
    }

    fn hessian_with(&self, x: &[f64], ls: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let mut h = DMatrix::from_fn(n, n, |i, j| self.d2[i][j].eval_f64(x));
        if self.canonical {
            for (v, &l) in self.normals.iter().zip(ls) {
                let vv = DVector::from_column_slice(v);
                h += &vv * vv.transpose() * (0.5 / l);
            }
        }
        h
    }

    /// `u^{jk}`, erroring with an invalid-potential error if the Hessian is
    /// not positive definite at `x`.
    pub fn hessian_inverse(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let h = self.hessian(x)?;
        if h.clone().cholesky().is_none() {
            return Err(Error::InvalidPotential(format!(
                "Hessian is not positive definite at {}",
                format_f64_point(x)
            )));
        }
        h.lu()
            .try_inverse()
            .ok_or_else(|| Error::InvalidPotential(format!("singular Hessian at {}", format_f64_point(x))))
    }

    fn jet(&self, x: &[f64]) -> Result<HessianJet> {
        let ls = self.interior_values(x)?;
        let n = self.dim();
        let h = self.hessian_with(x, &ls);
        let mut dh: Vec<DMatrix<f64>> = (0..n)
            .map(|a| DMatrix::from_fn(n, n, |i, j| self.d3[a][i][j].eval_f64(x)))
            .collect();
        let mut ddh: Vec<Vec<DMatrix<f64>>> = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| DMatrix::from_fn(n, n, |i, j| self.d4[a][b][i][j].eval_f64(x)))
                    .collect()
            })
            .collect();
        if self.canonical {
            for (v, &l) in self.normals.iter().zip(&ls) {
                let vv = DVector::from_column_slice(v);
                let outer = &vv * vv.transpose();
                for a in 0..n {
                    dh[a] -= &outer * (0.5 * v[a] / (l * l));
                    for b in 0..n {
                        ddh[a][b] += &outer * (v[a] * v[b] / (l * l * l));
                    }
                }
            }
        }
        Ok(HessianJet { h, dh, ddh })
    }
}

/// On-disk potential: `{"canonical": true, "perturbation": {...}}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PotentialSpec {
    #[serde(default = "default_true")]
    pub canonical: bool,
    #[serde(default)]
    pub perturbation: Option<PolynomialSpec>,
}

fn default_true() -> bool {
    true
}

impl PotentialSpec {
    pub fn build(&self, polytope: &RationalPolytope) -> Result<SymplecticPotential> {
        let g = match &self.perturbation {
            Some(spec) => Polynomial::try_from(spec)?,
            None => Polynomial::zero(polytope.dim()),
        };
        SymplecticPotential::new(polytope, self.canonical, g)
    }
}

/// The right-hand side `A` of `−W⁻¹ (W u^{jk})_{jk} = A`.
#[derive(Clone)]
pub enum Forcing {
    Zero,
    /// `(a − f_G) / 2`.
    Paper,
    /// `2 (a − f_G)`, which turns the equation into `S ≡ a` under the
    /// default divergence factor `½`.
    Csc,
    Custom(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl Forcing {
    pub fn custom(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Forcing::Custom(Arc::new(f))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Forcing::Zero => "zero",
            Forcing::Paper => "paper",
            Forcing::Csc => "csc",
            Forcing::Custom(_) => "custom",
        }
    }
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Forcing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Forcing::Zero),
            "paper" => Ok(Forcing::Paper),
            "csc" => Ok(Forcing::Csc),
            other => Err(Error::Parse(format!("unknown A preset '{other}' (expected paper, csc or zero)"))),
        }
    }
}

/// Float evaluation data for `W = q_N` and `f_G`.
struct WeightData {
    w: Polynomial,
    dw: Vec<Polynomial>,
    ddw: Vec<Vec<Polynomial>>,
    next: Polynomial,
    qn1_per_p_fg: f64,
    divergence_factor: f64,
    average: f64,
}

impl WeightData {
    fn new(weight: &DimensionWeight, p: &RationalPolytope, conventions: &Conventions) -> Result<Self> {
        let average = to_f64(&futaki::average_scalar(weight, p)?);
        let w = weight.top();
        let n = w.nvars();
        let dw: Vec<Polynomial> = (0..n).map(|i| w.partial(i)).collect();
        let ddw = dw.iter().map(|d| (0..n).map(|j| d.partial(j)).collect()).collect();
        Ok(WeightData {
            w,
            dw,
            ddw,
            next: weight.next(),
            qn1_per_p_fg: to_f64(&conventions.qn1_per_p_fg),
            divergence_factor: to_f64(&conventions.divergence_factor),
            average,
        })
    }

    fn f_g(&self, x: &[f64]) -> f64 {
        self.next.eval_f64(x) / (self.qn1_per_p_fg * self.w.eval_f64(x))
    }

    fn forcing(&self, a: &Forcing, x: &[f64]) -> f64 {
        match a {
            Forcing::Zero => 0.0,
            Forcing::Paper => 0.5 * (self.average - self.f_g(x)),
            Forcing::Csc => 2.0 * (self.average - self.f_g(x)),
            Forcing::Custom(f) => f(x),
        }
    }

    /// `W⁻¹ Σ_{jk} ∂_j ∂_k (W u^{jk})` from the matrix-calculus identities
    /// `∂Φ = −Φ (∂H) Φ` and `∂_a∂_b Φ = Φ H_b Φ H_a Φ + Φ H_a Φ H_b Φ − Φ H_ab Φ`.
    fn divergence(&self, u: &SymplecticPotential, x: &[f64]) -> Result<f64> {
        let jet = u.jet(x)?;
        let n = u.dim();
        let phi = jet
            .h
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidPotential(format!("singular Hessian at {}", format_f64_point(x))))?;
        let dphi: Vec<DMatrix<f64>> = jet.dh.iter().map(|ha| -(&phi * ha * &phi)).collect();
        let w = self.w.eval_f64(x);
        let mut total = 0.0;
        for j in 0..n {
            for k in 0..n {
                let ddphi_jk = {
                    let hj = &jet.dh[j];
                    let hk = &jet.dh[k];
                    let m = &phi * hk * &phi * hj * &phi + &phi * hj * &phi * hk * &phi - &phi * &jet.ddh[j][k] * &phi;
                    m[(j, k)]
                };
                total += self.ddw[j][k].eval_f64(x) * phi[(j, k)]
                    + self.dw[j].eval_f64(x) * dphi[k][(j, k)]
                    + self.dw[k].eval_f64(x) * dphi[j][(j, k)]
                    + w * ddphi_jk;
            }
        }
        Ok(total / w)
    }

    /// Same quantity from nested central differences of `W u^{jk}` with two
    /// Richardson steps.
    fn divergence_fd(&self, u: &SymplecticPotential, x: &[f64]) -> Result<f64> {
        let ls = u.interior_values(x)?;
        let dist = ls
            .iter()
            .zip(&u.normals)
            .map(|(l, v)| l / v.iter().map(|a| a * a).sum::<f64>().sqrt())
            .fold(f64::INFINITY, f64::min);
        let h0 = (dist / 4.0).min(0.05);
        let n = u.dim();
        let field = |y: &[f64]| -> Result<DMatrix<f64>> { Ok(u.hessian_inverse(y)? * self.w.eval_f64(y)) };
        let second = |h: f64| -> Result<f64> {
            let mut total = 0.0;
            let center = field(x)?;
            for j in 0..n {
                for k in 0..n {
                    let shifted = |sj: f64, sk: f64| -> Result<f64> {
                        let mut y = x.to_vec();
                        y[j] += sj * h;
                        y[k] += sk * h;
                        Ok(field(&y)?[(j, k)])
                    };
                    total += if j == k {
                        (shifted(0.5, 0.5)? - 2.0 * center[(j, j)] + shifted(-0.5, -0.5)?) / (h * h)
                    } else {
                        (shifted(1.0, 1.0)? - shifted(1.0, -1.0)? - shifted(-1.0, 1.0)? + shifted(-1.0, -1.0)?)
                            / (4.0 * h * h)
                    };
                }
            }
            Ok(total)
        };
        let (a, b, c) = (second(h0)?, second(h0 / 2.0)?, second(h0 / 4.0)?);
        let ab = (4.0 * b - a) / 3.0;
        let bc = (4.0 * c - b) / 3.0;
        Ok((16.0 * bc - ab) / 15.0 / self.w.eval_f64(x))
    }
}

/// `W⁻¹ Σ_{jk} ∂_j ∂_k (W u^{jk})` at an interior point.
pub fn divergence_term(weight: &DimensionWeight, u: &SymplecticPotential, x: &[f64]) -> Result<f64> {
    WeightData::new(weight, u.polytope(), &Conventions::default())?.divergence(u, x)
}

/// Finite-difference counterpart of [`divergence_term`].
pub fn divergence_term_fd(weight: &DimensionWeight, u: &SymplecticPotential, x: &[f64]) -> Result<f64> {
    WeightData::new(weight, u.polytope(), &Conventions::default())?.divergence_fd(u, x)
}

pub fn scalar_curvature(weight: &DimensionWeight, u: &SymplecticPotential, x: &[f64]) -> Result<f64> {
    scalar_curvature_with(weight, u, x, &Conventions::default())
}

/// `S = −c W⁻¹ (W u^{jk})_{jk} + f_G` with `c` the divergence factor.
pub fn scalar_curvature_with(
    weight: &DimensionWeight,
    u: &SymplecticPotential,
    x: &[f64],
    conventions: &Conventions,
) -> Result<f64> {
    let data = WeightData::new(weight, u.polytope(), conventions)?;
    Ok(-data.divergence_factor * data.divergence(u, x)? + data.f_g(x))
}

pub fn scalar_curvature_fd(weight: &DimensionWeight, u: &SymplecticPotential, x: &[f64]) -> Result<f64> {
    let data = WeightData::new(weight, u.polytope(), &Conventions::default())?;
    Ok(-data.divergence_factor * data.divergence_fd(u, x)? + data.f_g(x))
}

/// Grading depth used for integrands that are smooth on the closed polytope.
const SMOOTH_DEPTH: u32 = 1;

/// `∫_P S W dμ` next to the exact `a · Vol_W`.
pub fn total_scalar_curvature(
    weight: &DimensionWeight,
    u: &SymplecticPotential,
    spec: &GradedQuadratureSpec,
    conventions: &Conventions,
) -> Result<(QuadratureResult, Rational)> {
    let p = u.polytope();
    let data = WeightData::new(weight, p, conventions)?;
    let target = futaki::average_scalar(weight, p)? * futaki::volume_w(weight, p)?;
    // S W is smooth up to the boundary, where the divergence loses accuracy
    // to cancellation, so deep grading only adds error
    let spec = &GradedQuadratureSpec {
        depth: spec.depth.min(SMOOTH_DEPTH),
        ..spec.clone()
    };
    let integral = graded_integral(
        |x| match data.divergence(u, x) {
            Ok(div) => (-data.divergence_factor * div + data.f_g(x)) * data.w.eval_f64(x),
            Err(_) => f64::NAN,
        },
        p,
        spec,
    )?;
    Ok((integral, target))
}

/// `r(x) = −W⁻¹ (W u^{jk})_{jk}(x) − A(x)`.
pub fn el_residual(weight: &DimensionWeight, u: &SymplecticPotential, a: &Forcing, x: &[f64]) -> Result<f64> {
    let data = WeightData::new(weight, u.polytope(), &Conventions::default())?;
    Ok(-data.divergence(u, x)? - data.forcing(a, x))
}

/// Interior points of `P ∩ (1/m)ℤⁿ` in lattice order.
pub fn interior_grid(p: &RationalPolytope, m: u64) -> Vec<Vec<f64>> {
    p.lattice_points(m)
        .iter()
        .map(|x| vec_to_f64(x))
        .filter(|x| p.contains_f64(x, true))
        .collect()
}

/// `(x, r(x))` over [`interior_grid`].
pub fn residual_grid(
    weight: &DimensionWeight,
    u: &SymplecticPotential,
    a: &Forcing,
    m: u64,
) -> Result<Vec<(Vec<f64>, f64)>> {
    let data = WeightData::new(weight, u.polytope(), &Conventions::default())?;
    interior_grid(u.polytope(), m)
        .into_iter()
        .map(|x| {
            let r = -data.divergence(u, &x)? - data.forcing(a, &x);
            Ok((x, r))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MabuchiValue {
    #[serde(serialize_with = "crate::report::serialize_f64")]
    pub value: f64,
    #[serde(serialize_with = "crate::report::serialize_f64")]
    pub error_estimate: f64,
    /// `−∫_P log det(u_jk) W dμ`.
    #[serde(serialize_with = "crate::report::serialize_f64")]
    pub log_det_term: f64,
    /// `2 ∫_{∂P} u W dσ`.
    #[serde(serialize_with = "crate::report::serialize_f64")]
    pub boundary_term: f64,
    /// `−∫_P u A W dμ`.
    #[serde(serialize_with = "crate::report::serialize_f64")]
    pub forcing_term: f64,
    /// Error estimate above the requested tolerance.
    pub flagged: bool,
}

fn log_det(h: DMatrix<f64>) -> f64 {
    match h.cholesky() {
        Some(c) => 2.0 * c.l().diagonal().iter().map(|d| d.ln()).sum::<f64>(),
        None => f64::NAN,
    }
}

/// `2 ∫_{∂P} u W dσ`. The polynomial part is exact; on each facet the
/// terms `½ l_G log l_G` are exact when `l_G` is constant there and use
/// graded quadrature over the facet chart otherwise.
fn boundary_term(data: &WeightData, u: &SymplecticPotential, spec: &GradedQuadratureSpec) -> Result<(f64, f64)> {
    let p = u.polytope();
    let poly_part = to_f64(&crate::quadrature::boundary_integral(&(u.perturbation() * &data.w), p));
    if !u.is_canonical() {
        return Ok((2.0 * poly_part, 0.0));
    }
    let mut values = Vec::new();
    let mut error = 0.0;
    for facet in 0..p.facets().len() {
        let chart = p.facet_chart(facet);
        let mut varying = Vec::new();
        for (g, other) in p.facets().iter().enumerate() {
            if g == facet {
                continue;
            }
            let vals: Vec<Rational> = chart.facet_vertices.iter().map(|v| other.eval(v)).collect();
            if vals.iter().all(|v| v == &vals[0]) {
                if !vals[0].is_zero() {
                    let c = to_f64(&vals[0]);
                    values.push(0.5 * l_log_l(c) * to_f64(&facet_integral(&data.w, p, facet)));
                }
            } else {
                varying.push(g);
            }
        }
        if varying.is_empty() {
            continue;
        }
        let sigma_at = |x: &[f64]| -> f64 {
            let s: f64 = varying
                .iter()
                .map(|&g| {
                    let l = u.normals[g].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - u.offsets[g];
                    l_log_l(l.max(0.0))
                })
                .sum();
            0.5 * s * data.w.eval_f64(x)
        };
        match &chart.image {
            None => values.push(sigma_at(&vec_to_f64(&chart.facet_vertices[0]))),
            Some(image) => {
                let (m, t) = chart.embedding();
                let m: Vec<Vec<f64>> = m.iter().map(|r| vec_to_f64(r)).collect();
                let t = vec_to_f64(&t);
                let res = graded_integral(
                    |z| {
                        let x: Vec<f64> = m
                            .iter()
                            .zip(&t)
                            .map(|(row, ti)| row.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() + ti)
                            .collect();
                        sigma_at(&x)
                    },
                    image,
                    spec,
                )?;
                values.push(res.value);
                error += res.error_estimate;
            }
        }
    }
    Ok((2.0 * (poly_part + pairwise_sum(&values)), 2.0 * error))
}

pub fn mabuchi_eval(
    weight: &DimensionWeight,
    u: &SymplecticPotential,
    a: &Forcing,
    spec: &GradedQuadratureSpec,
) -> Result<MabuchiValue> {
    mabuchi_eval_with(weight, u, a, spec, &Conventions::default())
}

pub fn mabuchi_eval_with(
    weight: &DimensionWeight,
    u: &SymplecticPotential,
    a: &Forcing,
    spec: &GradedQuadratureSpec,
    conventions: &Conventions,
) -> Result<MabuchiValue> {
    let p = u.polytope();
    let data = WeightData::new(weight, p, conventions)?;
    let log_det_term = graded_integral(
        |x| match u.interior_values(x) {
            Ok(ls) => -log_det(u.hessian_with(x, &ls)) * data.w.eval_f64(x),
            Err(_) => f64::NAN,
        },
        p,
        spec,
    )?;
    let forcing_term = match a {
        Forcing::Zero => QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
        },
        _ => graded_integral(
            |x| match u.interior_values(x) {
                Ok(ls) => -u.eval_with(x, &ls) * data.forcing(a, x) * data.w.eval_f64(x),
                Err(_) => f64::NAN,
            },
            p,
            spec,
        )?,
    };
    let (boundary, boundary_err) = boundary_term(&data, u, spec)?;
    let value = log_det_term.value + boundary + forcing_term.value;
    let error_estimate = log_det_term.error_estimate + boundary_err + forcing_term.error_estimate;
    Ok(MabuchiValue {
        value,
        error_estimate,
        log_det_term: log_det_term.value,
        boundary_term: boundary,
        forcing_term: forcing_term.value,
        flagged: error_estimate > spec.tolerance,
    })
}

/// `𝓛_A(φ) = 2 ∫_{∂P} φ W dσ − ∫_P A φ W dμ` for polynomial `φ`.
pub fn linear_term(
    weight: &DimensionWeight,
    p: &RationalPolytope,
    phi: &Polynomial,
    a: &Forcing,
    spec: &GradedQuadratureSpec,
) -> Result<QuadratureResult> {
    let data = WeightData::new(weight, p, &Conventions::default())?;
    let boundary = 2.0 * to_f64(&crate::quadrature::boundary_integral(&(phi * &data.w), p));
    let interior = match a {
        Forcing::Zero => QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
        },
        _ => graded_integral(|x| -data.forcing(a, x) * phi.eval_f64(x) * data.w.eval_f64(x), p, spec)?,
    };
    Ok(QuadratureResult {
        value: boundary + interior.value,
        error_estimate: interior.error_estimate,
    })
}

/// `amplitude · Π_i (x_i − lo_i)² (x_i − hi_i)²` on the box `[lo, hi]`,
/// zero outside. Continuously differentiable; compactly supported when the
/// box sits strictly inside `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub amplitude: f64,
}

impl Bump {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Bump { lo, hi, amplitude: 1.0 }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Bump {
            amplitude: self.amplitude * c,
            ..self.clone()
        }
    }

    fn factors(&self, x: &[f64]) -> Option<Vec<[f64; 3]>> {
        let mut out = Vec::with_capacity(x.len());
        for ((&t, &a), &b) in x.iter().zip(&self.lo).zip(&self.hi) {
            if t < a || t > b {
                return None;
            }
            let s = 2.0 * t - a - b;
            let (p, q) = (t - a, t - b);
            out.push([p * p * q * q, 2.0 * p * q * s, 2.0 * (s * s + 2.0 * p * q)]);
        }
        Some(out)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.factors(x)
            .map_or(0.0, |f| self.amplitude * f.iter().map(|v| v[0]).product::<f64>())
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let Some(f) = self.factors(x) else {
            return DMatrix::zeros(n, n);
        };
        DMatrix::from_fn(n, n, |i, j| {
            let prod: f64 = (0..n)
                .map(|l| {
                    if i == j && l == i {
                        f[l][2]
                    } else if l == i || l == j {
                        f[l][1]
                    } else {
                        f[l][0]
                    }
                })
                .product();
            self.amplitude * prod
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariationReport {
    #[serde(serialize_with = "crate::report::serialize_f64")]
    pub epsilon: f64,
    /// `(𝓕_A(u + εδu) − 𝓕_A(u − εδu)) / 2ε`.
    #[serde(serialize_with = "crate::report::serialize_f64")]
    pub finite_difference: f64,
    /// `∫_P r δu W dμ`.
    #[serde(serialize_with = "crate::report::serialize_f64")]
    pub predicted: f64,
    #[serde(serialize_with = "crate::report::serialize_f64")]
    pub relative_discrepancy: f64,
    pub advisory: Option<String>,
}

/// Tensor Gauss rule on a box, `panels` panels per axis.
fn box_integral(lo: &[f64], hi: &[f64], nodes: usize, panels: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let (gx, gw) = gauss_legendre(nodes);
    let axes: Vec<Vec<(f64, f64)>> = lo
        .iter()
        .zip(hi)
        .map(|(&a, &b)| {
            let h = (b - a) / panels as f64;
            (0..panels)
                .flat_map(|p| {
                    let c = a + (p as f64 + 0.5) * h;
                    gx.iter().zip(&gw).map(move |(x, w)| (c + 0.5 * h * x, 0.5 * h * w))
                })
                .collect()
        })
        .collect();
    let n = lo.len();
    let mut idx = vec![0usize; n];
    let mut values = Vec::new();
    let mut point = vec![0.0; n];
    'outer: loop {
        let mut weight = 1.0;
        for d in 0..n {
            let (x, w) = axes[d][idx[d]];
            point[d] = x;
            weight *= w;
        }
        values.push(weight * f(&point));
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                continue 'outer;
            }
            idx[d] = 0;
        }
        break;
    }
    pairwise_sum(&values)
}

/// Central difference of `𝓕_A` along a bump against the first-variation
/// formula. Outside the bump's box `u ± εδu = u`, so only the box
/// contributes to the difference, and the boundary part of `𝓛_A` is zero.
pub fn variation_check(
    weight: &DimensionWeight,
    u: &SymplecticPotential,
    a: &Forcing,
    bump: &Bump,
    epsilon: f64,
    spec: &GradedQuadratureSpec,
) -> Result<VariationReport> {
    let p = u.polytope();
    let n = p.dim();
    if bump.lo.len() != n || bump.hi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bump.lo.len(),
        });
    }
    let corners_inside = (0..1usize << n).all(|mask| {
        let c: Vec<f64> = (0..n)
            .map(|i| if mask >> i & 1 == 1 { bump.hi[i] } else { bump.lo[i] })
            .collect();
        p.contains_f64(&c, true)
    });
    if !corners_inside || bump.lo.iter().zip(&bump.hi).any(|(a, b)| a >= b) {
        return Err(Error::Precondition("bump support must be a box strictly inside P".into()));
    }
    let data = WeightData::new(weight, p, &Conventions::default())?;
    let panels = 8;
    let difference = box_integral(&bump.lo, &bump.hi, spec.nodes, panels, |x| {
        let Ok(ls) = u.interior_values(x) else {
            return f64::NAN;
        };
        let h = u.hessian_with(x, &ls);
        let b = bump.hessian(x);
        let plus = log_det(&h + &b * epsilon);
        let minus = log_det(&h - &b * epsilon);
        let w = data.w.eval_f64(x);
        -(plus - minus) * w - 2.0 * epsilon * data.forcing(a, x) * bump.value(x) * w
    });
    let magnitude = box_integral(&bump.lo, &bump.hi, spec.nodes, panels, |x| match u.hessian(x) {
        Ok(h) => log_det(h).abs() * data.w.eval_f64(x),
        Err(_) => f64::NAN,
    });
    let finite_difference = difference / (2.0 * epsilon);
    let predicted = box_integral(&bump.lo, &bump.hi, spec.nodes, panels, |x| {
        match data.divergence(u, x) {
            Ok(div) => (-div - data.forcing(a, x)) * bump.value(x) * data.w.eval_f64(x),
            Err(_) => f64::NAN,
        }
    });
    if !finite_difference.is_finite() || !predicted.is_finite() {
        return Err(Error::NonFinite("variation integrand".into()));
    }
    let relative_discrepancy = (finite_difference - predicted).abs() / predicted.abs().max(f64::MIN_POSITIVE);
    let advisory = (difference.abs() < 1e-10 * magnitude).then(|| {
        format!("epsilon = {epsilon} leaves a difference near rounding level; increase epsilon")
    });
    Ok(VariationReport {
        epsilon,
        finite_difference,
        predicted,
        relative_discrepancy,
        advisory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::rootsystem::{RootSystem, Series};

    fn a1() -> DimensionWeight {
        RootSystem::classical(Series::A, 1).unwrap().weight()
    }

    fn seg(a: i64, b: i64) -> RationalPolytope {
        RationalPolytope::from_vertices(&[vec![int(a)], vec![int(b)]]).unwrap()
    }

    #[test]
    fn canonical_potential_on_an_interval() {
        let u = SymplecticPotential::canonical(&seg(1, 2));
        let inv = u.hessian_inverse(&[1.5]).unwrap();
        assert!((inv[(0, 0)] - 0.5).abs() < 1e-15);
        for x in [1.1, 1.37, 1.9] {
            let expect = 2.0 * (x - 1.0) * (2.0 - x);
            assert!((u.hessian_inverse(&[x]).unwrap()[(0, 0)] - expect).abs() < 1e-14);
        }
        assert!(u.eval(&[1.0 + 1e-12]).unwrap().abs() < 1e-10);
        assert_eq!(u.eval_closure(&[2.0]), 0.0);
        assert!(matches!(u.eval(&[2.0]), Err(Error::NotInterior(_))));
    }

    #[test]
    fn scalar_curvature_on_intervals() {
        let w = a1();
        let u = SymplecticPotential::canonical(&seg(1, 2));
        let u3 = SymplecticPotential::canonical(&seg(1, 3));
        for x in [1.05, 1.5, 1.95] {
            assert!((scalar_curvature(&w, &u, &[x]).unwrap() - (6.0 - 4.0 / x)).abs() < 1e-10);
            let y = 2.0 * x - 1.0;
            assert!((scalar_curvature(&w, &u3, &[y]).unwrap() - (3.0 - 2.0 / y)).abs() < 1e-10);
            let fd = scalar_curvature_fd(&w, &u, &[x]).unwrap();
            assert!((fd - (6.0 - 4.0 / x)).abs() < 1e-6 * (6.0 - 4.0 / x).abs());
        }
    }

    #[test]
    fn mabuchi_value_on_unit_interval() {
        let w = a1();
        let u = SymplecticPotential::canonical(&seg(1, 2));
        let m = mabuchi_eval(&w, &u, &Forcing::Zero, &GradedQuadratureSpec::default()).unwrap();
        let exact = 1.5 * 2f64.ln() - 3.0;
        assert!((m.value - exact).abs() < 1e-8, "{} vs {exact}", m.value);
        assert_eq!(m.boundary_term, 0.0);
        assert!(!m.flagged);
    }

    #[test]
    fn constant_shift_changes_value_by_linear_term() {
        let w = a1();
        let p = seg(1, 2);
        let spec = GradedQuadratureSpec::default();
        let u = SymplecticPotential::canonical(&p);
        let c = Polynomial::constant(1, rat(3, 7));
        let shifted = u.add_polynomial(&c).unwrap();
        for a in [Forcing::Zero, Forcing::Csc] {
            let f0 = mabuchi_eval(&w, &u, &a, &spec).unwrap().value;
            let f1 = mabuchi_eval(&w, &shifted, &a, &spec).unwrap().value;
            let l = linear_term(&w, &p, &c, &a, &spec).unwrap().value;
            assert!((f1 - f0 - l).abs() < 1e-8);
        }
    }

    #[test]
    fn csc_forcing_residual_is_twice_the_scalar_defect() {
        let w = a1();
        let u = SymplecticPotential::canonical(&seg(1, 2));
        let a = futaki::average_scalar(&w, &seg(1, 2)).unwrap();
        for x in [1.2, 1.7] {
            let r = el_residual(&w, &u, &Forcing::Csc, &[x]).unwrap();
            let s = scalar_curvature(&w, &u, &[x]).unwrap();
            assert!((r - 2.0 * (s - to_f64(&a))).abs() < 1e-10);
        }
    }

    #[test]
    fn residual_with_matching_forcing_vanishes() {
        let w = a1();
        let u = SymplecticPotential::canonical(&seg(1, 2));
        let a = Forcing::custom(|x| (12.0 * x[0] - 12.0) / x[0]);
        for x in [1.1, 1.5, 1.8] {
            assert!(el_residual(&w, &u, &a, &[x]).unwrap().abs() < 1e-10);
            let r0 = el_residual(&w, &u, &Forcing::Zero, &[x]).unwrap();
            assert!((r0 - (12.0 * x - 12.0) / x).abs() < 1e-10);
        }
    }

    #[test]
    fn variation_matches_first_variation() {
        let w = a1();
        let u = SymplecticPotential::canonical(&seg(1, 2));
        let bump = Bump::new(vec![1.25], vec![1.75]);
        let spec = GradedQuadratureSpec::default();
        let r = variation_check(&w, &u, &Forcing::Zero, &bump, 1e-4, &spec).unwrap();
        assert!(r.relative_discrepancy < 1e-4, "{r:?}");
        let r2 = variation_check(&w, &u, &Forcing::Zero, &bump.scaled(2.0), 1e-4, &spec).unwrap();
        assert!((r2.finite_difference / r.finite_difference - 2.0).abs() < 1e-6 * 2.0);
        assert!(variation_check(&w, &u, &Forcing::Zero, &Bump::new(vec![0.5], vec![1.5]), 1e-4, &spec).is_err());
    }

    #[test]
    fn nonconvex_perturbation_is_rejected() {
        let p = seg(1, 2);
        let g = Polynomial::var(1, 0).pow(2).scale(&int(-10));
        assert!(matches!(
            SymplecticPotential::new(&p, true, g),
            Err(Error::InvalidPotential(_))
        ));
    }

    #[test]
    fn presets_parse() {
        assert_eq!("csc".parse::<Forcing>().unwrap().name(), "csc");
        assert!("half".parse::<Forcing>().is_err());
    }
}
