use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::RationalPolytope;
use crate::rational::{rat, vec_to_f64, Rational};

/// Boundary-graded tensor Gauss rule parameters.
///
/// Each simplex is pulled back to the unit cube by collapsed coordinates, so
/// all of its faces land on cube faces. Every cube axis is cut at
/// `½ rᵏ` and `1 − ½ rᵏ` for `k = 0..=depth` and every cell carries a
/// `nodes`-point Gauss–Legendre rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradedQuadratureSpec {
    pub depth: u32,
    #[serde(with = "crate::rational::serde_rational")]
    pub ratio: Rational,
    pub nodes: usize,
    pub tolerance: f64,
}

impl Default for GradedQuadratureSpec {
    fn default() -> Self {
        GradedQuadratureSpec {
            depth: 12,
            ratio: rat(1, 5),
            nodes: 12,
            tolerance: 1e-8,
        }
    }
}

impl GradedQuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.depth < 1 {
            return Err(Error::InvalidQuadrature("depth must be at least 1".into()));
        }
        let r = self.ratio.to_f64().unwrap_or(f64::NAN);
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidQuadrature("grading ratio must lie in (0, 1)".into()));
        }
        if self.nodes < 2 {
            return Err(Error::InvalidQuadrature("need at least 2 nodes per cell".into()));
        }
        Ok(())
    }

    fn breakpoints(&self, depth: u32) -> Vec<f64> {
        let r = self.ratio.to_f64().unwrap();
        let mut left: Vec<f64> = (0..=depth).map(|k| 0.5 * r.powi(k as i32)).collect();
        left.push(0.0);
        left.reverse();
        let mut all = left.clone();
        all.extend(left.iter().rev().skip(1).map(|x| 1.0 - x));
        all
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[m - 1 - i] = w[i];
    }
    (x, w)
}

/// Fixed-shape pairwise summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// Collapsed coordinates `[0,1]ⁿ → Δ_n` and their Jacobian.
fn collapse(s: &[f64]) -> (Vec<f64>, f64) {
    match s.split_first() {
        None => (Vec::new(), 1.0),
        Some((&s1, rest)) => {
            let (z, j) = collapse(rest);
            let n = s.len();
            let zsum: f64 = z.iter().sum();
            let mut y: Vec<f64> = z.iter().map(|zi| s1 * zi).collect();
            y.push(s1 * (1.0 - zsum));
            (y, s1.powi(n as i32 - 1) * j)
        }
    }
}

/// Relative step toward the centroid for nodes that round onto the boundary.
const NUDGE: f64 = 1e-9;

struct CellRule {
    points: Vec<f64>,
    weights: Vec<f64>,
}

fn axis_rule(breaks: &[f64], gx: &[f64], gw: &[f64]) -> Vec<CellRule> {
    breaks
        .windows(2)
        .map(|ab| {
            let (a, b) = (ab[0], ab[1]);
            let half = 0.5 * (b - a);
            CellRule {
                points: gx.iter().map(|t| a + half * (t + 1.0)).collect(),
                weights: gw.iter().map(|w| w * half).collect(),
            }
        })
        .collect()
}

fn simplex_sum<F>(integrand: &F, simplex: &[Vec<f64>], breaks: &[f64], nodes: usize) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = simplex.len() - 1;
    let v0 = &simplex[0];
    let a: Vec<Vec<f64>> = (0..n).map(|r| (1..=n).map(|c| simplex[c][r] - v0[r]).collect()).collect();
    let det = nalgebra::DMatrix::from_fn(n, n, |r, c| a[r][c]).determinant().abs();
    let centroid: Vec<f64> = (0..n)
        .map(|r| simplex.iter().map(|v| v[r]).sum::<f64>() / (n + 1) as f64)
        .collect();
    let (gx, gw) = gauss_legendre(nodes);
    let axis = axis_rule(breaks, &gx, &gw);
    let ncell = axis.len();
    let total_cells = ncell.pow(n as u32);
    let cells: Vec<Result<(f64, f64)>> = (0..total_cells)
        .into_par_iter()
        .map(|idx| {
            let mut cell = vec![0usize; n];
            let mut rem = idx;
            for c in cell.iter_mut().rev() {
                *c = rem % ncell;
                rem /= ncell;
            }
            let mut terms = Vec::with_capacity(nodes.pow(n as u32));
            let mut abs = 0.0;
            let mut node = vec![0usize; n];
            loop {
                let s: Vec<f64> = (0..n).map(|d| axis[cell[d]].points[node[d]]).collect();
                let w: f64 = (0..n).map(|d| axis[cell[d]].weights[node[d]]).product();
                let (y, jac) = collapse(&s);
                let x: Vec<f64> = (0..n)
                    .map(|r| v0[r] + (0..n).map(|c| a[r][c] * y[c]).sum::<f64>())
                    .collect();
                let mut val = integrand(&x);
                if !val.is_finite() {
                    // the node may have rounded onto the boundary; retry just inside
                    let nudged: Vec<f64> = x.iter().zip(&centroid).map(|(xi, ci)| xi + NUDGE * (ci - xi)).collect();
                    val = integrand(&nudged);
                    if !val.is_finite() {
                        return Err(Error::NonFinite(format!("{x:?}")));
                    }
                }
                let t = val * w * jac * det;
                abs += t.abs();
                terms.push(t);
                // odometer over the node multi-index
                let mut d = n;
                loop {
                    if d == 0 {
                        return Ok((pairwise_sum(&terms), abs));
                    }
                    d -= 1;
                    node[d] += 1;
                    if node[d] < nodes {
                        break;
                    }
                    node[d] = 0;
                }
            }
        })
        .collect();
    let mut sums = Vec::with_capacity(cells.len());
    let mut abs = Vec::with_capacity(cells.len());
    for c in cells {
        let (s, a) = c?;
        sums.push(s);
        abs.push(a);
    }
    Ok((pairwise_sum(&sums), pairwise_sum(&abs)))
}

/// Integrates `integrand` over a union of simplices (given by float
/// vertices). The error estimate is the difference between grading depths
/// `depth` and `depth − 1` plus a rounding bound.
pub fn graded_integral_simplices<F>(
    integrand: F,
    simplices: &[Vec<Vec<f64>>],
    spec: &GradedQuadratureSpec,
) -> Result<QuadratureResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    spec.validate()?;
    let fine = spec.breakpoints(spec.depth);
    let coarse = spec.breakpoints(spec.depth - 1);
    let mut fine_parts = Vec::new();
    let mut coarse_parts = Vec::new();
    let mut abs_parts = Vec::new();
    for s in simplices {
        let (v, a) = simplex_sum(&integrand, s, &fine, spec.nodes)?;
        let (c, _) = simplex_sum(&integrand, s, &coarse, spec.nodes)?;
        fine_parts.push(v);
        coarse_parts.push(c);
        abs_parts.push(a);
    }
    let value = pairwise_sum(&fine_parts);
    let coarse = pairwise_sum(&coarse_parts);
    let rounding = 64.0 * f64::EPSILON * pairwise_sum(&abs_parts);
    Ok(QuadratureResult {
        value,
        error_estimate: (value - coarse).abs() + rounding,
    })
}

/// `∫_P integrand dμ` with boundary grading on every simplex of the
/// triangulation of `P`.
pub fn graded_integral<F>(integrand: F, p: &RationalPolytope, spec: &GradedQuadratureSpec) -> Result<QuadratureResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let simplices: Vec<Vec<Vec<f64>>> = p
        .triangulate()
        .iter()
        .map(|s| s.iter().map(|v| vec_to_f64(v)).collect())
        .collect();
    graded_integral_simplices(integrand, &simplices, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn pts(v: &[&[i64]]) -> Vec<Vec<Rational>> {
        v.iter().map(|p| p.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn gauss_rules_are_exact_for_low_degree() {
        for m in [2, 5, 12] {
            let (x, w) = gauss_legendre(m);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            let deg = 2 * m - 1;
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = 2.0 / deg as f64;
            assert!((s - exact).abs() < 1e-13, "m = {m}");
        }
    }

    #[test]
    fn log_singularity_in_one_dimension() {
        let seg = RationalPolytope::from_vertices(&pts(&[&[1], &[2]])).unwrap();
        let r = graded_integral(|x| (x[0] - 1.0).ln(), &seg, &GradedQuadratureSpec::default()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-8, "{r:?}");
        assert!(r.error_estimate < 1e-6);
    }

    #[test]
    fn smooth_two_dimensional_integrand() {
        let sq = RationalPolytope::from_vertices(&pts(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]])).unwrap();
        let r = graded_integral(|x| x[0] * x[0] + x[1] * x[1], &sq, &GradedQuadratureSpec::default()).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn log_singularity_on_a_triangle_edge() {
        // ∫_{Δ2} log(x + y) = ∫_0^1 t log t dt = -1/4 (singular at one vertex only)
        // ∫_{Δ2} log(1 - x - y) = ∫_0^1 t log(1 - t) dt = -3/4
        let tri = RationalPolytope::from_vertices(&pts(&[&[0, 0], &[1, 0], &[0, 1]])).unwrap();
        let spec = GradedQuadratureSpec::default();
        let r = graded_integral(|x| (1.0 - x[0] - x[1]).ln(), &tri, &spec).unwrap();
        assert!((r.value + 0.75).abs() < 1e-8, "{r:?}");
        let r = graded_integral(|x| x[1].ln(), &tri, &spec).unwrap();
        // ∫_0^1 (1 - y) log y dy = -1 + 1/4
        assert!((r.value + 0.75).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn non_finite_values_are_errors() {
        let seg = RationalPolytope::from_vertices(&pts(&[&[0], &[1]])).unwrap();
        let r = graded_integral(|x| if x[0] > 0.5 { f64::NAN } else { 1.0 }, &seg, &GradedQuadratureSpec::default());
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn spec_validation() {
        let mut s = GradedQuadratureSpec::default();
        s.ratio = int(1);
        assert!(s.validate().is_err());
        let mut s = GradedQuadratureSpec::default();
        s.depth = 0;
        assert!(s.validate().is_err());
        let mut s = GradedQuadratureSpec::default();
        s.nodes = 1;
        assert!(s.validate().is_err());
    }
}
