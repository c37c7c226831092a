//! Rational polytopes with matching H- and V-representations.
//!
//! Facets are stored as `l_F(x) = v_F·x − c_F ≥ 0` with `v_F` the primitive
//! inward integer normal. The boundary measure `dσ` on a facet is the
//! Lebesgue measure for which a fundamental cell of the lattice
//! `ℤⁿ ∩ v_F^⊥` has volume one; [`FacetChart`] realizes it by a unimodular
//! change of coordinates that sends `l_F` to the last coordinate.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::pl::PiecewiseAffine;
use crate::rational::{denominator_lcm, dot_int, format_point, int, primitive_integer, Rational};

pub type Point = Vec<Rational>;

/// `normal·x ≥ offset`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Halfspace {
    #[serde(with = "crate::rational::serde_rational::vec")]
    pub normal: Vec<Rational>,
    #[serde(with = "crate::rational::serde_rational")]
    pub offset: Rational,
}

impl Halfspace {
    pub fn new(normal: Vec<Rational>, offset: Rational) -> Self {
        Halfspace { normal, offset }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Facet {
    pub normal: Vec<BigInt>,
    pub offset: Rational,
}

impl Facet {
    /// `l_F(x)`.
    pub fn eval(&self, x: &[Rational]) -> Rational {
        dot_int(&self.normal, x) - &self.offset
    }

    pub fn normal_f64(&self) -> Vec<f64> {
        self.normal.iter().map(|v| v.to_f64().unwrap()).collect()
    }

    fn as_halfspace(&self) -> Halfspace {
        Halfspace::new(
            self.normal.iter().map(|v| Rational::from_integer(v.clone())).collect(),
            self.offset.clone(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPolytope {
    dim: usize,
    facets: Vec<Facet>,
    vertices: Vec<Point>,
    incidence: Vec<Vec<usize>>,
}

/// Vertex order used to pick apexes in the pulling triangulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PullingOrder {
    Lexicographic,
    ReverseLexicographic,
}

fn primitive_halfspace(h: &Halfspace) -> Option<Facet> {
    let (normal, scale) = primitive_integer(&h.normal)?;
    Some(Facet {
        normal,
        offset: &h.offset * scale,
    })
}

fn enumerate_vertices(dim: usize, constraints: &[Facet]) -> BTreeSet<Point> {
    let mut out = BTreeSet::new();
    for combo in (0..constraints.len()).combinations(dim) {
        let m: Vec<Vec<Rational>> = combo
            .iter()
            .map(|&i| constraints[i].normal.iter().map(|v| Rational::from_integer(v.clone())).collect())
            .collect();
        let rhs: Vec<Rational> = combo.iter().map(|&i| constraints[i].offset.clone()).collect();
        let Some(x) = linalg::solve(&m, &rhs) else {
            continue;
        };
        if constraints.iter().all(|c| !c.eval(&x).is_negative()) {
            out.insert(x);
        }
    }
    out
}

fn hull_facets(dim: usize, points: &[Point]) -> Result<Vec<Facet>> {
    match linalg::affine_dimension(points) {
        None => return Err(Error::EmptyPolytope),
        Some(d) if d < dim => {
            return Err(Error::Degenerate(format!("points span dimension {d} < {dim}")));
        }
        _ => {}
    }
    let n = int(points.len() as i64);
    let centroid: Point = (0..dim)
        .map(|i| points.iter().map(|p| p[i].clone()).sum::<Rational>() / &n)
        .collect();
    let mut found = BTreeSet::new();
    for combo in (0..points.len()).combinations(dim) {
        let base = &points[combo[0]];
        let diffs: Vec<Vec<Rational>> = combo[1..]
            .iter()
            .map(|&i| points[i].iter().zip(base).map(|(a, b)| a - b).collect())
            .collect();
        let ns = linalg::nullspace(&diffs, dim);
        if ns.len() != 1 {
            continue;
        }
        let (mut normal, _) = primitive_integer(&ns[0]).expect("nonzero null vector");
        let mut offset = dot_int(&normal, base);
        if (dot_int(&normal, &centroid) - &offset).is_negative() {
            normal = normal.into_iter().map(|v| -v).collect();
            offset = -offset;
        }
        let f = Facet { normal, offset };
        if found.contains(&f) {
            continue;
        }
        if points.iter().all(|p| !f.eval(p).is_negative()) {
            found.insert(f);
        }
    }
    Ok(found.into_iter().collect())
}

impl RationalPolytope {
    fn assemble(dim: usize, facets: Vec<Facet>, vertices: Vec<Point>) -> Self {
        let incidence = facets
            .iter()
            .map(|f| (0..vertices.len()).filter(|&i| f.eval(&vertices[i]).is_zero()).collect())
            .collect();
        RationalPolytope {
            dim,
            facets,
            vertices,
            incidence,
        }
    }

    /// Convex hull of a full-dimensional point set.
    pub fn from_vertices(points: &[Point]) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).ok_or(Error::EmptyPolytope)?;
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        if dim == 0 {
            return Err(Error::Degenerate("dimension 0".into()));
        }
        let mut unique: Vec<Point> = points.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        unique.shrink_to_fit();
        let facets = hull_facets(dim, &unique)?;
        let vertices: Vec<Point> = enumerate_vertices(dim, &facets).into_iter().collect();
        debug_assert!(vertices.iter().all(|v| unique.binary_search(v).is_ok()));
        Ok(Self::assemble(dim, facets, vertices))
    }

    /// Intersection of halfspaces; must be bounded and full-dimensional.
    pub fn from_halfspaces(dim: usize, halfspaces: &[Halfspace]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Degenerate("dimension 0".into()));
        }
        let mut constraints = Vec::new();
        for h in halfspaces {
            if h.normal.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: h.normal.len(),
                });
            }
            match primitive_halfspace(h) {
                Some(f) => constraints.push(f),
                // 0 ≥ offset
                None if h.offset.is_positive() => return Err(Error::EmptyPolytope),
                None => {}
            }
        }
        let raw = enumerate_vertices(dim, &constraints);
        let bound = raw
            .iter()
            .flat_map(|p| p.iter().map(|x| x.abs()))
            .max()
            .unwrap_or_else(Rational::zero)
            + Rational::one();
        let mut boxed = constraints.clone();
        for i in 0..dim {
            for s in [1i64, -1] {
                let mut normal = vec![BigInt::zero(); dim];
                normal[i] = BigInt::from(s);
                boxed.push(Facet {
                    normal,
                    offset: -bound.clone(),
                });
            }
        }
        let boxed_vertices = enumerate_vertices(dim, &boxed);
        if boxed_vertices.is_empty() {
            return Err(Error::EmptyPolytope);
        }
        if boxed_vertices.iter().any(|p| p.iter().any(|x| x.abs() == bound)) {
            return Err(Error::Unbounded);
        }
        let vertices: Vec<Point> = raw.into_iter().collect();
        let facets = hull_facets(dim, &vertices)?;
        debug_assert!(facets.iter().all(|f| constraints.contains(f)));
        Ok(Self::assemble(dim, facets, vertices))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Vertices in lexicographic order.
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn facet_vertices(&self, facet: usize) -> Vec<Point> {
        self.incidence[facet].iter().map(|&i| self.vertices[i].clone()).collect()
    }

    pub fn halfspaces(&self) -> Vec<Halfspace> {
        self.facets.iter().map(Facet::as_halfspace).collect()
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.facets.iter().all(|f| !f.eval(x).is_negative())
    }

    pub fn contains_f64(&self, x: &[f64], strict: bool) -> bool {
        self.facets.iter().all(|f| {
            let v: f64 = f.normal_f64().iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
                - f.offset.to_f64().unwrap();
            if strict {
                v > 0.0
            } else {
                v >= 0.0
            }
        })
    }

    pub fn is_integral(&self) -> bool {
        self.vertices.iter().all(|v| v.iter().all(Rational::is_integer))
    }

    pub fn vertex_denominator_lcm(&self) -> BigInt {
        denominator_lcm(self.vertices.iter().flatten())
    }

    /// Every vertex has all coordinates strictly positive.
    pub fn is_in_positive_chamber(&self) -> bool {
        self.vertices.iter().all(|v| v.iter().all(Signed::is_positive))
    }

    /// Image under `x ↦ g x` for `g ∈ GL(n, ℤ)`.
    pub fn transform(&self, g: &[Vec<BigInt>]) -> Result<Self> {
        if g.len() != self.dim || g.iter().any(|r| r.len() != self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: g.len(),
            });
        }
        let d = linalg::det_int(g);
        if !d.abs().is_one() {
            return Err(Error::NotUnimodular(d.to_string()));
        }
        let gr = linalg::to_rational(g);
        let pts: Vec<Point> = self.vertices.iter().map(|v| linalg::mat_vec(&gr, v)).collect();
        Self::from_vertices(&pts)
    }

    /// Closure of `Q = {(x, t) : x ∈ P, 0 < t < R − f(x)}`.
    pub fn lift(&self, f: &PiecewiseAffine, r: &Rational) -> Result<Self> {
        if f.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: f.dim(),
            });
        }
        // f is convex, so its max over P sits at a vertex of P
        for v in &self.vertices {
            let value = f.eval(v);
            if value > r - Rational::one() {
                return Err(Error::LiftTooLow {
                    vertex: format_point(v),
                    value: value.to_string(),
                    r: r.to_string(),
                });
            }
        }
        let mut hs: Vec<Halfspace> = self
            .halfspaces()
            .into_iter()
            .map(|h| {
                let mut normal = h.normal;
                normal.push(Rational::zero());
                Halfspace::new(normal, h.offset)
            })
            .collect();
        let mut t = vec![Rational::zero(); self.dim];
        t.push(Rational::one());
        hs.push(Halfspace::new(t, Rational::zero()));
        for piece in f.pieces() {
            let mut normal: Vec<Rational> = piece.gradient.iter().map(|a| -a).collect();
            normal.push(-Rational::one());
            hs.push(Halfspace::new(normal, &piece.constant - r));
        }
        Self::from_halfspaces(self.dim + 1, &hs)
    }

    /// Integer points of `kP`, lexicographically ordered.
    pub fn scaled_lattice_points(&self, k: u64) -> Vec<Vec<i64>> {
        self.lattice_fold(k, Vec::new, |mut acc, p| {
            acc.push(p.to_vec());
            acc
        })
        .into_iter()
        .flatten()
        .collect()
    }

    /// Points of `P ∩ (1/k)ℤⁿ`, lexicographically ordered.
    pub fn lattice_points(&self, k: u64) -> Vec<Point> {
        let kk = int(k as i64);
        self.scaled_lattice_points(k)
            .into_iter()
            .map(|p| p.into_iter().map(|x| int(x) / &kk).collect())
            .collect()
    }

    pub fn count_lattice_points(&self, k: u64) -> u64 {
        self.lattice_fold(k, || 0u64, |acc, _| acc + 1).into_iter().sum()
    }

    /// Folds over the integer points of `kP` slab by slab along the first
    /// coordinate. Slabs run in parallel; the returned accumulators are in
    /// increasing slab order, so any reduction over them is deterministic.
    pub fn lattice_fold<A, I, F>(&self, k: u64, init: I, fold: F) -> Vec<A>
    where
        A: Send,
        I: Fn() -> A + Sync,
        F: Fn(A, &[i64]) -> A + Sync,
    {
        let scan = ScaledScan::new(self, k);
        let (lo, hi) = scan.bounds[0];
        (lo..=hi)
            .into_par_iter()
            .map(|x0| {
                let mut acc = Some(init());
                let mut prefix = vec![x0];
                scan.walk(&mut prefix, &mut |p| {
                    let a = acc.take().unwrap();
                    acc = Some(fold(a, p));
                });
                acc.unwrap()
            })
            .collect()
    }

    /// `#(F̄ ∩ (1/k)ℤⁿ)` for the facet with index `facet`. The unimodular
    /// facet chart maps the integer points of `kF` onto those of `k` times
    /// the chart image, provided `k` times the facet offset is an integer;
    /// otherwise `kF` misses the lattice.
    pub fn facet_lattice_count(&self, facet: usize, k: u64) -> u64 {
        let offset = &self.facets[facet].offset * int(k as i64);
        if !offset.is_integer() {
            return 0;
        }
        match self.facet_chart(facet).image {
            None => 1,
            Some(image) => image.count_lattice_points(k),
        }
    }

    pub fn facet_chart(&self, facet: usize) -> FacetChart {
        FacetChart::new(self, facet)
    }

    /// Pulling triangulation: recursively cone from the first vertex of each
    /// face (in the given order) over the facets of that face not containing it.
    pub fn triangulate_with(&self, order: PullingOrder) -> Vec<Vec<Point>> {
        let all: Vec<usize> = (0..self.vertices.len()).collect();
        let mut out = Vec::new();
        for simplex in self.triangulate_face(&all, self.dim, order) {
            out.push(simplex.into_iter().map(|i| self.vertices[i].clone()).collect());
        }
        out
    }

    pub fn triangulate(&self) -> Vec<Vec<Point>> {
        self.triangulate_with(PullingOrder::Lexicographic)
    }

    fn triangulate_face(&self, face: &[usize], d: usize, order: PullingOrder) -> Vec<Vec<usize>> {
        let apex = match order {
            PullingOrder::Lexicographic => *face.iter().min().unwrap(),
            PullingOrder::ReverseLexicographic => *face.iter().max().unwrap(),
        };
        if d == 0 {
            return vec![vec![apex]];
        }
        let mut subfaces = BTreeSet::new();
        for inc in &self.incidence {
            let sub: Vec<usize> = face.iter().copied().filter(|i| inc.contains(i)).collect();
            if sub.len() < d || sub.contains(&apex) {
                continue;
            }
            let pts: Vec<Point> = sub.iter().map(|&i| self.vertices[i].clone()).collect();
            if linalg::affine_dimension(&pts) == Some(d - 1) {
                subfaces.insert(sub);
            }
        }
        let mut out = Vec::new();
        for sub in subfaces {
            for mut s in self.triangulate_face(&sub, d - 1, order) {
                s.insert(0, apex);
                out.push(s);
            }
        }
        out
    }

    pub fn volume(&self) -> Rational {
        self.triangulate().iter().map(|s| simplex_volume(s)).sum()
    }
}

/// Euclidean volume of a simplex given by `n + 1` vertices.
pub fn simplex_volume(s: &[Point]) -> Rational {
    let n = s.len() - 1;
    let m: Vec<Vec<Rational>> = s[1..]
        .iter()
        .map(|v| v.iter().zip(&s[0]).map(|(a, b)| a - b).collect())
        .collect();
    let fact: BigInt = (1..=n as u64).map(BigInt::from).product();
    linalg::det(&m).abs() / Rational::from_integer(fact)
}

struct ScaledScan {
    // den·(normal·λ) ≥ k·num
    rows: Vec<(Vec<i128>, i128, i128)>,
    bounds: Vec<(i64, i64)>,
    k: i128,
}

impl ScaledScan {
    fn new(p: &RationalPolytope, k: u64) -> Self {
        let kk = int(k as i64);
        let rows = p
            .facets
            .iter()
            .map(|f| {
                (
                    f.normal.iter().map(|v| v.to_i128().unwrap()).collect(),
                    f.offset.numer().to_i128().unwrap(),
                    f.offset.denom().to_i128().unwrap(),
                )
            })
            .collect();
        let bounds = (0..p.dim)
            .map(|i| {
                let lo = p.vertices.iter().map(|v| &v[i] * &kk).min().unwrap().ceil().to_integer();
                let hi = p.vertices.iter().map(|v| &v[i] * &kk).max().unwrap().floor().to_integer();
                (lo.to_i64().unwrap(), hi.to_i64().unwrap())
            })
            .collect();
        ScaledScan {
            rows,
            bounds,
            k: k as i128,
        }
    }

    fn walk(&self, prefix: &mut Vec<i64>, emit: &mut dyn FnMut(&[i64])) {
        let n = self.bounds.len();
        let i = prefix.len();
        if i == n {
            if self.rows.iter().all(|(a, num, den)| {
                let s: i128 = a.iter().zip(prefix.iter()).map(|(x, &y)| x * y as i128).sum();
                den * s >= self.k * num
            }) {
                emit(prefix);
            }
            return;
        }
        if i + 1 < n {
            let (lo, hi) = self.bounds[i];
            for x in lo..=hi {
                prefix.push(x);
                self.walk(prefix, emit);
                prefix.pop();
            }
            return;
        }
        // last coordinate: intersect the intervals cut out by every facet
        let (mut lo, mut hi) = (self.bounds[i].0 as i128, self.bounds[i].1 as i128);
        for (a, num, den) in &self.rows {
            let s: i128 = a[..i].iter().zip(prefix.iter()).map(|(x, &y)| x * y as i128).sum();
            // den·(s + c·t) ≥ k·num
            let rhs = self.k * num - den * s;
            let c = den * a[i];
            if c == 0 {
                if rhs > 0 {
                    return;
                }
            } else if c > 0 {
                lo = lo.max(Integer::div_ceil(&rhs, &c));
            } else {
                hi = hi.min(Integer::div_floor(&rhs, &c));
            }
        }
        for t in lo..=hi {
            prefix.push(t as i64);
            emit(prefix);
            prefix.pop();
        }
    }
}

/// Unimodular affine chart `y = G x + t` sending facet `F` into
/// `{y_n = 0}` with `y_n = l_F(x)`; the first `n − 1` coordinates carry `dσ_F`
/// to Lebesgue measure.
#[derive(Clone, Debug)]
pub struct FacetChart {
    pub facet: usize,
    pub matrix: Vec<Vec<BigInt>>,
    pub inverse: Vec<Vec<BigInt>>,
    pub translation: Vec<Rational>,
    /// Chart image in dimension `n − 1`; `None` when `n = 1`, where the
    /// facet is a single point of unit mass.
    pub image: Option<RationalPolytope>,
    pub facet_vertices: Vec<Point>,
}

impl FacetChart {
    fn new(p: &RationalPolytope, facet: usize) -> Self {
        let f = &p.facets[facet];
        let n = p.dim;
        let matrix = linalg::complete_to_unimodular(&f.normal).expect("facet normals are primitive");
        let inverse = linalg::inverse_unimodular(&matrix).expect("unimodular");
        let mut translation = vec![Rational::zero(); n];
        translation[n - 1] = -f.offset.clone();
        let facet_vertices = p.facet_vertices(facet);
        let gr = linalg::to_rational(&matrix);
        let image = (n > 1).then(|| {
            let pts: Vec<Point> = facet_vertices
                .iter()
                .map(|v| {
                    let mut y = linalg::mat_vec(&gr, v);
                    debug_assert!(y[n - 1] == f.offset);
                    y.pop();
                    y
                })
                .collect();
            RationalPolytope::from_vertices(&pts).expect("facet is (n-1)-dimensional")
        });
        FacetChart {
            facet,
            matrix,
            inverse,
            translation,
            image,
            facet_vertices,
        }
    }

    pub fn to_chart(&self, x: &[Rational]) -> Vec<Rational> {
        let mut y = linalg::mat_vec(&linalg::to_rational(&self.matrix), x);
        for (yi, ti) in y.iter_mut().zip(&self.translation) {
            *yi += ti;
        }
        y.pop();
        y
    }

    /// The affine embedding `z ↦ x` of chart coordinates back onto the facet,
    /// as `(M, t)` with `x = M z + t` and `M` of shape `n × (n − 1)`.
    pub fn embedding(&self) -> (Vec<Vec<Rational>>, Vec<Rational>) {
        let inv = linalg::to_rational(&self.inverse);
        let n = inv.len();
        let m: Vec<Vec<Rational>> = inv.iter().map(|r| r[..n - 1].to_vec()).collect();
        let t: Vec<Rational> = linalg::mat_vec(&inv, &self.translation).into_iter().map(|x| -x).collect();
        (m, t)
    }

    pub fn from_chart(&self, z: &[Rational]) -> Vec<Rational> {
        let (m, t) = self.embedding();
        linalg::mat_vec(&m, z).into_iter().zip(t).map(|(a, b)| a + b).collect()
    }

    /// `∫_F dσ`.
    pub fn measure(&self) -> Rational {
        self.image.as_ref().map_or_else(Rational::one, |img| img.volume())
    }

    pub fn linear_determinant(&self) -> BigInt {
        linalg::det_int(&self.matrix)
    }
}

/// On-disk polytope: `{"vertices":[["1"],["2"]]}` or
/// `{"halfspaces":[{"normal":["1"],"offset":"1"}]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum PolytopeSpec {
    Vertices {
        #[serde(deserialize_with = "deserialize_points", serialize_with = "serialize_points")]
        vertices: Vec<Point>,
    },
    Halfspaces { halfspaces: Vec<Halfspace> },
}

fn deserialize_points<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<Point>, D::Error> {
    use serde::de::Error as _;
    let raw = Vec::<Vec<crate::rational::serde_rational::RationalRepr>>::deserialize(d)?;
    raw.into_iter()
        .map(|p| {
            p.into_iter()
                .map(|r| r.into_rational().map_err(D::Error::custom))
                .collect()
        })
        .collect()
}

fn serialize_points<S: serde::Serializer>(pts: &[Point], s: S) -> std::result::Result<S::Ok, S::Error> {
    let as_str: Vec<Vec<String>> = pts.iter().map(|p| p.iter().map(|x| x.to_string()).collect()).collect();
    as_str.serialize(s)
}

impl PolytopeSpec {
    pub fn build(&self) -> Result<RationalPolytope> {
        match self {
            PolytopeSpec::Vertices { vertices } => RationalPolytope::from_vertices(vertices),
            PolytopeSpec::Halfspaces { halfspaces } => {
                let dim = halfspaces.first().map_or(0, |h| h.normal.len());
                RationalPolytope::from_halfspaces(dim, halfspaces)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pl::AffinePiece;
    use crate::rational::rat;

    pub(crate) fn pts(v: &[&[i64]]) -> Vec<Point> {
        v.iter().map(|p| p.iter().map(|&x| int(x)).collect()).collect()
    }

    fn facet_set(p: &RationalPolytope) -> BTreeSet<(Vec<i64>, Rational)> {
        p.facets()
            .iter()
            .map(|f| (f.normal.iter().map(|x| x.to_i64().unwrap()).collect(), f.offset.clone()))
            .collect()
    }

    fn segment() -> RationalPolytope {
        RationalPolytope::from_vertices(&pts(&[&[1], &[2]])).unwrap()
    }

    fn square() -> RationalPolytope {
        RationalPolytope::from_vertices(&pts(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]])).unwrap()
    }

    fn slanted() -> RationalPolytope {
        RationalPolytope::from_vertices(&pts(&[&[0, 0], &[2, 0], &[0, 3]])).unwrap()
    }

    #[test]
    fn hull_examples() {
        assert_eq!(
            facet_set(&segment()),
            [(vec![1], int(1)), (vec![-1], int(-2))].into_iter().collect()
        );
        assert_eq!(square().facets().len(), 4);
        assert_eq!(
            facet_set(&slanted()),
            [(vec![1, 0], int(0)), (vec![0, 1], int(0)), (vec![-3, -2], int(-6))]
                .into_iter()
                .collect()
        );
    }

    #[test]
    fn hull_drops_interior_points() {
        let p = RationalPolytope::from_vertices(&pts(&[&[0, 0], &[2, 0], &[0, 2], &[2, 2], &[1, 1], &[1, 0]])).unwrap();
        assert_eq!(p.vertices().len(), 4);
    }

    #[test]
    fn degenerate_and_unbounded_inputs() {
        assert!(matches!(
            RationalPolytope::from_vertices(&pts(&[&[0, 0], &[1, 1], &[2, 2]])),
            Err(Error::Degenerate(_))
        ));
        let quadrant = vec![
            Halfspace::new(vec![int(1), int(0)], int(0)),
            Halfspace::new(vec![int(0), int(1)], int(0)),
            Halfspace::new(vec![int(1), int(1)], int(1)),
            Halfspace::new(vec![int(-1), int(1)], int(-5)),
        ];
        assert_eq!(RationalPolytope::from_halfspaces(2, &quadrant), Err(Error::Unbounded));
        let empty = vec![
            Halfspace::new(vec![int(1)], int(2)),
            Halfspace::new(vec![int(-1)], int(-1)),
        ];
        assert_eq!(RationalPolytope::from_halfspaces(1, &empty), Err(Error::EmptyPolytope));
        let slab = vec![Halfspace::new(vec![int(1), int(0)], int(0)), Halfspace::new(vec![int(-1), int(0)], int(-1))];
        assert_eq!(RationalPolytope::from_halfspaces(2, &slab), Err(Error::Unbounded));
    }

    #[test]
    fn halfspace_round_trip_with_redundancy() {
        let mut hs = slanted().halfspaces();
        hs.push(Halfspace::new(vec![int(-1), int(0)], int(-5)));
        hs.push(Halfspace::new(vec![rat(1, 2), int(0)], int(0)));
        let p = RationalPolytope::from_halfspaces(2, &hs).unwrap();
        assert_eq!(p.vertices(), slanted().vertices());
        assert_eq!(facet_set(&p), facet_set(&slanted()));
    }

    #[test]
    fn lattice_point_examples() {
        let seg = segment();
        assert_eq!(
            seg.lattice_points(4),
            vec![vec![int(1)], vec![rat(5, 4)], vec![rat(3, 2)], vec![rat(7, 4)], vec![int(2)]]
        );
        assert_eq!(square().lattice_points(1).len(), 4);
        assert_eq!(slanted().count_lattice_points(1), 7);
        let pts = slanted().scaled_lattice_points(3);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn facet_counts() {
        let seg = segment();
        for k in 1..5 {
            assert_eq!(seg.facet_lattice_count(0, k), 1);
            assert_eq!(seg.facet_lattice_count(1, k), 1);
        }
        let sq = square();
        for f in 0..4 {
            for k in [1, 3, 7] {
                assert_eq!(sq.facet_lattice_count(f, k), k + 1);
            }
        }
        let s = slanted();
        let slant = s.facets().iter().position(|f| f.normal[0] == BigInt::from(-3)).unwrap();
        assert_eq!(s.facet_lattice_count(slant, 1), 2);
        assert_eq!(s.facet_lattice_count(slant, 5), 6);
    }

    #[test]
    fn charts_and_sigma() {
        let sq = square();
        for f in 0..4 {
            let chart = sq.facet_chart(f);
            assert!(chart.linear_determinant().abs().is_one());
            assert_eq!(chart.measure(), int(1));
            for v in &chart.facet_vertices {
                assert_eq!(chart.from_chart(&chart.to_chart(v)), *v);
            }
        }
        let s = slanted();
        let slant = s.facets().iter().position(|f| f.normal[0] == BigInt::from(-3)).unwrap();
        assert_eq!(s.facet_chart(slant).measure(), int(1));
        assert_eq!(segment().facet_chart(0).measure(), int(1));
    }

    #[test]
    fn lift_examples() {
        let seg = segment();
        let zero = PiecewiseAffine::constant(1, int(0));
        assert_eq!(seg.lift(&zero, &int(1)).unwrap().vertices(), &pts(&[&[1, 0], &[1, 1], &[2, 0], &[2, 1]])[..]);
        let x = PiecewiseAffine::affine(vec![int(1)], int(0));
        assert_eq!(seg.lift(&x, &int(3)).unwrap().vertices(), &pts(&[&[1, 0], &[1, 2], &[2, 0], &[2, 1]])[..]);
        let kink = PiecewiseAffine::new(
            1,
            vec![AffinePiece::new(vec![int(0)], int(0)), AffinePiece::new(vec![int(2)], int(-3))],
        )
        .unwrap();
        let q = seg.lift(&kink, &int(2)).unwrap();
        let mut expected = pts(&[&[1, 0], &[1, 2], &[2, 0], &[2, 1]]);
        expected.push(vec![rat(3, 2), int(2)]);
        expected.sort();
        assert_eq!(q.vertices(), &expected[..]);
        assert_eq!(q.volume(), rat(7, 4));
        assert_eq!(q.triangulate().len(), 3);
        assert!(matches!(seg.lift(&x, &int(2)), Err(Error::LiftTooLow { .. })));
    }

    #[test]
    fn triangulations() {
        let s = slanted();
        assert_eq!(s.triangulate().len(), 1);
        let sq = square();
        let t = sq.triangulate();
        assert_eq!(t.len(), 2);
        assert!(t.iter().all(|s| simplex_volume(s) == rat(1, 2)));
        let cube = RationalPolytope::from_vertices(&pts(&[
            &[0, 0, 0],
            &[1, 0, 0],
            &[0, 1, 0],
            &[0, 0, 1],
            &[1, 1, 0],
            &[1, 0, 1],
            &[0, 1, 1],
            &[1, 1, 1],
        ]))
        .unwrap();
        assert_eq!(cube.volume(), int(1));
        assert_eq!(
            cube.triangulate_with(PullingOrder::ReverseLexicographic)
                .iter()
                .map(|s| simplex_volume(s))
                .sum::<Rational>(),
            int(1)
        );
    }

    #[test]
    fn transforms() {
        let seg = segment();
        let id = vec![vec![BigInt::one()]];
        assert_eq!(seg.transform(&id).unwrap(), seg);
        assert!(seg.is_in_positive_chamber());
        assert!(!RationalPolytope::from_vertices(&pts(&[&[0], &[1]])).unwrap().is_in_positive_chamber());
        let shear: Vec<Vec<BigInt>> = vec![vec![1.into(), 1.into()], vec![0.into(), 1.into()]];
        let sq = square();
        let par = sq.transform(&shear).unwrap();
        for k in 1..=8 {
            assert_eq!(par.count_lattice_points(k), sq.count_lattice_points(k));
        }
        let bad: Vec<Vec<BigInt>> = vec![vec![2.into(), 0.into()], vec![0.into(), 1.into()]];
        assert!(matches!(sq.transform(&bad), Err(Error::NotUnimodular(_))));
    }
}
