//! Root-system input: positive coroots expanded in simple coroots, the Weyl
//! dimension polynomial `q`, its homogeneous parts and the weight `p = q_N`.
//!
//! A positive coroot `α^∨ = Σ_j M^α_j α_j^∨` is stored as its coefficient
//! vector `M^α`. Every formula downstream only needs these vectors:
//!
//! * `q(λ) = Π_α (|M^α| + M^α·λ)` with `|M^α| = Σ_j M^α_j`,
//! * `dim V_λ = q(λ) / Π_α |M^α|` (Weyl dimension formula),
//! * `p(x) = Π_α M^α·x`, the top homogeneous part of `q`,
//! * `f_G = 2 Σ_l ∂_l log p`.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::Polynomial;
use crate::rational::{int, rat, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Series {
    A,
    B,
    C,
    D,
    G2,
    F4,
}

impl FromStr for Series {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Series::A),
            "B" => Ok(Series::B),
            "C" => Ok(Series::C),
            "D" => Ok(Series::D),
            "G" | "G2" => Ok(Series::G2),
            "F" | "F4" => Ok(Series::F4),
            other => Err(Error::UnsupportedSeries {
                series: other.to_string(),
                rank: 0,
            }),
        }
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Series::A => "A",
            Series::B => "B",
            Series::C => "C",
            Series::D => "D",
            Series::G2 => "G2",
            Series::F4 => "F4",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSystem {
    rank: usize,
    positive_roots: Vec<Vec<u32>>,
    denom: BigInt,
}

/// `q = q_N + q_{N-1} + r` with `q_k` homogeneous of degree `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneousParts {
    pub top: Polynomial,
    pub next: Polynomial,
    pub rest: Polynomial,
}

/// Splits `q` into its degree-`n` part, its degree-`n - 1` part and the rest.
pub fn homogeneous_parts(q: &Polynomial, n: u32) -> HomogeneousParts {
    let top = q.homogeneous_part(n);
    let next = if n == 0 {
        Polynomial::zero(q.nvars())
    } else {
        q.homogeneous_part(n - 1)
    };
    let rest = &(q - &top) - &next;
    HomogeneousParts { top, next, rest }
}

fn simple_roots_euclidean(series: Series, rank: usize) -> Result<Vec<Vec<Rational>>> {
    let bad = || Error::UnsupportedSeries {
        series: series.to_string(),
        rank,
    };
    let unit = |dim: usize, i: usize| -> Vec<Rational> {
        let mut v = vec![Rational::zero(); dim];
        v[i] = Rational::one();
        v
    };
    let diff = |dim: usize, i: usize, j: usize| -> Vec<Rational> {
        let mut v = unit(dim, i);
        v[j] = int(-1);
        v
    };
    let roots = match series {
        Series::A => {
            if rank < 1 {
                return Err(bad());
            }
            (0..rank).map(|i| diff(rank + 1, i, i + 1)).collect()
        }
        Series::B | Series::C => {
            if rank < 2 {
                return Err(bad());
            }
            let mut r: Vec<Vec<Rational>> = (0..rank - 1).map(|i| diff(rank, i, i + 1)).collect();
            let mut last = unit(rank, rank - 1);
            if series == Series::C {
                last[rank - 1] = int(2);
            }
            r.push(last);
            r
        }
        Series::D => {
            if rank < 3 {
                return Err(bad());
            }
            let mut r: Vec<Vec<Rational>> = (0..rank - 1).map(|i| diff(rank, i, i + 1)).collect();
            let mut last = unit(rank, rank - 1);
            last[rank - 2] = int(1);
            r.push(last);
            r
        }
        Series::G2 => {
            if rank != 2 {
                return Err(bad());
            }
            vec![diff(3, 0, 1), vec![int(-2), int(1), int(1)]]
        }
        Series::F4 => {
            if rank != 4 {
                return Err(bad());
            }
            let h = rat(1, 2);
            vec![
                diff(4, 1, 2),
                diff(4, 2, 3),
                unit(4, 3),
                vec![h.clone(), -h.clone(), -h.clone(), -h],
            ]
        }
    };
    Ok(roots)
}

fn inner(a: &[Rational], b: &[Rational]) -> Rational {
    crate::rational::dot(a, b)
}

/// Coefficients of `v` in the basis `basis`, through the Gram system.
fn coordinates(basis: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    let gram: Vec<Vec<Rational>> = basis
        .iter()
        .map(|a| basis.iter().map(|b| inner(a, b)).collect())
        .collect();
    let rhs: Vec<Rational> = basis.iter().map(|a| inner(a, v)).collect();
    linalg::solve(&gram, &rhs).expect("simple roots are linearly independent")
}

fn coroot(a: &[Rational]) -> Vec<Rational> {
    let s = int(2) / inner(a, a);
    a.iter().map(|x| x * &s).collect()
}

fn sort_roots(roots: &mut [Vec<u32>]) {
    roots.sort_by(|a, b| {
        let ha: u32 = a.iter().sum();
        let hb: u32 = b.iter().sum();
        ha.cmp(&hb).then_with(|| b.cmp(a))
    });
}

impl RootSystem {
    /// Builds a classical root system from its Euclidean realization: the
    /// full root set is the closure of the simple roots under simple
    /// reflections, and each positive coroot is expanded in simple coroots.
    pub fn classical(series: Series, rank: usize) -> Result<Self> {
        let simple = simple_roots_euclidean(series, rank)?;
        let mut seen: HashSet<Vec<Rational>> = simple.iter().cloned().collect();
        let mut queue: VecDeque<Vec<Rational>> = simple.iter().cloned().collect();
        while let Some(beta) = queue.pop_front() {
            for a in &simple {
                let c = int(2) * inner(&beta, a) / inner(a, a);
                let image: Vec<Rational> = beta.iter().zip(a).map(|(b, x)| b - &c * x).collect();
                if seen.insert(image.clone()) {
                    queue.push_back(image);
                }
            }
        }
        let simple_coroots: Vec<Vec<Rational>> = simple.iter().map(|a| coroot(a)).collect();
        let mut positive = Vec::new();
        for beta in &seen {
            let c = coordinates(&simple, beta);
            if c.iter().all(|x| !x.is_negative()) {
                let m = coordinates(&simple_coroots, &coroot(beta));
                let m: Vec<u32> = m
                    .iter()
                    .map(|x| {
                        debug_assert!(x.is_integer() && !x.is_negative());
                        u32::try_from(x.to_integer()).expect("coroot coefficient fits")
                    })
                    .collect();
                positive.push(m);
            }
        }
        Ok(Self::from_vectors(rank, positive))
    }

    /// Cartan matrix `a_ij = ⟨α_i^∨, α_j⟩` of a classical series.
    pub fn cartan_matrix(series: Series, rank: usize) -> Result<Vec<Vec<i64>>> {
        let simple = simple_roots_euclidean(series, rank)?;
        Ok(simple
            .iter()
            .map(|ai| {
                simple
                    .iter()
                    .map(|aj| {
                        let v = int(2) * inner(ai, aj) / inner(ai, ai);
                        i64::try_from(v.to_integer()).unwrap()
                    })
                    .collect()
            })
            .collect())
    }

    /// Builds the positive coroots of the finite-type root system with Cartan
    /// matrix `a_ij = ⟨α_i^∨, α_j⟩` by root-string closure on the dual system.
    pub fn from_cartan(cartan: &[Vec<i64>]) -> Result<Self> {
        let n = cartan.len();
        if n == 0 {
            return Err(Error::InvalidCartan("empty matrix".into()));
        }
        for (i, row) in cartan.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidCartan(format!("row {i} has length {}", row.len())));
            }
            for (j, &a) in row.iter().enumerate() {
                if i == j && a != 2 {
                    return Err(Error::InvalidCartan(format!("diagonal entry ({i},{i}) is {a}, not 2")));
                }
                if i != j && a > 0 {
                    return Err(Error::InvalidCartan(format!("off-diagonal entry ({i},{j}) is positive")));
                }
                if i != j && (a == 0) != (cartan[j][i] == 0) {
                    return Err(Error::InvalidCartan(format!("entries ({i},{j}) and ({j},{i}) must vanish together")));
                }
            }
        }
        check_finite_type(cartan)?;

        // pairing of the coroot with coefficient vector m against the simple root α_j
        let pairing = |m: &[u32], j: usize| -> i64 { (0..n).map(|i| m[i] as i64 * cartan[i][j]).sum() };
        let simple: Vec<Vec<u32>> = (0..n)
            .map(|i| {
                let mut e = vec![0; n];
                e[i] = 1;
                e
            })
            .collect();
        let mut all: BTreeSet<Vec<u32>> = simple.iter().cloned().collect();
        let mut layer = simple;
        // E8 has 120 positive roots; finite type guarantees termination well below this.
        let bound = 4 * n * n + 128;
        while !layer.is_empty() {
            let mut next = BTreeSet::new();
            for m in &layer {
                for j in 0..n {
                    let mut r = 0i64;
                    let mut down = m.clone();
                    while down[j] > 0 {
                        down[j] -= 1;
                        if all.contains(&down) {
                            r += 1;
                        } else {
                            break;
                        }
                    }
                    let q = r - pairing(m, j);
                    if q > 0 {
                        let mut up = m.clone();
                        up[j] += 1;
                        if !all.contains(&up) {
                            next.insert(up);
                        }
                    }
                }
            }
            all.extend(next.iter().cloned());
            if all.len() > bound {
                return Err(Error::NotFiniteType("root-string closure did not terminate".into()));
            }
            layer = next.into_iter().collect();
        }
        Ok(Self::from_vectors(n, all.into_iter().collect()))
    }

    fn from_vectors(rank: usize, mut positive_roots: Vec<Vec<u32>>) -> Self {
        sort_roots(&mut positive_roots);
        let denom = positive_roots
            .iter()
            .map(|m| BigInt::from(m.iter().sum::<u32>()))
            .product();
        RootSystem {
            rank,
            positive_roots,
            denom,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Number `N` of positive roots.
    pub fn num_positive_roots(&self) -> usize {
        self.positive_roots.len()
    }

    pub fn positive_roots(&self) -> &[Vec<u32>] {
        &self.positive_roots
    }

    /// `Π_α |M^α|`.
    pub fn denom(&self) -> &BigInt {
        &self.denom
    }

    pub fn weyl_polynomial(&self) -> Polynomial {
        self.weight().q()
    }

    pub fn homogeneous_parts(&self) -> HomogeneousParts {
        homogeneous_parts(&self.weyl_polynomial(), self.num_positive_roots() as u32)
    }

    /// The Duistermaat–Heckman weight `p = Π_α M^α·x`.
    pub fn dh_weight(&self) -> Polynomial {
        self.weight().top()
    }

    /// `f_G = numerator / denominator = 2 Σ_l ∂_l p / p`.
    pub fn f_g_fraction(&self) -> (Polynomial, Polynomial) {
        let p = self.dh_weight();
        (sum_of_partials(&p).scale(&int(2)), p)
    }

    /// Weyl dimension of the irreducible representation with highest weight
    /// `Σ λ_j ν^j`.
    pub fn dimension(&self, lambda: &[i64]) -> Result<Rational> {
        if lambda.len() != self.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                found: lambda.len(),
            });
        }
        if lambda.iter().any(|&l| l < 0) {
            return Err(Error::NotDominant(format!("{lambda:?}")));
        }
        Ok(self.weight().eval_int(lambda) / Rational::from_integer(self.denom.clone()))
    }

    pub fn weight(&self) -> DimensionWeight {
        DimensionWeight {
            factors: self
                .positive_roots
                .iter()
                .map(|m| LinearFactor {
                    coeffs: m.iter().map(|&x| int(x as i64)).collect(),
                    constant: int(m.iter().sum::<u32>() as i64),
                })
                .collect(),
            nvars: self.rank,
        }
    }
}

pub(crate) fn sum_of_partials(p: &Polynomial) -> Polynomial {
    (0..p.nvars()).fold(Polynomial::zero(p.nvars()), |acc, l| &acc + &p.partial(l))
}

/// Positive definiteness of a symmetrization `D·A`, via leading minors.
fn check_finite_type(cartan: &[Vec<i64>]) -> Result<()> {
    let n = cartan.len();
    let mut d: Vec<Option<Rational>> = vec![None; n];
    for start in 0..n {
        if d[start].is_some() {
            continue;
        }
        d[start] = Some(Rational::one());
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let di = d[i].clone().unwrap();
            for j in 0..n {
                if i == j || cartan[i][j] == 0 {
                    continue;
                }
                let dj = &di * rat(cartan[i][j], cartan[j][i]);
                match &d[j] {
                    None => {
                        d[j] = Some(dj);
                        queue.push_back(j);
                    }
                    Some(existing) if *existing != dj => {
                        return Err(Error::InvalidCartan("matrix is not symmetrizable".into()));
                    }
                    Some(_) => {}
                }
            }
        }
    }
    let sym: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| d[i].clone().unwrap() * int(cartan[i][j])).collect())
        .collect();
    for k in 1..=n {
        let minor: Vec<Vec<Rational>> = sym[..k].iter().map(|r| r[..k].to_vec()).collect();
        if !linalg::det(&minor).is_positive() {
            return Err(Error::NotFiniteType(format!("leading minor of order {k} is not positive")));
        }
    }
    Ok(())
}

/// `c + a·x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearFactor {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
}

/// The representation-dimension weight `q(λ) = Π (c_α + a_α·λ)` in product
/// form. For a root system the `a_α` are the coroot vectors `M^α` and
/// `c_α = |M^α|`; a change of lattice basis acts on the `a_α` only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionWeight {
    factors: Vec<LinearFactor>,
    nvars: usize,
}

impl DimensionWeight {
    pub fn new(nvars: usize, factors: Vec<LinearFactor>) -> Result<Self> {
        for f in &factors {
            if f.coeffs.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    found: f.coeffs.len(),
                });
            }
        }
        Ok(DimensionWeight { factors, nvars })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Degree `N` (number of factors).
    pub fn degree(&self) -> u32 {
        self.factors.len() as u32
    }

    pub fn factors(&self) -> &[LinearFactor] {
        &self.factors
    }

    /// `Π c_α`.
    pub fn denom(&self) -> Rational {
        self.factors.iter().map(|f| f.constant.clone()).product()
    }

    pub fn q(&self) -> Polynomial {
        self.factors.iter().fold(Polynomial::one(self.nvars), |acc, f| {
            &acc * &Polynomial::affine(&f.coeffs, &f.constant)
        })
    }

    /// `q_N = Π a_α·x`.
    pub fn top(&self) -> Polynomial {
        let zero = Rational::zero();
        self.factors.iter().fold(Polynomial::one(self.nvars), |acc, f| {
            &acc * &Polynomial::affine(&f.coeffs, &zero)
        })
    }

    /// `q_{N-1} = Σ_β c_β Π_{α≠β} a_α·x`.
    pub fn next(&self) -> Polynomial {
        let zero = Rational::zero();
        let lin: Vec<Polynomial> = self
            .factors
            .iter()
            .map(|f| Polynomial::affine(&f.coeffs, &zero))
            .collect();
        let mut out = Polynomial::zero(self.nvars);
        for (b, fb) in self.factors.iter().enumerate() {
            let prod = lin
                .iter()
                .enumerate()
                .filter(|(a, _)| *a != b)
                .fold(Polynomial::constant(self.nvars, fb.constant.clone()), |acc, (_, l)| &acc * l);
            out = &out + &prod;
        }
        out
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.factors
            .iter()
            .map(|f| &f.constant + crate::rational::dot(&f.coeffs, x))
            .product()
    }

    pub fn eval_int(&self, x: &[i64]) -> Rational {
        let xs: Vec<Rational> = x.iter().map(|&v| int(v)).collect();
        self.eval(&xs)
    }

    /// Values of the linear forms `a_α·x` at `x`, used for chamber checks.
    pub fn linear_values(&self, x: &[Rational]) -> Vec<Rational> {
        self.factors
            .iter()
            .map(|f| crate::rational::dot(&f.coeffs, x))
            .collect()
    }

    /// The weight in coordinates `x' = g x` for `g ∈ GL(n, ℤ)`:
    /// `q'(x') = q(g⁻¹ x')`, i.e. `a'_α = g⁻ᵀ a_α`.
    pub fn transform(&self, g: &[Vec<BigInt>]) -> Result<Self> {
        let d = linalg::det_int(g);
        if !d.abs().is_one() {
            return Err(Error::NotUnimodular(d.to_string()));
        }
        let inv = linalg::to_rational(&linalg::inverse_unimodular(g).expect("unimodular"));
        let inv_t = linalg::transpose(&inv);
        Ok(DimensionWeight {
            factors: self
                .factors
                .iter()
                .map(|f| LinearFactor {
                    coeffs: linalg::mat_vec(&inv_t, &f.coeffs),
                    constant: f.constant.clone(),
                })
                .collect(),
            nvars: self.nvars,
        })
    }
}

/// On-disk root-system description: `{"series":"A","rank":2}` or
/// `{"cartan":[[2,-1],[-1,2]]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum RootSystemSpec {
    Series { series: String, rank: usize },
    Cartan { cartan: Vec<Vec<i64>> },
}

impl RootSystemSpec {
    pub fn build(&self) -> Result<RootSystem> {
        match self {
            RootSystemSpec::Series { series, rank } => {
                let s: Series = series.parse().map_err(|_| Error::UnsupportedSeries {
                    series: series.clone(),
                    rank: *rank,
                })?;
                RootSystem::classical(s, *rank)
            }
            RootSystemSpec::Cartan { cartan } => RootSystem::from_cartan(cartan),
        }
    }
}
