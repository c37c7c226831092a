//! Convex piecewise-affine functions `f(x) = max_i (a_i·x + b_i)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::{Halfspace, RationalPolytope};
use crate::rational::{denominator_lcm, dot, Rational};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffinePiece {
    #[serde(rename = "a", with = "crate::rational::serde_rational::vec")]
    pub gradient: Vec<Rational>,
    #[serde(rename = "b", with = "crate::rational::serde_rational")]
    pub constant: Rational,
}

impl AffinePiece {
    pub fn new(gradient: Vec<Rational>, constant: Rational) -> Self {
        AffinePiece { gradient, constant }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        dot(&self.gradient, x) + &self.constant
    }
}

/// Max of finitely many affine functions; convex by construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseAffine {
    dim: usize,
    pieces: Vec<AffinePiece>,
}

impl PiecewiseAffine {
    /// Duplicated pieces are dropped so that linearity cells never overlap.
    pub fn new(dim: usize, pieces: Vec<AffinePiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Parse("piecewise-affine function needs at least one piece".into()));
        }
        for p in &pieces {
            if p.gradient.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.gradient.len(),
                });
            }
        }
        let mut pieces = pieces;
        pieces.sort();
        pieces.dedup();
        Ok(PiecewiseAffine { dim, pieces })
    }

    pub fn constant(dim: usize, c: Rational) -> Self {
        PiecewiseAffine {
            dim,
            pieces: vec![AffinePiece::new(vec![Rational::zero(); dim], c)],
        }
    }

    pub fn affine(gradient: Vec<Rational>, constant: Rational) -> Self {
        PiecewiseAffine {
            dim: gradient.len(),
            pieces: vec![AffinePiece::new(gradient, constant)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.pieces.iter().map(|p| p.eval(x)).max().expect("nonempty")
    }

    /// Index of a piece attaining the max at `x`.
    pub fn active_piece(&self, x: &[Rational]) -> usize {
        let vals: Vec<Rational> = self.pieces.iter().map(|p| p.eval(x)).collect();
        let best = vals.iter().max().unwrap();
        vals.iter().position(|v| v == best).unwrap()
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.pieces
            .iter()
            .map(|p| {
                p.gradient
                    .iter()
                    .zip(x)
                    .map(|(a, xi)| a.to_f64().unwrap_or(f64::NAN) * xi)
                    .sum::<f64>()
                    + p.constant.to_f64().unwrap_or(f64::NAN)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_constant(&self) -> bool {
        self.pieces.iter().all(|p| p.gradient.iter().all(Zero::is_zero))
    }

    /// lcm of the denominators of every coefficient.
    pub fn denominator_lcm(&self) -> BigInt {
        denominator_lcm(
            self.pieces
                .iter()
                .flat_map(|p| p.gradient.iter().chain(std::iter::once(&p.constant))),
        )
    }

    pub fn has_integral_gradients(&self) -> Option<usize> {
        self.pieces
            .iter()
            .position(|p| p.gradient.iter().any(|a| !a.is_integer()))
    }

    pub fn add_constant(&self, c: &Rational) -> Self {
        PiecewiseAffine {
            dim: self.dim,
            pieces: self
                .pieces
                .iter()
                .map(|p| AffinePiece::new(p.gradient.clone(), &p.constant + c))
                .collect(),
        }
    }

    /// `c·f` for `c ≥ 0`, which keeps the max-form.
    pub fn scale(&self, c: &Rational) -> Result<Self> {
        if c.is_negative() {
            return Err(Error::Parse("only nonnegative multiples of a convex function stay convex".into()));
        }
        Self::new(
            self.dim,
            self.pieces
                .iter()
                .map(|p| AffinePiece::new(p.gradient.iter().map(|a| a * c).collect(), &p.constant * c))
                .collect(),
        )
    }

    /// `z ↦ f(M z + t)` with `M` of shape `dim × m`.
    pub fn compose_affine(&self, matrix: &[Vec<Rational>], translation: &[Rational]) -> Self {
        let m = matrix.first().map_or(0, |r| r.len());
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let gradient = (0..m)
                    .map(|j| p.gradient.iter().zip(matrix).map(|(a, row)| a * &row[j]).sum())
                    .collect();
                AffinePiece::new(gradient, p.eval(translation))
            })
            .collect();
        Self::new(m, pieces).expect("composition keeps pieces")
    }

    /// Full-dimensional cells of `P` on which a single piece is active,
    /// paired with that piece's index.
    pub fn linearity_cells(&self, polytope: &RationalPolytope) -> Result<Vec<(usize, RationalPolytope)>> {
        if self.pieces.len() == 1 {
            return Ok(vec![(0, polytope.clone())]);
        }
        let mut cells = Vec::new();
        for (i, pi) in self.pieces.iter().enumerate() {
            let mut hs = polytope.halfspaces();
            for (j, pj) in self.pieces.iter().enumerate() {
                if i != j {
                    let normal = pi.gradient.iter().zip(&pj.gradient).map(|(a, b)| a - b).collect();
                    hs.push(Halfspace::new(normal, &pj.constant - &pi.constant));
                }
            }
            match RationalPolytope::from_halfspaces(polytope.dim(), &hs) {
                Ok(cell) => cells.push((i, cell)),
                Err(Error::EmptyPolytope) | Err(Error::Degenerate(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(cells)
    }

    /// Smallest `m` such that every linearity cell of `f` on `P` (and `P`
    /// itself) becomes a lattice polytope after dilation by `m`, also made
    /// a multiple of the coefficient denominators. On multiples of `m` the
    /// weighted lattice sums of `f` are polynomials in `k`.
    pub fn sampling_period(&self, polytope: &RationalPolytope) -> Result<u64> {
        let mut m = self.denominator_lcm();
        m = m.lcm(&polytope.vertex_denominator_lcm());
        for (_, cell) in self.linearity_cells(polytope)? {
            m = m.lcm(&cell.vertex_denominator_lcm());
        }
        m.to_u64()
            .ok_or_else(|| Error::Parse("sampling period does not fit in 64 bits".into()))
    }
}

/// On-disk form: `{"pieces":[{"a":["1"],"b":"0"}]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PiecewiseAffineSpec {
    pub pieces: Vec<AffinePiece>,
}

impl PiecewiseAffineSpec {
    pub fn build(&self) -> Result<PiecewiseAffine> {
        let dim = self.pieces.first().map_or(0, |p| p.gradient.len());
        PiecewiseAffine::new(dim, self.pieces.clone())
    }
}

impl From<&PiecewiseAffine> for PiecewiseAffineSpec {
    fn from(f: &PiecewiseAffine) -> Self {
        PiecewiseAffineSpec {
            pieces: f.pieces.clone(),
        }
    }
}
