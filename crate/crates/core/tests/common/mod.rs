#![allow(dead_code)]

use kstab::pl::{AffinePiece, PiecewiseAffine};
use kstab::polytope::RationalPolytope;
use kstab::rational::{int, Rational};
use kstab::rootsystem::{DimensionWeight, RootSystem, Series};

pub fn weight(series: Series, rank: usize) -> DimensionWeight {
    RootSystem::classical(series, rank).unwrap().weight()
}

pub fn a1() -> DimensionWeight {
    weight(Series::A, 1)
}

pub fn a2() -> DimensionWeight {
    weight(Series::A, 2)
}

pub fn hull(points: &[&[i64]]) -> RationalPolytope {
    let pts: Vec<Vec<Rational>> = points.iter().map(|p| p.iter().map(|&x| int(x)).collect()).collect();
    RationalPolytope::from_vertices(&pts).unwrap()
}

pub fn segment(a: i64, b: i64) -> RationalPolytope {
    hull(&[&[a], &[b]])
}

pub fn unit_square() -> RationalPolytope {
    hull(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]])
}

/// `[1, 2]²`, inside the open positive quadrant.
pub fn square12() -> RationalPolytope {
    hull(&[&[1, 1], &[2, 1], &[1, 2], &[2, 2]])
}

pub fn triangle13() -> RationalPolytope {
    hull(&[&[1, 1], &[3, 1], &[1, 3]])
}

pub fn pentagon() -> RationalPolytope {
    hull(&[&[1, 1], &[3, 1], &[3, 2], &[2, 3], &[1, 3]])
}

/// `max_i (a_i·x + b_i)` from integer data.
pub fn pl(pieces: &[(&[i64], i64)]) -> PiecewiseAffine {
    let dim = pieces[0].0.len();
    PiecewiseAffine::new(
        dim,
        pieces
            .iter()
            .map(|(a, b)| AffinePiece::new(a.iter().map(|&x| int(x)).collect(), int(*b)))
            .collect(),
    )
    .unwrap()
}

pub fn identity_1d() -> PiecewiseAffine {
    pl(&[(&[1], 0)])
}

/// `max(0, 2x − 3)`.
pub fn kink() -> PiecewiseAffine {
    pl(&[(&[0], 0), (&[2], -3)])
}

/// A named `(weight, P, f, R)` case with integral gradients.
pub struct Case {
    pub name: &'static str,
    pub weight: DimensionWeight,
    pub polytope: RationalPolytope,
    pub f: PiecewiseAffine,
    pub r: Rational,
}

pub fn futaki_suite() -> Vec<Case> {
    vec![
        Case {
            name: "A1 [1,2] f=x",
            weight: a1(),
            polytope: segment(1, 2),
            f: identity_1d(),
            r: int(3),
        },
        Case {
            name: "A1 [1,2] f=max(0,2x-3)",
            weight: a1(),
            polytope: segment(1, 2),
            f: kink(),
            r: int(2),
        },
        Case {
            name: "A1 [1,3] f=max(x,4-x)",
            weight: a1(),
            polytope: segment(1, 3),
            f: pl(&[(&[1], 0), (&[-1], 4)]),
            r: int(4),
        },
        Case {
            name: "A2 [1,2]^2 f=max(0,x+y-3)",
            weight: a2(),
            polytope: square12(),
            f: pl(&[(&[0, 0], 0), (&[1, 1], -3)]),
            r: int(2),
        },
        Case {
            name: "A2 triangle f=max(x,y)",
            weight: a2(),
            polytope: triangle13(),
            f: pl(&[(&[1, 0], 0), (&[0, 1], 0)]),
            r: int(4),
        },
    ]
}

/// `(n − 1)!` as a rational.
pub fn factorial(n: u64) -> Rational {
    (1..=n).map(|i| int(i as i64)).product()
}

/// The facet of `conv{0, p_1 e_1, …, p_n e_n}` whose normal has no zero entry.
pub fn slanted_facet(p: &RationalPolytope) -> usize {
    p.facets()
        .iter()
        .position(|f| f.normal.iter().all(|v| v != &0.into()))
        .unwrap()
}

pub fn corner_simplex(p: &[i64]) -> RationalPolytope {
    let n = p.len();
    let mut pts = vec![vec![0i64; n]];
    for (i, &pi) in p.iter().enumerate() {
        let mut v = vec![0; n];
        v[i] = pi;
        pts.push(v);
    }
    let refs: Vec<&[i64]> = pts.iter().map(|v| v.as_slice()).collect();
    hull(&refs)
}
