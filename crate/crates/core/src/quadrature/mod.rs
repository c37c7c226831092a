//! Exact integration of polynomials (and convex piecewise-affine multiples of
//! them) over polytopes and their boundaries, plus boundary-graded Gauss
//! quadrature for integrands with logarithmic blow-up at `∂P`.

mod exact;
mod graded;

pub use exact::{
    boundary_integral, boundary_integral_pl_poly, facet_integral, integral_pl_poly, integral_polytope,
    integrate_simplex, standard_simplex_monomial,
};
pub use graded::{
    gauss_legendre, graded_integral, graded_integral_simplices, pairwise_sum, GradedQuadratureSpec,
    QuadratureResult,
};
