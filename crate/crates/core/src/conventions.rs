//! Factor conventions that are configurable rather than hard-wired.

use serde::{Deserialize, Serialize};

use crate::rational::{rat, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conventions {
    /// `c` in `q_{N−1} = c · p · f_G`. With `f_G = 2 Σ ∂_l log p` the
    /// consistent value is `1/2`.
    #[serde(with = "crate::rational::serde_rational")]
    pub qn1_per_p_fg: Rational,
    /// `c` in `S = −c W⁻¹ (W u^{jk})_{jk} + f_G`.
    #[serde(with = "crate::rational::serde_rational")]
    pub divergence_factor: Rational,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            qn1_per_p_fg: rat(1, 2),
            divergence_factor: rat(1, 2),
        }
    }
}

impl Conventions {
    /// The factor-free scalar curvature `S = −W⁻¹ (W u^{jk})_{jk} + f_G`.
    pub fn unit_divergence() -> Self {
        Conventions {
            divergence_factor: rat(1, 1),
            ..Default::default()
        }
    }
}
