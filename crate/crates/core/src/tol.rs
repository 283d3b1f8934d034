//! Numerical tolerances shared by every module.
//!
//! | field       | default            | used for                                            |
//! |-------------|--------------------|-----------------------------------------------------|
//! | `rank`      | `dim * f64::EPSILON` | relative eigenvalue cutoff for supports (times λ_max) |
//! | `hermitian` | 1e-8               | max asymmetry accepted before symmetrizing          |
//! | `tp`        | 1e-9               | trace preservation of Kraus sets                    |
//! | `povm`      | 1e-9               | PSD and completeness of POVMs                       |
//! | `prob`      | 1e-10              | normalization drift of probability vectors          |
//! | `basis`     | 1e-10              | orthonormality of bases                             |

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative rank cutoff. `None` means `dim * f64::EPSILON`.
    pub rank: Option<f64>,
    pub hermitian: f64,
    pub tp: f64,
    pub povm: f64,
    pub prob: f64,
    pub basis: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: None,
            hermitian: 1e-8,
            tp: 1e-9,
            povm: 1e-9,
            prob: 1e-10,
            basis: 1e-10,
        }
    }
}

impl Tolerances {
    /// Relative rank tolerance for a `dim`-dimensional operator.
    pub fn rank_tol(&self, dim: usize) -> f64 {
        self.rank.unwrap_or(dim.max(1) as f64 * f64::EPSILON)
    }
}

pub static DEFAULT: Tolerances = Tolerances {
    rank: None,
    hermitian: 1e-8,
    tp: 1e-9,
    povm: 1e-9,
    prob: 1e-10,
    basis: 1e-10,
};
