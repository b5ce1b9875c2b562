//! Every numeric threshold used by the construction and verification code.

use serde::{Deserialize, Serialize};

/// Tolerance record shared by all checks.
///
/// Algebraic checks (no derivatives) are rounding-limited and use
/// `algebraic`. Finite-difference checks are discretization-limited and use
/// [`Tolerances::derivative_at`], which scales `derivative_cap` like `h^2`
/// from the reference step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// LU pivots below `pivot_rel * max row norm` declare the matrix singular.
    pub pivot_rel: f64,
    /// `a * inv(a) = I` accuracy expected after a successful inversion.
    pub inverse: f64,
    /// Generic residual bound for pointwise identities.
    pub residual: f64,
    /// Purely algebraic invariants (unitarity, traces, similarity).
    pub algebraic: f64,
    /// Hard cap for finite-difference residuals at `reference_h`.
    pub derivative_cap: f64,
    pub reference_h: f64,
    /// Allowed deviation of the empirical convergence order from 2.
    pub order_band: f64,
    /// Relative residual for the quasideterminant identities.
    pub identity: f64,
    /// Relative residual for the commutative determinant-ratio formula.
    pub ratio: f64,
    /// Relative tolerance between the quasideterminant and product iterations.
    pub equivalence: f64,
    /// Closed-form one-soliton against the generic engine.
    pub closed_form: f64,
    /// Two-soliton closed form against the generic engine.
    pub two_soliton: f64,
    /// Two-soliton comparisons are skipped where |denominator| is below this.
    pub denominator_floor: f64,
    /// Asymptotic limit factors.
    pub asymptotic: f64,
    /// Factorization of the K-soliton limit into single-soliton limits.
    pub factorization: f64,
    /// Condition estimate above which a chain evaluation is flagged.
    pub condition_warn: f64,
    /// Random identity grids with a needed inverse above this condition are redrawn.
    pub identity_condition: f64,
    /// Exact algebraic rewrites (conjugation routes, projector construction).
    pub structural: f64,
    /// Imaginary residue allowed in the real soliton profiles.
    pub rs_imaginary: f64,
    /// Guard band around theta in {0, pi}.
    pub theta_guard: f64,
    /// Residuals at or below this are rounding noise; orders are reported as "floor".
    pub rounding_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            pivot_rel: 1e-12,
            inverse: 1e-10,
            residual: 1e-8,
            algebraic: 1e-10,
            derivative_cap: 1e-5,
            reference_h: 1e-4,
            order_band: 0.1,
            identity: 1e-9,
            ratio: 1e-10,
            equivalence: 1e-9,
            closed_form: 1e-10,
            two_soliton: 1e-9,
            denominator_floor: 1e-6,
            asymptotic: 1e-8,
            factorization: 1e-12,
            condition_warn: 1e6,
            identity_condition: 1e4,
            structural: 1e-12,
            rs_imaginary: 1e-14,
            theta_guard: 1e-8,
            rounding_floor: 1e-11,
        }
    }
}

impl Tolerances {
    /// Finite-difference tolerance at step `h`: the cap at the reference step,
    /// scaled as `h^2`.
    pub fn derivative_at(&self, h: f64) -> f64 {
        self.derivative_cap * (h / self.reference_h).powi(2)
    }
}

/// Relative difference `|a - b| / max(|a|, |b|)` with a floor on the scale.
pub fn relative(diff: f64, a: f64, b: f64) -> f64 {
    diff / a.max(b).max(1e-30)
}
