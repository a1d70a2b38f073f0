use serde::{Deserialize, Serialize};

/// Measured stand-ins for the nonconstructive constants of the contraction
/// argument. Entries stay `None` when the run gives no data for them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PsiConstants {
    /// `sup |T[φ_k]| / |φ_k|^2` over the iterates.
    pub c1: Option<f64>,
    /// `sup |T[φ_k] - T[φ_{k-1}]| / ((|φ_k| + |φ_{k-1}|) |φ_k - φ_{k-1}|)`.
    pub c2: Option<f64>,
    /// axisymmetric analog of `c1`
    pub c3: Option<f64>,
    /// axisymmetric analog of `c2`
    pub c4: Option<f64>,
    /// Hölder surrogate of `g - 1`.
    pub delta1: Option<f64>,
    /// Hölder surrogate of `g^2 - 1`.
    pub delta2: Option<f64>,
    /// `|g^2 - 1| / ((|g - 1| + 2) |g - 1|)`.
    pub c0: Option<f64>,
}

/// Diagnostics of one fixed-point run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub mode: String,
    /// Coefficient sup-norm of each iterate, starting with `φ_0`.
    pub iterates: Vec<f64>,
    /// `|φ_{k+1} - φ_k|` in coefficient sup-norm.
    pub step_norms: Vec<f64>,
    /// `step_norms[k + 1] / step_norms[k]`.
    pub contraction_ratios: Vec<f64>,
    /// Largest coefficient of degree above `L` in `T[φ_k]` before truncation.
    pub tail_norms: Vec<f64>,
    /// Hölder surrogate `|φ_k|_{1+α}` per iterate.
    pub holder_norms: Vec<f64>,
    pub psi_constants: PsiConstants,
    pub lambda_target: f64,
    pub tolerance: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `max | |∇u|^2 - g^2 |` over grid nodes at the final iterate.
    pub boundary_residual: Option<f64>,
    pub warnings: Vec<String>,
}

impl FixedPointReport {
    pub fn max_ratio_from(&self, k: usize) -> f64 {
        self.contraction_ratios.iter().skip(k).fold(0.0, |m, r| m.max(*r))
    }
}
