//! Differential entropy and mutual information of jointly Gaussian vectors.
//! Natural logarithms throughout.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};
use crate::linalg::CovMatrix;
use crate::model::ChannelModel;

/// A determinant below this fraction of the diagonal product is singular.
pub const SINGULAR_RTOL: f64 = 1e-14;

/// `½ log((2πe)^k det Σ)`.
pub fn gaussian_entropy(cov: &CovMatrix) -> Result<f64> {
    let det = cov.det();
    let scale = cov.diag_product();
    if !(det > 0.0) || !(scale > 0.0) || det <= SINGULAR_RTOL * scale {
        return Err(Error::SingularCovariance { det });
    }
    let k = cov.dim() as f64;
    Ok(0.5 * (k * (2.0 * PI * E).ln() + det.ln()))
}

/// `I(A;B) = H(A) + H(B) - H(A,B)` for disjoint index blocks of `joint`.
pub fn mutual_information(joint: &CovMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Range("both blocks of the partition must be non-empty".into()));
    }
    if a.iter().chain(b).any(|&i| i >= joint.dim()) || a.iter().any(|i| b.contains(i)) {
        return Err(Error::Range(format!("invalid partition {a:?} / {b:?} of dimension {}", joint.dim())));
    }
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    let h_a = gaussian_entropy(&joint.principal(a))?;
    let h_b = gaussian_entropy(&joint.principal(b))?;
    let h_ab = gaussian_entropy(&joint.principal(&ab))?;
    Ok(h_a + h_b - h_ab)
}

/// `I(S1 S2; Z) = ½ log((1 - ρ_S1S2²) / d_P^𝒩)`; `+∞` when the side
/// information determines the noise.
///
/// With `|ρ_S1S2| = 1` the second side variable is a copy of the first and
/// the value is the limit `-½ log(1 - ρ_S1Z²)`.
pub fn mi_side_noise(model: &ChannelModel) -> f64 {
    let one_minus_b2 = 1.0 - model.rho_s1s2 * model.rho_s1s2;
    if one_minus_b2 <= DEGENERATE_TOL {
        let r = 1.0 - model.rho_s1z * model.rho_s1z;
        return if r <= DEGENERATE_TOL { f64::INFINITY } else { -0.5 * r.ln() };
    }
    let d = model.d_p_norm();
    if d <= DEGENERATE_TOL {
        return f64::INFINITY;
    }
    0.5 * (one_minus_b2 / d).ln()
}

pub(crate) const DEGENERATE_TOL: f64 = 1e-12;
