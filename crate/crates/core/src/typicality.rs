//! Joint-typicality statistic for the auxiliary `U = X + αS₁` and the
//! degenerate encoder `X = S₁`, for which no codeword is ever typical.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mc_oracle::stream_rng;

/// `|(u - α s)ᵀ s|`.
pub fn typicality_statistic(u: &[f64], s: &[f64], alpha: f64) -> Result<f64> {
    if u.len() != s.len() {
        return Err(Error::LengthMismatch(u.len(), s.len()));
    }
    Ok(u.iter().zip(s).map(|(u, s)| (u - alpha * s) * s).sum::<f64>().abs())
}

/// Whether `U = X + αS₁` passes the typicality test against `S₁` at threshold `delta`.
pub fn feasibility(x: &[f64], s: &[f64], alpha: f64, delta: f64) -> Result<bool> {
    if x.len() != s.len() {
        return Err(Error::LengthMismatch(x.len(), s.len()));
    }
    let u: Vec<f64> = x.iter().zip(s).map(|(x, s)| x + alpha * s).collect();
    Ok(typicality_statistic(&u, s, alpha)? <= delta)
}

/// Three standard deviations of `Σ xᵢ sᵢ` for independent sequences.
pub fn default_delta(sigma_x: f64, sigma_s: f64, n: usize) -> f64 {
    3.0 * sigma_x * sigma_s * (n as f64).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfInterferenceReport {
    pub n: usize,
    pub q1: f64,
    pub seed: u64,
    pub alpha: f64,
    /// Statistic with `X = S₁`.
    pub statistic: f64,
    pub expected: f64,
    pub ratio: f64,
    /// Statistic for an independent `X` of the same power, for contrast.
    pub independent_statistic: f64,
    /// `σ_X σ_S √n`, the typical size of the independent statistic.
    pub independent_scale: f64,
    pub delta: f64,
    pub feasible: bool,
    pub independent_feasible: bool,
}

/// Draws `S₁ ~ N(0, q1)` i.i.d., sets `X = S₁` and evaluates the statistic at
/// `α = P/(P+N)` with `P = q1`, `N = 1`. The statistic does not depend on `α`.
pub fn self_interference_demo(n: usize, q1: f64, seed: u64) -> Result<SelfInterferenceReport> {
    if n < 10 {
        return Err(Error::Range(format!("sequence length {n} below 10")));
    }
    if !(q1.is_finite() && q1 > 0.0) {
        return Err(Error::Range(format!("q1 = {q1} must be positive")));
    }
    let sd = q1.sqrt();
    let mut rng = stream_rng(seed, 0);
    let s: Vec<f64> = (0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
    let x_indep: Vec<f64> = (0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
    let alpha = q1 / (q1 + 1.0);

    let u: Vec<f64> = s.iter().map(|s| s + alpha * s).collect();
    let statistic = typicality_statistic(&u, &s, alpha)?;
    let u_indep: Vec<f64> = x_indep.iter().zip(&s).map(|(x, s)| x + alpha * s).collect();
    let independent_statistic = typicality_statistic(&u_indep, &s, alpha)?;

    let expected = n as f64 * q1;
    let delta = default_delta(sd, sd, n);
    Ok(SelfInterferenceReport {
        n,
        q1,
        seed,
        alpha,
        statistic,
        expected,
        ratio: statistic / expected,
        independent_statistic,
        independent_scale: q1 * (n as f64).sqrt(),
        delta,
        feasible: statistic <= delta,
        independent_feasible: independent_statistic <= delta,
    })
}
