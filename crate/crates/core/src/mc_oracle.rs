//! Independent checks of the closed forms: seeded Gaussian sampling,
//! plug-in (log-det) entropy estimates, and a golden-section search for the
//! rate-maximizing `α`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::infotheory::mutual_information;
use crate::linalg::{CovMatrix, MAX_DIM};
use crate::model::{assemble_covariance, ChannelModel, S1, S2, X, Z};
use crate::rates::rate_alpha;

pub const GENERATOR: &str = "ChaCha8";

/// Generator for task `stream` of a run seeded with `seed`. Distinct streams
/// are independent, so parallel trials stay reproducible.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n × k` draws, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSet {
    pub data: Vec<f64>,
    pub n: usize,
    pub labels: Vec<String>,
    pub seed: u64,
    pub stream: u64,
    pub generator: &'static str,
}

impl SampleSet {
    pub fn new(data: Vec<f64>, labels: Vec<String>, seed: u64, stream: u64) -> Result<Self> {
        let k = labels.len();
        if k == 0 || !data.len().is_multiple_of(k) {
            return Err(Error::LengthMismatch(data.len(), k));
        }
        let n = data.len() / k;
        if n < 2 {
            return Err(Error::Range(format!("need at least 2 samples, got {n}")));
        }
        Ok(Self {
            data,
            n,
            labels,
            seed,
            stream,
            generator: GENERATOR,
        })
    }

    pub fn k(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.k();
        &self.data[i * k..(i + 1) * k]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.data.iter().skip(j).step_by(self.k()).copied().collect()
    }

    /// Unbiased sample covariance of all columns (at most 4).
    pub fn covariance(&self) -> CovMatrix {
        let cols: Vec<Vec<f64>> = (0..self.k()).map(|j| self.column(j)).collect();
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        empirical_covariance(&refs)
    }
}

/// Unbiased sample covariance of up to four equal-length columns.
pub fn empirical_covariance(cols: &[&[f64]]) -> CovMatrix {
    let k = cols.len();
    assert!((1..=MAX_DIM).contains(&k), "1..=4 columns supported");
    let n = cols[0].len();
    assert!(n >= 2 && cols.iter().all(|c| c.len() == n));
    let means: Vec<f64> = cols.iter().map(|c| c.iter().sum::<f64>() / n as f64).collect();
    let mut e = [[0.0; MAX_DIM]; MAX_DIM];
    for i in 0..k {
        for j in i..k {
            let s: f64 = cols[i]
                .iter()
                .zip(cols[j])
                .map(|(a, b)| (a - means[i]) * (b - means[j]))
                .sum();
            e[i][j] = s / (n - 1) as f64;
            e[j][i] = e[i][j];
        }
    }
    CovMatrix::from_array(k, e)
}

/// Zero-mean Gaussian rows with covariance `cov`, via its symmetric square
/// root applied to independent standard normals.
pub fn sample_gaussian(cov: &CovMatrix, n: usize, seed: u64) -> Result<SampleSet> {
    sample_gaussian_stream(cov, n, seed, 0)
}

pub fn sample_gaussian_stream(cov: &CovMatrix, n: usize, seed: u64, stream: u64) -> Result<SampleSet> {
    if n < 2 {
        return Err(Error::Range(format!("need at least 2 samples, got {n}")));
    }
    let root = cov.sqrt_factor()?;
    let k = cov.dim();
    let mut rng = stream_rng(seed, stream);
    let mut data = vec![0.0; n * k];
    let mut z = [0.0; MAX_DIM];
    for row in data.chunks_exact_mut(k) {
        for zi in z.iter_mut().take(k) {
            *zi = StandardNormal.sample(&mut rng);
        }
        for (i, out) in row.iter_mut().enumerate() {
            *out = (0..k).map(|j| root[i * k + j] * z[j]).sum();
        }
    }
    let labels = (0..k).map(|i| format!("v{i}")).collect();
    SampleSet::new(data, labels, seed, stream)
}

/// Draws `n` rows of `(X, S1, S2, Z)` from the channel covariance.
pub fn sample_channel(model: &ChannelModel, n: usize, seed: u64, stream: u64) -> Result<SampleSet> {
    let mut s = sample_gaussian_stream(&assemble_covariance(model), n, seed, stream)?;
    s.labels = ["X", "S1", "S2", "Z"].iter().map(|l| l.to_string()).collect();
    Ok(s)
}

pub const MIN_MC_SAMPLES: usize = 10_000;

/// Plug-in estimate of `I(U; Y, S2) - I(U; S1)` from simulated channel uses.
pub fn mc_rate_estimate(model: &ChannelModel, alpha: f64, n: usize, seed: u64) -> Result<f64> {
    mc_rate_estimate_stream(model, alpha, n, seed, 0)
}

pub fn mc_rate_estimate_stream(model: &ChannelModel, alpha: f64, n: usize, seed: u64, stream: u64) -> Result<f64> {
    if n < MIN_MC_SAMPLES {
        return Err(Error::Range(format!("need at least {MIN_MC_SAMPLES} samples, got {n}")));
    }
    let s = sample_channel(model, n, seed, stream)?;
    let (x, s1, s2, z) = (s.column(X), s.column(S1), s.column(S2), s.column(Z));
    let u: Vec<f64> = x.iter().zip(&s1).map(|(x, s)| alpha * s + x).collect();
    let y: Vec<f64> = (0..n).map(|i| x[i] + s1[i] + s2[i] + z[i]).collect();

    // order: U, Y, S2, S1
    let cov = empirical_covariance(&[&u, &y, &s2, &s1]);
    let i_u_ys2 = if model.has_s2() {
        mutual_information(&cov, &[0], &[1, 2])?
    } else {
        mutual_information(&cov, &[0], &[1])?
    };
    let i_u_s1 = mutual_information(&cov, &[0], &[3])?;
    Ok(i_u_ys2 - i_u_s1)
}

/// Plug-in estimate of `I(S1 S2; Z)`.
pub fn mc_side_noise_mi(model: &ChannelModel, n: usize, seed: u64, stream: u64) -> Result<f64> {
    let s = sample_channel(model, n, seed, stream)?;
    let (s1, s2, z) = (s.column(S1), s.column(S2), s.column(Z));
    if model.has_s2() {
        mutual_information(&empirical_covariance(&[&s1, &s2, &z]), &[0, 1], &[2])
    } else {
        mutual_information(&empirical_covariance(&[&s1, &z]), &[0], &[1])
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;
// enough to shrink any finite f64 bracket below one ulp
const MAX_GOLDEN_ITERS: usize = 3000;

/// Golden-section search for a maximum of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmax, max)`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..MAX_GOLDEN_ITERS {
        if (hi - lo).abs() <= tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Numeric maximizer of `rate_alpha` over `α`. The bracket starts at
/// `[-5, 5]` and is doubled around its center until the maximizer is interior.
pub fn numeric_alpha_star(model: &ChannelModel, tol: f64) -> Result<f64> {
    let rate = |a: f64| rate_alpha(model, a).map_or(f64::NEG_INFINITY, |r| r.value_nats);
    let (mut lo, mut hi) = (-5.0f64, 5.0f64);
    for _ in 0..40 {
        let (x, fx) = golden_section_max(rate, lo, hi, tol);
        if fx == f64::INFINITY {
            return Err(Error::NoInteriorMax { lo, hi });
        }
        let margin = 1e-3 * (hi - lo);
        let interior = x - lo > margin && hi - x > margin;
        if interior && fx.is_finite() && rate(x - margin) <= fx && rate(x + margin) <= fx {
            return Ok(x);
        }
        let (c, half) = (0.5 * (lo + hi), hi - lo);
        lo = c - half;
        hi = c + half;
    }
    Err(Error::NoInteriorMax { lo, hi })
}

/// JSON line for one closed-form vs simulation comparison.
#[derive(Debug, Clone, Serialize)]
pub struct McCheck {
    pub formula: String,
    pub closed_form: f64,
    pub mc_estimate: f64,
    pub n: usize,
    pub seed: u64,
    pub abs_error: f64,
    pub pass: bool,
}

impl McCheck {
    pub fn new(formula: impl Into<String>, closed_form: f64, mc_estimate: f64, n: usize, seed: u64, tol: f64) -> Self {
        let abs_error = (closed_form - mc_estimate).abs();
        Self {
            formula: formula.into(),
            closed_form,
            mc_estimate,
            n,
            seed,
            abs_error,
            pass: abs_error < tol,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{new_channel, ChannelParams};

    #[test]
    fn deterministic_given_seed() {
        let cov = CovMatrix::from_rows(&[&[2.0, 0.3], &[0.3, 1.0]]).unwrap();
        let a = sample_gaussian(&cov, 100, 9).unwrap();
        let b = sample_gaussian(&cov, 100, 9).unwrap();
        assert_eq!(a, b);
        let c = sample_gaussian_stream(&cov, 100, 9, 1).unwrap();
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn too_few_samples() {
        assert!(sample_gaussian(&CovMatrix::identity(2), 1, 0).is_err());
        let m = new_channel(&ChannelParams {
            p: Some(1.0),
            n: Some(1.0),
            ..Default::default()
        })
        .unwrap();
        assert!(mc_rate_estimate(&m, 0.5, 100, 0).is_err());
    }

    #[test]
    fn not_psd_rejected() {
        let bad = CovMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        assert_eq!(sample_gaussian(&bad, 10, 0).unwrap_err().name(), "NotPSD");
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 1.25) * (x - 1.25) + 3.0, -4.0, 4.0, 1e-10);
        assert!((x - 1.25).abs() < 1e-7);
        assert!((fx - 3.0).abs() < 1e-12);
    }

    #[test]
    fn numeric_alpha_costa() {
        for (p, want) in [(1.0, 0.5), (3.0, 0.75)] {
            let m = new_channel(&ChannelParams {
                p: Some(p),
                n: Some(1.0),
                q2: Some(0.0),
                ..Default::default()
            })
            .unwrap();
            let a = numeric_alpha_star(&m, 1e-9).unwrap();
            assert!((a - want).abs() < 1e-6, "{a} vs {want}");
        }
    }

    #[test]
    fn bracket_expands_to_far_maximizer() {
        // α* = P/(P+N) is near 1 for high SNR; force a distant optimum via
        // strong input/state correlation instead.
        let m = new_channel(&ChannelParams {
            p: Some(0.05),
            q1: Some(5.0),
            n: Some(0.2),
            rho_xs1: Some(-0.95),
            q2: Some(0.0),
            ..Default::default()
        })
        .unwrap();
        let closed = crate::rates::alpha_star(&m).unwrap();
        let a = numeric_alpha_star(&m, 1e-10).unwrap();
        assert!((a - closed).abs() < 1e-6, "{a} vs {closed}");
    }
}
