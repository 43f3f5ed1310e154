//! Prescribed correlation between two arbitrary continuous marginals via the
//! Farlie–Gumbel–Morgenstern family
//!
//! ```text
//! f(x, s) = f_X(x) f_S(s) [1 + ρ (2F_X(x) - 1)(2F_S(s) - 1)]
//! ```
//!
//! which gives `Cov(X, S) = ρ a_X a_S` with `a = ∫ x f(x)(2F(x) - 1) dx`.
//! A target correlation `ρ_XS` therefore needs `ρ = σ_X σ_S ρ_XS / (a_X a_S)`,
//! and is reachable only while `|ρ| ≤ 1`.

use std::fmt::Debug;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{Continuous, ContinuousCDF, Normal as StatrsNormal};

use crate::error::{Error, Result};
use crate::mc_oracle::{stream_rng, SampleSet};
use crate::quad;

/// A univariate continuous law: density and CDF handles plus moments.
pub trait Marginal: Debug + Send + Sync {
    fn name(&self) -> String;
    fn pdf(&self, x: f64) -> f64;
    fn cdf(&self, x: f64) -> f64;
    fn mean(&self) -> f64;
    fn variance(&self) -> f64;
    /// Closed support; endpoints may be infinite.
    fn support(&self) -> (f64, f64);

    /// Interior points where the density is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Inverse CDF. The default brackets and bisects the CDF.
    fn quantile(&self, p: f64) -> Result<f64> {
        bisect_quantile(self, p)
    }

    fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }
}

fn bisect_quantile<M: Marginal + ?Sized>(m: &M, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InversionFailure(format!("probability {p} outside [0, 1]")));
    }
    let (lo_s, hi_s) = m.support();
    let (mu, sd) = (m.mean(), m.std_dev());
    let mut lo = if lo_s.is_finite() { lo_s } else { mu - sd };
    let mut hi = if hi_s.is_finite() { hi_s } else { mu + sd };
    let mut width = sd.max(1e-300);
    while m.cdf(lo) > p {
        if lo_s.is_finite() {
            break;
        }
        width *= 2.0;
        lo = mu - width;
        if !lo.is_finite() {
            return Err(Error::InversionFailure(format!("cannot bracket quantile {p} from below")));
        }
    }
    width = sd.max(1e-300);
    while m.cdf(hi) < p {
        if hi_s.is_finite() {
            break;
        }
        width *= 2.0;
        hi = mu + width;
        if !hi.is_finite() {
            return Err(Error::InversionFailure(format!("cannot bracket quantile {p} from above")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if m.cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uniform {
    pub a: f64,
    pub b: f64,
}

impl Uniform {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a.is_finite() && b.is_finite() && a < b {
            Ok(Self { a, b })
        } else {
            Err(Error::Range(format!("uniform({a}, {b}) needs finite a < b")))
        }
    }
}

impl Marginal for Uniform {
    fn name(&self) -> String {
        format!("uniform({}, {})", self.a, self.b)
    }
    fn pdf(&self, x: f64) -> f64 {
        if (self.a..=self.b).contains(&x) {
            1.0 / (self.b - self.a)
        } else {
            0.0
        }
    }
    fn cdf(&self, x: f64) -> f64 {
        ((x - self.a) / (self.b - self.a)).clamp(0.0, 1.0)
    }
    fn mean(&self) -> f64 {
        0.5 * (self.a + self.b)
    }
    fn variance(&self) -> f64 {
        (self.b - self.a).powi(2) / 12.0
    }
    fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }
    fn quantile(&self, p: f64) -> Result<f64> {
        Ok(self.a + p.clamp(0.0, 1.0) * (self.b - self.a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    inner: StatrsNormal,
    mu: f64,
    sigma: f64,
}

impl Normal {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        let inner = StatrsNormal::new(mu, sigma).map_err(|e| Error::Range(format!("normal({mu}, {sigma}): {e}")))?;
        Ok(Self { inner, mu, sigma })
    }
}

impl Marginal for Normal {
    fn name(&self) -> String {
        format!("normal({}, {})", self.mu, self.sigma)
    }
    fn pdf(&self, x: f64) -> f64 {
        self.inner.pdf(x)
    }
    fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x)
    }
    fn mean(&self) -> f64 {
        self.mu
    }
    fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }
    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InversionFailure(format!("probability {p} outside [0, 1]")));
        }
        Ok(self.inner.inverse_cdf(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    pub lambda: f64,
}

impl Exponential {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda > 0.0 {
            Ok(Self { lambda })
        } else {
            Err(Error::Range(format!("exponential rate {lambda} must be positive")))
        }
    }
}

impl Marginal for Exponential {
    fn name(&self) -> String {
        format!("exponential({})", self.lambda)
    }
    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.lambda * (-self.lambda * x).exp()
        }
    }
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.lambda * x).exp_m1()
        }
    }
    fn mean(&self) -> f64 {
        1.0 / self.lambda
    }
    fn variance(&self) -> f64 {
        1.0 / (self.lambda * self.lambda)
    }
    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InversionFailure(format!("probability {p} outside [0, 1]")));
        }
        Ok(-(-p).ln_1p() / self.lambda)
    }
}

/// Piecewise-linear CDF through tabulated `(x, F(x))` knots, so the density
/// is piecewise constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    xs: Vec<f64>,
    fs: Vec<f64>,
}

impl Tabulated {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Input("tabulated CDF needs at least two knots".into()));
        }
        let (xs, fs): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        if xs.iter().chain(&fs).any(|v| !v.is_finite()) {
            return Err(Error::Input("tabulated CDF has non-finite values".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Input("tabulated x values must be strictly increasing".into()));
        }
        if fs.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Input("tabulated CDF must be non-decreasing".into()));
        }
        if fs[0] != 0.0 || fs[fs.len() - 1] != 1.0 {
            return Err(Error::Input("tabulated CDF must start at 0 and end at 1".into()));
        }
        Ok(Self { xs, fs })
    }

    /// Reads `x,F(x)` rows; a non-numeric first row is taken as a header.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut points = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Input(format!("csv: {e}")))?;
            if rec.len() < 2 {
                return Err(Error::Input(format!("csv row {} needs two columns", i + 1)));
            }
            let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
            match parsed {
                (Ok(x), Ok(f)) => points.push((x, f)),
                _ if i == 0 => continue,
                _ => return Err(Error::Input(format!("csv row {} is not numeric", i + 1))),
            }
        }
        Self::new(points)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        Self::from_csv(f)
    }

    fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.xs
            .windows(2)
            .zip(self.fs.windows(2))
            .map(|(x, f)| (x[0], x[1], f[1] - f[0]))
    }
}

impl Marginal for Tabulated {
    fn name(&self) -> String {
        format!("tabulated({} knots)", self.xs.len())
    }
    fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        let i = self.xs.partition_point(|&k| k <= x).clamp(1, self.xs.len() - 1);
        (self.fs[i] - self.fs[i - 1]) / (self.xs[i] - self.xs[i - 1])
    }
    fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let i = self.xs.partition_point(|&k| k <= x);
        let t = (x - self.xs[i - 1]) / (self.xs[i] - self.xs[i - 1]);
        self.fs[i - 1] + t * (self.fs[i] - self.fs[i - 1])
    }
    fn mean(&self) -> f64 {
        self.segments().map(|(a, b, w)| w * 0.5 * (a + b)).sum()
    }
    fn variance(&self) -> f64 {
        let m2: f64 = self.segments().map(|(a, b, w)| w * (a * a + a * b + b * b) / 3.0).sum();
        let m = self.mean();
        m2 - m * m
    }
    fn support(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.xs[1..self.xs.len() - 1].to_vec()
    }
    fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InversionFailure(format!("probability {p} outside [0, 1]")));
        }
        let i = self.fs.partition_point(|&f| f < p).clamp(1, self.fs.len() - 1);
        let (f0, f1) = (self.fs[i - 1], self.fs[i]);
        let t = if f1 > f0 { (p - f0) / (f1 - f0) } else { 0.0 };
        Ok(self.xs[i - 1] + t * (self.xs[i] - self.xs[i - 1]))
    }
}

/// Parses `uniform`, `uniform(a,b)`, `normal`, `normal(mu,sigma)`,
/// `exponential`, `exponential(lambda)` or `table:<path.csv>`.
pub fn parse_marginal(spec: &str) -> Result<Arc<dyn Marginal>> {
    let spec = spec.trim();
    if let Some(path) = spec.strip_prefix("table:") {
        return Ok(Arc::new(Tabulated::from_csv_path(Path::new(path))?));
    }
    let (name, args) = match spec.split_once('(') {
        Some((name, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::Input(format!("unbalanced parentheses in '{spec}'")))?;
            let args = inner
                .split(',')
                .map(|a| a.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Input(format!("bad argument in '{spec}': {e}")))?;
            (name.trim(), args)
        }
        None => (spec, Vec::new()),
    };
    let arity = |k: usize| -> Result<()> {
        if args.is_empty() || args.len() == k {
            Ok(())
        } else {
            Err(Error::Input(format!("{name} takes {k} arguments")))
        }
    };
    match name {
        "uniform" => {
            arity(2)?;
            let (a, b) = if args.is_empty() { (0.0, 1.0) } else { (args[0], args[1]) };
            Ok(Arc::new(Uniform::new(a, b)?))
        }
        "normal" => {
            arity(2)?;
            let (m, s) = if args.is_empty() { (0.0, 1.0) } else { (args[0], args[1]) };
            Ok(Arc::new(Normal::new(m, s)?))
        }
        "exponential" => {
            arity(1)?;
            Ok(Arc::new(Exponential::new(args.first().copied().unwrap_or(1.0))?))
        }
        other => Err(Error::Input(format!("unknown marginal '{other}'"))),
    }
}

/// Integral of `g` against the support of `m`, split at its breakpoints.
fn integrate_on<M: Marginal + ?Sized, G: Fn(f64) -> f64>(m: &M, g: G) -> Result<f64> {
    let (lo, hi) = m.support();
    let mut knots = vec![lo];
    knots.extend(m.breakpoints());
    knots.push(hi);
    let (c, s) = (m.mean(), m.std_dev());
    knots
        .windows(2)
        .map(|w| quad::integrate(&g, w[0], w[1], c, s, quad::ABS_TOL))
        .sum()
}

/// `a = ∫ x f(x) (2F(x) - 1) dx`.
pub fn fgm_moment<M: Marginal + ?Sized>(m: &M) -> Result<f64> {
    integrate_on(m, |x| x * m.pdf(x) * (2.0 * m.cdf(x) - 1.0))
}

/// `∫ F(x)(1 - F(x)) dx`; equals [`fgm_moment`] by integration by parts.
pub fn cdf_spread_integral<M: Marginal + ?Sized>(m: &M) -> Result<f64> {
    integrate_on(m, |x| {
        let f = m.cdf(x);
        f * (1.0 - f)
    })
}

#[derive(Debug, Clone)]
pub struct FgmSpec {
    pub x: Arc<dyn Marginal>,
    pub s: Arc<dyn Marginal>,
    pub sigma_x: f64,
    pub sigma_s: f64,
    pub a_x: f64,
    pub a_s: f64,
    pub rho_param: f64,
    pub rho_target: f64,
}

impl FgmSpec {
    /// Largest reachable `|ρ_XS|` for these marginals.
    pub fn max_correlation(&self) -> f64 {
        self.a_x * self.a_s / (self.sigma_x * self.sigma_s)
    }

    pub fn joint_density(&self, x: f64, s: f64) -> f64 {
        let (fx, fs) = (self.x.cdf(x), self.s.cdf(s));
        self.x.pdf(x) * self.s.pdf(s) * (1.0 + self.rho_param * (2.0 * fx - 1.0) * (2.0 * fs - 1.0))
    }

    /// `F_{S|X}(s | x) = F_S(s) [1 - ρ (2F_X(x) - 1)(1 - F_S(s))]`, the
    /// `x`-derivative of the copula `uv[1 + ρ(1 - u)(1 - v)]`.
    pub fn conditional_cdf(&self, s: f64, x: f64) -> f64 {
        let w = self.s.cdf(s);
        conditional_from_uniform(w, self.conditional_coefficient(x))
    }

    fn conditional_coefficient(&self, x: f64) -> f64 {
        -self.rho_param * (2.0 * self.x.cdf(x) - 1.0)
    }
}

fn conditional_from_uniform(w: f64, c: f64) -> f64 {
    w * (1.0 + c * (1.0 - w))
}

pub fn build_fgm(x: Arc<dyn Marginal>, s: Arc<dyn Marginal>, rho_target: f64) -> Result<FgmSpec> {
    if !(rho_target.is_finite() && (-1.0..=1.0).contains(&rho_target)) {
        return Err(Error::Range(format!("target correlation {rho_target} outside [-1, 1]")));
    }
    let (sigma_x, sigma_s) = (x.std_dev(), s.std_dev());
    if !(sigma_x.is_finite() && sigma_x > 0.0 && sigma_s.is_finite() && sigma_s > 0.0) {
        return Err(Error::Range("marginals need finite positive variance".into()));
    }
    let a_x = fgm_moment(x.as_ref())?;
    let a_s = fgm_moment(s.as_ref())?;
    for (name, a) in [("a_X", a_x), ("a_S", a_s)] {
        if !(a > 0.0) {
            return Err(Error::QuadratureFailure(format!("{name} = {a} is not positive")));
        }
    }
    let rho_param = sigma_x * sigma_s / (a_x * a_s) * rho_target;
    if rho_param.abs() > 1.0 + 1e-12 {
        return Err(Error::OutOfRange {
            rho_target,
            rho_param,
            limit: a_x * a_s / (sigma_x * sigma_s),
        });
    }
    Ok(FgmSpec {
        x,
        s,
        sigma_x,
        sigma_s,
        a_x,
        a_s,
        rho_param: rho_param.clamp(-1.0, 1.0),
        rho_target,
    })
}

/// Bisection tolerance on the CDF scale.
pub const INVERSION_TOL: f64 = 1e-10;

/// Solves `w (1 + c (1 - w)) = u` for `w ∈ [0, 1]`.
fn invert_conditional(u: f64, c: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if !(conditional_from_uniform(lo, c) <= u && u <= conditional_from_uniform(hi, c)) {
        return Err(Error::InversionFailure(format!("u = {u} not bracketed for c = {c}")));
    }
    while hi - lo > INVERSION_TOL {
        let mid = 0.5 * (lo + hi);
        if conditional_from_uniform(mid, c) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn sample_fgm(spec: &FgmSpec, n: usize, seed: u64) -> Result<SampleSet> {
    sample_fgm_stream(spec, n, seed, 0)
}

/// `X` by inverse CDF, then `S` from the conditional CDF given `X`.
pub fn sample_fgm_stream(spec: &FgmSpec, n: usize, seed: u64, stream: u64) -> Result<SampleSet> {
    let mut rng = stream_rng(seed, stream);
    let mut data = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let x = spec.x.quantile(u1)?;
        let w = invert_conditional(u2, spec.conditional_coefficient(x))?;
        let s = spec.s.quantile(w)?;
        data.push(x);
        data.push(s);
    }
    SampleSet::new(data, vec!["X".into(), "S".into()], seed, stream)
}

/// Kolmogorov–Smirnov distance between a sample and a CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa * sbb).sqrt()
}

pub const CORRELATION_TOL: f64 = 0.01;
pub const KS_TOL: f64 = 0.005;

#[derive(Debug, Clone, Serialize)]
pub struct FgmReport {
    pub marginal_x: String,
    pub marginal_s: String,
    pub n: usize,
    pub seed: u64,
    pub target_rho: f64,
    pub rho_param: f64,
    pub empirical_rho: f64,
    pub a_x: f64,
    pub a_s: f64,
    /// `E{XS} - E{X}E{S}` from the sample.
    pub empirical_cross_moment: f64,
    /// `ρ a_X a_S`.
    pub predicted_cross_moment: f64,
    pub marginal_ks_x: f64,
    pub marginal_ks_s: f64,
    pub pass: bool,
}

/// Samples the construction and checks the achieved correlation and both marginals.
pub fn verify_fgm(spec: &FgmSpec, n: usize, seed: u64) -> Result<FgmReport> {
    let sample = sample_fgm(spec, n, seed)?;
    let (xs, ss) = (sample.column(0), sample.column(1));
    let empirical_rho = pearson(&xs, &ss);
    let nf = n as f64;
    let (mx, ms) = (xs.iter().sum::<f64>() / nf, ss.iter().sum::<f64>() / nf);
    let exs = xs.iter().zip(&ss).map(|(x, s)| x * s).sum::<f64>() / nf;
    let marginal_ks_x = ks_distance(&xs, |x| spec.x.cdf(x));
    let marginal_ks_s = ks_distance(&ss, |s| spec.s.cdf(s));
    let pass = (empirical_rho - spec.rho_target).abs() < CORRELATION_TOL
        && marginal_ks_x < KS_TOL
        && marginal_ks_s < KS_TOL;
    Ok(FgmReport {
        marginal_x: spec.x.name(),
        marginal_s: spec.s.name(),
        n,
        seed,
        target_rho: spec.rho_target,
        rho_param: spec.rho_param,
        empirical_rho,
        a_x: spec.a_x,
        a_s: spec.a_s,
        empirical_cross_moment: exs - mx * ms,
        predicted_cross_moment: spec.rho_param * spec.a_x * spec.a_s,
        marginal_ks_x,
        marginal_ks_s,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn uni() -> Arc<dyn Marginal> {
        Arc::new(Uniform::new(0.0, 1.0).unwrap())
    }
    fn std_normal() -> Arc<dyn Marginal> {
        Arc::new(Normal::new(0.0, 1.0).unwrap())
    }

    #[test]
    fn uniform_moments() {
        // ∫₀¹ x(2x - 1) dx = 2/3 - 1/2
        let a = fgm_moment(&Uniform::new(0.0, 1.0).unwrap()).unwrap();
        assert!((a - 1.0 / 6.0).abs() < 1e-12);
        let spec = build_fgm(uni(), uni(), 0.1).unwrap();
        assert!((spec.rho_param - 0.3).abs() < 1e-10);
        assert!((spec.max_correlation() - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn normal_moments() {
        let spec = build_fgm(std_normal(), std_normal(), 0.3).unwrap();
        assert!((spec.a_x - 1.0 / PI.sqrt()).abs() < 1e-9);
        assert!((spec.rho_param - PI * 0.3).abs() < 1e-8);
        assert!((spec.max_correlation() - 1.0 / PI).abs() < 1e-9);
        let err = build_fgm(std_normal(), std_normal(), 0.5).unwrap_err();
        assert_eq!(err.name(), "OutOfRange");
    }

    #[test]
    fn exponential_moment() {
        // a = 1/(2λ) for the exponential law
        let a = fgm_moment(&Exponential::new(2.0).unwrap()).unwrap();
        assert!((a - 0.25).abs() < 1e-9);
    }

    #[test]
    fn spread_integral_equals_moment() {
        let marginals: Vec<Arc<dyn Marginal>> = vec![
            uni(),
            Arc::new(Uniform::new(-2.0, 5.0).unwrap()),
            Arc::new(Tabulated::new(vec![(0.0, 0.0), (1.0, 0.2), (1.5, 0.7), (4.0, 1.0)]).unwrap()),
            Arc::new(Exponential::new(0.5).unwrap()),
        ];
        for m in marginals {
            let a = fgm_moment(m.as_ref()).unwrap();
            let b = cdf_spread_integral(m.as_ref()).unwrap();
            assert!((a - b).abs() < 1e-6, "{}: {a} vs {b}", m.name());
        }
    }

    #[test]
    fn zero_target_is_product_density() {
        let spec = build_fgm(uni(), std_normal(), 0.0).unwrap();
        for &(x, s) in &[(0.1, -1.0), (0.5, 0.0), (0.9, 2.2)] {
            let prod = spec.x.pdf(x) * spec.s.pdf(s);
            assert_eq!(spec.joint_density(x, s), prod);
        }
    }

    #[test]
    fn conditional_cdf_limits_and_monotonicity() {
        let spec = build_fgm(uni(), uni(), 0.3).unwrap();
        for x in [0.05, 0.5, 0.95] {
            assert_eq!(spec.conditional_cdf(0.0, x), 0.0);
            assert!((spec.conditional_cdf(1.0, x) - 1.0).abs() < 1e-15);
            let mut prev = 0.0;
            for i in 1..=100 {
                let v = spec.conditional_cdf(i as f64 / 100.0, x);
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn conditional_cdf_integrates_joint_density() {
        let spec = build_fgm(uni(), std_normal(), 0.25).unwrap();
        for &(x, s) in &[(0.2, -0.5), (0.8, 0.3), (0.5, 1.5)] {
            let direct = quad::integrate(|t| spec.joint_density(x, t), f64::NEG_INFINITY, s, 0.0, 1.0, 1e-12).unwrap();
            let want = direct / spec.x.pdf(x);
            assert!((spec.conditional_cdf(s, x) - want).abs() < 1e-9);
        }
    }

    #[test]
    fn inversion_round_trip() {
        for c in [-1.0, -0.4, 0.0, 0.7, 1.0] {
            for u in [0.0, 0.01, 0.3, 0.77, 1.0] {
                let w = invert_conditional(u, c).unwrap();
                assert!((conditional_from_uniform(w, c) - u).abs() < 2e-10);
            }
        }
        assert_eq!(invert_conditional(1.5, 0.0).unwrap_err().name(), "InversionFailure");
    }

    #[test]
    fn quantiles() {
        let n = Normal::new(1.0, 2.0).unwrap();
        assert!((n.quantile(0.5).unwrap() - 1.0).abs() < 1e-12);
        let e = Exponential::new(2.0).unwrap();
        assert!((e.cdf(e.quantile(0.3).unwrap()) - 0.3).abs() < 1e-14);
        let t = Tabulated::new(vec![(0.0, 0.0), (1.0, 0.5), (3.0, 1.0)]).unwrap();
        assert!((t.quantile(0.75).unwrap() - 2.0).abs() < 1e-14);
        // default bisection path
        #[derive(Debug)]
        struct Logistic;
        impl Marginal for Logistic {
            fn name(&self) -> String {
                "logistic".into()
            }
            fn pdf(&self, x: f64) -> f64 {
                let e = (-x).exp();
                e / (1.0 + e).powi(2)
            }
            fn cdf(&self, x: f64) -> f64 {
                1.0 / (1.0 + (-x).exp())
            }
            fn mean(&self) -> f64 {
                0.0
            }
            fn variance(&self) -> f64 {
                PI * PI / 3.0
            }
            fn support(&self) -> (f64, f64) {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
        }
        let q = Logistic.quantile(0.9).unwrap();
        assert!((q - 9f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn tabulated_csv() {
        let csv = "x,F\n0,0\n1,0.25\n2,1\n";
        let t = Tabulated::from_csv(csv.as_bytes()).unwrap();
        assert_eq!(t.cdf(0.5), 0.125);
        assert_eq!(t.pdf(1.5), 0.75);
        assert!((t.mean() - (0.25 * 0.5 + 0.75 * 1.5)).abs() < 1e-15);
        assert!(Tabulated::from_csv("0,0\n1,0.5\n".as_bytes()).is_err());
        assert!(Tabulated::from_csv("0,0\n1,0.6\n0.5,1\n".as_bytes()).is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!(parse_marginal("uniform").unwrap().name(), "uniform(0, 1)");
        assert_eq!(parse_marginal("normal(1, 2)").unwrap().name(), "normal(1, 2)");
        assert_eq!(parse_marginal("exponential(3)").unwrap().name(), "exponential(3)");
        assert!(parse_marginal("cauchy").is_err());
        assert!(parse_marginal("uniform(1)").is_err());
        assert!(parse_marginal("uniform(2,1)").is_err());
    }

    #[test]
    fn ks_of_perfect_grid() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!((ks_distance(&v, |x| x.clamp(0.0, 1.0)) - 0.0005).abs() < 1e-12);
    }

    #[test]
    fn small_sample_correlation_sign() {
        let spec = build_fgm(uni(), uni(), -0.3).unwrap();
        let r = verify_fgm(&spec, 200_000, 3).unwrap();
        assert!((r.empirical_rho + 0.3).abs() < 0.02, "{}", r.empirical_rho);
    }
}
