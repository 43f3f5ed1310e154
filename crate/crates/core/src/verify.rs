//! Self-check suites run by `noisypaper verify`. Each check records the value
//! it compared, the reference, the achieved error and its tolerance.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::copula::{build_fgm, verify_fgm, Marginal};
use crate::error::Result;
use crate::infotheory::{mi_side_noise, mutual_information};
use crate::mc_oracle::{mc_rate_estimate_stream, mc_side_noise_mi, numeric_alpha_star, stream_rng};
use crate::minors::{derived_covariances, xz_side_covariance};
use crate::model::random_model;
use crate::rates::{
    alpha_star, capacity_markov, capacity_markov_via_mi, channel_minors, lower_bound_general, rate_alpha,
    upper_bound_minor_path,
};
use crate::typicality::self_interference_demo;

pub const IDENTITY_RTOL: f64 = 1e-10;
pub const BOUND_RTOL: f64 = 1e-10;
pub const ARGMAX_TOL: f64 = 1e-6;
pub const MC_TOL: f64 = 0.01;
/// Smallest correlation-matrix eigenvalue accepted for random models.
pub const MIN_EIG: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Minors,
    Rates,
    Mc,
    Copula,
    Typicality,
    All,
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "minors" => Suite::Minors,
            "rates" => Suite::Rates,
            "mc" => Suite::Mc,
            "copula" => Suite::Copula,
            "typicality" => Suite::Typicality,
            "all" => Suite::All,
            other => return Err(format!("unknown suite '{other}'")),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub error: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    fn abs(name: impl Into<String>, value: f64, reference: f64, tol: f64) -> Self {
        let error = (value - reference).abs();
        Self::new(name.into(), value, reference, error, tol)
    }

    fn rel(name: impl Into<String>, value: f64, reference: f64, tol: f64) -> Self {
        let error = (value - reference).abs() / reference.abs().max(f64::MIN_POSITIVE);
        Self::new(name.into(), value, reference, error, tol)
    }

    fn new(name: String, value: f64, reference: f64, error: f64, tol: f64) -> Self {
        Self {
            name,
            value,
            reference,
            error,
            tol,
            pass: error < tol,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub max_error: f64,
    pub pass: bool,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64, checks: Vec<Check>) -> Self {
        let max_error = checks.iter().map(|c| c.error).fold(0.0, f64::max);
        let pass = checks.iter().all(|c| c.pass);
        Self {
            suite: suite.into(),
            seed,
            checks,
            max_error,
            pass,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub trials: usize,
    pub n: usize,
    pub seed: u64,
    pub marginal: Arc<dyn Marginal>,
    pub rho: f64,
    pub alphas_per_model: usize,
}

/// Determinants of the assembled covariances against their minor expansions.
pub fn minors_suite(trials: usize, alphas: usize, seed: u64) -> SuiteReport {
    let mut rng = stream_rng(seed, 0);
    let mut checks = Vec::new();
    for t in 0..trials {
        let model = random_model(&mut rng, t % 2 == 0, MIN_EIG);
        let m = channel_minors(&model);
        let eff = model.with_unit_s2_if_absent();
        let covs = derived_covariances(&eff, 0.0);
        checks.push(Check::rel(format!("det_y_s2[{t}]"), m.det_y_s2(), covs.y_s2.det(), IDENTITY_RTOL));
        checks.push(Check::rel(format!("det_u_s1[{t}]"), m.det_u_s1(), covs.u_s1.det(), IDENTITY_RTOL));
        let xz = xz_side_covariance(&eff);
        checks.push(Check::rel(format!("det_xz_s1_s2[{t}]"), m.det_xz_s1_s2(), xz.det(), IDENTITY_RTOL));
        for j in 0..alphas {
            let alpha = rand::Rng::random_range(&mut rng, -2.0..2.0);
            let covs = derived_covariances(&eff, alpha);
            checks.push(Check::rel(
                format!("det_u_y_s2[{t},{j}]"),
                m.det_u_y_s2(alpha),
                covs.u_y_s2.det(),
                IDENTITY_RTOL,
            ));
        }
    }
    SuiteReport::new("minors", seed, checks)
}

/// Closed-form bounds against each other and against the numeric argmax.
pub fn rates_suite(trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = stream_rng(seed, 1);
    let mut checks = Vec::new();
    for t in 0..trials {
        let model = random_model(&mut rng, true, MIN_EIG);
        let c = capacity_markov(&model)?.value_nats;
        checks.push(Check::rel(format!("lower_bound[{t}]"), lower_bound_general(&model)?.value_nats, c, BOUND_RTOL));
        checks.push(Check::rel(
            format!("upper_bound[{t}]"),
            upper_bound_minor_path(&model)?.value_nats,
            c,
            BOUND_RTOL,
        ));
        checks.push(Check::rel(
            format!("capacity_via_mi[{t}]"),
            capacity_markov_via_mi(&model)?.value_nats,
            c,
            1e-12,
        ));
        let closed = alpha_star(&model)?;
        checks.push(Check::abs(
            format!("alpha_star[{t}]"),
            numeric_alpha_star(&model, 1e-9)?,
            closed,
            ARGMAX_TOL,
        ));
        let r = mutual_information(&model.correlation_matrix(), &[1, 2], &[3])?;
        checks.push(Check::abs(format!("mi_side_noise[{t}]"), mi_side_noise(&model), r, 1e-10));
    }
    Ok(SuiteReport::new("rates", seed, checks))
}

/// Plug-in estimates from `n` samples against the closed forms. Models run
/// in parallel on distinct RNG streams.
pub fn mc_suite(models: usize, n: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = stream_rng(seed, 2);
    let picks: Vec<_> = (0..models)
        .map(|t| {
            let model = random_model(&mut rng, t % 2 == 0, 0.05);
            let alpha = rand::Rng::random_range(&mut rng, -1.0..1.5);
            (model, alpha)
        })
        .collect();
    let checks: Vec<Vec<Check>> = picks
        .par_iter()
        .enumerate()
        .map(|(t, (model, alpha))| -> Result<Vec<Check>> {
            let stream = 100 + 2 * t as u64;
            let closed = rate_alpha(model, *alpha)?.value_nats;
            let mc = mc_rate_estimate_stream(model, *alpha, n, seed, stream)?;
            let mi = mc_side_noise_mi(model, n, seed, stream + 1)?;
            Ok(vec![
                Check::abs(format!("rate_alpha[{t}]"), mc, closed, MC_TOL),
                Check::abs(format!("mi_side_noise[{t}]"), mi, mi_side_noise(model), MC_TOL),
            ])
        })
        .collect::<Result<_>>()?;
    Ok(SuiteReport::new("mc", seed, checks.into_iter().flatten().collect()))
}

/// Correlation and marginal fit of the copula sampler.
pub fn copula_suite(marginal: Arc<dyn Marginal>, rho: f64, n: usize, seed: u64) -> Result<SuiteReport> {
    let spec = build_fgm(marginal.clone(), marginal, rho)?;
    let r = verify_fgm(&spec, n, seed)?;
    let se = cross_moment_se(&spec, n);
    let checks = vec![
        Check::abs("empirical_rho", r.empirical_rho, r.target_rho, crate::copula::CORRELATION_TOL),
        Check::abs("marginal_ks_x", r.marginal_ks_x, 0.0, crate::copula::KS_TOL),
        Check::abs("marginal_ks_s", r.marginal_ks_s, 0.0, crate::copula::KS_TOL),
        Check::abs("cross_moment", r.empirical_cross_moment, r.predicted_cross_moment, 3.0 * se),
    ];
    Ok(SuiteReport::new("copula", seed, checks))
}

// Conservative standard error of the sample covariance: σ_X σ_S / √n.
fn cross_moment_se(spec: &crate::copula::FgmSpec, n: usize) -> f64 {
    spec.sigma_x * spec.sigma_s / (n as f64).sqrt()
}

/// Typicality statistic for `X = S1` at `n` against `n·Q1`.
pub fn typicality_suite(n: usize, seed: u64) -> Result<SuiteReport> {
    let r = self_interference_demo(n, 1.0, seed)?;
    let checks = vec![
        Check::abs("statistic_over_n", r.ratio, 1.0, 0.1),
        Check::new(
            "separation".into(),
            r.statistic / r.independent_scale,
            10.0,
            if r.statistic / r.independent_scale > 10.0 { 0.0 } else { 1.0 },
            0.5,
        ),
        Check::new("copy_infeasible".into(), r.statistic, r.delta, if r.feasible { 1.0 } else { 0.0 }, 0.5),
    ];
    Ok(SuiteReport::new("typicality", seed, checks))
}

/// Runs the requested suite(s). `All` returns one report per suite.
pub fn run(suite: Suite, opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
    let mut out = Vec::new();
    let want = |s: Suite| suite == s || suite == Suite::All;
    if want(Suite::Minors) {
        out.push(minors_suite(opts.trials, opts.alphas_per_model, opts.seed));
    }
    if want(Suite::Rates) {
        out.push(rates_suite(opts.trials, opts.seed)?);
    }
    if want(Suite::Mc) {
        out.push(mc_suite(10, opts.n, opts.seed)?);
    }
    if want(Suite::Copula) {
        out.push(copula_suite(opts.marginal.clone(), opts.rho, opts.n, opts.seed)?);
    }
    if want(Suite::Typicality) {
        out.push(typicality_suite(opts.n.min(1_000_000), opts.seed)?);
    }
    Ok(out)
}
