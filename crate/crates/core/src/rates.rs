//! Closed-form rates and capacities, in nats.
//!
//! Two independent routes are kept side by side: minor combinations of `K̂`
//! (`rate_alpha`, `alpha_star`, `upper_bound_minor_path`) and expressions in
//! the correlation coefficients (`lower_bound_general`, `capacity_markov`).
//! Agreement between them is what the test suites check.

use std::f64::consts::LN_2;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::infotheory::{mi_side_noise, DEGENERATE_TOL};
use crate::minors::{compute_minors, derived_covariances, xz_side_covariance, MinorSet};
use crate::model::{assemble_covariance, new_channel, ChannelModel, ChannelParams, S1, X, Z};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FormulaPath {
    RAlpha,
    AlphaStarClosed,
    LowerGeneral,
    CapacityMarkov,
    UpperMinorPath,
    SpecialCase,
    Costa,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub value_nats: f64,
    pub formula_path: FormulaPath,
    pub alpha_used: Option<f64>,
}

impl RateReport {
    fn new(value_nats: f64, formula_path: FormulaPath, alpha_used: Option<f64>) -> Self {
        Self {
            value_nats,
            formula_path,
            alpha_used,
        }
    }

    pub fn bits(&self) -> f64 {
        self.value_nats / LN_2
    }

    pub fn is_infinite(&self) -> bool {
        self.value_nats.is_infinite()
    }
}

/// JSON number, or `"inf"` / `"-inf"`.
pub(crate) fn serialize_real<S: Serializer>(v: f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v == f64::INFINITY {
        s.serialize_str("inf")
    } else if v == f64::NEG_INFINITY {
        s.serialize_str("-inf")
    } else {
        s.serialize_f64(v)
    }
}

struct Real(f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_real(self.0, s)
    }
}

impl Serialize for RateReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RateReport", 4)?;
        st.serialize_field("nats", &Real(self.value_nats))?;
        st.serialize_field("bits", &Real(self.bits()))?;
        st.serialize_field("path", &self.formula_path)?;
        st.serialize_field("alpha", &self.alpha_used)?;
        st.end()
    }
}

/// Minors of the channel with an absent `S2` replaced by an independent
/// unit-power one (rates are unchanged, minors stay non-degenerate).
pub fn channel_minors(model: &ChannelModel) -> MinorSet {
    compute_minors(&assemble_covariance(&model.with_unit_s2_if_absent()))
}

fn sides_collinear(model: &ChannelModel) -> bool {
    1.0 - model.rho_s1s2 * model.rho_s1s2 <= DEGENERATE_TOL
}

fn input_determined_by_s1(model: &ChannelModel) -> bool {
    1.0 - model.rho_xs1 * model.rho_xs1 <= DEGENERATE_TOL
}

/// `R(α) = I(U; Y, S2) - I(U; S1)` for `U = αS1 + X`, from minors of `K̂`.
///
/// Returns `+∞` when `det cov(U,Y,S2)` vanishes with a positive numerator and
/// `-∞` when `U` carries infinite information about `S1` alone.
pub fn rate_alpha(model: &ChannelModel, alpha: f64) -> Result<RateReport> {
    let eff = model.with_unit_s2_if_absent();
    let m = channel_minors(model);
    let covs = derived_covariances(&eff, alpha);

    let num = m.det_u_s1() * m.det_y_s2();
    let num_scale = covs.u_s1.diag_product() * covs.y_s2.diag_product();
    let den = eff.q1 * m.det_u_y_s2(alpha);
    let den_scale = eff.q1 * covs.u_y_s2.diag_product();

    let num_zero = num <= DEGENERATE_TOL * num_scale;
    let den_zero = den <= DEGENERATE_TOL * den_scale;
    let value = match (num_zero, den_zero) {
        (true, true) => return Err(Error::DegenerateDenominator("R(alpha)")),
        (false, true) => f64::INFINITY,
        (true, false) => f64::NEG_INFINITY,
        (false, false) => 0.5 * (num / den).ln(),
    };
    Ok(RateReport::new(value, FormulaPath::RAlpha, Some(alpha)))
}

/// Maximizer of [`rate_alpha`]:
/// `((d_N + d_L0) - (d_A1 + d_L1)) / (d_N + d_P + 2 d_L0)`.
pub fn alpha_star(model: &ChannelModel) -> Result<f64> {
    let eff = model.with_unit_s2_if_absent();
    let m = channel_minors(model);
    let den = m.det_xz_s1_s2();
    if den.abs() <= DEGENERATE_TOL * xz_side_covariance(&eff).diag_product() {
        return Err(Error::DegenerateDenominator("alpha*"));
    }
    Ok(((m.d_n + m.d_l0) - (m.d_a1 + m.d_l1)) / den)
}

/// General achievable rate `R_G`, written in powers and correlation
/// coefficients at `σ_X = √P`, `σ_Z = √N`. No Markov assumption.
pub fn lower_bound_general(model: &ChannelModel) -> Result<RateReport> {
    let alpha = alpha_star(model).ok();
    if input_determined_by_s1(model) {
        return Ok(RateReport::new(0.0, FormulaPath::LowerGeneral, alpha));
    }
    if sides_collinear(model) {
        // S2 duplicates S1 at the receiver: R(α) is constant in α.
        let r = rate_alpha(model, 0.0)?;
        return Ok(RateReport::new(r.value_nats.max(0.0), FormulaPath::LowerGeneral, alpha));
    }

    let (sx, sz) = (model.p.sqrt(), model.n.sqrt());
    let one_r = 1.0 - model.rho_xs1 * model.rho_xs1;
    let one_b = 1.0 - model.rho_s1s2 * model.rho_s1s2;
    let k = model.rho_xs1 * model.rho_s1z - model.rho_xz;
    let lead = sx * one_r - sz * k;
    let num = lead * lead * one_b;
    let den = sz * sz * (one_r * model.d_p_norm() - k * k * one_b);

    let num_zero = num <= DEGENERATE_TOL * (sx + sz) * (sx + sz);
    let value = if den <= DEGENERATE_TOL * sz * sz {
        if num_zero {
            return Err(Error::DegenerateDenominator("R_G"));
        }
        f64::INFINITY
    } else {
        0.5 * (num / den).ln_1p()
    };

    #[cfg(debug_assertions)]
    if let Some(a) = alpha {
        if value.is_finite() && den > 1e-6 * sz * sz {
            if let Ok(r) = rate_alpha(model, a) {
                let tol = 1e-8 * (1.0 + value.abs());
                debug_assert!(
                    (r.value_nats - value).abs() <= tol,
                    "R_G = {value} disagrees with R(alpha*) = {} for {model:?}",
                    r.value_nats
                );
            }
        }
    }

    Ok(RateReport::new(value, FormulaPath::LowerGeneral, alpha))
}

fn require_markov(model: &ChannelModel, what: &'static str) -> Result<()> {
    if model.markov_noise {
        Ok(())
    } else {
        Err(Error::MarkovRequired(what))
    }
}

/// Capacity under `X -> (S1,S2) -> Z`:
/// `½ log(1 + (P/N)(1 - ρ_XS1²)(1 - ρ_S1S2²) / d_P^𝒩)`.
///
/// `ρ_XS1 = ±1` gives exactly 0 regardless of the denominator.
pub fn capacity_markov(model: &ChannelModel) -> Result<RateReport> {
    require_markov(model, "capacity_markov")?;
    if input_determined_by_s1(model) {
        return Ok(RateReport::new(0.0, FormulaPath::CapacityMarkov, None));
    }
    let one_r = 1.0 - model.rho_xs1 * model.rho_xs1;
    let snr = model.p / model.n;

    let gain = if sides_collinear(model) {
        // limit of (1 - ρ_S1S2²) / d_P^𝒩 with ρ_S2Z = ±ρ_S1Z
        let r = 1.0 - model.rho_s1z * model.rho_s1z;
        if r <= DEGENERATE_TOL {
            f64::INFINITY
        } else {
            1.0 / r
        }
    } else {
        let d = model.d_p_norm();
        if d <= DEGENERATE_TOL {
            f64::INFINITY
        } else {
            (1.0 - model.rho_s1s2 * model.rho_s1s2) / d
        }
    };
    let value = if gain.is_infinite() {
        f64::INFINITY
    } else {
        0.5 * (snr * one_r * gain).ln_1p()
    };

    #[cfg(debug_assertions)]
    {
        let alt = capacity_markov_via_mi(model)?.value_nats;
        debug_assert!(
            alt == value || (alt - value).abs() <= 1e-12 * value.abs().max(f64::MIN_POSITIVE),
            "capacity forms disagree: {value} vs {alt}"
        );
    }

    Ok(RateReport::new(value, FormulaPath::CapacityMarkov, None))
}

/// The same capacity written through the side-information/noise mutual
/// information: `½ log(1 + (P/N)(1 - ρ_XS1²) exp(2 I(S1 S2; Z)))`.
pub fn capacity_markov_via_mi(model: &ChannelModel) -> Result<RateReport> {
    require_markov(model, "capacity_markov")?;
    if input_determined_by_s1(model) {
        return Ok(RateReport::new(0.0, FormulaPath::CapacityMarkov, None));
    }
    let mi = mi_side_noise(model);
    let one_r = 1.0 - model.rho_xs1 * model.rho_xs1;
    let value = if mi.is_infinite() {
        f64::INFINITY
    } else {
        0.5 * (model.p / model.n * one_r * (2.0 * mi).exp()).ln_1p()
    };
    Ok(RateReport::new(value, FormulaPath::CapacityMarkov, None))
}

/// Upper bound `max I(X; Y | S1, S2) = ½ log(1 + (d_N + 2 d_L0) / d_P)`,
/// computed from minors only.
pub fn upper_bound_minor_path(model: &ChannelModel) -> Result<RateReport> {
    require_markov(model, "upper_bound_minor_path")?;
    if input_determined_by_s1(model) {
        return Ok(RateReport::new(0.0, FormulaPath::UpperMinorPath, None));
    }
    let eff = model.with_unit_s2_if_absent();
    let k = assemble_covariance(&eff);

    let (num, den, scale) = if sides_collinear(model) {
        // S2 carries nothing beyond S1; condition on S1 alone.
        let v = k.get(X, X) + k.get(Z, Z) + 2.0 * k.get(X, Z);
        let c = k.get(X, S1) + k.get(Z, S1);
        let det_xz_s1 = v * k.get(S1, S1) - c * c;
        let det_s1_z = k.minor(&[S1, Z], &[S1, Z]);
        (det_xz_s1 - det_s1_z, det_s1_z, k.get(S1, S1) * k.get(Z, Z))
    } else {
        let m = compute_minors(&k);
        (m.d_n + 2.0 * m.d_l0, m.d_p, k.principal(&[1, 2, 3]).diag_product())
    };

    let value = if den <= DEGENERATE_TOL * scale {
        if num <= DEGENERATE_TOL * scale {
            return Err(Error::DegenerateDenominator("I*(X;Y|S1,S2)"));
        }
        f64::INFINITY
    } else {
        0.5 * (num / den).ln_1p()
    };
    Ok(RateReport::new(value, FormulaPath::UpperMinorPath, None))
}

/// Reduced channels with closed-form capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SpecialCase {
    /// Noise independent of everything, `S2` absent; parameter `ρ_XS1`.
    NoiseIndependent { rho_xs1: f64 },
    /// Only the transmitter sees noise-correlated side information.
    TxOnly { rho_s1z: f64 },
    /// Only the receiver sees noise-correlated side information.
    RxOnly { rho_s2z: f64 },
    /// Uncorrelated side informations, each correlated with the noise.
    UncorrSides { rho_s1z: f64, rho_s2z: f64 },
    /// Dirty-paper channel with independent input.
    Costa,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && (-1.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Range(format!("{name} = {v} outside [-1, 1]")))
    }
}

fn half_log_gain(snr: f64, denom: f64) -> f64 {
    if denom <= DEGENERATE_TOL {
        f64::INFINITY
    } else {
        0.5 * (snr / denom).ln_1p()
    }
}

pub fn special_case_capacity(mode: SpecialCase, p: f64, n: f64) -> Result<RateReport> {
    if !(p.is_finite() && p > 0.0 && n.is_finite() && n > 0.0) {
        return Err(Error::Range(format!("powers must be positive (p = {p}, n = {n})")));
    }
    let snr = p / n;
    let value = match mode {
        SpecialCase::NoiseIndependent { rho_xs1 } => {
            check_unit("rho_xs1", rho_xs1)?;
            let one_r = 1.0 - rho_xs1 * rho_xs1;
            if one_r <= DEGENERATE_TOL {
                0.0
            } else {
                0.5 * (snr * one_r).ln_1p()
            }
        }
        SpecialCase::TxOnly { rho_s1z } => {
            check_unit("rho_s1z", rho_s1z)?;
            half_log_gain(snr, 1.0 - rho_s1z * rho_s1z)
        }
        SpecialCase::RxOnly { rho_s2z } => {
            check_unit("rho_s2z", rho_s2z)?;
            half_log_gain(snr, 1.0 - rho_s2z * rho_s2z)
        }
        SpecialCase::UncorrSides { rho_s1z, rho_s2z } => {
            check_unit("rho_s1z", rho_s1z)?;
            check_unit("rho_s2z", rho_s2z)?;
            half_log_gain(snr, 1.0 - rho_s1z * rho_s1z - rho_s2z * rho_s2z)
        }
        SpecialCase::Costa => 0.5 * snr.ln_1p(),
    };
    let path = if mode == SpecialCase::Costa {
        FormulaPath::Costa
    } else {
        FormulaPath::SpecialCase
    };
    Ok(RateReport::new(value, path, None))
}

/// The full Markov channel a special case stands for. An absent `S2` is
/// encoded as `q2 = 0`; an absent `S1` as a unit-power `S1` independent of
/// everything (it is known only to the transmitter and so is irrelevant).
pub fn special_case_model(mode: SpecialCase, p: f64, n: f64) -> Result<ChannelModel> {
    let base = ChannelParams {
        p: Some(p),
        n: Some(n),
        q1: Some(1.0),
        markov_noise: Some(true),
        ..Default::default()
    };
    let params = match mode {
        SpecialCase::NoiseIndependent { rho_xs1 } => ChannelParams {
            q2: Some(0.0),
            rho_xs1: Some(rho_xs1),
            ..base
        },
        SpecialCase::TxOnly { rho_s1z } => ChannelParams {
            q2: Some(0.0),
            rho_s1z: Some(rho_s1z),
            ..base
        },
        SpecialCase::RxOnly { rho_s2z } => ChannelParams {
            q2: Some(1.0),
            rho_s2z: Some(rho_s2z),
            ..base
        },
        SpecialCase::UncorrSides { rho_s1z, rho_s2z } => ChannelParams {
            q2: Some(1.0),
            rho_s1z: Some(rho_s1z),
            rho_s2z: Some(rho_s2z),
            ..base
        },
        SpecialCase::Costa => ChannelParams { q2: Some(0.0), ..base },
    };
    new_channel(&params)
}
