//! Channel parameterization: powers, pairwise correlations of
//! `(X, S1, S2, Z)`, and the Markov constraints tying them together.
//!
//! Ordering throughout the crate is `(X, S1, S2, Z)` = indices `0..4`.
//! `q2 = 0` encodes a channel without receiver side information; all
//! correlations involving `S2` must then be exactly zero.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CovMatrix, MAX_DIM};

pub const X: usize = 0;
pub const S1: usize = 1;
pub const S2: usize = 2;
pub const Z: usize = 3;

/// Tolerance for a supplied redundant coefficient against its Markov value.
pub const MARKOV_TOL: f64 = 1e-9;

/// Raw parameter record, as read from JSON or CLI flags. Omitted `rho_xs2`
/// is derived from `rho_xs1 * rho_s1s2`; omitted `rho_xz` is derived from
/// `rho_xs1 * rho_s1z` when `markov_noise` is set and is zero otherwise.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub p: Option<f64>,
    pub q1: Option<f64>,
    pub q2: Option<f64>,
    pub n: Option<f64>,
    pub rho_xs1: Option<f64>,
    pub rho_xs2: Option<f64>,
    pub rho_xz: Option<f64>,
    pub rho_s1s2: Option<f64>,
    pub rho_s1z: Option<f64>,
    pub rho_s2z: Option<f64>,
    pub markov_noise: Option<bool>,
}

impl ChannelParams {
    /// Fields set in `other` replace those in `self`.
    pub fn overlay(mut self, other: &ChannelParams) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(p, q1, q2, n, rho_xs1, rho_xs2, rho_xz, rho_s1s2, rho_s1z, rho_s2z, markov_noise);
        self
    }
}

/// A validated channel. Immutable; construct through [`new_channel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelModel {
    pub p: f64,
    pub q1: f64,
    pub q2: f64,
    pub n: f64,
    pub rho_xs1: f64,
    pub rho_xs2: f64,
    pub rho_xz: f64,
    pub rho_s1s2: f64,
    pub rho_s1z: f64,
    pub rho_s2z: f64,
    pub markov_noise: bool,
}

impl<'de> Deserialize<'de> for ChannelModel {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let params = ChannelParams::deserialize(de)?;
        new_channel(&params).map_err(serde::de::Error::custom)
    }
}

fn check_power(name: &str, v: f64, allow_zero: bool) -> Result<()> {
    let ok = v.is_finite() && if allow_zero { v >= 0.0 } else { v > 0.0 };
    if ok {
        Ok(())
    } else {
        let bound = if allow_zero { ">= 0" } else { "> 0" };
        Err(Error::Range(format!("{name} = {v} must be finite and {bound}")))
    }
}

fn check_rho(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && (-1.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Range(format!("{name} = {v} outside [-1, 1]")))
    }
}

/// Validates a raw record and fills in the redundant coefficients.
///
/// `p` and `n` are required; `q1` and `q2` default to 1, correlations to 0.
pub fn new_channel(params: &ChannelParams) -> Result<ChannelModel> {
    let p = params.p.ok_or_else(|| Error::Range("input power p is required".into()))?;
    let n = params.n.ok_or_else(|| Error::Range("noise power n is required".into()))?;
    let q1 = params.q1.unwrap_or(1.0);
    let q2 = params.q2.unwrap_or(1.0);
    check_power("p", p, false)?;
    check_power("q1", q1, false)?;
    check_power("q2", q2, true)?;
    check_power("n", n, false)?;

    let rho_xs1 = params.rho_xs1.unwrap_or(0.0);
    let rho_s1s2 = params.rho_s1s2.unwrap_or(0.0);
    let rho_s1z = params.rho_s1z.unwrap_or(0.0);
    let rho_s2z = params.rho_s2z.unwrap_or(0.0);
    let markov_noise = params.markov_noise.unwrap_or(false);
    for (name, v) in [
        ("rho_xs1", Some(rho_xs1)),
        ("rho_xs2", params.rho_xs2),
        ("rho_xz", params.rho_xz),
        ("rho_s1s2", Some(rho_s1s2)),
        ("rho_s1z", Some(rho_s1z)),
        ("rho_s2z", Some(rho_s2z)),
    ] {
        if let Some(v) = v {
            check_rho(name, v)?;
        }
    }

    if q2 == 0.0 {
        for (name, v) in [("rho_xs2", params.rho_xs2), ("rho_s1s2", Some(rho_s1s2)), ("rho_s2z", Some(rho_s2z))] {
            if matches!(v, Some(v) if v != 0.0) {
                return Err(Error::Range(format!("{name} must be 0 when q2 = 0 (S2 absent)")));
            }
        }
    }

    let expected_xs2 = rho_xs1 * rho_s1s2;
    let rho_xs2 = match params.rho_xs2 {
        Some(v) if (v - expected_xs2).abs() > MARKOV_TOL => {
            return Err(Error::MarkovViolation {
                which: "rho_xs2",
                supplied: v,
                expected: expected_xs2,
            })
        }
        _ => expected_xs2,
    };

    let expected_xz = rho_xs1 * rho_s1z;
    let rho_xz = match (params.rho_xz, markov_noise) {
        (Some(v), true) if (v - expected_xz).abs() > MARKOV_TOL => {
            return Err(Error::MarkovViolation {
                which: "rho_xz",
                supplied: v,
                expected: expected_xz,
            })
        }
        (_, true) => expected_xz,
        (Some(v), false) => v,
        (None, false) => 0.0,
    };

    let model = ChannelModel {
        p,
        q1,
        q2,
        n,
        rho_xs1,
        rho_xs2,
        rho_xz,
        rho_s1s2,
        rho_s1z,
        rho_s2z,
        markov_noise,
    };
    model.correlation_matrix().check_psd()?;
    Ok(model)
}

/// Asserts `X -> (S1,S2) -> Z`: overwrites `rho_xz` with `rho_xs1 * rho_s1z`.
pub fn markov_complete(model: &ChannelModel) -> Result<ChannelModel> {
    let mut out = *model;
    out.markov_noise = true;
    out.rho_xz = model.rho_xs1 * model.rho_s1z;
    out.correlation_matrix().check_psd()?;
    Ok(out)
}

/// The 4×4 covariance `K̂` of `(X, S1, S2, Z)` at `σ_X² = P`.
pub fn assemble_covariance(model: &ChannelModel) -> CovMatrix {
    let sd = [model.p.sqrt(), model.q1.sqrt(), model.q2.sqrt(), model.n.sqrt()];
    let r = model.correlation_matrix();
    let mut e = [[0.0; MAX_DIM]; MAX_DIM];
    for i in 0..MAX_DIM {
        for j in 0..MAX_DIM {
            e[i][j] = if i == j { sd[i] * sd[i] } else { sd[i] * sd[j] * r.get(i, j) };
        }
    }
    CovMatrix::from_array(MAX_DIM, e)
}

impl ChannelModel {
    pub fn params(&self) -> ChannelParams {
        ChannelParams {
            p: Some(self.p),
            q1: Some(self.q1),
            q2: Some(self.q2),
            n: Some(self.n),
            rho_xs1: Some(self.rho_xs1),
            rho_xs2: Some(self.rho_xs2),
            rho_xz: Some(self.rho_xz),
            rho_s1s2: Some(self.rho_s1s2),
            rho_s1z: Some(self.rho_s1z),
            rho_s2z: Some(self.rho_s2z),
            markov_noise: Some(self.markov_noise),
        }
    }

    pub fn correlation_matrix(&self) -> CovMatrix {
        let e = [
            [1.0, self.rho_xs1, self.rho_xs2, self.rho_xz],
            [self.rho_xs1, 1.0, self.rho_s1s2, self.rho_s1z],
            [self.rho_xs2, self.rho_s1s2, 1.0, self.rho_s2z],
            [self.rho_xz, self.rho_s1z, self.rho_s2z, 1.0],
        ];
        CovMatrix::from_array(MAX_DIM, e)
    }

    pub fn has_s2(&self) -> bool {
        self.q2 > 0.0
    }

    /// Whether `rho_xz = rho_xs1 * rho_s1z` holds (flag set or not).
    pub fn is_markov_consistent(&self) -> bool {
        (self.rho_xz - self.rho_xs1 * self.rho_s1z).abs() <= MARKOV_TOL
    }

    /// Same channel with an absent `S2` replaced by a unit-power `S2`
    /// independent of everything. The receiver knows `S2`, so every rate and
    /// capacity is unchanged, while all minors become well defined.
    pub fn with_unit_s2_if_absent(&self) -> ChannelModel {
        let mut m = *self;
        if !m.has_s2() {
            m.q2 = 1.0;
        }
        m
    }

    /// Normalized determinant of the `(S1, S2, Z)` correlation block.
    pub fn d_p_norm(&self) -> f64 {
        let (a, b, c) = (self.rho_s1s2, self.rho_s1z, self.rho_s2z);
        1.0 + 2.0 * a * b * c - a * a - b * b - c * c
    }
}

/// Draws a random valid model with powers in `[0.2, 5]` and correlations in
/// `[-0.9, 0.9]`, rejecting candidates whose correlation matrix has an
/// eigenvalue below `min_eig`. With `markov`, `rho_xz` follows the Markov relation.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, markov: bool, min_eig: f64) -> ChannelModel {
    loop {
        let mut params = ChannelParams {
            p: Some(rng.random_range(0.2..5.0)),
            q1: Some(rng.random_range(0.2..5.0)),
            q2: Some(rng.random_range(0.2..5.0)),
            n: Some(rng.random_range(0.2..5.0)),
            rho_xs1: Some(rng.random_range(-0.9..0.9)),
            rho_s1s2: Some(rng.random_range(-0.9..0.9)),
            rho_s1z: Some(rng.random_range(-0.9..0.9)),
            rho_s2z: Some(rng.random_range(-0.9..0.9)),
            markov_noise: Some(markov),
            ..Default::default()
        };
        if !markov {
            params.rho_xz = Some(rng.random_range(-0.9..0.9));
        }
        if let Ok(m) = new_channel(&params) {
            if m.correlation_matrix().min_eigenvalue() >= min_eig {
                return m;
            }
        }
    }
}
