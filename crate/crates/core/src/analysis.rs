//! Single-point capacity summaries and one-parameter sweeps.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::infotheory::mi_side_noise;
use crate::minors::MinorSet;
use crate::model::{markov_complete, new_channel, ChannelModel, ChannelParams};
use crate::rates::{
    alpha_star, capacity_markov, channel_minors, lower_bound_general, serialize_real, upper_bound_minor_path,
    RateReport,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_real(self.0, s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacitySummary {
    pub model: ChannelModel,
    /// Markov capacity; `None` when the model contradicts the Markov relation.
    pub capacity: Option<RateReport>,
    pub upper_bound: Option<RateReport>,
    pub lower_bound: Option<RateReport>,
    pub alpha_star: Option<f64>,
    pub mi_side_noise_nats: Real,
    pub minors: MinorSet,
    pub notes: Vec<String>,
}

/// The model with the Markov flag set, if its correlations allow it.
fn as_markov(model: &ChannelModel) -> Option<ChannelModel> {
    if model.markov_noise {
        Some(*model)
    } else if model.is_markov_consistent() {
        markov_complete(model).ok()
    } else {
        None
    }
}

pub fn capacity_summary(model: &ChannelModel) -> CapacitySummary {
    let mut notes = Vec::new();
    let markov = as_markov(model);
    if markov.is_none() {
        notes.push("rho_xz differs from rho_xs1*rho_s1z; the Markov capacity does not apply".into());
    }
    let mut keep = |what: &str, r: Result<RateReport>| match r {
        Ok(r) => Some(r),
        Err(e) => {
            notes.push(format!("{what}: {}: {e}", e.name()));
            None
        }
    };
    let capacity = markov.and_then(|m| keep("capacity", capacity_markov(&m)));
    let upper_bound = markov.and_then(|m| keep("upper_bound", upper_bound_minor_path(&m)));
    let lower_bound = keep("lower_bound", lower_bound_general(model));
    let alpha = match alpha_star(model) {
        Ok(a) => Some(a),
        Err(e) => {
            notes.push(format!("alpha_star: {}: {e}", e.name()));
            None
        }
    };
    CapacitySummary {
        model: *model,
        capacity,
        upper_bound,
        lower_bound,
        alpha_star: alpha,
        mi_side_noise_nats: Real(mi_side_noise(model)),
        minors: channel_minors(model),
        notes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    RhoXs1,
    RhoS1z,
    RhoS2z,
    RhoS1s2,
    SnrDb,
    MiS1z,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::RhoXs1 => "rho_xs1",
            SweepParam::RhoS1z => "rho_s1z",
            SweepParam::RhoS2z => "rho_s2z",
            SweepParam::RhoS1s2 => "rho_s1s2",
            SweepParam::SnrDb => "snr_db",
            SweepParam::MiS1z => "mi_s1z",
        }
    }

    /// Parameters at sweep value `v`. Redundant coefficients are cleared so
    /// they are re-derived at every point.
    pub fn apply(self, base: &ChannelParams, v: f64) -> Result<ChannelParams> {
        let mut p = base.clone();
        match self {
            SweepParam::RhoXs1 => p.rho_xs1 = Some(v),
            SweepParam::RhoS1z => p.rho_s1z = Some(v),
            SweepParam::RhoS2z => p.rho_s2z = Some(v),
            SweepParam::RhoS1s2 => p.rho_s1s2 = Some(v),
            SweepParam::SnrDb => {
                let n = p.n.ok_or_else(|| Error::Range("noise power n is required".into()))?;
                p.p = Some(n * 10f64.powf(v / 10.0));
            }
            SweepParam::MiS1z => {
                if !(v >= 0.0) {
                    return Err(Error::Range(format!("mutual information {v} must be >= 0")));
                }
                p.rho_s1z = Some((-(-2.0 * v).exp_m1()).sqrt());
            }
        }
        p.rho_xs2 = None;
        if p.markov_noise == Some(true) {
            p.rho_xz = None;
        }
        Ok(p)
    }
}

impl FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "rho_xs1" => SweepParam::RhoXs1,
            "rho_s1z" => SweepParam::RhoS1z,
            "rho_s2z" => SweepParam::RhoS2z,
            "rho_s1s2" => SweepParam::RhoS1s2,
            "snr_db" => SweepParam::SnrDb,
            "mi_s1z" => SweepParam::MiS1z,
            other => return Err(Error::Input(format!("unknown sweep parameter '{other}'"))),
        })
    }
}

pub const SWEEP_HEADER: &str = "param,value,C_bits,C_nats,RG_nats,alpha_star,mi_s1s2_z_nats";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// `None` when the point is not a valid channel.
    pub point: Option<SweepPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub c_nats: Option<f64>,
    pub rg_nats: Option<f64>,
    pub alpha_star: Option<f64>,
    pub mi_nats: f64,
}

pub fn sweep_values(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !from.is_finite() || !to.is_finite() {
        return Err(Error::Range(format!("invalid sweep range {from}..{to} with {steps} steps")));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    let h = (to - from) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i == steps - 1 { to } else { from + i as f64 * h })
        .collect())
}

pub fn evaluate_point(params: &ChannelParams) -> Option<SweepPoint> {
    let model = new_channel(params).ok()?;
    let c_nats = as_markov(&model).and_then(|m| capacity_markov(&m).ok()).map(|r| r.value_nats);
    Some(SweepPoint {
        c_nats,
        rg_nats: lower_bound_general(&model).ok().map(|r| r.value_nats),
        alpha_star: alpha_star(&model).ok(),
        mi_nats: mi_side_noise(&model),
    })
}

/// Evaluates all points in parallel; rows keep the order of `values`.
pub fn sweep(base: &ChannelParams, param: SweepParam, values: &[f64]) -> Result<Vec<SweepRow>> {
    values
        .par_iter()
        .map(|&v| {
            let params = param.apply(base, v)?;
            Ok(SweepRow {
                value: v,
                point: evaluate_point(&params),
            })
        })
        .collect()
}

/// 12 significant digits, shortest round-trip form of the rounded value.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        let r: f64 = format!("{v:.11e}").parse().expect("formatted float");
        format!("{}", if r == 0.0 { 0.0 } else { r })
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

pub fn write_csv(param: SweepParam, rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        let name = param.name();
        let value = fmt_num(row.value);
        let _ = match &row.point {
            None => writeln!(out, "{name},{value},skip,,,,"),
            Some(p) => writeln!(
                out,
                "{name},{value},{},{},{},{},{}",
                fmt_opt(p.c_nats.map(|c| c / std::f64::consts::LN_2)),
                fmt_opt(p.c_nats),
                fmt_opt(p.rg_nats),
                fmt_opt(p.alpha_star),
                fmt_num(p.mi_nats),
            ),
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_markov() -> ChannelParams {
        ChannelParams {
            p: Some(1.0),
            n: Some(1.0),
            markov_noise: Some(true),
            ..Default::default()
        }
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(123_456_789.123_456_7), "123456789.123");
    }

    #[test]
    fn values_hit_both_ends() {
        let v = sweep_values(-0.99, 0.99, 199).unwrap();
        assert_eq!(v.len(), 199);
        assert_eq!(v[0], -0.99);
        assert_eq!(v[198], 0.99);
        assert!(v[99].abs() < 1e-15);
        assert_eq!(sweep_values(0.3, 1.0, 1).unwrap(), vec![0.3]);
        assert!(sweep_values(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn infeasible_points_are_skipped() {
        let base = ChannelParams {
            rho_s2z: Some(0.9),
            ..unit_markov()
        };
        let rows = sweep(&base, SweepParam::RhoS1z, &[0.0, 0.9]).unwrap();
        assert!(rows[0].point.is_some());
        assert!(rows[1].point.is_none());
        let csv = write_csv(SweepParam::RhoS1z, &rows);
        assert!(csv.ends_with("rho_s1z,0.9,skip,,,,\n"), "{csv}");
    }

    #[test]
    fn rederives_redundant_coefficients() {
        let base = ChannelParams {
            rho_s1s2: Some(0.5),
            rho_s1z: Some(0.3),
            ..unit_markov()
        };
        let p = SweepParam::RhoXs1.apply(&base, 0.4).unwrap();
        let m = new_channel(&p).unwrap();
        assert!((m.rho_xs2 - 0.2).abs() < 1e-15);
        assert!((m.rho_xz - 0.12).abs() < 1e-15);
    }

    #[test]
    fn mi_parameter_solves_for_correlation() {
        let p = SweepParam::MiS1z.apply(&unit_markov(), 0.5 * (1.0f64 / 0.64).ln()).unwrap();
        assert!((p.rho_s1z.unwrap() - 0.6).abs() < 1e-12);
        assert!(SweepParam::MiS1z.apply(&unit_markov(), -1.0).is_err());
    }

    #[test]
    fn snr_sweep_scales_power() {
        let p = SweepParam::SnrDb.apply(&unit_markov(), 10.0).unwrap();
        assert!((p.p.unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn summary_autocompletes_markov() {
        let m = new_channel(&ChannelParams {
            p: Some(1.0),
            n: Some(1.0),
            ..Default::default()
        })
        .unwrap();
        let s = capacity_summary(&m);
        assert!((s.capacity.unwrap().bits() - 0.5).abs() < 1e-12);

        let m = new_channel(&ChannelParams {
            p: Some(1.0),
            n: Some(1.0),
            rho_xz: Some(0.3),
            ..Default::default()
        })
        .unwrap();
        let s = capacity_summary(&m);
        assert!(s.capacity.is_none());
        assert!(s.lower_bound.is_some());
        assert_eq!(s.notes.len(), 1);
    }
}
