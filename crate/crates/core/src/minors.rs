//! Determinant `D` of `K̂`, its thirteen named minors, and the covariance
//! matrices of `(Y, S2)`, `(U, Y, S2)` and `(U, S1)` with `U = αS1 + X`.
//!
//! Several minors are not principal: each one is the determinant of an
//! explicit (row list, column list) selection of `K̂` in `(X, S1, S2, Z)` order.

use serde::{Deserialize, Serialize};

use crate::linalg::{CovMatrix, MAX_DIM};
use crate::model::{assemble_covariance, ChannelModel, S1, S2, X, Z};

type Selection = (&'static [usize], &'static [usize]);

pub(crate) const SEL_P: Selection = (&[S1, S2, Z], &[S1, S2, Z]);
pub(crate) const SEL_Q1: Selection = (&[X, S2, Z], &[X, S2, Z]);
pub(crate) const SEL_A1: Selection = (&[S1, S2, Z], &[X, S2, Z]);
pub(crate) const SEL_L0: Selection = (&[S1, S2, Z], &[X, S1, S2]);
pub(crate) const SEL_L1: Selection = (&[X, S2, Z], &[X, S1, S2]);
pub(crate) const SEL_N: Selection = (&[X, S1, S2], &[X, S1, S2]);
pub(crate) const SEL_Q1N: Selection = (&[X, S2], &[X, S2]);
pub(crate) const SEL_Q2N: Selection = (&[X, S1], &[X, S1]);
pub(crate) const SEL_PN: Selection = (&[S1, S2], &[S1, S2]);
pub(crate) const SEL_PQ1: Selection = (&[S2, Z], &[S2, Z]);
pub(crate) const SEL_L0L1: Selection = (&[X, S2], &[S1, S2]);
pub(crate) const SEL_PL1: Selection = (&[S2, Z], &[S1, S2]);
pub(crate) const SEL_Q1L0: Selection = (&[S2, Z], &[X, S2]);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinorSet {
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "d_P")]
    pub d_p: f64,
    #[serde(rename = "d_Q1")]
    pub d_q1: f64,
    #[serde(rename = "d_A1")]
    pub d_a1: f64,
    #[serde(rename = "d_L0")]
    pub d_l0: f64,
    #[serde(rename = "d_L1")]
    pub d_l1: f64,
    #[serde(rename = "d_N")]
    pub d_n: f64,
    #[serde(rename = "d_Q1N")]
    pub d_q1n: f64,
    #[serde(rename = "d_Q2N")]
    pub d_q2n: f64,
    #[serde(rename = "d_PN")]
    pub d_pn: f64,
    #[serde(rename = "d_PQ1")]
    pub d_pq1: f64,
    #[serde(rename = "d_L0L1")]
    pub d_l0l1: f64,
    #[serde(rename = "d_PL1")]
    pub d_pl1: f64,
    #[serde(rename = "d_Q1L0")]
    pub d_q1l0: f64,
    #[serde(rename = "d_P_norm")]
    pub d_p_norm: f64,
}

/// Computes every named minor of a 4×4 `K̂`.
pub fn compute_minors(cov: &CovMatrix) -> MinorSet {
    assert_eq!(cov.dim(), MAX_DIM, "K̂ must be 4×4");
    let m = |(r, c): Selection| cov.minor(r, c);
    let rho = cov.correlation();
    let (a, b, c) = (rho.get(S1, S2), rho.get(S1, Z), rho.get(S2, Z));
    MinorSet {
        d: cov.det(),
        d_p: m(SEL_P),
        d_q1: m(SEL_Q1),
        d_a1: m(SEL_A1),
        d_l0: m(SEL_L0),
        d_l1: m(SEL_L1),
        d_n: m(SEL_N),
        d_q1n: m(SEL_Q1N),
        d_q2n: m(SEL_Q2N),
        d_pn: m(SEL_PN),
        d_pq1: m(SEL_PQ1),
        d_l0l1: m(SEL_L0L1),
        d_pl1: m(SEL_PL1),
        d_q1l0: m(SEL_Q1L0),
        d_p_norm: 1.0 + 2.0 * a * b * c - a * a - b * b - c * c,
    }
}

impl MinorSet {
    /// `det cov(Y, S2)` as a minor combination.
    pub fn det_y_s2(&self) -> f64 {
        self.d_q1n + self.d_pn + self.d_pq1 + 2.0 * self.d_l0l1 - 2.0 * self.d_pl1 - 2.0 * self.d_q1l0
    }

    /// `det cov(U, Y, S2)` as a quadratic in `alpha`.
    pub fn det_u_y_s2(&self, alpha: f64) -> f64 {
        let am1 = alpha - 1.0;
        am1 * am1 * self.d_n
            + alpha * alpha * self.d_p
            + 2.0 * alpha * am1 * self.d_l0
            + 2.0 * alpha * self.d_a1
            + 2.0 * am1 * self.d_l1
            + self.d_q1
    }

    /// `det cov(U, S1)`; independent of `alpha`.
    pub fn det_u_s1(&self) -> f64 {
        self.d_q2n
    }

    /// `det cov(X + Z, S1, S2)`.
    pub fn det_xz_s1_s2(&self) -> f64 {
        self.d_n + 2.0 * self.d_l0 + self.d_p
    }
}

/// The three covariance matrices used by the achievable-rate derivation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCovariances {
    pub y_s2: CovMatrix,
    pub u_y_s2: CovMatrix,
    pub u_s1: CovMatrix,
}

/// Entry formulas for `cov(Y,S2)`, `cov(U,Y,S2)`, `cov(U,S1)` in terms of
/// the off-diagonal quantities `A_i`, `B`, `L_i` of `K̂`.
pub fn derived_covariances(model: &ChannelModel, alpha: f64) -> DerivedCovariances {
    let k = assemble_covariance(model);
    let (p, q1, q2, n) = (k.get(X, X), k.get(S1, S1), k.get(S2, S2), k.get(Z, Z));
    let (a1, a2, l0) = (k.get(X, S1), k.get(X, S2), k.get(X, Z));
    let (b, l1, l2) = (k.get(S1, S2), k.get(S1, Z), k.get(S2, Z));

    let var_y = p + q1 + q2 + n + 2.0 * (a1 + a2 + b + l0 + l1 + l2);
    let cov_y_s2 = a2 + b + q2 + l2;
    let var_u = p + alpha * alpha * q1 + 2.0 * alpha * a1;
    let cov_u_y = p + (alpha + 1.0) * a1 + alpha * q1 + alpha * b + alpha * l1 + a2 + l0;
    let cov_u_s2 = alpha * b + a2;
    let cov_u_s1 = alpha * q1 + a1;

    let mut e = [[0.0; MAX_DIM]; MAX_DIM];
    e[0] = [var_y, cov_y_s2, 0.0, 0.0];
    e[1] = [cov_y_s2, q2, 0.0, 0.0];
    let y_s2 = CovMatrix::from_array(2, e);

    let mut e = [[0.0; MAX_DIM]; MAX_DIM];
    e[0] = [var_u, cov_u_y, cov_u_s2, 0.0];
    e[1] = [cov_u_y, var_y, cov_y_s2, 0.0];
    e[2] = [cov_u_s2, cov_y_s2, q2, 0.0];
    let u_y_s2 = CovMatrix::from_array(3, e);

    let mut e = [[0.0; MAX_DIM]; MAX_DIM];
    e[0] = [var_u, cov_u_s1, 0.0, 0.0];
    e[1] = [cov_u_s1, q1, 0.0, 0.0];
    let u_s1 = CovMatrix::from_array(2, e);

    DerivedCovariances { y_s2, u_y_s2, u_s1 }
}

/// `cov(X + Z, S1, S2)`.
pub fn xz_side_covariance(model: &ChannelModel) -> CovMatrix {
    let k = assemble_covariance(model);
    let v = k.get(X, X) + k.get(Z, Z) + 2.0 * k.get(X, Z);
    let c1 = k.get(X, S1) + k.get(Z, S1);
    let c2 = k.get(X, S2) + k.get(Z, S2);
    let mut e = [[0.0; MAX_DIM]; MAX_DIM];
    e[0] = [v, c1, c2, 0.0];
    e[1] = [c1, k.get(S1, S1), k.get(S1, S2), 0.0];
    e[2] = [c2, k.get(S1, S2), k.get(S2, S2), 0.0];
    CovMatrix::from_array(3, e)
}
