//! Capacity and rate computations for the additive Gaussian channel with
//! state known at the transmitter and at the receiver, where the states may
//! be correlated with the input and with the noise.

pub mod analysis;
pub mod copula;
pub mod error;
pub mod infotheory;
pub mod linalg;
pub mod mc_oracle;
pub mod minors;
pub mod model;
pub mod quad;
pub mod rates;
pub mod typicality;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::CovMatrix;
pub use minors::{compute_minors, MinorSet};
pub use model::{assemble_covariance, markov_complete, new_channel, ChannelModel, ChannelParams};
pub use rates::{
    alpha_star, capacity_markov, lower_bound_general, rate_alpha, upper_bound_minor_path, FormulaPath, RateReport,
    SpecialCase,
};
