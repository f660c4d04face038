//! Pinching-antenna placement and beamforming under probabilistic
//! line-of-sight blockage.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod cubic;
pub mod error;
pub mod experiments;
pub mod model;
pub mod multiuser;
pub mod rate_analysis;
pub mod search;
pub mod seed;
pub mod single_user;
pub mod stats;
pub mod units;

pub use error::{Error, Result};
pub use model::SystemParams;
