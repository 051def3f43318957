//! Stochastic-geometry toolkit for ultra-dense LEO satellite networks.
//!
//! Satellites are modelled as point processes on a sphere concentric with the
//! earth (binomial, Poisson, or latitude-weighted Poisson), ground gateways as a
//! planar Poisson field. On top of those samplers the crate provides:
//!
//! - exact spherical-cap geometry ([`geometry`]),
//! - link budgets with Shadowed-Rician and friends ([`channel`]),
//! - closed-form contact-distance / availability laws ([`analysis`]),
//! - a Monte Carlo SINR engine for coverage, rate and the interference
//!   Laplace transform ([`coverage`]),
//! - a multi-hop latency simulator with and without inter-satellite links
//!   ([`latency`]),
//! - a config-driven experiment runner ([`experiment`]).
//!
//! Every sampler takes an explicit [`rng::RngStream`], so results are
//! reproducible bit-for-bit regardless of how many worker threads run them.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod coverage;
pub mod error;
mod exec;
pub mod experiment;
pub mod geometry;
pub mod latency;
pub mod numeric;
pub mod point_process;
pub mod rng;

pub use error::{Error, Result};

/// Mean earth radius in km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Speed of light in km/s.
pub const SPEED_OF_LIGHT_KM_S: f64 = 299_792.458;
