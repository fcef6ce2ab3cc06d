//! Simulator and lifetime optimizer for buried LoRaWAN sensors powered by
//! wireless energy transfer and served by a high-altitude gateway.
//!
//! The pipeline runs soil permittivity → link budget → PHY demodulation →
//! Monte Carlo collisions → Class-A energy and battery lifetime → WET/SF
//! search. [`experiments`] wraps it into reproducible CSV-producing presets.

// Range checks are written as `!(x > 0.0)` on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod experiments;
pub mod kv;
pub mod link;
pub mod optimize;
pub mod phy;
pub mod sim;
pub mod soil;
pub mod units;

pub use error::{Error, Result};
