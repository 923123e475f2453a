//! Deterministic planning and simulation of an integrated satellite, HAP and
//! terrestrial downlink network.

pub mod assoc;
pub mod channel;
pub mod energy;
pub mod error;
pub mod harness;
pub mod model;
pub mod optimize;

pub use error::{Error, Result};
