//! Worst-case detection guarantees for distributed SIMO physical-layer
//! authentication under power-manipulation and position attacks.

pub mod authenticator;
pub mod channel;
pub mod cli;
pub mod delay_bounds;
pub mod error;
pub mod monte_carlo;
pub mod numerics;
pub mod position_attack;
pub mod power_attack;
pub mod scenario;

pub use error::{Error, Result};
