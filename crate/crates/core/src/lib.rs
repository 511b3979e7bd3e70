//! Routing toolkit for trucks that carry, launch, recover and recharge drones
//! and delivery robots.

pub mod bench;
pub mod energy;
pub mod error;
pub mod exact;
pub mod finder;
pub mod milp;
pub mod model;
pub mod validator;

pub use error::{Error, Result};
