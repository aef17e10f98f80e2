//! Credit-risk Value at Risk via quantum amplitude estimation, simulated on
//! a dense statevector, together with its classical baselines and a
//! fault-tolerant resource model.

pub mod circuit;
pub mod cli;
pub mod distributions;
pub mod error;
pub mod model;
pub mod qae;
pub mod resources;
pub mod risk;

pub use error::{Error, Result};
