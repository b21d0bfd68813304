pub mod analytics;
pub mod cli;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod qp;
pub mod riskmodel;
pub mod surface;
pub mod synth;

pub use error::{Error, Result};
