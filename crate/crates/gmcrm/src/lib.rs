//! GM-dependent normalized completely random measures for two-sample
//! Bayesian nonparametric mixtures.

pub mod crm;
pub mod error;
pub mod model;
pub mod oracle;
pub mod partition;
pub mod peppf;
pub mod sampler;
pub mod specialfn;

pub use error::{Error, Result};
