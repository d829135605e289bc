//! Closed-form distributional evaluation of power-law weighted overlap
//! integrals of spherical Bessel functions, with numerical oracles.

pub mod cli;
pub mod dist_algebra;
pub mod double_sbf;
pub mod error;
pub mod multi_sbf;
pub mod oracle;
pub mod quad;
pub mod specfun;
pub mod triple_sbf;

pub use error::{Error, Result};
