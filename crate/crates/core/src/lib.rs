//! Haar multishift calculus: dyadic step functions, chaos expansions,
//! power-series symbols and basis classification.

pub mod dyadic;
pub mod chaos;
pub mod cli;
pub mod classify;
pub mod error;
pub mod report;
pub mod sample;
pub mod scalar;
pub mod stepfn;
pub mod symbol;
pub mod verify;

pub use error::{Error, Result};
