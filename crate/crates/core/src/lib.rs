#![no_std]
extern crate alloc;

pub mod data;
pub mod error;
pub mod estimator;
pub mod graph;
pub mod linalg;
pub mod math;
pub mod optim;
pub mod policy;
pub mod propensity;
pub mod quadrature;
pub mod simulate;
pub mod variance;

pub use error::{Error, Result};
