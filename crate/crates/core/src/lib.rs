#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod quad;
pub mod rng;
pub mod sum;
pub mod svfun;
pub mod weights;

pub use error::{Error, Result};
pub mod engine;
pub mod schedules;
pub mod theory;
pub mod walks;
pub mod exec;
pub mod harness;
