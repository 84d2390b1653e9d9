#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod geometry;
pub mod mbcore;
pub mod noise;
pub mod observables;
pub mod par;
pub mod protocols;
pub mod spmodel;
pub mod sptlab;

pub use error::{Error, Result};
