#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod estimation;
pub mod hamiltonians;
pub mod homodyne;
pub mod lindblad;
pub mod operators;
pub mod params;
pub mod series;
pub mod special;

pub use error::{Error, Result};
