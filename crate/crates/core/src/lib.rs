#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod exposure;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod mesostructure;
pub mod oracle;
pub mod solver;
pub mod validation;

pub use error::{Error, Result};
