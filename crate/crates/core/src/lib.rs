//! Spectral edges, cusps and hard-edge corrections for complex correlated
//! Wishart matrices.

pub mod error;
pub mod spectral_model;

pub use error::{Error, Result};
pub mod quadrature;
pub mod special;
pub mod kernels;
pub mod edge_analysis;
pub mod fredholm;
pub mod montecarlo;
pub mod cli;
