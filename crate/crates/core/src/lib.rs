//! Computational toolkit for harmonic weak Siegel Maaß forms of genus 2.

pub mod cli;
pub mod cosets;
pub mod covariance;
pub mod diagram;
pub mod eisenstein;
pub mod error;
pub mod exact;
pub mod gl2;
pub mod jet;
pub mod kernels;
pub mod ktypes;
pub mod lie;
pub mod modular;
pub mod profile;
pub mod projection;
pub mod reduce;
pub mod scalar;
pub mod symplectic;
pub mod terms;

pub use error::{Error, Result};
