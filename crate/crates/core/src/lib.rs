//! Continuum level density of one-dimensional tunneling potentials.
//!
//! The crate computes the density three ways and compares them:
//! from the transmission phase ([`scattering`]), from complex-scaled
//! eigenvalues ([`scaling`]) and from classical traversal times
//! ([`semiclassics`], [`instanton`]).

pub mod cli;
pub mod config;
pub mod error;
pub mod instanton;
pub mod output;
pub mod potential;
pub mod quadrature;
pub mod scaling;
pub mod scattering;
pub mod semiclassics;

pub use error::{Error, Result};
