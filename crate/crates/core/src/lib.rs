//! Dirichlet spectra of Schrödinger operators on rectangles and masked grids.
//!
//! The crate has two halves. The exact half enumerates rectangle spectra in
//! rational arithmetic ([`exact_spectra`], [`lattice`]) and evaluates the
//! counting functions and partition inequalities on them ([`counting`],
//! [`partition_check`]). The numerical half rasterizes open sets onto uniform
//! grids ([`grid`]), solves for the lowest eigenpairs of the five-point
//! operator `-Δ + V` ([`eigensolver`]), extracts nodal domains ([`nodal`]) and
//! computes discrete capacities ([`capacity`]).

pub mod capacity;
pub mod counting;
pub mod eigensolver;
mod error;
pub mod exact_spectra;
pub mod fixtures;
pub mod grid;
pub mod image;
pub mod lattice;
pub mod nodal;
pub mod partition_check;
pub mod rational;

pub use error::{Error, Result};

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
