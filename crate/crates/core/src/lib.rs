//! Exact-diagonalization laboratory for temporal-gauge lattice QED on a
//! small periodic chain.

pub mod config;
pub mod hilbert;
pub mod linalg;
pub mod model;
pub mod gauge;
pub mod constraint;
pub mod spectra;
pub mod audit;
pub mod cli;
