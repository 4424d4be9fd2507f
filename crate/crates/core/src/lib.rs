//! Interaction-picture chain mappings and matrix-product-state dynamics for
//! open quantum systems coupled to one bosonic bath through several
//! channels.
//!
//! The pipeline is:
//!
//! 1. [`spectral`]: discretize each channel's spectral density on shared
//!    Gauss–Legendre nodes.
//! 2. [`chainmap`]: rotate the bath with a Lanczos (one seed) or
//!    block-Lanczos (two seeds) chain mapping and evaluate the
//!    interaction-picture couplings `c_k(t)`.
//! 3. [`model`]: pair system operators with channels and generate the
//!    time-dependent Hamiltonian terms.
//! 4. [`evolve`]: propagate an [`mps::MpsState`] and record populations and
//!    bond entropies, or run the dense exact-diagonalization reference.
//! 5. [`config`] / [`runner`]: the `bathchain` command-line front end.

pub mod chainmap;
pub mod config;
pub mod error;
pub mod evolve;
pub mod model;
pub mod mps;
pub mod ops;
pub mod output;
pub mod runner;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};
