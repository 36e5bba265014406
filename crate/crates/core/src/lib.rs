//! Atomic parametric amplifier model of a Bose-Einstein condensate's
//! Bogoliubov mode coupled to a single cavity mode.
//!
//! * [`params`]: laboratory inputs → effective parameters (ω_R units).
//! * [`fock`]: truncated number-basis states, operators and density matrices.
//! * [`analytic`]: closed-form reduced state, moments, squeezing and Q function.
//! * [`oracle`]: brute-force evolution of the two-mode Hamiltonian.
//! * [`validation`]: analytic-vs-oracle comparison reports.
//! * [`output`]: CSV/JSON emission and run manifests.
//! * [`cli`]: the `apa` command-line front end.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod fock;
pub mod oracle;
pub mod output;
pub mod params;
pub mod validation;

pub use error::{Error, Result};
pub use params::{derive, DerivedParams, PhysicalConfig};
