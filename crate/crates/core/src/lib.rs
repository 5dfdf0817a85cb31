//! Fubini-Study geometry of bipartite entanglement.
//!
//! Pure states live on projective Hilbert space with the Fubini-Study metric,
//! normalized so a single qubit is the unit round Bloch sphere
//! (`ds² = dθ² + sin²θ dφ²`). The entanglement entropy `E([ψ]) = S(ρ_A)` is
//! a scalar field on that space and this crate studies its level sets:
//!
//! - [`state_space`]: pure states, Haar sampling with counter-based seeds,
//!   overlaps and Fubini-Study distances.
//! - [`entanglement`]: reduced density matrices, Schmidt spectra and the von
//!   Neumann entropy in nats.
//! - [`chart`]: finite-difference geometry on user charts: metric components,
//!   gradients, the field `ξ = ∇E/‖∇E‖²` and its divergence (the Weingarten
//!   trace of the level set).
//! - [`analytic`]: closed forms for the Bloch sphere and the two-qubit
//!   Schmidt family, used as oracles.
//! - [`microcanonical`]: density of states `ω(e)`, the geometric entropy
//!   `S_geo(e) = log ω(e)` and level-set averages of the Weingarten trace.

#![forbid(unsafe_code)]

pub mod analytic;
pub mod chart;
pub mod entanglement;
mod error;
pub mod microcanonical;
pub mod state_space;

pub use error::{Error, Result};
pub use num_complex::Complex64;
