//! Band structures, spectral singularities and Bragg scattering for
//! one-dimensional Schrödinger operators with complex periodic potentials.
//!
//! The crate is organised bottom-up:
//!
//! * [`potential`] holds complex periodic potentials as Fourier series and
//!   the PT-symmetric lattice `V0 cos(k_B x) + i λ V0 sin(k_B x)`.
//! * [`bloch`] builds the truncated plane-wave matrix `H(q)` and solves it for
//!   eigenvalues, left/right eigenvectors and the biorthogonal overlap `κ`.
//! * [`singularity`] classifies degeneracies at the zone centre and edge,
//!   locates the symmetry-breaking threshold and probes resolvent divergence.
//! * [`ladder`] integrates the diffracted-order amplitudes of a plane wave and
//!   detects secular growth.
//! * [`packet`] propagates wave packets with a split-step Fourier scheme and
//!   provides the first-order Born term and its asymptotic form.
//! * [`cli`] wires everything to CSV-emitting subcommands.
//!
//! Units are dimensionless: `ħ = 2m = 1`, lengths in units of the lattice
//! period `a` unless a different period is configured.

// `!(x <= limit)` is used on purpose so that NaN takes the error path
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bloch;
pub mod cli;
pub mod config;
pub mod error;
pub mod ladder;
pub mod linalg;
pub mod output;
pub mod packet;
pub mod potential;
pub mod singularity;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use potential::PotentialFamily;
