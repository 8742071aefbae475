//! Open-system numerics for phonon blockade in a mechanical resonator that is
//! resonantly coupled to a driven, damped two-level system.
//!
//! The crate is `no_std` compatible (it needs `alloc`). Disable the default
//! `std` feature to build without the standard library.
//!
//! Layout:
//!
//! * [`hilbert`]: truncated Fock and qubit factors, Kronecker-embedded operators,
//!   density matrices.
//! * [`model`]: rotating-frame Hamiltonians and collapse operators for the
//!   resonator–qubit system and for the three-mode readout system.
//! * [`solver`]: Liouvillian assembly, steady state, fixed-step time evolution.
//! * [`correlations`]: phonon occupation and second-order correlations.
//! * [`analytics`]: closed-form optimal-drive conditions, weak-drive amplitudes,
//!   Bose–Einstein occupation and adiabatic-elimination parameters.
//!
//! All frequencies and rates in [`model`], [`solver`] and [`correlations`] are
//! expressed in units of the qubit damping rate κ.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod analytics;
pub mod correlations;
mod error;
pub mod hilbert;
pub mod model;
pub mod solver;

pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;

pub(crate) const I: C64 = C64::new(0.0, 1.0);
