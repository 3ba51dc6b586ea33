//! Transverse bulk phonons in a piezoelectric slab, coupled to a 3D microwave
//! cavity and (optionally) a flux-tunable transmon.
//!
//! The crate is organised bottom-up:
//!
//! - [`acoustics`]: shear velocity, the thickness-mode ladder and a 1D
//!   finite-difference eigensolver that checks it.
//! - [`piezo`]: strain profiles, the uniform-field overlap integral, the odd
//!   mode selection rule and dipole orientation scaling.
//! - [`spectro`]: linear input-output transmission of the cavity dressed by
//!   the qubit and the phonon ladder, spectrogram synthesis, seeded noise.
//! - [`fitsuite`]: peak extraction, avoided-crossing fits, notch fits,
//!   quality factors.
//! - [`config`], [`io`], [`cli`]: JSON run configuration, CSV/JSON formats and
//!   the subcommand runner behind the `bulkphonon` binary.
//!
//! All frequencies, couplings and linewidths are ordinary frequencies in Hz.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acoustics;
pub mod cli;
pub mod config;
pub mod error;
pub mod fitsuite;
pub mod io;
pub mod lsq;
pub mod piezo;
pub mod spectro;

pub use error::{Error, Result};
