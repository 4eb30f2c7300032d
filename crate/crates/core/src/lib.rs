//! Separation of simultaneously recorded voices and clinical voice metrics.
//!
//! The processing chain is: instantaneous mixing model and scene simulation
//! ([`scene`]), FastICA separation ([`ica`]), spectral-subtraction
//! enhancement ([`enhance`]), F0 estimation ([`pitch`]), jitter and shimmer
//! ([`perturb`]) and psychoacoustic metrics ([`psycho`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod enhance;
pub mod error;
pub mod ica;
pub mod perturb;
pub mod pitch;
pub mod psycho;
pub mod scene;
pub mod signal;

pub use error::{Error, Result};
pub use signal::MonoSignal;
