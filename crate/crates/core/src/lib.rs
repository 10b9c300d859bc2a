//! Dual-polarization nonlinear frequency-division multiplexing (DP-NFDM).
//!
//! The crate covers the whole numerical pipeline of an eigenvalue-modulated
//! dual-polarization link:
//!
//! * [`signal`] and [`fiber`]: sampled signals, fiber parameters and the
//!   physical/normalized unit conversion (including the lossless
//!   path-averaged nonlinearity).
//! * [`nft`]: the direct transform for the Manakov–Zakharov–Shabat problem
//!   (scattering data, eigenvalue search, b-coefficients, continuous spectrum)
//!   and the inverse transform through the Darboux transformation.
//! * [`channel`]: split-step propagation of the Manakov equations with span
//!   loss, lumped gain and ASE, plus OSNR noise loading.
//! * [`transceiver`]: bit mapping, frame construction, synchronization,
//!   receiver front end, symbol detection, blind phase search and decisions.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod fiber;
pub(crate) mod linalg;
pub mod nft;
pub mod signal;
pub mod spectrum;
pub mod transceiver;

pub use error::{Error, Result};
pub use fiber::{FiberParams, NormalizationParams};
pub use signal::{Domain, DualPolSignal, TimeGrid};

/// Complex sample type used throughout the crate.
pub type C64 = num_complex::Complex64;
