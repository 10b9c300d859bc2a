use thiserror::Error;

use crate::signal::Domain;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("signal is in the {found:?} domain, expected {expected:?}")]
    DomainMismatch { expected: Domain, found: Domain },

    #[error("length mismatch: {what} has {found} samples, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("zero dispersion: normalization power is undefined")]
    ZeroDispersion,

    #[error("degenerate auxiliary solution at sample {sample}")]
    DegenerateAuxiliary { sample: usize },

    #[error("waveform tails exceed the slot boundary threshold ({ratio:.3e} of peak)")]
    SlotOverflow { ratio: f64 },

    #[error("nonlinear phase per step {phase:.4} rad exceeds the 0.05 rad limit")]
    StepTooLarge { phase: f64 },

    #[error("aliasing: {fraction:.3e} of the energy lies in the outer 5% of the simulation band")]
    Aliasing { fraction: f64 },

    #[error("frame synchronization failed: peak-to-side-lobe ratio {ratio:.2} < 3")]
    SyncFailure { ratio: f64 },

    #[error("spectral singularity: |a| = {magnitude:.3e} at real lambda = {lambda}")]
    SpectralSingularity { lambda: f64, magnitude: f64 },

    #[error("signal is identically zero")]
    ZeroSignal,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
