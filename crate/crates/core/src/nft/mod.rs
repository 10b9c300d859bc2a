//! Nonlinear Fourier transform for the Manakov system.
//!
//! The spectral problem is `dv/dt = (lambda A + B(t)) v` with
//! `A = diag(-i, i, i)` and
//!
//! ```text
//!     |   0     q1   q2 |
//! B = | -q1*    0    0  |
//!     | -q2*    0    0  |
//! ```
//!
//! [`forward`] integrates it numerically to obtain the scattering data of a
//! sampled signal. [`darboux`] goes the other way and builds the signal that
//! carries a prescribed discrete spectrum.

pub mod darboux;
pub mod forward;

pub use darboux::{
    darboux_step, generate_from_spectrum, AuxiliarySolution, DarbouxPlan, DarbouxTarget,
    Synthesis,
};
pub use forward::{
    compute_b_coefficients, compute_b_coefficients_with, continuous_spectrum,
    find_discrete_eigenvalues, mzsp_scatter, mzsp_scatter_with, Scheme,
    DiscreteEntry, DiscreteSpectrum, MatchPoint, ScatteringData, SearchConfig,
};
