//! Transmitter and receiver DSP for eigenvalue-modulated DP-NFDM.
//!
//! Transmit side: 8 bits per symbol are Gray-mapped onto the four
//! b-coefficients `(b1(l1), b2(l1), b1(l2), b2(l2))`, every symbol is
//! synthesized by the Darboux transformation in its own slot, and the frame
//! is scaled to physical units.
//!
//! Receive side: power rescaling and brick-wall filtering, training-based
//! frame synchronization, per-slot eigenvalue search and b computation,
//! derotation by the spectral evolution law, blind phase search per
//! constellation and minimum-distance decisions.

pub mod constellation;
pub mod frame;
pub mod metrics;
pub mod phase;
pub mod receiver;

pub use constellation::{
    decide_and_count, map_bits, paper_constellation, ConstellationSpec, DecisionStats,
    ErasurePolicy, NfdmSymbol, RingSpec,
};
pub use frame::{build_frame, random_symbols, synthesize_slot, Frame, FrameLayout};
pub use metrics::{bandwidth_99, papr_db, watts_to_dbm};
pub use phase::{blind_phase_search, estimate_phases, BpsConfig};
pub use receiver::{
    detect_symbol, receive_frame, receiver_frontend, synchronize, DetectConfig, Detection,
    ReceivedFrame, ReceiverConfig,
};
