//! Scenario files: TOML documents tagged with a schema string.

use std::path::{Path, PathBuf};

use dpnfdm_core::nft::Scheme;
use dpnfdm_core::transceiver::{BpsConfig, DetectConfig, ErasurePolicy, FrameLayout, ReceiverConfig};
use dpnfdm_core::FiberParams;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Version tag every scenario file must carry.
pub const SCHEMA: &str = "dpnfdm-scenario/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// OSNR sweep without a fiber: sweep values are OSNR in dB.
    BackToBack,
    /// Link sweep: sweep values are span counts.
    Transmission,
    /// Noiseless round trip of random symbols through the transforms and
    /// the full transceiver; sweep values only label the rows.
    RoundTripSelfTest,
}

/// Receiver settings exposed in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReceiverSettings {
    /// Apply the 99%-bandwidth brick-wall filter and power rescaling.
    pub filter: bool,
    pub nft_samples: usize,
    pub association_radius: f64,
    pub scheme: Scheme,
    pub bps_enabled: bool,
    pub bps_test_phases: usize,
    pub bps_window: usize,
    pub erasure_policy: ErasurePolicy,
}

impl Default for ReceiverSettings {
    fn default() -> Self {
        let d = DetectConfig::default();
        let b = BpsConfig::default();
        Self {
            filter: true,
            nft_samples: d.nft_samples,
            association_radius: d.association_radius,
            scheme: d.scheme,
            bps_enabled: true,
            bps_test_phases: b.n_test_phases,
            bps_window: b.window,
            erasure_policy: ErasurePolicy::default(),
        }
    }
}

impl ReceiverSettings {
    /// Receiver configuration for a frame whose 99% bandwidth is `bw99`.
    pub fn receiver_config(&self, bw99: f64) -> ReceiverConfig {
        ReceiverConfig {
            filter_bandwidth: self.filter.then_some(bw99),
            detect: DetectConfig {
                association_radius: self.association_radius,
                scheme: self.scheme,
                nft_samples: self.nft_samples,
            },
            bps: self.bps_enabled.then_some(BpsConfig {
                n_test_phases: self.bps_test_phases,
                window: self.bps_window,
            }),
            evolved_training: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub schema: String,
    pub mode: Mode,
    pub sweep: Vec<f64>,
    /// Payload symbols per sweep point, split evenly over the blocks.
    pub n_symbols: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Blocks per sweep point; the spread across blocks is reported.
    #[serde(default = "default_blocks")]
    pub n_blocks: usize,
    /// Longest frame simulated at once; longer blocks are split.
    #[serde(default = "default_frame_symbols")]
    pub frame_symbols: usize,
    /// Normalization time in seconds.
    #[serde(default = "default_t0")]
    pub t0: f64,
    /// Normalize with the path-averaged nonlinearity.
    #[serde(default = "default_true")]
    pub use_lpa: bool,
    #[serde(default = "default_true")]
    pub ase_enabled: bool,
    /// Minimum split steps per span; raised automatically when the
    /// nonlinear phase limit requires it.
    #[serde(default = "default_steps")]
    pub steps_per_span: usize,
    /// OSNR reference bandwidth in Hz.
    #[serde(default = "default_ref_bandwidth")]
    pub osnr_ref_bandwidth: f64,
    #[serde(default)]
    pub fiber: FiberParams,
    #[serde(default)]
    pub layout: FrameLayout,
    #[serde(default)]
    pub receiver: ReceiverSettings,
    /// Write per-point constellation dumps of the first block.
    #[serde(default = "default_true")]
    pub dump_constellations: bool,
}

fn default_blocks() -> usize {
    5
}
fn default_frame_symbols() -> usize {
    2000
}
fn default_t0() -> f64 {
    47e-12
}
fn default_true() -> bool {
    true
}
fn default_steps() -> usize {
    100
}
fn default_ref_bandwidth() -> f64 {
    dpnfdm_core::channel::DEFAULT_REF_BANDWIDTH
}

impl ScenarioConfig {
    /// Configuration with the reference defaults for `mode`.
    pub fn new(mode: Mode, sweep: Vec<f64>, n_symbols: usize) -> Self {
        Self {
            schema: SCHEMA.to_string(),
            mode,
            sweep,
            n_symbols,
            seed: 1,
            output_dir: PathBuf::from("results"),
            n_blocks: default_blocks(),
            frame_symbols: default_frame_symbols(),
            t0: default_t0(),
            use_lpa: true,
            ase_enabled: true,
            steps_per_span: default_steps(),
            osnr_ref_bandwidth: default_ref_bandwidth(),
            fiber: FiberParams::default(),
            layout: FrameLayout::default(),
            receiver: ReceiverSettings::default(),
            dump_constellations: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: String| Err(CliError::Config { field: field.to_string(), reason });
        if self.schema != SCHEMA {
            return bad("schema", format!("`{}` is not supported, expected `{SCHEMA}`", self.schema));
        }
        if self.sweep.is_empty() {
            return bad("sweep", "must contain at least one point".into());
        }
        for (k, v) in self.sweep.iter().enumerate() {
            let ok = match self.mode {
                Mode::BackToBack => v.is_finite() || *v == f64::INFINITY,
                Mode::Transmission => *v >= 1.0 && v.fract() == 0.0,
                Mode::RoundTripSelfTest => v.is_finite(),
            };
            if !ok {
                let what = match self.mode {
                    Mode::BackToBack => "an OSNR in dB",
                    Mode::Transmission => "a positive whole number of spans",
                    Mode::RoundTripSelfTest => "a finite label",
                };
                return bad("sweep", format!("point {k} ({v}) must be {what}"));
            }
        }
        if self.n_symbols == 0 {
            return bad("n_symbols", "must be at least 1".into());
        }
        if self.n_blocks == 0 {
            return bad("n_blocks", "must be at least 1".into());
        }
        if self.n_symbols < self.n_blocks {
            return bad(
                "n_symbols",
                format!("{} symbols cannot fill {} blocks", self.n_symbols, self.n_blocks),
            );
        }
        if self.frame_symbols == 0 {
            return bad("frame_symbols", "must be at least 1".into());
        }
        if !(self.t0 > 0.0) {
            return bad("t0", format!("{} must be > 0", self.t0));
        }
        if self.steps_per_span == 0 {
            return bad("steps_per_span", "must be at least 1".into());
        }
        if !(self.osnr_ref_bandwidth > 0.0) {
            return bad("osnr_ref_bandwidth", format!("{} must be > 0", self.osnr_ref_bandwidth));
        }
        let nested = |field: &str, e: dpnfdm_core::Error| CliError::Config {
            field: field.to_string(),
            reason: e.to_string(),
        };
        self.fiber.validate().map_err(|e| nested("fiber", e))?;
        self.fiber.validate_anomalous().map_err(|e| nested("fiber", e))?;
        self.layout.validate().map_err(|e| nested("layout", e))?;
        let r = &self.receiver;
        if r.nft_samples == 0 || r.nft_samples % self.layout.samples_per_slot != 0 {
            return bad(
                "receiver.nft_samples",
                format!(
                    "{} must be a positive multiple of layout.samples_per_slot ({})",
                    r.nft_samples, self.layout.samples_per_slot
                ),
            );
        }
        if !(r.association_radius > 0.0) {
            return bad("receiver.association_radius", format!("{} must be > 0", r.association_radius));
        }
        if r.bps_enabled && (r.bps_test_phases == 0 || r.bps_window == 0) {
            return bad("receiver.bps_test_phases", "test phases and window must be >= 1".into());
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }
}
