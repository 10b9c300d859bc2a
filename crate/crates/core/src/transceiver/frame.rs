//! Frame construction: per-slot Darboux synthesis, denormalization and
//! concatenation behind a training sequence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::constellation::{map_bits, paper_constellation, ConstellationSpec, NfdmSymbol};
use crate::channel::expected_b_evolution;
use crate::error::{invalid, Error, Result};
use crate::fiber::NormalizationParams;
use crate::nft::{generate_from_spectrum, DarbouxPlan, DarbouxTarget};
use crate::signal::{Domain, DualPolSignal, TimeGrid};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameLayout {
    /// Slot duration in seconds.
    pub symbol_slot: f64,
    pub n_training: usize,
    pub training_seed: u64,
    /// Transmit samples per slot.
    pub samples_per_slot: usize,
    /// Normalized time of the slot center relative to the synthesis origin.
    /// The two solitons sit asymmetrically, so a centered slot wastes room.
    pub center_offset: f64,
    /// Largest accepted boundary-to-peak magnitude ratio of a slot.
    pub overflow_threshold: f64,
    /// Also emit an arcsine-predistorted modulator drive.
    pub predistortion: bool,
    pub constellation: [ConstellationSpec; 2],
}

impl Default for FrameLayout {
    fn default() -> Self {
        Self {
            symbol_slot: 1e-9,
            n_training: 64,
            training_seed: 0x5eed,
            samples_per_slot: 128,
            center_offset: 2.9,
            overflow_threshold: 1e-2,
            predistortion: false,
            constellation: paper_constellation(),
        }
    }
}

impl FrameLayout {
    pub fn validate(&self) -> Result<()> {
        if !(self.symbol_slot > 0.0) || !self.symbol_slot.is_finite() {
            return Err(invalid("symbol_slot", format!("{} must be > 0", self.symbol_slot)));
        }
        if self.samples_per_slot < 8 {
            return Err(invalid(
                "samples_per_slot",
                format!("{} is below the minimum of 8", self.samples_per_slot),
            ));
        }
        if !self.center_offset.is_finite() {
            return Err(invalid("center_offset", "must be finite"));
        }
        if !(self.overflow_threshold > 0.0 && self.overflow_threshold < 1.0) {
            return Err(invalid(
                "overflow_threshold",
                format!("{} must lie in (0, 1)", self.overflow_threshold),
            ));
        }
        for c in &self.constellation {
            c.ring.validate()?;
            if !(c.lambda.im > 0.0) {
                return Err(invalid(
                    "constellation",
                    format!("eigenvalue {} is not in the upper half plane", c.lambda),
                ));
            }
        }
        if self.constellation[0].lambda == self.constellation[1].lambda {
            return Err(invalid("constellation", "eigenvalues must differ"));
        }
        Ok(())
    }

    pub fn eigenvalues(&self) -> [C64; 2] {
        [self.constellation[0].lambda, self.constellation[1].lambda]
    }

    /// Normalized slot width.
    pub fn normalized_slot(&self, np: &NormalizationParams) -> f64 {
        self.symbol_slot / np.t0
    }

    /// Normalized grid of one slot with `n` samples.
    pub fn slot_grid(&self, np: &NormalizationParams, n: usize) -> Result<TimeGrid> {
        let w = self.normalized_slot(np);
        TimeGrid::new(n, w / n as f64, self.center_offset - 0.5 * w)
    }

    /// Deterministic training symbols.
    pub fn training_symbols(&self) -> Vec<NfdmSymbol> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.training_seed);
        (0..self.n_training)
            .map(|_| map_bits(NfdmSymbol::bits_of(rng.gen()), &self.constellation))
            .collect()
    }
}

/// Normalized waveform of one symbol on the slot grid, b-coefficients
/// advanced by `z` along the ideal lossless channel.
pub fn synthesize_slot(
    points: &[C64; 4],
    layout: &FrameLayout,
    grid: TimeGrid,
    z: f64,
) -> Result<(DualPolSignal, f64)> {
    let targets = (0..2)
        .map(|k| {
            let lambda = layout.constellation[k].lambda;
            DarbouxTarget {
                lambda,
                b: expected_b_evolution([points[2 * k], points[2 * k + 1]], lambda, z),
            }
        })
        .collect();
    let syn = generate_from_spectrum(&DarbouxPlan::new(targets, grid)?)?;
    Ok((syn.signal, syn.boundary_ratio))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    /// Physical field, sample 0 at the start of the first slot.
    pub signal: DualPolSignal,
    /// Arcsine-predistorted modulator drive, when requested.
    pub drive: Option<DualPolSignal>,
    pub layout: FrameLayout,
    pub norm: NormalizationParams,
    pub training: Vec<NfdmSymbol>,
    pub symbols: Vec<NfdmSymbol>,
    pub training_start: usize,
    pub payload_start: usize,
    /// Worst boundary-to-peak ratio over all slots.
    pub max_boundary_ratio: f64,
}

impl Frame {
    pub fn n_slots(&self) -> usize {
        self.training.len() + self.symbols.len()
    }

    /// Average launch power in watts.
    pub fn p_tx(&self) -> f64 {
        self.signal.mean_power()
    }

    /// Transmitted training section.
    pub fn training_reference(&self) -> Result<DualPolSignal> {
        self.signal
            .slice(self.training_start, self.training.len() * self.layout.samples_per_slot)
    }

    /// Training section as it arrives after normalized distance `z` of an
    /// ideal lossless link: every slot resynthesized with evolved b.
    pub fn training_reference_at(&self, z: f64) -> Result<DualPolSignal> {
        if z == 0.0 {
            return self.training_reference();
        }
        let sps = self.layout.samples_per_slot;
        let points: Vec<[C64; 4]> = self.training.iter().map(|s| s.points).collect();
        let (sig, _) = assemble(&points, &self.layout, &self.norm, z)?;
        let sig = sig.slice(0, points.len() * sps)?;
        Ok(sig)
    }
}

/// Concatenated physical waveform of `points`, slot by slot.
fn assemble(
    points: &[[C64; 4]],
    layout: &FrameLayout,
    np: &NormalizationParams,
    z: f64,
) -> Result<(DualPolSignal, f64)> {
    let sps = layout.samples_per_slot;
    let grid = layout.slot_grid(np, sps)?;
    let slots: Vec<(DualPolSignal, f64)> = points
        .par_iter()
        .map(|p| synthesize_slot(p, layout, grid, z))
        .collect::<Result<_>>()?;
    let amp = C64::new(np.power.sqrt(), 0.0);
    let mut q1 = Vec::with_capacity(points.len() * sps);
    let mut q2 = Vec::with_capacity(points.len() * sps);
    let mut worst = 0.0f64;
    for (s, ratio) in &slots {
        worst = worst.max(*ratio);
        q1.extend(s.q1.iter().map(|x| x * amp));
        q2.extend(s.q2.iter().map(|x| x * amp));
    }
    let dt = layout.symbol_slot / sps as f64;
    let grid = TimeGrid::new(q1.len().max(1), dt, 0.0)?;
    if q1.is_empty() {
        return Ok((DualPolSignal::zeros(grid, Domain::Physical), 0.0));
    }
    Ok((DualPolSignal::new(grid, q1, q2, Domain::Physical)?, worst))
}

/// Ideal inverse of the sinusoidal modulator transfer, applied to each
/// quadrature after scaling the largest quadrature magnitude to one.
fn predistort(sig: &DualPolSignal) -> DualPolSignal {
    let peak = sig
        .q1
        .iter()
        .chain(&sig.q2)
        .map(|x| x.re.abs().max(x.im.abs()))
        .fold(0.0, f64::max);
    let map = |v: &[C64]| -> Vec<C64> {
        if peak == 0.0 {
            return v.to_vec();
        }
        v.iter()
            .map(|x| C64::new((x.re / peak).asin(), (x.im / peak).asin()))
            .collect()
    };
    DualPolSignal {
        grid: sig.grid,
        q1: map(&sig.q1),
        q2: map(&sig.q2),
        domain: Domain::Physical,
    }
}

/// Builds the physical frame: training slots followed by one slot per
/// symbol. Fails with [`Error::SlotOverflow`] when any slot's tails exceed
/// the layout threshold.
pub fn build_frame(
    symbols: &[NfdmSymbol],
    layout: &FrameLayout,
    np: &NormalizationParams,
) -> Result<Frame> {
    layout.validate()?;
    if symbols.is_empty() && layout.n_training == 0 {
        return Err(invalid("symbols", "frame would be empty"));
    }
    let training = layout.training_symbols();
    let points: Vec<[C64; 4]> = training
        .iter()
        .chain(symbols)
        .map(|s| s.points)
        .collect();
    let (signal, worst) = assemble(&points, layout, np, 0.0)?;
    if !(worst <= layout.overflow_threshold) {
        return Err(Error::SlotOverflow { ratio: worst });
    }
    let drive = layout.predistortion.then(|| predistort(&signal));
    Ok(Frame {
        signal,
        drive,
        layout: layout.clone(),
        norm: *np,
        training_start: 0,
        payload_start: training.len() * layout.samples_per_slot,
        training,
        symbols: symbols.to_vec(),
        max_boundary_ratio: worst,
    })
}

/// Uniformly random payload symbols.
pub fn random_symbols(n: usize, spec: &[ConstellationSpec; 2], rng: &mut impl Rng) -> Vec<NfdmSymbol> {
    (0..n)
        .map(|_| map_bits(NfdmSymbol::bits_of(rng.gen()), spec))
        .collect()
}
