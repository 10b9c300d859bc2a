//! Fiber channel: symmetric split-step Fourier integration of the Manakov
//! equations with span loss, lumped amplification and ASE noise, plus the
//! ideal spectral evolution law and OSNR noise loading.
//!
//! The envelope uses the conjugate carrier convention, so for `E` in
//! sqrt(W), `tau` in seconds and `s` in km along the fiber
//!
//! ```text
//! dE/ds = i beta2/2 d2E/dtau2 - i (8/9) gamma |E|^2 E - alpha/2 E
//! ```
//!
//! which is the usual averaged Manakov equation written for `E*`. With
//! `q = E / sqrt(P)`, `t = tau / T0` and `z = s / L_char` (lossless
//! path-averaged) it becomes
//!
//! ```text
//! i dq/dz = d2q/dt2 + 2 |q|^2 q
//! ```
//!
//! with `z` increasing along the fiber. The b-coefficients then evolve as
//! `b(z) = b(0) e^{-4i lambda^2 z}` for forward propagation.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fiber::FiberParams;
use crate::signal::{Domain, DualPolSignal};
use crate::spectrum::{angular_frequencies, frequencies, power_spectrum};
use crate::C64;

/// Planck constant in J s.
const PLANCK: f64 = 6.626_070_15e-34;

/// Largest nonlinear phase rotation allowed in one step, in radians.
pub const MAX_PHASE_PER_STEP: f64 = 0.05;

/// Fraction of the simulation band, at its edges, watched by the aliasing
/// guard.
pub const ALIASING_BAND: f64 = 0.05;

/// Largest energy fraction tolerated in the guarded band.
pub const ALIASING_LIMIT: f64 = 1e-6;

/// Default OSNR reference bandwidth: 12.5 GHz (0.1 nm at 1550 nm).
pub const DEFAULT_REF_BANDWIDTH: f64 = 12.5e9;

/// Split-step settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SsfmConfig {
    pub steps_per_span: usize,
    pub rng_seed: u64,
    pub ase_enabled: bool,
}

impl Default for SsfmConfig {
    fn default() -> Self {
        Self {
            steps_per_span: 100,
            rng_seed: 0,
            ase_enabled: false,
        }
    }
}

/// Reproducible Gaussian source for one noise stream: the same
/// `(seed, stream)` pair always yields the same samples.
pub fn noise_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn add_white_noise(x: &mut [C64], variance: f64, rng: &mut ChaCha8Rng) {
    let sigma = (0.5 * variance).sqrt();
    for v in x.iter_mut() {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *v += C64::new(re, im) * sigma;
    }
}

/// Energy fraction in the outer `ALIASING_BAND` of the simulation band.
pub fn band_edge_fraction(sig: &DualPolSignal) -> f64 {
    let n = sig.len();
    let spec = power_spectrum(&sig.q1, &sig.q2);
    let f = frequencies(n, sig.grid.dt());
    let f_max = 0.5 / sig.grid.dt();
    let total: f64 = spec.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let edge: f64 = spec
        .iter()
        .zip(&f)
        .filter(|(_, f)| f.abs() > (1.0 - ALIASING_BAND) * f_max)
        .map(|(p, _)| p)
        .sum();
    edge / total
}

fn guard_aliasing(sig: &DualPolSignal) -> Result<()> {
    let fraction = band_edge_fraction(sig);
    if fraction > ALIASING_LIMIT {
        return Err(Error::Aliasing { fraction });
    }
    Ok(())
}

/// Lossy split-step kernel shared by the physical and normalized paths.
/// Field equation: `dE/dz = i k2 d2E/dt2 + i g |E|^2 E - (loss/2) E`.
/// The nonlinear step limit applies to `|g|`.
struct SplitStep {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Linear half-step multiplier per FFT bin, including the 1/n of the
    /// inverse transform.
    half: Vec<C64>,
    /// Linear full-step multiplier per FFT bin, likewise scaled.
    full: Vec<C64>,
    /// Nonlinear phase per unit power.
    phase_per_power: f64,
}

impl SplitStep {
    fn new(n: usize, dt: f64, k2: f64, g: f64, loss: f64, h: f64) -> Self {
        let w = angular_frequencies(n, dt);
        let inv_n = 1.0 / n as f64;
        let op = |len: f64| -> Vec<C64> {
            w.iter()
                .map(|w| (C64::new(-0.5 * loss * len, -k2 * w * w * len)).exp() * inv_n)
                .collect()
        };
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            half: op(0.5 * h),
            full: op(h),
            phase_per_power: g * h,
        }
    }

    fn linear(&self, x: &mut [C64], op: &[C64]) {
        self.forward.process(x);
        for (v, m) in x.iter_mut().zip(op) {
            *v *= m;
        }
        self.inverse.process(x);
    }

    fn nonlinear(&self, sig: &mut DualPolSignal) -> Result<()> {
        let peak = sig.instantaneous_power().into_iter().fold(0.0, f64::max);
        let phase = self.phase_per_power.abs() * peak;
        if phase > MAX_PHASE_PER_STEP {
            return Err(Error::StepTooLarge { phase });
        }
        for (a, b) in sig.q1.iter_mut().zip(sig.q2.iter_mut()) {
            let rot = C64::from_polar(1.0, self.phase_per_power * (a.norm_sqr() + b.norm_sqr()));
            *a *= rot;
            *b *= rot;
        }
        Ok(())
    }

    /// `steps` symmetric steps: half linear, then alternating nonlinear and
    /// full linear, closing with a half linear step.
    fn run(&self, sig: &mut DualPolSignal, steps: usize) -> Result<()> {
        self.linear(&mut sig.q1, &self.half);
        self.linear(&mut sig.q2, &self.half);
        for k in 0..steps {
            self.nonlinear(sig)?;
            let op = if k + 1 == steps { &self.half } else { &self.full };
            self.linear(&mut sig.q1, op);
            self.linear(&mut sig.q2, op);
        }
        Ok(())
    }
}

/// Propagates a physical signal through `fiber.n_spans` spans. Each span is
/// integrated with `cfg.steps_per_span` symmetric split steps and followed by
/// an amplifier whose gain restores the span loss; with ASE enabled it adds
/// white Gaussian noise of PSD `(G - 1) h nu NF / 2` per polarization.
pub fn propagate_link(
    sig: &DualPolSignal,
    fiber: &FiberParams,
    cfg: &SsfmConfig,
) -> Result<DualPolSignal> {
    sig.require(Domain::Physical)?;
    fiber.validate()?;
    if cfg.steps_per_span == 0 {
        return Err(invalid("steps_per_span", "must be at least 1"));
    }
    guard_aliasing(sig)?;

    let dt = sig.grid.dt();
    let h = fiber.span_length / cfg.steps_per_span as f64;
    // beta2 in s^2/km
    let k2 = 0.5 * fiber.beta2()? * 1e-24;
    let kernel = SplitStep::new(
        sig.len(),
        dt,
        k2,
        -8.0 / 9.0 * fiber.gamma,
        fiber.alpha_per_km(),
        h,
    );
    let gain = fiber.span_gain();
    let amp = gain.sqrt();
    let nf = 10f64.powf(fiber.noise_figure_db / 10.0);
    let psd = (gain - 1.0) * PLANCK * fiber.carrier_frequency() * nf / 2.0;
    let variance = psd / dt;

    let mut out = sig.clone();
    for span in 0..fiber.n_spans {
        kernel.run(&mut out, cfg.steps_per_span)?;
        out.scale(C64::new(amp, 0.0));
        if cfg.ase_enabled {
            let mut rng = noise_rng(cfg.rng_seed, span as u64);
            add_white_noise(&mut out.q1, variance, &mut rng);
            add_white_noise(&mut out.q2, variance, &mut rng);
        }
    }
    if !cfg.ase_enabled {
        guard_aliasing(&out)?;
    }
    Ok(out)
}

/// Retries allowed by [`propagate_link_adaptive`].
pub const ADAPTIVE_RETRIES: usize = 4;

/// [`propagate_link`] with at least `max(cfg.steps_per_span,
/// recommended_steps_per_span)` steps; when the step guard still trips
/// (noise peaks growing along the link) the run is repeated with the step
/// count scaled by the reported excess plus 25%. Noise seeds are unchanged,
/// so the result is deterministic. Returns the output and the step count
/// used.
pub fn propagate_link_adaptive(
    sig: &DualPolSignal,
    fiber: &FiberParams,
    cfg: &SsfmConfig,
) -> Result<(DualPolSignal, usize)> {
    let mut steps = cfg.steps_per_span.max(recommended_steps_per_span(sig, fiber));
    for attempt in 0..=ADAPTIVE_RETRIES {
        match propagate_link(sig, fiber, &SsfmConfig { steps_per_span: steps, ..*cfg }) {
            Err(Error::StepTooLarge { phase }) if attempt < ADAPTIVE_RETRIES => {
                steps = (steps as f64 * 1.25 * phase / MAX_PHASE_PER_STEP).ceil() as usize;
            }
            other => return other.map(|out| (out, steps)),
        }
    }
    unreachable!("the last attempt always returns")
}

/// Smallest step count per span keeping the nonlinear phase per step within
/// `MAX_PHASE_PER_STEP` at the launch peak power of `sig`, with a factor 2
/// margin for peak growth and noise.
pub fn recommended_steps_per_span(sig: &DualPolSignal, fiber: &FiberParams) -> usize {
    let peak = sig.instantaneous_power().into_iter().fold(0.0, f64::max);
    let needed = 2.0 * 8.0 / 9.0 * fiber.gamma * peak * fiber.span_length / MAX_PHASE_PER_STEP;
    needed.ceil().max(1.0) as usize
}

/// Lossless normalized propagation over `z` with `steps` split steps.
pub fn propagate_normalized(sig: &DualPolSignal, z: f64, steps: usize) -> Result<DualPolSignal> {
    sig.require(Domain::Normalized)?;
    if !(z >= 0.0) || !z.is_finite() {
        return Err(invalid("z", format!("{z} must be finite and >= 0")));
    }
    if steps == 0 {
        return Err(invalid("steps", "must be at least 1"));
    }
    guard_aliasing(sig)?;
    let kernel = SplitStep::new(sig.len(), sig.grid.dt(), -1.0, -2.0, 0.0, z / steps as f64);
    let mut out = sig.clone();
    kernel.run(&mut out, steps)?;
    Ok(out)
}

/// Smallest step count keeping the nonlinear phase per step within
/// `MAX_PHASE_PER_STEP` for a normalized signal of peak power `peak_power`
/// propagated over `z`. Power is conserved by the lossless model, but the
/// peak can grow as the pulses interact, so a factor 2 margin is applied.
pub fn normalized_steps(peak_power: f64, z: f64) -> usize {
    let needed = 2.0 * 2.0 * peak_power * z / MAX_PHASE_PER_STEP;
    needed.ceil().max(1.0) as usize
}

/// Ideal evolution of a b-vector over normalized distance `z`:
/// `b e^{-4i lambda^2 z}`. `a` does not change.
pub fn expected_b_evolution(b: [C64; 2], lambda: C64, z: f64) -> [C64; 2] {
    let m = (C64::new(0.0, -4.0) * lambda * lambda * z).exp();
    [b[0] * m, b[1] * m]
}

/// Loads white Gaussian noise on a physical signal so that
/// `OSNR = P_signal / (2 N0 B_ref)` equals the target, `N0` being the noise
/// PSD per polarization. An infinite target returns the signal unchanged.
pub fn add_noise_for_osnr(
    sig: &DualPolSignal,
    target_osnr_db: f64,
    ref_bandwidth: f64,
    rng_seed: u64,
    stream: u64,
) -> Result<DualPolSignal> {
    sig.require(Domain::Physical)?;
    if target_osnr_db.is_nan() || target_osnr_db < -10.0 {
        return Err(invalid(
            "target_osnr_db",
            format!("{target_osnr_db} dB is below the -10 dB floor"),
        ));
    }
    if !(ref_bandwidth > 0.0) {
        return Err(invalid("ref_bandwidth", format!("{ref_bandwidth} must be > 0")));
    }
    let p_sig = sig.mean_power();
    if p_sig == 0.0 {
        return Err(Error::ZeroSignal);
    }
    if target_osnr_db == f64::INFINITY {
        return Ok(sig.clone());
    }
    let osnr = 10f64.powf(target_osnr_db / 10.0);
    let n0 = p_sig / (2.0 * osnr * ref_bandwidth);
    let variance = n0 / sig.grid.dt();
    let mut out = sig.clone();
    let mut rng = noise_rng(rng_seed, stream);
    add_white_noise(&mut out.q1, variance, &mut rng);
    add_white_noise(&mut out.q2, variance, &mut rng);
    Ok(out)
}

/// Periodogram OSNR estimate. The noise PSD is averaged over the bins
/// outside `signal_bandwidth` (two-sided width, Hz); the signal power is the
/// total power minus the noise power over the full simulation band.
pub fn estimate_osnr_db(sig: &DualPolSignal, signal_bandwidth: f64, ref_bandwidth: f64) -> Result<f64> {
    let n = sig.len();
    let dt = sig.grid.dt();
    let spec = power_spectrum(&sig.q1, &sig.q2);
    let f = frequencies(n, dt);
    let (sum, count) = spec
        .iter()
        .zip(&f)
        .filter(|(_, f)| f.abs() > 0.5 * signal_bandwidth)
        .fold((0.0, 0usize), |(s, c), (p, _)| (s + p, c + 1));
    if count == 0 {
        return Err(invalid("signal_bandwidth", "leaves no noise-only bins"));
    }
    // mean power per bin -> two-polarization PSD: |X|^2 dt / n
    let psd_both = sum / count as f64 * dt / n as f64;
    let noise_power = psd_both / dt;
    let p_sig = sig.mean_power() - noise_power;
    if !(p_sig > 0.0) {
        return Err(Error::ZeroSignal);
    }
    Ok(10.0 * (p_sig / (psd_both * ref_bandwidth)).log10())
}
