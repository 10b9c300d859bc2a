//! Browser bindings: single-symbol waveforms, the |a(lambda)| landscape of a
//! slot and a complete simulated link with its received constellation.
//!
//! The plain functions work natively and are what the tests exercise; the
//! `#[wasm_bindgen]` wrappers only convert errors for JavaScript.

use dpnfdm_core::channel::{add_noise_for_osnr, propagate_link_adaptive, SsfmConfig, DEFAULT_REF_BANDWIDTH};
use dpnfdm_core::fiber::normalization_from_link;
use dpnfdm_core::nft::{mzsp_scatter_with, Scheme};
use dpnfdm_core::transceiver::{
    bandwidth_99, build_frame, decide_and_count, map_bits, random_symbols, receive_frame, synthesize_slot,
    watts_to_dbm, ErasurePolicy, FrameLayout, NfdmSymbol, ReceiverConfig,
};
use dpnfdm_core::{FiberParams, NormalizationParams, Result, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

/// Span length the demo normalizes to, in km.
pub const SPAN_KM: f64 = 41.5;
const T0: f64 = 47e-12;
/// Samples of one slot in the waveform and spectrum views.
pub const SLOT_SAMPLES: usize = 512;
/// Largest frame the link view accepts, to keep the page responsive.
pub const MAX_SYMBOLS: usize = 512;
pub const MAX_SPANS: usize = 12;

fn fiber(n_spans: usize) -> FiberParams {
    FiberParams::default().with_spans(SPAN_KM, n_spans.max(1))
}

fn normalization() -> Result<NormalizationParams> {
    normalization_from_link(T0, &fiber(1), true)
}

fn slot_signal(byte: u8, z: f64, n: usize) -> Result<dpnfdm_core::DualPolSignal> {
    let layout = FrameLayout::default();
    let np = normalization()?;
    let symbol = map_bits(NfdmSymbol::bits_of(byte), &layout.constellation);
    let grid = layout.slot_grid(&np, n)?;
    Ok(synthesize_slot(&symbol.points, &layout, grid, z)?.0)
}

/// Normalized slot waveform of the symbol `byte` after ideal evolution over
/// normalized distance `z`: `[t.., |q1|.., |q2|..]`, `n` samples each.
pub fn slot_waveform(byte: u8, z: f64, n: usize) -> Result<Vec<f64>> {
    let sig = slot_signal(byte, z, n)?;
    let mut out: Vec<f64> = sig.grid.times().collect();
    out.extend(sig.q1.iter().map(|x| x.norm()));
    out.extend(sig.q2.iter().map(|x| x.norm()));
    Ok(out)
}

/// `log10 |a(lambda)|` of the slot of `byte` on an `nx` x `ny` grid, row
/// major with the first row at `im_max`.
pub fn a_magnitude_map(
    byte: u8,
    re: (f64, f64),
    im: (f64, f64),
    nx: usize,
    ny: usize,
) -> Result<Vec<f64>> {
    let sig = slot_signal(byte, 0.0, SLOT_SAMPLES)?;
    let step = |lo: f64, hi: f64, k: usize, n: usize| lo + (hi - lo) * k as f64 / (n.max(2) - 1) as f64;
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = step(im.1, im.0, j, ny);
        for i in 0..nx {
            let lambda = C64::new(step(re.0, re.1, i, nx), y);
            let a = mzsp_scatter_with(&sig, lambda, false, Scheme::default())?.a;
            out.push(a.norm().max(1e-12).log10());
        }
    }
    Ok(out)
}

/// Outcome of one simulated frame.
#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct LinkResult {
    points: Vec<f64>,
    ber: f64,
    erased: usize,
    ptx_dbm: f64,
    bw99_ghz: f64,
    distance_km: f64,
}

#[wasm_bindgen]
impl LinkResult {
    /// Received points as `[re, im]` pairs, four per symbol in the order
    /// `b1(l1), b2(l1), b1(l2), b2(l2)`; erased points are NaN.
    #[wasm_bindgen(getter)]
    pub fn points(&self) -> Vec<f64> {
        self.points.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn ber(&self) -> f64 {
        self.ber
    }
    #[wasm_bindgen(getter)]
    pub fn erased(&self) -> usize {
        self.erased
    }
    #[wasm_bindgen(getter)]
    pub fn ptx_dbm(&self) -> f64 {
        self.ptx_dbm
    }
    #[wasm_bindgen(getter)]
    pub fn bw99_ghz(&self) -> f64 {
        self.bw99_ghz
    }
    #[wasm_bindgen(getter)]
    pub fn distance_km(&self) -> f64 {
        self.distance_km
    }
}

/// Transmits one frame of `n_symbols` random symbols. With `n_spans == 0`
/// the link is back-to-back with noise loaded to `osnr_db`; otherwise the
/// frame crosses `n_spans` amplified spans with amplifier noise at
/// `noise_figure_db` (ignored when `ase` is false). Sizes are clamped to
/// [`MAX_SYMBOLS`] and [`MAX_SPANS`].
pub fn simulate_link(
    n_symbols: usize,
    n_spans: usize,
    osnr_db: f64,
    noise_figure_db: f64,
    ase: bool,
    seed: u64,
) -> Result<LinkResult> {
    let n_symbols = n_symbols.clamp(1, MAX_SYMBOLS);
    let n_spans = n_spans.min(MAX_SPANS);
    let np = normalization()?;
    let layout = FrameLayout::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbols = random_symbols(n_symbols, &layout.constellation, &mut rng);
    let frame = build_frame(&symbols, &layout, &np)?;
    let bw = bandwidth_99(&frame.signal)?;
    let (rx, z, distance_km) = if n_spans == 0 {
        (add_noise_for_osnr(&frame.signal, osnr_db, DEFAULT_REF_BANDWIDTH, seed, 1)?, 0.0, 0.0)
    } else {
        let link = FiberParams { noise_figure_db, ..fiber(n_spans) };
        let ssfm = SsfmConfig {
            steps_per_span: 50,
            rng_seed: seed,
            ase_enabled: ase,
        };
        let km = link.link_length();
        (propagate_link_adaptive(&frame.signal, &link, &ssfm)?.0, np.z_from_km(km), km)
    };
    let cfg = ReceiverConfig {
        filter_bandwidth: Some(bw),
        ..ReceiverConfig::default()
    };
    let received = receive_frame(&rx, &frame, z, &cfg)?;
    let (_, stats) = decide_and_count(&received.points, &frame.symbols, &layout.constellation, ErasurePolicy::default())?;
    let points = received
        .points
        .iter()
        .flatten()
        .flat_map(|p| p.map_or([f64::NAN; 2], |c| [c.re, c.im]))
        .collect();
    Ok(LinkResult {
        points,
        ber: stats.ber(),
        erased: stats.erased_points,
        ptx_dbm: watts_to_dbm(frame.p_tx()),
        bw99_ghz: bw * 1e-9,
        distance_km,
    })
}

fn js<T>(r: Result<T>) -> std::result::Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = slotWaveform)]
pub fn slot_waveform_js(byte: u8, z: f64, n: usize) -> std::result::Result<Vec<f64>, JsError> {
    js(slot_waveform(byte, z, n))
}

#[wasm_bindgen(js_name = aMagnitudeMap)]
#[allow(clippy::too_many_arguments)]
pub fn a_magnitude_map_js(
    byte: u8,
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
    nx: usize,
    ny: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    js(a_magnitude_map(byte, (re_min, re_max), (im_min, im_max), nx, ny))
}

#[wasm_bindgen(js_name = simulateLink)]
pub fn simulate_link_js(
    n_symbols: usize,
    n_spans: usize,
    osnr_db: f64,
    noise_figure_db: f64,
    ase: bool,
    seed: u32,
) -> std::result::Result<LinkResult, JsError> {
    js(simulate_link(n_symbols, n_spans, osnr_db, noise_figure_db, ase, u64::from(seed)))
}

/// Normalized distance of `km` of fiber in the demo normalization.
#[wasm_bindgen(js_name = normalizedDistance)]
pub fn normalized_distance(km: f64) -> f64 {
    normalization().map_or(f64::NAN, |np| np.z_from_km(km))
}
