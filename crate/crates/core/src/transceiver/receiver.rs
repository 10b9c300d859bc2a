//! Receiver chain: front end, synchronization, per-slot detection and
//! phase recovery.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::constellation::ring_of;
use super::frame::Frame;
use super::phase::{blind_phase_search, BpsConfig};
use crate::channel::expected_b_evolution;
use crate::error::{invalid, Error, Result};
use crate::nft::{compute_b_coefficients_with, find_discrete_eigenvalues, MatchPoint, Scheme, SearchConfig};
use crate::signal::{Domain, DualPolSignal, TimeGrid};
use crate::spectrum::{fft, frequencies, ifft, upsample};
use crate::C64;

/// Peak-to-side-lobe ratio below which synchronization is refused.
pub const MIN_PSLR: f64 = 3.0;

/// Applies an ideal low-pass of total width `bandwidth` (Hz) and rescales
/// the result to mean power `p_tx`. Filtering first keeps the rescaling
/// independent of the out-of-band noise, and so of the simulation bandwidth.
pub fn receiver_frontend(rx: &DualPolSignal, p_tx: f64, bandwidth: f64) -> Result<DualPolSignal> {
    rx.require(Domain::Physical)?;
    if !(p_tx > 0.0) {
        return Err(invalid("p_tx", format!("{p_tx} must be > 0")));
    }
    if !(bandwidth > 0.0) {
        return Err(invalid("bandwidth", format!("{bandwidth} must be > 0")));
    }
    let mut out = rx.clone();
    let f = frequencies(out.len(), out.grid.dt());
    for q in [&mut out.q1, &mut out.q2] {
        fft(q);
        for (x, f) in q.iter_mut().zip(&f) {
            if f.abs() > 0.5 * bandwidth {
                *x = C64::new(0.0, 0.0);
            }
        }
        ifft(q);
    }
    let p = out.mean_power();
    if p == 0.0 {
        return Err(Error::ZeroSignal);
    }
    out.scale(C64::new((p_tx / p).sqrt(), 0.0));
    Ok(out)
}

/// Linear cross-correlation magnitude `|sum_j sum_n x_j[n + k] conj(r_j[n])|`
/// for every lag `k` in `0..=len(x) - len(r)`.
fn cross_correlation(x: [&[C64]; 2], r: [&[C64]; 2]) -> Vec<f64> {
    let n = x[0].len();
    let m = r[0].len();
    let size = (n + m).next_power_of_two();
    let mut acc = vec![C64::new(0.0, 0.0); size];
    for j in 0..2 {
        let mut a = vec![C64::new(0.0, 0.0); size];
        a[..n].copy_from_slice(x[j]);
        let mut b = vec![C64::new(0.0, 0.0); size];
        b[..m].copy_from_slice(r[j]);
        fft(&mut a);
        fft(&mut b);
        for (s, (u, v)) in acc.iter_mut().zip(a.iter().zip(&b)) {
            *s += u * v.conj();
        }
    }
    ifft(&mut acc);
    acc[..=n - m].iter().map(|c| c.norm()).collect()
}

/// Half-width of the autocorrelation main lobe: lag of its first local
/// minimum.
fn main_lobe(r: &DualPolSignal) -> usize {
    let m = r.len();
    let pad = |q: &[C64]| -> Vec<C64> {
        let mut v = q.to_vec();
        v.resize(2 * m, C64::new(0.0, 0.0));
        v
    };
    let auto = cross_correlation([&pad(&r.q1), &pad(&r.q2)], [&r.q1, &r.q2]);
    (1..m)
        .find(|&k| auto[k] <= auto[k - 1] && auto[k] <= auto[k + 1])
        .unwrap_or(1)
}

/// Sample offset of `training_ref` inside `rx`, from the peak of the
/// cross-correlation summed over both polarizations.
pub fn synchronize(rx: &DualPolSignal, training_ref: &DualPolSignal) -> Result<usize> {
    if training_ref.is_empty() || training_ref.len() > rx.len() {
        return Err(invalid(
            "training_ref",
            format!("{} samples do not fit in {} received", training_ref.len(), rx.len()),
        ));
    }
    let c = cross_correlation([&rx.q1, &rx.q2], [&training_ref.q1, &training_ref.q2]);
    let (peak_at, peak) = c
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best });
    if !(peak > 0.0) {
        return Err(Error::SyncFailure { ratio: 0.0 });
    }
    let lobe = main_lobe(training_ref);
    let side = c
        .iter()
        .enumerate()
        .filter(|(k, _)| k.abs_diff(peak_at) >= lobe)
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    let ratio = if side > 0.0 { peak / side } else { f64::INFINITY };
    if ratio < MIN_PSLR {
        return Err(Error::SyncFailure { ratio });
    }
    Ok(peak_at)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    /// Found eigenvalues farther than this from every expected one are
    /// ignored; an expected eigenvalue without a match is erased.
    pub association_radius: f64,
    pub scheme: Scheme,
    /// NFT samples per slot (the slot is interpolated to this).
    pub nft_samples: usize,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            association_radius: 0.15,
            scheme: Scheme::default(),
            nft_samples: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    /// `(b1(l1), b2(l1), b1(l2), b2(l2))` after derotation, `None` if the
    /// eigenvalue was not found.
    pub points: [Option<C64>; 4],
    /// Eigenvalue associated with each expected one.
    pub eigenvalues: [Option<C64>; 2],
    /// Every eigenvalue found in the slot.
    pub found: Vec<C64>,
}

/// Eigenvalue search seeded at `expected`, b at the found eigenvalues and
/// derotation by `e^{4 i lambda^2 z}` with the found lambda.
pub fn detect_symbol(
    slot: &DualPolSignal,
    expected: &[C64; 2],
    z: f64,
    cfg: &DetectConfig,
) -> Result<Detection> {
    slot.require(Domain::Normalized)?;
    let search = SearchConfig::warm_start(expected).with_scheme(cfg.scheme);
    let found = find_discrete_eigenvalues(slot, &search)?;
    let mut taken = vec![false; found.len()];
    let mut eigenvalues = [None; 2];
    for (k, e) in expected.iter().enumerate() {
        let best = found
            .iter()
            .enumerate()
            .filter(|(j, f)| !taken[*j] && (*f - e).norm() <= cfg.association_radius)
            .min_by(|a, b| (a.1 - e).norm().total_cmp(&(b.1 - e).norm()));
        if let Some((j, f)) = best {
            taken[j] = true;
            eigenvalues[k] = Some(*f);
        }
    }
    let present: Vec<C64> = eigenvalues.iter().flatten().copied().collect();
    let mut points = [None; 4];
    if !present.is_empty() {
        let spec = compute_b_coefficients_with(slot, &present, MatchPoint::Midpoint, cfg.scheme)?;
        let mut it = spec.entries.iter();
        for (k, e) in eigenvalues.iter().enumerate() {
            if e.is_some() {
                let entry = it.next().expect("one entry per present eigenvalue");
                let b = expected_b_evolution(entry.b, entry.lambda, -z);
                if b[0].is_finite() && b[1].is_finite() {
                    points[2 * k] = Some(b[0]);
                    points[2 * k + 1] = Some(b[1]);
                }
            }
        }
    }
    Ok(Detection {
        points,
        eigenvalues,
        found,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverConfig {
    /// Brick-wall filter width in Hz; `None` skips filtering and rescaling.
    pub filter_bandwidth: Option<f64>,
    pub detect: DetectConfig,
    /// Blind phase search per constellation; `None` skips it.
    pub bps: Option<BpsConfig>,
    /// Compare the received training section with its ideal evolved form
    /// rather than the transmitted one.
    pub evolved_training: bool,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        Self {
            filter_bandwidth: None,
            detect: DetectConfig::default(),
            bps: Some(BpsConfig::default()),
            evolved_training: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceivedFrame {
    /// Sample offset of the training section found by synchronization.
    pub offset: usize,
    /// Payload points after derotation and phase recovery.
    pub points: Vec<[Option<C64>; 4]>,
    pub detections: Vec<Detection>,
}

/// Samples `[start - margin, start + len + margin)` of `x`, wrapping
/// around the ends (the simulated channel is periodic).
fn circular_window(x: &[C64], start: usize, len: usize, margin: usize) -> Vec<C64> {
    let n = x.len();
    let first = (start + n * (margin / n + 1) - margin) % n;
    (0..len + 2 * margin).map(|k| x[(first + k) % n]).collect()
}

/// Normalized slot `k` of the payload, interpolated to `nft_samples`.
fn extract_slot(
    rx: &DualPolSignal,
    frame: &Frame,
    payload_start: usize,
    k: usize,
    nft_samples: usize,
) -> Result<DualPolSignal> {
    let sps = frame.layout.samples_per_slot;
    if nft_samples % sps != 0 {
        return Err(invalid(
            "nft_samples",
            format!("{nft_samples} is not a multiple of {sps} samples per slot"),
        ));
    }
    let factor = nft_samples / sps;
    let margin = sps / 2;
    let start = payload_start + k * sps;
    let amp = 1.0 / frame.norm.power.sqrt();
    let grab = |q: &[C64]| -> Vec<C64> {
        let w = circular_window(q, start, sps, margin);
        let up = upsample(&w, factor);
        up[margin * factor..margin * factor + nft_samples]
            .iter()
            .map(|x| x * amp)
            .collect()
    };
    let grid: TimeGrid = frame.layout.slot_grid(&frame.norm, nft_samples)?;
    DualPolSignal::new(grid, grab(&rx.q1), grab(&rx.q2), Domain::Normalized)
}

/// Full receiver: optional front end, synchronization on the training
/// section, parallel per-slot detection at normalized distance `z` and
/// blind phase search per constellation.
pub fn receive_frame(rx: &DualPolSignal, frame: &Frame, z: f64, cfg: &ReceiverConfig) -> Result<ReceivedFrame> {
    rx.require(Domain::Physical)?;
    let rx = match cfg.filter_bandwidth {
        Some(bw) => receiver_frontend(rx, frame.p_tx(), bw)?,
        None => rx.clone(),
    };
    let reference = if cfg.evolved_training {
        frame.training_reference_at(z)?
    } else {
        frame.training_reference()?
    };
    let offset = if frame.training.is_empty() {
        frame.training_start
    } else {
        synchronize(&rx, &reference)?
    };
    let payload_start = offset + (frame.payload_start - frame.training_start);
    let expected = frame.layout.eigenvalues();
    let detections: Vec<Detection> = (0..frame.symbols.len())
        .into_par_iter()
        .map(|k| {
            let slot = extract_slot(&rx, frame, payload_start, k, cfg.detect.nft_samples)?;
            detect_symbol(&slot, &expected, z, &cfg.detect)
        })
        .collect::<Result<_>>()?;
    let mut points: Vec<[Option<C64>; 4]> = detections.iter().map(|d| d.points).collect();
    if let Some(bps) = cfg.bps {
        for p in 0..4 {
            let column: Vec<Option<C64>> = points.iter().map(|s| s[p]).collect();
            let fixed = blind_phase_search(&column, ring_of(&frame.layout.constellation, p), bps);
            for (s, f) in points.iter_mut().zip(fixed) {
                s[p] = f;
            }
        }
    }
    Ok(ReceivedFrame {
        offset,
        points,
        detections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tones(n: usize, dt: f64, f: &[f64]) -> DualPolSignal {
        let grid = TimeGrid::new(n, dt, 0.0).unwrap();
        let q: Vec<C64> = grid
            .times()
            .map(|t| f.iter().map(|f| C64::from_polar(1.0, 2.0 * PI * f * t)).sum())
            .collect();
        DualPolSignal::new(grid, q.clone(), q, Domain::Physical).unwrap()
    }

    #[test]
    fn frontend_filters_and_rescales() {
        let n = 1024;
        let dt = 1e-11;
        let df = 1.0 / (n as f64 * dt);
        let inband = tones(n, dt, &[3.0 * df]);
        let both = tones(n, dt, &[3.0 * df, 200.0 * df]);
        let p = inband.mean_power();
        let out = receiver_frontend(&inband, p, 20.0 * df).unwrap();
        assert!(out.max_abs_diff(&inband) < 1e-12);
        // the out-of-band tone is removed before rescaling, so it does not
        // dilute the in-band power
        let out = receiver_frontend(&both, p, 20.0 * df).unwrap();
        assert!(out.max_abs_diff(&inband) < 1e-12);
        let out = receiver_frontend(&both, 0.37, 1e30).unwrap();
        assert!((out.mean_power() / 0.37 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn circular_windows_wrap() {
        let x: Vec<C64> = (0..10).map(|k| C64::new(k as f64, 0.0)).collect();
        let w = circular_window(&x, 0, 4, 2);
        let re: Vec<f64> = w.iter().map(|c| c.re).collect();
        assert_eq!(re, vec![8.0, 9.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn correlation_finds_embedded_reference() {
        let r: Vec<C64> = (0..50).map(|k| C64::from_polar(1.0, (k * k) as f64 * 0.37)).collect();
        let mut x = vec![C64::new(0.0, 0.0); 300];
        x[120..170].copy_from_slice(&r);
        let c = cross_correlation([&x, &x], [&r, &r]);
        let best = c.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(best, 120);
        assert!((c[120] - 100.0).abs() < 1e-9);
    }
}
