use dpnfdm_core::channel::{noise_rng, propagate_normalized, normalized_steps};
use dpnfdm_core::fiber::normalization_from_link;
use dpnfdm_core::transceiver::*;
use dpnfdm_core::{Domain, DualPolSignal, Error, FiberParams, NormalizationParams, TimeGrid, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn lpa_norm(span_km: f64) -> NormalizationParams {
    normalization_from_link(47e-12, &FiberParams::default().with_spans(span_km, 1), true).unwrap()
}

fn all_patterns() -> Vec<NfdmSymbol> {
    let spec = paper_constellation();
    (0..=255u8).map(|b| map_bits(NfdmSymbol::bits_of(b), &spec)).collect()
}

fn random_frame(n: usize, seed: u64, np: &NormalizationParams) -> Frame {
    let layout = FrameLayout::default();
    let syms = random_symbols(n, &layout.constellation, &mut ChaCha8Rng::seed_from_u64(seed));
    build_frame(&syms, &layout, np).unwrap()
}

fn circular_delay(sig: &DualPolSignal, d: usize) -> DualPolSignal {
    let mut out = sig.clone();
    out.q1.rotate_right(d);
    out.q2.rotate_right(d);
    out
}

#[test]
fn noiseless_identity_over_all_patterns() {
    let np = lpa_norm(41.5);
    let symbols = all_patterns();
    let frame = build_frame(&symbols, &FrameLayout::default(), &np).unwrap();
    let bw = bandwidth_99(&frame.signal).unwrap();
    let cfg = ReceiverConfig { filter_bandwidth: Some(bw), ..Default::default() };
    let rx = receive_frame(&frame.signal, &frame, 0.0, &cfg).unwrap();
    assert_eq!(rx.offset, frame.training_start);
    let (bits, stats) =
        decide_and_count(&rx.points, &frame.symbols, &frame.layout.constellation, ErasurePolicy::HalfBits)
            .unwrap();
    assert_eq!(stats.total_errors(), 0.0);
    assert_eq!(stats.erased_points, 0);
    for (b, s) in bits.iter().zip(&symbols) {
        assert_eq!(*b, s.bits);
    }
}

#[test]
fn unfiltered_back_to_back_points_match() {
    let np = lpa_norm(41.5);
    let symbols = all_patterns();
    let frame = build_frame(&symbols, &FrameLayout::default(), &np).unwrap();
    let cfg = ReceiverConfig { bps: None, ..Default::default() };
    let rx = receive_frame(&frame.signal, &frame, 0.0, &cfg).unwrap();
    let mut worst = 0.0f64;
    for (got, tx) in rx.points.iter().zip(&symbols) {
        for (g, t) in got.iter().zip(&tx.points) {
            worst = worst.max((g.unwrap() - t).norm() / t.norm());
        }
    }
    assert!(worst < 1e-3, "worst relative point error {worst}");
}

#[test]
fn derotation_is_distance_independent() {
    let np = lpa_norm(41.5);
    let layout = FrameLayout::default();
    let cfg = DetectConfig::default();
    // twice the slot, so that the periodic propagation sees untruncated tails
    let slot = layout.slot_grid(&np, cfg.nft_samples).unwrap();
    let grid = TimeGrid::new(2 * slot.n_samples(), slot.dt(), slot.t_start() - 0.5 * slot.window()).unwrap();
    let expected = layout.eigenvalues();
    for byte in [0u8, 0x5a, 0xc3, 0xff] {
        let sym = map_bits(NfdmSymbol::bits_of(byte), &layout.constellation);
        let (slot, _) = synthesize_slot(&sym.points, &layout, grid, 0.0).unwrap();
        let peak = slot.peak_amplitude().powi(2);
        let reference = detect_symbol(&slot, &expected, 0.0, &cfg).unwrap().points;
        for z in [0.5, 1.0, 2.0] {
            let out = propagate_normalized(&slot, z, normalized_steps(peak, z)).unwrap();
            let got = detect_symbol(&out, &expected, z, &cfg).unwrap().points;
            for (g, r) in got.iter().zip(&reference) {
                let (g, r) = (g.unwrap(), r.unwrap());
                assert!((g - r).norm() / r.norm() < 1e-3, "byte {byte:#x}, z = {z}: {g} vs {r}");
            }
        }
    }
}

#[test]
fn missing_eigenvalue_is_erased() {
    let np = lpa_norm(41.5);
    let layout = FrameLayout::default();
    let cfg = DetectConfig::default();
    let grid = layout.slot_grid(&np, cfg.nft_samples).unwrap();
    let sym = map_bits([false; 8], &layout.constellation);
    let (slot, _) = synthesize_slot(&sym.points, &layout, grid, 0.0).unwrap();
    // expecting an eigenvalue that is not there erases its two points
    let det = detect_symbol(&slot, &[C64::new(0.0, 0.3), C64::new(1.0, 1.2)], 0.0, &cfg).unwrap();
    assert!(det.points[0].is_some() && det.points[1].is_some());
    assert_eq!(det.points[2..], [None, None]);
}

#[test]
fn synchronization_finds_known_delays() {
    let np = lpa_norm(41.5);
    let frame = random_frame(32, 3, &np);
    let reference = frame.training_reference().unwrap();
    assert_eq!(synchronize(&frame.signal, &reference).unwrap(), frame.training_start);
    let delayed = circular_delay(&frame.signal, 173);
    assert_eq!(synchronize(&delayed, &reference).unwrap(), frame.training_start + 173);
}

#[test]
fn synchronization_rejects_missing_training() {
    let np = lpa_norm(41.5);
    let frame = random_frame(32, 3, &np);
    let reference = frame.training_reference().unwrap();
    let mut rx = DualPolSignal::zeros(frame.signal.grid, Domain::Physical);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for x in rx.q1.iter_mut().chain(rx.q2.iter_mut()) {
        *x = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    assert!(matches!(synchronize(&rx, &reference), Err(Error::SyncFailure { .. })));
}

#[test]
fn synchronization_survives_noise() {
    let np = lpa_norm(41.5);
    let frame = random_frame(32, 4, &np);
    let reference = frame.training_reference().unwrap();
    let snr = 10f64.powf(1.5);
    let sigma = (frame.signal.mean_power() / snr / 2.0).sqrt();
    let trials = 1000;
    let mut hits = 0;
    for trial in 0..trials {
        let mut rng = noise_rng(77, trial);
        let delay = rng.gen_range(0..frame.signal.len() - reference.len());
        let mut rx = circular_delay(&frame.signal, delay);
        for x in rx.q1.iter_mut().chain(rx.q2.iter_mut()) {
            let n: [f64; 2] = [StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)];
            *x += C64::new(n[0], n[1]) * sigma;
        }
        if synchronize(&rx, &reference).ok() == Some(delay) {
            hits += 1;
        }
    }
    assert!(hits * 100 >= 99 * trials, "{hits} of {trials}");
}

#[test]
fn waveform_metrics_match_the_design() {
    let np = lpa_norm(41.5);
    let frame = random_frame(256, 5, &np);
    let bw = bandwidth_99(&frame.signal).unwrap();
    assert!((bw / 12.7e9 - 1.0).abs() < 0.05, "bandwidth {bw}");
    let papr = papr_db(&frame.signal).unwrap();
    assert!((papr - 9.49).abs() < 0.5, "papr {papr}");
    let p = watts_to_dbm(frame.p_tx());
    assert!((p - 5.30).abs() < 0.3, "power {p} dBm");

    let frame = random_frame(256, 5, &lpa_norm(83.0));
    let p = watts_to_dbm(frame.p_tx());
    assert!((p - 7.70).abs() < 0.3, "power {p} dBm");
}

#[test]
fn blind_phase_search_tracks_a_phase_walk() {
    let ring = RingSpec::qpsk(1.0, std::f64::consts::FRAC_PI_4);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 20_000;
    let sigma_noise = (0.5 / 100.0f64).sqrt();
    let mut phase = 0.0;
    let mut truth = Vec::with_capacity(n);
    let mut rx = Vec::with_capacity(n);
    for _ in 0..n {
        let k = rng.gen_range(0..4);
        phase += 0.01 * rng.sample::<f64, _>(StandardNormal);
        let noise = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * sigma_noise;
        truth.push(k);
        rx.push(Some(ring.point(k) * C64::from_polar(1.0, phase) + noise));
    }
    let out = blind_phase_search(&rx, &ring, BpsConfig::default());
    let errors = out
        .iter()
        .zip(&truth)
        .filter(|(o, k)| ring.nearest(o.unwrap()) != **k)
        .count();
    assert!((errors as f64) / (n as f64) < 1e-3, "{errors} symbol errors");
}
