use std::f64::consts::FRAC_PI_4;

use dpnfdm_core::nft::*;
use dpnfdm_core::{Domain, DualPolSignal, TimeGrid, C64};
use proptest::prelude::*;

const I: C64 = C64::new(0.0, 1.0);

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn single_pol(grid: TimeGrid, q1: Vec<C64>) -> DualPolSignal {
    let n = q1.len();
    DualPolSignal::new(grid, q1, vec![C64::new(0.0, 0.0); n], Domain::Normalized).unwrap()
}

fn paper_targets(b1: [C64; 2], b2: [C64; 2]) -> Vec<DarbouxTarget> {
    vec![
        DarbouxTarget { lambda: 0.3 * I, b: b1 },
        DarbouxTarget { lambda: 0.6 * I, b: b2 },
    ]
}

fn rel(x: C64, y: C64) -> f64 {
    (x - y).norm() / y.norm()
}

#[test]
fn vacuum_has_trivial_scattering() {
    let sig = DualPolSignal::zeros(TimeGrid::centered(256, 20.0).unwrap(), Domain::Normalized);
    for l in [c(0.3, 0.0), c(-1.0, 0.5), c(0.0, 1.5)] {
        let s = mzsp_scatter(&sig, l, true).unwrap();
        assert!((s.a - 1.0).norm() < 1e-12);
        assert!(s.b[0].norm() < 1e-15 && s.b[1].norm() < 1e-15);
        assert!(s.a_prime.unwrap().norm() < 1e-9);
    }
    assert!(find_discrete_eigenvalues(&sig, &SearchConfig::default())
        .unwrap()
        .is_empty());
    let cont = continuous_spectrum(&sig, &[-1.0, 0.0, 2.0]).unwrap();
    assert!(cont.iter().flatten().all(|x| x.norm() == 0.0));
}

#[test]
fn rectangle_matches_closed_form() {
    let (amp, width) = (1.3f64, 2.0f64);
    let h = 5e-4f64;
    let pad = 1000;
    let inner = (width / h).round() as usize;
    let n = inner + 2 * pad + 1;
    let grid = TimeGrid::new(n, h, -(pad as f64) * h).unwrap();
    let q1: Vec<C64> = (0..n)
        .map(|k| {
            if k == pad || k == pad + inner {
                c(amp / 2.0, 0.0)
            } else if k > pad && k < pad + inner {
                c(amp, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
        .collect();
    let sig = single_pol(grid, q1);
    for l in [c(0.0, 0.0), c(0.7, 0.0), c(-1.5, 0.0), c(0.4, 0.3), c(0.0, 0.9)] {
        let delta = (l * l + amp * amp).sqrt();
        let want = (I * l * width).exp()
            * ((delta * width).cos() - I * l * (delta * width).sin() / delta);
        let got = mzsp_scatter(&sig, l, false).unwrap().a;
        assert!(rel(got, want) < 1e-6, "lambda {l}: {got} vs {want}");
    }
}

#[test]
fn sech_eigenvalue() {
    let grid = TimeGrid::centered(4096, 60.0).unwrap();
    let q1 = grid.times().map(|t| c(1.0 / t.cosh(), 0.0)).collect();
    let sig = single_pol(grid, q1);
    let ev = find_discrete_eigenvalues(&sig, &SearchConfig::default()).unwrap();
    assert_eq!(ev.len(), 1, "{ev:?}");
    assert!((ev[0] - 0.5 * I).norm() < 1e-6);
}

#[test]
fn single_soliton_zero_of_a() {
    let plan = DarbouxPlan::sized(
        vec![DarbouxTarget { lambda: 0.5 * I, b: [c(1.0, 0.0), c(0.0, 0.0)] }],
        4096,
        1e-8,
    )
    .unwrap();
    let sig = generate_from_spectrum(&plan).unwrap().signal;
    let a = mzsp_scatter_with(&sig, 0.5 * I, false, Scheme::default()).unwrap().a;
    assert!(a.norm() < 1e-6, "|a| = {}", a.norm());
}

#[test]
fn single_soliton_b_recovered() {
    let b = [c(3.0, 0.0), c(0.0, 0.0)];
    let plan = DarbouxPlan::sized(vec![DarbouxTarget { lambda: 0.4 * I, b }], 4096, 1e-8).unwrap();
    let sig = generate_from_spectrum(&plan).unwrap().signal;
    let spec = compute_b_coefficients(&sig, &[0.4 * I], MatchPoint::Midpoint).unwrap();
    let got = spec.entries[0].b;
    assert!(rel(got[0], b[0]) < 1e-4, "{got:?}");
    assert!(got[1].norm() < 1e-4 * b[0].norm());
}

#[test]
fn b_independent_of_matching_point() {
    let b1 = C64::from_polar(5.0, FRAC_PI_4);
    let b2 = c(0.14, 0.0);
    let plan = DarbouxPlan::sized(paper_targets([b1, -b1], [b2, I * b2]), 4096, 1e-8).unwrap();
    let sig = generate_from_spectrum(&plan).unwrap().signal;
    let eigs = [0.3 * I, 0.6 * I];
    let mid = compute_b_coefficients(&sig, &eigs, MatchPoint::Midpoint).unwrap();
    for m in [1700, 1900, 2300, 2500] {
        let other = compute_b_coefficients(&sig, &eigs, MatchPoint::Sample(m)).unwrap();
        for (x, y) in mid.entries.iter().zip(&other.entries) {
            for j in 0..2 {
                assert!(rel(y.b[j], x.b[j]) < 1e-4, "match {m}: {:?} vs {:?} cond {} {}", y.b, x.b, y.condition, x.condition);
            }
        }
    }
}

#[test]
fn polarization_swap_swaps_b() {
    let plan = DarbouxPlan::sized(
        paper_targets([c(1.0, 2.0), c(-0.5, 0.3)], [c(0.1, 0.0), c(0.0, -0.12)]),
        2048,
        1e-6,
    )
    .unwrap();
    let sig = generate_from_spectrum(&plan).unwrap().signal;
    let eigs = [0.3 * I, 0.6 * I];
    let x = compute_b_coefficients(&sig, &eigs, MatchPoint::Midpoint).unwrap();
    let y = compute_b_coefficients(&sig.swapped(), &eigs, MatchPoint::Midpoint).unwrap();
    for (ex, ey) in x.entries.iter().zip(&y.entries) {
        assert_eq!(ex.b[0], ey.b[1]);
        assert_eq!(ex.b[1], ey.b[0]);
    }
    let sx = mzsp_scatter(&sig, c(0.4, 0.0), false).unwrap();
    let sy = mzsp_scatter(&sig.swapped(), c(0.4, 0.0), false).unwrap();
    assert_eq!(sx.b[0], sy.b[1]);
    assert_eq!(sx.a, sy.a);
}

#[test]
fn paper_symbol_round_trip() {
    let b1 = C64::from_polar(5.0, FRAC_PI_4);
    let b2 = c(0.14, 0.0);
    let targets = paper_targets([b1, b1 * I], [b2, -b2]);
    let plan = DarbouxPlan::sized(targets.clone(), 4096, 1e-8).unwrap();
    let syn = generate_from_spectrum(&plan).unwrap();
    assert!(syn.is_vanishing(1e-8));
    let sig = syn.signal;

    let energy = sig.energy();
    assert!((energy - 3.6).abs() / 3.6 < 1e-3, "energy {energy}");

    let ev = find_discrete_eigenvalues(&sig, &SearchConfig::default()).unwrap();
    assert_eq!(ev.len(), 2, "{ev:?}");
    assert!((ev[0] - 0.3 * I).norm() < 1e-6);
    assert!((ev[1] - 0.6 * I).norm() < 1e-6);

    let spec = compute_b_coefficients(&sig, &ev, MatchPoint::Midpoint).unwrap();
    for (e, t) in spec.entries.iter().zip(&targets) {
        assert!(!e.is_ill_conditioned());
        for j in 0..2 {
            assert!(rel(e.b[j], t.b[j]) < 1e-3, "{:?} vs {:?}", e.b, t.b);
        }
    }
}

/// Blind seed grid for the round-trip box Im in [0.1, 1], |Re| <= 1, with
/// rows close to the real axis where basins are narrow.
fn dense_search() -> SearchConfig {
    SearchConfig::grid(-1.2, 1.2, 1.2, 24, 12)
}

#[test]
fn dense_search_finds_eigenvalues_near_the_real_axis() {
    let lambdas = [c(0.408, 0.1), c(0.0, 0.1), c(0.0, 0.587), c(-0.573, 0.1)];
    let targets: Vec<DarbouxTarget> =
        lambdas.iter().map(|&lambda| DarbouxTarget { lambda, b: [c(0.3, 0.0), c(0.3, 0.0)] }).collect();
    let sig = generate_from_spectrum(&DarbouxPlan::sized(targets, 4096, 1e-8).unwrap()).unwrap().signal;
    let ev = find_discrete_eigenvalues(&sig, &dense_search()).unwrap();
    assert_eq!(ev.len(), 4, "{ev:?}");
    for l in lambdas {
        assert!(ev.iter().any(|e| (e - l).norm() < 1e-6), "{l} not in {ev:?}");
    }
}

#[test]
fn warm_start_finds_paper_eigenvalues() {
    let b1 = C64::from_polar(5.0, FRAC_PI_4);
    let plan = DarbouxPlan::sized(paper_targets([b1, b1], [c(0.14, 0.0); 2]), 4096, 1e-8).unwrap();
    let sig = generate_from_spectrum(&plan).unwrap().signal;
    let ev = find_discrete_eigenvalues(&sig, &SearchConfig::warm_start(&[0.3 * I, 0.6 * I])).unwrap();
    assert_eq!(ev.len(), 2);
    assert!((ev[0] - 0.3 * I).norm() < 1e-6 && (ev[1] - 0.6 * I).norm() < 1e-6);
}

#[test]
fn a_prime_matches_finite_differences() {
    let grid = TimeGrid::centered(2048, 24.0).unwrap();
    let q1: Vec<C64> = grid
        .times()
        .map(|t| c(0.8, 0.3) * (-(t - 1.0).powi(2) / 3.0).exp())
        .collect();
    let q2: Vec<C64> = grid
        .times()
        .map(|t| c(-0.2, 0.6) * (-(t + 1.5).powi(2) / 2.0).exp() * (I * t).exp())
        .collect();
    let sig = DualPolSignal::new(grid, q1, q2, Domain::Normalized).unwrap();
    let eps = 1e-5;
    for l in [c(0.5, 0.0), c(-0.3, 0.2), c(0.1, 0.8)] {
        let s = mzsp_scatter(&sig, l, true).unwrap();
        let plus = mzsp_scatter(&sig, l + eps, false).unwrap().a;
        let minus = mzsp_scatter(&sig, l - eps, false).unwrap().a;
        let fd = (plus - minus) / (2.0 * eps);
        assert!(rel(s.a_prime.unwrap(), fd) < 1e-4, "lambda {l}");
    }
}

#[test]
fn discrete_a_prime_matches_single_pass_derivative() {
    let b1 = C64::from_polar(5.0, FRAC_PI_4);
    let plan = DarbouxPlan::sized(paper_targets([b1, b1], [c(0.14, 0.0); 2]), 4096, 1e-8).unwrap();
    let sig = generate_from_spectrum(&plan).unwrap().signal;
    let spec = compute_b_coefficients(&sig, &[0.3 * I, 0.6 * I], MatchPoint::Midpoint).unwrap();
    for e in &spec.entries {
        let direct = mzsp_scatter_with(&sig, e.lambda, true, Scheme::default()).unwrap();
        assert!(rel(e.a_prime, direct.a_prime.unwrap()) < 1e-4);
    }
}

#[test]
fn low_power_limit_is_fourier_transform() {
    // q = eps g with g a chirped Gaussian; to first order
    // b(lambda) = -conj(G(-2 lambda)), G(w) = int g e^{-i w t} dt
    let eps = 1e-3;
    let (s2, chirp, t0) = (2.0, 0.3, 0.5);
    let grid = TimeGrid::centered(4096, 40.0).unwrap();
    let g = |t: f64| (-(t - t0).powi(2) / (2.0 * s2) + I * chirp * t * t).exp();
    let q1: Vec<C64> = grid.times().map(|t| eps * g(t)).collect();
    let sig = single_pol(grid, q1);
    let lambdas = [-0.8, -0.3, 0.0, 0.4, 0.9];
    let got = continuous_spectrum(&sig, &lambdas).unwrap();
    for (l, q) in lambdas.iter().zip(&got) {
        let w = -2.0 * l;
        // closed-form transform of the chirped Gaussian
        let alpha = 1.0 / (2.0 * s2) - I * chirp;
        let beta = t0 / s2 - I * w;
        let gamma = -t0 * t0 / (2.0 * s2);
        let big_g = (std::f64::consts::PI / alpha).sqrt() * (beta * beta / (4.0 * alpha) + gamma).exp();
        let want = -eps * big_g.conj();
        assert!(rel(q[0], want) < 1e-2, "lambda {l}: {} vs {want}", q[0]);
        assert!(q[1].norm() == 0.0);
    }
}

#[test]
fn pure_soliton_has_negligible_continuous_energy() {
    let b1 = C64::from_polar(5.0, FRAC_PI_4);
    let plan = DarbouxPlan::sized(paper_targets([b1, -b1], [c(0.14, 0.0); 2]), 4096, 1e-8).unwrap();
    let sig = generate_from_spectrum(&plan).unwrap().signal;
    let grid: Vec<f64> = (0..201).map(|k| -5.0 + 0.05 * k as f64).collect();
    let cont = continuous_spectrum(&sig, &grid).unwrap();
    let e_cont: f64 = cont
        .iter()
        .map(|q| (1.0 + q[0].norm_sqr() + q[1].norm_sqr()).ln() * 0.05 / std::f64::consts::PI)
        .sum();
    assert!(e_cont < 1e-3 * sig.energy(), "continuous energy {e_cont}");
}

#[test]
fn darboux_order_independence() {
    let targets = vec![
        DarbouxTarget { lambda: c(0.2, 0.3), b: [c(1.0, 1.0), c(0.5, 0.0)] },
        DarbouxTarget { lambda: c(-0.1, 0.6), b: [c(0.1, 0.0), c(0.0, 0.2)] },
        DarbouxTarget { lambda: c(0.0, 0.45), b: [c(-0.7, 0.2), c(1.1, -0.3)] },
    ];
    let grid = TimeGrid::centered(2048, 60.0).unwrap();
    let base = generate_from_spectrum(&DarbouxPlan::new(targets.clone(), grid).unwrap())
        .unwrap()
        .signal;
    for perm in [[1, 0, 2], [2, 1, 0], [1, 2, 0]] {
        let t: Vec<_> = perm.iter().map(|&k| targets[k]).collect();
        let s = generate_from_spectrum(&DarbouxPlan::new(t, grid).unwrap()).unwrap().signal;
        assert!(s.max_abs_diff(&base) < 1e-8);
    }
}

#[test]
fn scaling_b_shifts_pulse_without_changing_energy() {
    let eta = 0.5;
    let grid = TimeGrid::centered(4096, 60.0).unwrap();
    let make = |s: f64| {
        let plan = DarbouxPlan::new(
            vec![DarbouxTarget { lambda: eta * I, b: [c(s.exp(), 0.0), c(0.0, 0.0)] }],
            grid,
        )
        .unwrap();
        generate_from_spectrum(&plan).unwrap().signal
    };
    let centroid = |sig: &DualPolSignal| {
        let p = sig.instantaneous_power();
        let tot: f64 = p.iter().sum();
        sig.grid.times().zip(&p).map(|(t, p)| t * p).sum::<f64>() / tot
    };
    let base = make(0.0);
    let shifted = make(2.0);
    assert!((base.energy() - shifted.energy()).abs() < 1e-9);
    let moved = centroid(&shifted) - centroid(&base);
    assert!((moved.abs() - 2.0 / (2.0 * eta)).abs() < 1e-6, "moved {moved}");
    let ev = find_discrete_eigenvalues(&shifted, &SearchConfig::warm_start(&[eta * I])).unwrap();
    assert!((ev[0] - eta * I).norm() < 1e-6);
}

#[test]
fn darboux_waveforms_are_smooth() {
    let b1 = C64::from_polar(5.0, FRAC_PI_4);
    let plan = DarbouxPlan::sized(paper_targets([b1, b1], [c(0.14, 0.0); 2]), 4096, 1e-8).unwrap();
    let sig = generate_from_spectrum(&plan).unwrap().signal;
    let h = sig.grid.dt();
    for q in [&sig.q1, &sig.q2] {
        assert!(q.iter().all(|x| x.is_finite()));
        let max_d2 = q
            .windows(3)
            .map(|w| (w[0] - 2.0 * w[1] + w[2]).norm() / (h * h))
            .fold(0.0, f64::max);
        assert!(max_d2 < 10.0, "second difference {max_d2}");
    }
}

fn gaussian_pair() -> impl Strategy<Value = DualPolSignal> {
    let bump = (-0.8..0.8f64, -0.8..0.8f64, -4.0..4.0f64, 0.5..2.0f64, -1.0..1.0f64);
    (prop::collection::vec(bump.clone(), 1..3), prop::collection::vec(bump, 1..3)).prop_map(
        |(p1, p2)| {
            let grid = TimeGrid::centered(1024, 30.0).unwrap();
            let build = |bumps: &[(f64, f64, f64, f64, f64)]| -> Vec<C64> {
                grid.times()
                    .map(|t| {
                        bumps
                            .iter()
                            .map(|&(re, im, mu, w, k)| {
                                c(re, im) * (-(t - mu).powi(2) / (w * w) + I * k * t).exp()
                            })
                            .sum()
                    })
                    .collect()
            };
            DualPolSignal::new(grid, build(&p1), build(&p2), Domain::Normalized).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn unimodular_on_real_axis(sig in gaussian_pair(), l in -2.0..2.0f64) {
        let s = mzsp_scatter(&sig, c(l, 0.0), false).unwrap();
        let m = s.a.norm_sqr() + s.b[0].norm_sqr() + s.b[1].norm_sqr();
        prop_assert!((m - 1.0).abs() < 1e-6, "modulus {}", m);
    }
}

fn spectrum_strategy() -> impl Strategy<Value = Vec<DarbouxTarget>> {
    let target = (-1.0..1.0f64, 0.1..1.0f64, 0.3..3.0f64, 0.0..6.3f64, 0.3..3.0f64, 0.0..6.3f64);
    prop::collection::vec(target, 1..=4)
        .prop_map(|ts| {
            ts.into_iter()
                .map(|(re, im, r1, p1, r2, p2)| DarbouxTarget {
                    lambda: c(re, im),
                    b: [C64::from_polar(r1, p1), C64::from_polar(r2, p2)],
                })
                .collect::<Vec<_>>()
        })
        .prop_filter("eigenvalues well separated", |ts| {
            ts.iter()
                .enumerate()
                .all(|(k, a)| ts[..k].iter().all(|b| (a.lambda - b.lambda).norm() > 0.3))
        })
}

/// Largest |lambda| dt at which the round trip keeps b within 1e-3.
const MAX_LAMBDA_STEP: f64 = 0.03;

/// 4096 samples with the 1e-8 boundary window, doubled while the step is
/// too coarse for the largest eigenvalue (a low eigenvalue stretches the
/// window; the b error then grows like (|lambda| dt)^6).
fn sampled_plan(targets: &[DarbouxTarget]) -> DarbouxPlan {
    let top = targets.iter().map(|t| t.lambda.norm()).fold(0.0, f64::max);
    let mut n = 4096;
    loop {
        let plan = DarbouxPlan::sized(targets.to_vec(), n, 1e-8).unwrap();
        if plan.grid.dt() * top <= MAX_LAMBDA_STEP {
            return plan;
        }
        n *= 2;
    }
}

#[test]
fn coarse_steps_lose_b_accuracy() {
    // The case that motivates the sampling rule: at 4096 samples
    // |lambda| dt = 0.053 and b misses 1e-3; the rule doubles the grid.
    let targets = vec![
        DarbouxTarget { lambda: c(0.0, 0.1), b: [c(0.3, 0.0), c(0.3, 0.0)] },
        DarbouxTarget { lambda: c(0.99969, 0.36079), b: [c(0.3, 0.0), c(2.231, 0.0)] },
    ];
    let b_error = |plan: &DarbouxPlan| {
        let sig = generate_from_spectrum(plan).unwrap().signal;
        let e = compute_b_coefficients(&sig, &[targets[1].lambda], MatchPoint::Midpoint).unwrap().entries[0];
        let nb = (targets[1].b[0].norm_sqr() + targets[1].b[1].norm_sqr()).sqrt();
        (0..2).map(|j| (e.b[j] - targets[1].b[j]).norm() / nb).fold(0.0, f64::max)
    };
    assert!(b_error(&DarbouxPlan::sized(targets.clone(), 4096, 1e-8).unwrap()) > 1e-3);
    let plan = sampled_plan(&targets);
    assert_eq!(plan.grid.n_samples(), 8192);
    assert!(b_error(&plan) < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn round_trip_recovers_spectrum(targets in spectrum_strategy()) {
        let plan = sampled_plan(&targets);
        let sig = generate_from_spectrum(&plan).unwrap().signal;
        let expected: Vec<C64> = targets.iter().map(|t| t.lambda).collect();
        let ev = find_discrete_eigenvalues(&sig, &dense_search()).unwrap();
        prop_assert_eq!(ev.len(), targets.len(), "found {:?} want {:?}", ev, expected);
        let spec = compute_b_coefficients(&sig, &ev, MatchPoint::Midpoint).unwrap();
        for t in &targets {
            let e = spec
                .entries
                .iter()
                .min_by(|x, y| (x.lambda - t.lambda).norm().total_cmp(&(y.lambda - t.lambda).norm()))
                .unwrap();
            prop_assert!((e.lambda - t.lambda).norm() < 1e-6, "{} vs {}", e.lambda, t.lambda);
            let nb = (t.b[0].norm_sqr() + t.b[1].norm_sqr()).sqrt();
            for j in 0..2 {
                prop_assert!((e.b[j] - t.b[j]).norm() / nb < 1e-3, "{:?} vs {:?}", e.b, t.b);
            }
        }
        let trace: f64 = 4.0 * targets.iter().map(|t| t.lambda.im).sum::<f64>();
        prop_assert!((sig.energy() - trace).abs() / trace < 1e-3);
    }
}
