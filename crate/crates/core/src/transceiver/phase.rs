//! Blind phase search over one QPSK ring.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use super::constellation::RingSpec;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BpsConfig {
    pub n_test_phases: usize,
    /// Symbols in the averaging window.
    pub window: usize,
}

impl Default for BpsConfig {
    fn default() -> Self {
        Self {
            n_test_phases: 32,
            window: 64,
        }
    }
}

/// Test phase `k` of `n`, spread over [-pi/4, pi/4) so that zero is a
/// candidate.
fn test_phase(k: usize, n: usize) -> f64 {
    -FRAC_PI_4 + k as f64 * FRAC_PI_2 / n as f64
}

/// Per-symbol phase estimates (radians, unwrapped across symbols).
///
/// Every candidate rotation is scored by the squared distance of the
/// derotated point to its nearest ring point, summed over a window centered
/// on the symbol. Erased points (`None`) contribute nothing.
pub fn estimate_phases(points: &[Option<C64>], ring: &RingSpec, cfg: BpsConfig) -> Vec<f64> {
    let n = points.len();
    let b = cfg.n_test_phases.max(1);
    let rot: Vec<C64> = (0..b).map(|k| C64::from_polar(1.0, -test_phase(k, b))).collect();
    // prefix sums of the per-symbol metric for every candidate
    let mut prefix = vec![vec![0.0; n + 1]; b];
    for (k, r) in rot.iter().enumerate() {
        for (j, p) in points.iter().enumerate() {
            let d = p.map_or(0.0, |x| {
                let y = x * r;
                (y - ring.point(ring.nearest(y))).norm_sqr()
            });
            prefix[k][j + 1] = prefix[k][j] + d;
        }
    }
    let half = cfg.window / 2;
    let mut out = Vec::with_capacity(n);
    let mut prev = 0.0;
    for j in 0..n {
        let lo = j.saturating_sub(half);
        let hi = (j + cfg.window - half).min(n);
        let best = (0..b)
            .min_by(|&x, &y| {
                (prefix[x][hi] - prefix[x][lo]).total_cmp(&(prefix[y][hi] - prefix[y][lo]))
            })
            .unwrap_or(0);
        let raw = test_phase(best, b);
        // keep the branch closest to the previous estimate
        let phase = raw + FRAC_PI_2 * ((prev - raw) / FRAC_PI_2).round();
        out.push(phase);
        prev = phase;
    }
    out
}

/// Derotates every point by its blind phase estimate.
pub fn blind_phase_search(points: &[Option<C64>], ring: &RingSpec, cfg: BpsConfig) -> Vec<Option<C64>> {
    estimate_phases(points, ring, cfg)
        .into_iter()
        .zip(points)
        .map(|(phi, p)| p.map(|x| x * C64::from_polar(1.0, -phi)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn qpsk(n: usize, ring: &RingSpec, seed: u64) -> (Vec<usize>, Vec<C64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        let p = k.iter().map(|&k| ring.point(k)).collect();
        (k, p)
    }

    #[test]
    fn clean_points_are_unchanged() {
        let ring = RingSpec::qpsk(5.0, FRAC_PI_4);
        let (_, p) = qpsk(300, &ring, 1);
        let pts: Vec<Option<C64>> = p.iter().copied().map(Some).collect();
        let out = blind_phase_search(&pts, &ring, BpsConfig::default());
        for (a, b) in out.iter().zip(&p) {
            assert!((a.unwrap() - b).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_rotation_is_removed() {
        let ring = RingSpec::qpsk(0.14, 0.0);
        let (_, p) = qpsk(500, &ring, 2);
        let rot = C64::from_polar(1.0, 0.3);
        let pts: Vec<Option<C64>> = p.iter().map(|x| Some(x * rot)).collect();
        for phi in estimate_phases(&pts, &ring, BpsConfig::default()) {
            assert!((phi - 0.3).abs() <= PI / 64.0, "{phi}");
        }
    }

    #[test]
    fn erasures_are_skipped() {
        let ring = RingSpec::qpsk(1.0, 0.0);
        let (_, p) = qpsk(100, &ring, 3);
        let rot = C64::from_polar(1.0, -0.2);
        let pts: Vec<Option<C64>> = p
            .iter()
            .enumerate()
            .map(|(k, x)| (k % 7 != 0).then_some(x * rot))
            .collect();
        let out = blind_phase_search(&pts, &ring, BpsConfig::default());
        for (k, o) in out.iter().enumerate() {
            match o {
                None => assert_eq!(k % 7, 0),
                Some(x) => assert!((x - p[k]).norm() < 0.05),
            }
        }
    }
}
