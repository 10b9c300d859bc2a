//! Bit mapping onto the b-coefficient rings and minimum-distance decisions.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::C64;

/// Points per ring.
pub const CARDINALITY: usize = 4;

/// Bits per DP-NFDM symbol: two bits on each of four rings.
pub const BITS_PER_SYMBOL: usize = 8;

/// QPSK ring: `radius e^{i (phase_offset + k pi/2)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingSpec {
    pub radius: f64,
    pub phase_offset: f64,
    pub cardinality: usize,
}

impl RingSpec {
    pub fn qpsk(radius: f64, phase_offset: f64) -> Self {
        Self {
            radius,
            phase_offset,
            cardinality: CARDINALITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cardinality != CARDINALITY {
            return Err(invalid(
                "cardinality",
                format!("{} given, only QPSK (4) is supported", self.cardinality),
            ));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(invalid("radius", format!("{} must be > 0", self.radius)));
        }
        Ok(())
    }

    /// Point of quadrant `k`.
    pub fn point(&self, k: usize) -> C64 {
        C64::from_polar(self.radius, self.phase_offset + k as f64 * FRAC_PI_2)
    }

    /// Quadrant of the nearest ring point.
    pub fn nearest(&self, x: C64) -> usize {
        (0..CARDINALITY)
            .min_by(|&a, &b| (x - self.point(a)).norm_sqr().total_cmp(&(x - self.point(b)).norm_sqr()))
            .unwrap_or(0)
    }
}

/// One eigenvalue and the ring its b-coefficients are drawn from; both
/// polarizations use the same ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstellationSpec {
    pub lambda: C64,
    pub ring: RingSpec,
}

/// The two-eigenvalue design: `i0.3` with radius 5 rotated by pi/4 and `i0.6`
/// with radius 0.14.
pub fn paper_constellation() -> [ConstellationSpec; 2] {
    [
        ConstellationSpec {
            lambda: C64::new(0.0, 0.3),
            ring: RingSpec::qpsk(5.0, FRAC_PI_4),
        },
        ConstellationSpec {
            lambda: C64::new(0.0, 0.6),
            ring: RingSpec::qpsk(0.14, 0.0),
        },
    ]
}

/// Gray code: bit pair `(b0, b1)` to quadrant, 00 -> 0, 01 -> 1, 11 -> 2,
/// 10 -> 3, so neighbouring quadrants differ in one bit.
fn gray_quadrant(b0: bool, b1: bool) -> usize {
    match (b0, b1) {
        (false, false) => 0,
        (false, true) => 1,
        (true, true) => 2,
        (true, false) => 3,
    }
}

fn quadrant_bits(k: usize) -> (bool, bool) {
    match k % CARDINALITY {
        0 => (false, false),
        1 => (false, true),
        2 => (true, true),
        _ => (true, false),
    }
}

/// Eight bits and the four b-coefficients carrying them, ordered
/// `(b1(l1), b2(l1), b1(l2), b2(l2))`. Bits `2k, 2k+1` select point `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NfdmSymbol {
    pub bits: [bool; BITS_PER_SYMBOL],
    pub points: [C64; 4],
}

impl NfdmSymbol {
    /// Bits of a byte, most significant first.
    pub fn bits_of(byte: u8) -> [bool; BITS_PER_SYMBOL] {
        std::array::from_fn(|k| byte >> (7 - k) & 1 == 1)
    }

    pub fn byte(&self) -> u8 {
        self.bits
            .iter()
            .fold(0u8, |acc, &b| (acc << 1) | b as u8)
    }

    /// b-vector of eigenvalue `k`.
    pub fn b(&self, k: usize) -> [C64; 2] {
        [self.points[2 * k], self.points[2 * k + 1]]
    }
}

/// Ring used by point index `p` of a symbol.
pub fn ring_of(spec: &[ConstellationSpec; 2], p: usize) -> &RingSpec {
    &spec[p / 2].ring
}

pub fn map_bits(bits: [bool; BITS_PER_SYMBOL], spec: &[ConstellationSpec; 2]) -> NfdmSymbol {
    let points = std::array::from_fn(|p| {
        ring_of(spec, p).point(gray_quadrant(bits[2 * p], bits[2 * p + 1]))
    });
    NfdmSymbol { bits, points }
}

/// Nearest-point decision on every ring, back to bits.
pub fn demap(points: &[C64; 4], spec: &[ConstellationSpec; 2]) -> [bool; BITS_PER_SYMBOL] {
    let mut bits = [false; BITS_PER_SYMBOL];
    for (p, x) in points.iter().enumerate() {
        let (b0, b1) = quadrant_bits(ring_of(spec, p).nearest(*x));
        bits[2 * p] = b0;
        bits[2 * p + 1] = b1;
    }
    bits
}

/// How an erased point (eigenvalue not found) enters the error count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ErasurePolicy {
    /// Half of the affected bits, the expectation of a random guess.
    #[default]
    HalfBits,
    /// Every affected bit counts as an error.
    AllBits,
}

/// Bit error counts per constellation `(l1 p1, l1 p2, l2 p1, l2 p2)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecisionStats {
    pub errors: [f64; 4],
    /// Bits carried by each constellation.
    pub bits_per_constellation: usize,
    pub erased_points: usize,
}

impl DecisionStats {
    pub fn total_errors(&self) -> f64 {
        self.errors.iter().sum()
    }

    pub fn total_bits(&self) -> usize {
        4 * self.bits_per_constellation
    }

    pub fn ber(&self) -> f64 {
        if self.bits_per_constellation == 0 {
            return 0.0;
        }
        self.total_errors() / self.total_bits() as f64
    }

    pub fn ber_per_constellation(&self) -> [f64; 4] {
        let n = self.bits_per_constellation.max(1) as f64;
        self.errors.map(|e| e / n)
    }

    /// Adds the counts of another block.
    pub fn merge(&mut self, other: &DecisionStats) {
        for (a, b) in self.errors.iter_mut().zip(&other.errors) {
            *a += b;
        }
        self.bits_per_constellation += other.bits_per_constellation;
        self.erased_points += other.erased_points;
    }
}

/// Minimum-distance decisions against the transmitted symbols. Returns the
/// decided bits (erased points decide `00`) and the error counts.
pub fn decide_and_count(
    recovered: &[[Option<C64>; 4]],
    reference: &[NfdmSymbol],
    spec: &[ConstellationSpec; 2],
    policy: ErasurePolicy,
) -> Result<(Vec<[bool; BITS_PER_SYMBOL]>, DecisionStats)> {
    if recovered.len() != reference.len() {
        return Err(crate::Error::LengthMismatch {
            what: "recovered symbols",
            expected: reference.len(),
            found: recovered.len(),
        });
    }
    let mut stats = DecisionStats {
        bits_per_constellation: 2 * reference.len(),
        ..Default::default()
    };
    let mut decided = Vec::with_capacity(reference.len());
    for (rx, tx) in recovered.iter().zip(reference) {
        let mut bits = [false; BITS_PER_SYMBOL];
        for (p, x) in rx.iter().enumerate() {
            match x {
                Some(x) => {
                    let (b0, b1) = quadrant_bits(ring_of(spec, p).nearest(*x));
                    bits[2 * p] = b0;
                    bits[2 * p + 1] = b1;
                    stats.errors[p] +=
                        ((b0 != tx.bits[2 * p]) as u8 + (b1 != tx.bits[2 * p + 1]) as u8) as f64;
                }
                None => {
                    stats.erased_points += 1;
                    stats.errors[p] += match policy {
                        ErasurePolicy::HalfBits => 1.0,
                        ErasurePolicy::AllBits => 2.0,
                    };
                }
            }
        }
        decided.push(bits);
    }
    Ok((decided, stats))
}
