use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::C64;

/// Uniform sampling grid. Times are in seconds for physical signals and
/// dimensionless for normalized ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    n_samples: usize,
    dt: f64,
    t_start: f64,
}

impl TimeGrid {
    pub fn new(n_samples: usize, dt: f64, t_start: f64) -> Result<Self> {
        if n_samples < 2 {
            return Err(invalid("n_samples", format!("{n_samples} < 2")));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(invalid("dt", format!("{dt} is not a positive step")));
        }
        if !t_start.is_finite() {
            return Err(invalid("t_start", "not finite"));
        }
        Ok(Self {
            n_samples,
            dt,
            t_start,
        })
    }

    /// Grid of `n_samples` points spanning `[-window/2, window/2)`.
    pub fn centered(n_samples: usize, window: f64) -> Result<Self> {
        let dt = window / n_samples as f64;
        Self::new(n_samples, dt, -0.5 * window)
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    /// Total window `n_samples * dt`.
    pub fn window(&self) -> f64 {
        self.n_samples as f64 * self.dt
    }

    pub fn time(&self, index: usize) -> f64 {
        self.t_start + index as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_samples - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_samples).map(move |i| self.time(i))
    }

    /// Same number of samples with time axis multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.n_samples, self.dt * factor, self.t_start * factor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    /// Field envelopes in sqrt(W), time in seconds.
    Physical,
    /// Dimensionless Manakov variables.
    Normalized,
}

/// Pair of polarization envelopes sampled on a common grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPolSignal {
    pub grid: TimeGrid,
    pub q1: Vec<C64>,
    pub q2: Vec<C64>,
    pub domain: Domain,
}

/// Fraction of the window at each end checked by [`DualPolSignal::boundary_ratio`].
pub const BOUNDARY_FRACTION: f64 = 0.01;

/// Default vanishing threshold relative to the peak amplitude.
pub const DEFAULT_VANISHING_THRESHOLD: f64 = 1e-3;

impl DualPolSignal {
    pub fn new(grid: TimeGrid, q1: Vec<C64>, q2: Vec<C64>, domain: Domain) -> Result<Self> {
        for (what, len) in [("q1", q1.len()), ("q2", q2.len())] {
            if len != grid.n_samples() {
                return Err(Error::LengthMismatch {
                    what,
                    expected: grid.n_samples(),
                    found: len,
                });
            }
        }
        Ok(Self {
            grid,
            q1,
            q2,
            domain,
        })
    }

    pub fn zeros(grid: TimeGrid, domain: Domain) -> Self {
        let n = grid.n_samples();
        Self {
            grid,
            q1: vec![C64::new(0.0, 0.0); n],
            q2: vec![C64::new(0.0, 0.0); n],
            domain,
        }
    }

    pub fn len(&self) -> usize {
        self.q1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q1.is_empty()
    }

    pub fn require(&self, domain: Domain) -> Result<()> {
        if self.domain != domain {
            return Err(Error::DomainMismatch {
                expected: domain,
                found: self.domain,
            });
        }
        Ok(())
    }

    /// Instantaneous total power |q1|^2 + |q2|^2 at every sample.
    pub fn instantaneous_power(&self) -> Vec<f64> {
        self.q1
            .iter()
            .zip(&self.q2)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect()
    }

    /// Energy, i.e. the rectangle-rule integral of the total power.
    pub fn energy(&self) -> f64 {
        self.instantaneous_power().iter().sum::<f64>() * self.grid.dt()
    }

    /// Mean total power over the window.
    pub fn mean_power(&self) -> f64 {
        self.energy() / self.grid.window()
    }

    pub fn peak_amplitude(&self) -> f64 {
        self.instantaneous_power()
            .into_iter()
            .fold(0.0, f64::max)
            .sqrt()
    }

    /// Largest amplitude within the first and last 1% of the window,
    /// relative to the peak amplitude. Zero for the zero signal.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.peak_amplitude();
        if peak == 0.0 {
            return 0.0;
        }
        let n = self.len();
        let edge = ((n as f64 * BOUNDARY_FRACTION).ceil() as usize).clamp(1, n);
        let power = self.instantaneous_power();
        let edge_peak = power[..edge]
            .iter()
            .chain(&power[n - edge..])
            .copied()
            .fold(0.0, f64::max)
            .sqrt();
        edge_peak / peak
    }

    pub fn satisfies_vanishing(&self, threshold: f64) -> bool {
        self.boundary_ratio() < threshold
    }

    /// Copy with the two polarization components exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            grid: self.grid,
            q1: self.q2.clone(),
            q2: self.q1.clone(),
            domain: self.domain,
        }
    }

    /// Multiply both polarizations by a common complex factor.
    pub fn scale(&mut self, factor: C64) {
        for x in self.q1.iter_mut().chain(self.q2.iter_mut()) {
            *x *= factor;
        }
    }

    /// Contiguous sub-signal `[start, start + len)`, keeping absolute times.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.len() {
            return Err(invalid(
                "slice",
                format!("range {start}..{} exceeds {} samples", start + len, self.len()),
            ));
        }
        let grid = TimeGrid::new(len, self.grid.dt(), self.grid.time(start))?;
        Ok(Self {
            grid,
            q1: self.q1[start..start + len].to_vec(),
            q2: self.q2[start..start + len].to_vec(),
            domain: self.domain,
        })
    }

    /// Maximum sample-wise distance over both polarizations.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.q1
            .iter()
            .zip(&other.q1)
            .chain(self.q2.iter().zip(&other.q2))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
