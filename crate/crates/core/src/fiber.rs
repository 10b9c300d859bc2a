//! Fiber description and the physical <-> normalized Manakov units.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::signal::{Domain, DualPolSignal};
use crate::C64;

/// Speed of light in nm/ps.
const C_NM_PER_PS: f64 = 299_792.458;

/// Optical fiber span description. Units are the customary engineering ones
/// noted on each field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberParams {
    /// Dispersion parameter D in ps/(nm km). Positive is anomalous.
    pub dispersion_d: f64,
    /// Nonlinear coefficient in 1/(W km).
    pub gamma: f64,
    /// Power attenuation in dB/km.
    pub alpha_db: f64,
    /// Span length in km.
    pub span_length: f64,
    pub n_spans: usize,
    /// Carrier wavelength in nm.
    pub carrier_wavelength: f64,
    /// Amplifier noise figure in dB.
    pub noise_figure_db: f64,
}

impl Default for FiberParams {
    /// Standard single-mode fiber with 41.5 km spans, 9 spans.
    fn default() -> Self {
        Self {
            dispersion_d: 17.5,
            gamma: 1.25,
            alpha_db: 0.195,
            span_length: 41.5,
            n_spans: 9,
            carrier_wavelength: 1550.0,
            noise_figure_db: 5.0,
        }
    }
}

impl FiberParams {
    pub fn with_spans(self, span_length: f64, n_spans: usize) -> Self {
        Self {
            span_length,
            n_spans,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.span_length > 0.0) {
            return Err(invalid("span_length", format!("{} must be > 0", self.span_length)));
        }
        if !(self.gamma > 0.0) {
            return Err(invalid("gamma", format!("{} must be > 0", self.gamma)));
        }
        if !(self.alpha_db >= 0.0) {
            return Err(invalid("alpha_db", format!("{} must be >= 0", self.alpha_db)));
        }
        if !(self.carrier_wavelength > 0.0) {
            return Err(invalid(
                "carrier_wavelength",
                format!("{} must be > 0", self.carrier_wavelength),
            ));
        }
        if !self.dispersion_d.is_finite() || !self.noise_figure_db.is_finite() {
            return Err(invalid("dispersion_d", "non-finite fiber parameter"));
        }
        Ok(())
    }

    /// Validation plus the anomalous-dispersion requirement for solitons.
    pub fn validate_anomalous(&self) -> Result<()> {
        self.validate()?;
        if !(self.dispersion_d > 0.0) {
            return Err(invalid(
                "dispersion_d",
                format!("{} ps/(nm km) is not anomalous", self.dispersion_d),
            ));
        }
        Ok(())
    }

    /// Group-velocity dispersion in ps^2/km.
    pub fn beta2(&self) -> Result<f64> {
        beta2_from_d(self.dispersion_d, self.carrier_wavelength)
    }

    /// Power attenuation rate in 1/km.
    pub fn alpha_per_km(&self) -> f64 {
        alpha_db_to_per_km(self.alpha_db)
    }

    pub fn gamma_eff(&self) -> Result<f64> {
        lpa_effective_gamma(self.gamma, self.alpha_db, self.span_length)
    }

    /// Total link length in km.
    pub fn link_length(&self) -> f64 {
        self.span_length * self.n_spans as f64
    }

    /// Power gain restoring one span's loss.
    pub fn span_gain(&self) -> f64 {
        (self.alpha_per_km() * self.span_length).exp()
    }

    /// Carrier frequency in Hz.
    pub fn carrier_frequency(&self) -> f64 {
        C_NM_PER_PS * 1e12 / self.carrier_wavelength
    }
}

/// beta2 = -D lambda^2 / (2 pi c), in ps^2/km for D in ps/(nm km) and
/// wavelength in nm.
pub fn beta2_from_d(dispersion_d: f64, carrier_wavelength: f64) -> Result<f64> {
    if !(dispersion_d >= 0.0) {
        return Err(invalid("dispersion_d", format!("{dispersion_d} must be >= 0")));
    }
    if !(carrier_wavelength > 0.0) {
        return Err(invalid(
            "carrier_wavelength",
            format!("{carrier_wavelength} must be > 0"),
        ));
    }
    Ok(-dispersion_d * carrier_wavelength * carrier_wavelength
        / (2.0 * std::f64::consts::PI * C_NM_PER_PS))
}

/// dB/km to the natural power attenuation rate in 1/km. The field decays at
/// half this rate.
pub fn alpha_db_to_per_km(alpha_db: f64) -> f64 {
    alpha_db * std::f64::consts::LN_10 / 10.0
}

/// Lossless path-averaged nonlinearity gamma (1 - exp(-alpha L)) / (alpha L).
pub fn lpa_effective_gamma(gamma: f64, alpha_db: f64, span_length: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(invalid("gamma", format!("{gamma} must be > 0")));
    }
    if !(span_length > 0.0) {
        return Err(invalid("span_length", format!("{span_length} must be > 0")));
    }
    if !(alpha_db >= 0.0) {
        return Err(invalid("alpha_db", format!("{alpha_db} must be >= 0")));
    }
    let x = alpha_db_to_per_km(alpha_db) * span_length;
    Ok(gamma * path_average_factor(x))
}

/// (1 - e^{-x}) / x with the x -> 0 limit.
fn path_average_factor(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// Soliton period (pi/2) L_d with L_d = 1 / (W^2 |beta2|), in km, for a
/// bandwidth in Hz and beta2 in ps^2/km.
pub fn soliton_period_km(bandwidth_hz: f64, beta2_ps2_per_km: f64) -> f64 {
    let w_per_ps = bandwidth_hz * 1e-12;
    std::f64::consts::FRAC_PI_2 / (w_per_ps * w_per_ps * beta2_ps2_per_km.abs())
}

/// Scales of the normalized Manakov variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    /// Time scale T0 in seconds.
    pub t0: f64,
    /// Power scale in watts.
    pub power: f64,
    /// Length scale in meters.
    pub length: f64,
}

impl NormalizationParams {
    /// Converts a physical distance in km to normalized length.
    pub fn z_from_km(&self, km: f64) -> f64 {
        km * 1e3 / self.length
    }

    pub fn length_km(&self) -> f64 {
        self.length * 1e-3
    }
}

/// Normalization scales for a link: P = |beta2| / ((8/9) gamma T0^2) and
/// L = 2 T0^2 / |beta2|, with gamma replaced by the path-averaged value when
/// `use_lpa` is set.
pub fn normalization_from_link(
    t0: f64,
    fiber: &FiberParams,
    use_lpa: bool,
) -> Result<NormalizationParams> {
    if !(t0 > 0.0) {
        return Err(invalid("t0", format!("{t0} must be > 0")));
    }
    fiber.validate()?;
    let beta2 = fiber.beta2()?;
    if beta2 == 0.0 {
        return Err(Error::ZeroDispersion);
    }
    let gamma = if use_lpa {
        fiber.gamma_eff()?
    } else {
        fiber.gamma
    };
    // SI: s^2/m and 1/(W m)
    let beta2_si = beta2.abs() * 1e-27;
    let gamma_si = gamma * 1e-3;
    Ok(NormalizationParams {
        t0,
        power: beta2_si / (8.0 / 9.0 * gamma_si * t0 * t0),
        length: 2.0 * t0 * t0 / beta2_si,
    })
}

pub fn normalize_signal(sig: &DualPolSignal, np: &NormalizationParams) -> Result<DualPolSignal> {
    sig.require(Domain::Physical)?;
    let scale = C64::new(1.0 / np.power.sqrt(), 0.0);
    Ok(DualPolSignal {
        grid: sig.grid.scaled(1.0 / np.t0)?,
        q1: sig.q1.iter().map(|x| x * scale).collect(),
        q2: sig.q2.iter().map(|x| x * scale).collect(),
        domain: Domain::Normalized,
    })
}

pub fn denormalize_signal(sig: &DualPolSignal, np: &NormalizationParams) -> Result<DualPolSignal> {
    sig.require(Domain::Normalized)?;
    let scale = C64::new(np.power.sqrt(), 0.0);
    Ok(DualPolSignal {
        grid: sig.grid.scaled(np.t0)?,
        q1: sig.q1.iter().map(|x| x * scale).collect(),
        q2: sig.q2.iter().map(|x| x * scale).collect(),
        domain: Domain::Physical,
    })
}
