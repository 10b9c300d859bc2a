//! Waveform figures of merit.

use crate::error::{Error, Result};
use crate::signal::DualPolSignal;
use crate::spectrum::{frequencies, power_spectrum};

/// Peak-to-average ratio of `|q1|^2 + |q2|^2`, in dB.
pub fn papr_db(sig: &DualPolSignal) -> Result<f64> {
    let p = sig.instantaneous_power();
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    if mean == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let peak = p.iter().copied().fold(0.0, f64::max);
    Ok(10.0 * (peak / mean).log10())
}

/// Total width (Hz, or inverse time units of the grid) of the smallest band
/// symmetric about zero frequency holding 99% of the spectral power.
pub fn bandwidth_99(sig: &DualPolSignal) -> Result<f64> {
    let spec = power_spectrum(&sig.q1, &sig.q2);
    let total: f64 = spec.iter().sum();
    if total == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let f = frequencies(sig.len(), sig.grid.dt());
    let mut order: Vec<usize> = (0..spec.len()).collect();
    order.sort_by(|&a, &b| f[a].abs().total_cmp(&f[b].abs()));
    let mut acc = 0.0;
    let mut k = 0;
    while k < order.len() {
        // include both bins sharing one |f|
        let edge = f[order[k]].abs();
        while k < order.len() && f[order[k]].abs() == edge {
            acc += spec[order[k]];
            k += 1;
        }
        if acc >= 0.99 * total {
            return Ok(2.0 * edge);
        }
    }
    Ok(2.0 * f.iter().fold(0.0f64, |m, x| m.max(x.abs())))
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{Domain, TimeGrid};
    use crate::C64;
    use std::f64::consts::PI;

    fn sig(q1: Vec<C64>, dt: f64) -> DualPolSignal {
        let n = q1.len();
        DualPolSignal::new(TimeGrid::new(n, dt, 0.0).unwrap(), q1, vec![C64::new(0.0, 0.0); n], Domain::Physical)
            .unwrap()
    }

    #[test]
    fn papr_examples() {
        let n = 1000;
        let tone: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, 2.0 * PI * 5.0 * k as f64 / n as f64)).collect();
        assert!(papr_db(&sig(tone, 1.0)).unwrap().abs() < 1e-12);
        let sine: Vec<C64> = (0..n).map(|k| C64::new((2.0 * PI * 5.0 * k as f64 / n as f64).sin(), 0.0)).collect();
        assert!((papr_db(&sig(sine, 1.0)).unwrap() - 10.0 * 2f64.log10()).abs() < 1e-9);
        assert!(papr_db(&sig(vec![C64::new(0.0, 0.0); 4], 1.0)).is_err());
    }

    #[test]
    fn bandwidth_of_two_tones() {
        let n = 1024;
        let dt = 1e-11;
        let f0 = 10.0 / (n as f64 * dt);
        let x: Vec<C64> = (0..n)
            .map(|k| {
                let t = k as f64 * dt;
                C64::from_polar(1.0, 2.0 * PI * f0 * t) + C64::from_polar(1.0, -2.0 * PI * f0 * t)
            })
            .collect();
        assert!((bandwidth_99(&sig(x, dt)).unwrap() - 2.0 * f0).abs() < 1e-3 * f0);
    }

    #[test]
    fn dbm() {
        assert!((watts_to_dbm(1e-3)).abs() < 1e-12);
        assert!((watts_to_dbm(2e-3) - 3.0103).abs() < 1e-4);
    }
}
