//! FFT helpers shared by the channel and the receiver.

use rustfft::FftPlanner;

use crate::C64;

pub fn fft(x: &mut [C64]) {
    FftPlanner::new().plan_fft_forward(x.len()).process(x);
}

/// Inverse FFT including the 1/N factor.
pub fn ifft(x: &mut [C64]) {
    let n = x.len();
    FftPlanner::new().plan_fft_inverse(n).process(x);
    let s = 1.0 / n as f64;
    for v in x.iter_mut() {
        *v *= s;
    }
}

/// Angular frequency of every FFT bin for sample spacing `dt`.
pub fn angular_frequencies(n: usize, dt: f64) -> Vec<f64> {
    frequencies(n, dt)
        .into_iter()
        .map(|f| 2.0 * std::f64::consts::PI * f)
        .collect()
}

/// Frequency of every FFT bin (numpy `fftfreq` ordering).
pub fn frequencies(n: usize, dt: f64) -> Vec<f64> {
    let df = 1.0 / (n as f64 * dt);
    (0..n)
        .map(|k| {
            let k = if k <= (n - 1) / 2 { k as f64 } else { k as f64 - n as f64 };
            k * df
        })
        .collect()
}

/// Combined power spectrum |X1|^2 + |X2|^2 of two sequences.
pub fn power_spectrum(x1: &[C64], x2: &[C64]) -> Vec<f64> {
    let mut a = x1.to_vec();
    let mut b = x2.to_vec();
    fft(&mut a);
    fft(&mut b);
    a.iter()
        .zip(&b)
        .map(|(u, v)| u.norm_sqr() + v.norm_sqr())
        .collect()
}

/// Band-limited interpolation by zero padding the spectrum, `factor` output
/// samples per input sample.
pub fn upsample(x: &[C64], factor: usize) -> Vec<C64> {
    let n = x.len();
    if factor == 1 {
        return x.to_vec();
    }
    let mut spec = x.to_vec();
    fft(&mut spec);
    let m = n * factor;
    let mut out = vec![C64::new(0.0, 0.0); m];
    let pos = n.div_ceil(2);
    out[..pos].copy_from_slice(&spec[..pos]);
    let neg = n - pos;
    out[m - neg..].copy_from_slice(&spec[pos..]);
    if n % 2 == 0 {
        // split the Nyquist bin between +/- fs/2
        let nyq = spec[n / 2];
        out[n / 2] = nyq * 0.5;
        out[m - n / 2] = nyq * 0.5;
    }
    ifft(&mut out);
    let s = factor as f64;
    for v in out.iter_mut() {
        *v *= s;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_layout() {
        let f = frequencies(4, 0.25);
        assert_eq!(f, vec![0.0, 1.0, -2.0, -1.0]);
        let f = frequencies(5, 1.0);
        assert_eq!(f, vec![0.0, 0.2, 0.4, -0.4, -0.2]);
    }

    #[test]
    fn upsample_band_limited_tone() {
        let n = 32;
        let x: Vec<C64> = (0..n)
            .map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * 3.0 * k as f64 / n as f64))
            .collect();
        let y = upsample(&x, 4);
        for (k, v) in y.iter().enumerate() {
            let want = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * 3.0 * k as f64 / (4 * n) as f64);
            assert!((v - want).norm() < 1e-12);
        }
        for k in 0..n {
            assert!((y[4 * k] - x[k]).norm() < 1e-12);
        }
    }
}
