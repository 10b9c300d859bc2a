//! Direct transform: scattering coefficients, discrete eigenvalues and
//! b-coefficients of a normalized dual-polarization signal.
//!
//! All integrations use the trapezoidal transfer step between consecutive
//! samples,
//!
//! ```text
//! v[n+1] = (I - h/2 M[n+1])^-1 (I + h/2 M[n]) v[n],   M = lambda A + B,
//! ```
//!
//! and the same step with `h -> -h` when integrating right to left. The
//! lambda-derivative is propagated by differentiating the discrete step, so
//! `a'` is the exact derivative of the discrete `a`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, V3, ZERO};
use crate::signal::{Domain, DualPolSignal};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// Steps between renormalizations of the integrated state.
const RENORM_INTERVAL: usize = 64;

/// Condition number above which a forward-backward match is flagged.
pub const ILL_CONDITIONED: f64 = 1e10;

/// Scattering coefficients at one spectral point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringData {
    pub lambda: C64,
    pub a: C64,
    /// da/dlambda, present when requested.
    pub a_prime: Option<C64>,
    pub b: [C64; 2],
}

/// One discrete eigenvalue with its b-vector and a'(lambda).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteEntry {
    pub lambda: C64,
    pub b: [C64; 2],
    pub a_prime: C64,
    /// Residual a(lambda) from the matching solve.
    pub a: C64,
    /// Condition number of the matching system.
    pub condition: f64,
}

impl DiscreteEntry {
    pub fn is_ill_conditioned(&self) -> bool {
        !(self.condition < ILL_CONDITIONED)
    }

    /// Spectral amplitude b / a'.
    pub fn spectral_amplitude(&self) -> [C64; 2] {
        [self.b[0] / self.a_prime, self.b[1] / self.a_prime]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSpectrum {
    pub entries: Vec<DiscreteEntry>,
}

impl DiscreteSpectrum {
    pub fn eigenvalues(&self) -> Vec<C64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Integration state `v * exp(log_scale)` with its lambda-derivative
/// `w * exp(log_scale)`.
#[derive(Debug, Clone, Copy)]
struct State {
    v: V3,
    w: V3,
    log_scale: C64,
}

impl State {
    fn renormalize(&mut self) {
        let s = linalg::max_abs(&self.v);
        if s > 0.0 && s.is_finite() {
            let inv = C64::new(1.0 / s, 0.0);
            self.v = linalg::scale(&self.v, inv);
            self.w = linalg::scale(&self.w, inv);
            self.log_scale += s.ln();
        }
    }
}

/// Borrowed view of a normalized signal for one spectral parameter.
/// Steps go between samples `stride` apart, so stride 2 is the same scheme
/// on a grid of twice the spacing.
struct Integrator<'a> {
    q1: &'a [C64],
    q2: &'a [C64],
    dt: f64,
    t_start: f64,
    stride: usize,
    lambda: C64,
}

impl<'a> Integrator<'a> {
    fn new(sig: &'a DualPolSignal, lambda: C64, stride: usize) -> Result<Self> {
        sig.require(Domain::Normalized)?;
        if !lambda.is_finite() {
            return Err(invalid("lambda", "not finite"));
        }
        Ok(Self {
            q1: &sig.q1,
            q2: &sig.q2,
            dt: sig.grid.dt(),
            t_start: sig.grid.t_start(),
            stride,
            lambda,
        })
    }

    /// Index of the last sample on the strided grid.
    fn last(&self) -> usize {
        (self.q1.len() - 1) / self.stride * self.stride
    }

    /// Nearest strided sample at or below `n`.
    fn align(&self, n: usize) -> usize {
        n / self.stride * self.stride
    }

    /// Discrete counterpart of `-i lambda t` at sample `n` and its
    /// lambda-derivative: the scheme carries `e^{-i lambda t}` across an
    /// empty step by the factor `kappa = (1 - i lambda h/2) / (1 + i lambda h/2)`
    /// rather than `e^{-i lambda h}`. Normalizing by this phase makes the
    /// zero signal scatter exactly to `a = 1, b = 0`.
    fn minus_phase(&self, n: usize) -> (C64, C64) {
        let t0 = self.t_start;
        let steps = (n / self.stride) as f64;
        let hh = 0.5 * self.dt * self.stride as f64;
        let lo = 1.0 - I * self.lambda * hh;
        let hi = 1.0 + I * self.lambda * hh;
        let log_kappa = lo.ln() - hi.ln();
        let dlog_kappa = -I * hh / lo - I * hh / hi;
        (
            -I * self.lambda * t0 + steps * log_kappa,
            -I * t0 + steps * dlog_kappa,
        )
    }

    /// `(I + c M[n]) v`.
    #[inline]
    fn apply_plus(&self, c: f64, n: usize, v: &V3) -> V3 {
        let il = I * self.lambda;
        let (q1, q2) = (self.q1[n], self.q2[n]);
        [
            v[0] + (-il * v[0] + (q1 * v[1] + q2 * v[2])) * c,
            v[1] + (-q1.conj() * v[0] + il * v[1]) * c,
            v[2] + (-q2.conj() * v[0] + il * v[2]) * c,
        ]
    }

    /// Solves `(I - c M[n]) x = r` in closed form.
    #[inline]
    fn solve_minus(&self, c: f64, n: usize, r: &V3) -> V3 {
        let cil = I * self.lambda * c;
        let alpha = 1.0 + cil;
        let delta = 1.0 - cil;
        let p1 = self.q1[n] * c;
        let p2 = self.q2[n] * c;
        let x0 = (delta * r[0] + (p1 * r[1] + p2 * r[2]))
            / (alpha * delta + (p1.norm_sqr() + p2.norm_sqr()));
        [
            x0,
            (r[1] - p1.conj() * x0) / delta,
            (r[2] - p2.conj() * x0) / delta,
        ]
    }

    /// One trapezoidal step from sample `src` to the adjacent sample `dst`.
    #[inline]
    fn step(&self, src: usize, dst: usize, st: &mut State, with_derivative: bool) {
        let h = self.dt * self.stride as f64;
        let c = if dst > src { 0.5 * h } else { -0.5 * h };
        let rhs = self.apply_plus(c, src, &st.v);
        let v_new = self.solve_minus(c, dst, &rhs);
        if with_derivative {
            let mut rhs_w = self.apply_plus(c, src, &st.w);
            // + c A (v_old + v_new), A = diag(-i, i, i)
            let s0 = (st.v[0] + v_new[0]) * c;
            let s1 = (st.v[1] + v_new[1]) * c;
            let s2 = (st.v[2] + v_new[2]) * c;
            rhs_w[0] += -I * s0;
            rhs_w[1] += I * s1;
            rhs_w[2] += I * s2;
            st.w = self.solve_minus(c, dst, &rhs_w);
        }
        st.v = v_new;
    }

    fn run(&self, from: usize, to: usize, st: &mut State, with_derivative: bool) {
        let mut k = 0;
        let mut n = from;
        while n != to {
            let next = if to > n { n + self.stride } else { n - self.stride };
            self.step(n, next, st, with_derivative);
            n = next;
            k += 1;
            if k % RENORM_INTERVAL == 0 {
                st.renormalize();
            }
        }
        st.renormalize();
    }

    /// Left Jost solution (1, 0, 0) e^{-i lambda t} at the first sample.
    fn left_jost(&self) -> State {
        let (m, dm) = self.minus_phase(0);
        State {
            v: [C64::new(1.0, 0.0), ZERO, ZERO],
            w: [dm, ZERO, ZERO],
            log_scale: m,
        }
    }

    /// Right Jost solutions at the last sample: the two columns behaving as
    /// e_{2,3} e^{i lambda t} and the one behaving as e_1 e^{-i lambda t}.
    fn right_jost(&self) -> [State; 3] {
        let (m, dm) = self.minus_phase(self.last());
        let one = C64::new(1.0, 0.0);
        [
            State {
                v: [ZERO, one, ZERO],
                w: [ZERO, -dm, ZERO],
                log_scale: -m,
            },
            State {
                v: [ZERO, ZERO, one],
                w: [ZERO, ZERO, -dm],
                log_scale: -m,
            },
            State {
                v: [one, ZERO, ZERO],
                w: [dm, ZERO, ZERO],
                log_scale: m,
            },
        ]
    }
}

/// How the trapezoidal integrations are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Scheme {
    /// A single trapezoidal pass with one step per sample.
    Trapezoidal,
    /// Passes at spacings h and 2h combined as `(4 x_h - x_2h) / 3`. The
    /// trapezoidal error expands in even powers of h, so this removes the
    /// h^2 term.
    Richardson,
    /// Passes at h, 2h and 4h combined as `(64 x_h - 20 x_2h + x_4h) / 45`,
    /// removing the h^2 and h^4 terms.
    #[default]
    Romberg,
}

impl Scheme {
    /// Strides of the passes and their weights.
    fn passes(self) -> &'static [(usize, f64)] {
        match self {
            Scheme::Trapezoidal => &[(1, 1.0)],
            Scheme::Richardson => &[(1, 4.0 / 3.0), (2, -1.0 / 3.0)],
            Scheme::Romberg => &[(1, 64.0 / 45.0), (2, -20.0 / 45.0), (4, 1.0 / 45.0)],
        }
    }

    /// The scheme actually applied to `n` samples: extrapolation needs a
    /// few steps at the coarsest stride.
    fn effective(self, n: usize) -> Scheme {
        match self {
            Scheme::Romberg if n < 17 => Scheme::Richardson.effective(n),
            Scheme::Richardson if n < 5 => Scheme::Trapezoidal,
            s => s,
        }
    }

    fn combine<T, F>(self, n: usize, mut pass: F) -> Result<Vec<(f64, T)>>
    where
        F: FnMut(usize) -> Result<T>,
    {
        self.effective(n)
            .passes()
            .iter()
            .map(|&(stride, w)| pass(stride).map(|x| (w, x)))
            .collect()
    }

    /// Whether more than one pass is combined for `n` samples.
    fn extrapolates(self, n: usize) -> bool {
        self.effective(n) != Scheme::Trapezoidal
    }
}

fn weighted<T>(parts: &[(f64, T)], f: impl Fn(&T) -> C64) -> C64 {
    parts.iter().map(|(w, x)| *w * f(x)).sum()
}

fn scatter_pass(sig: &DualPolSignal, lambda: C64, with_derivative: bool, stride: usize) -> Result<ScatteringData> {
    let integ = Integrator::new(sig, lambda, stride)?;
    let mut st = integ.left_jost();
    let last = integ.last();
    integ.run(0, last, &mut st, with_derivative);
    let (m, dm) = integ.minus_phase(last);
    let fa = (st.log_scale - m).exp();
    let fb = (st.log_scale + m).exp();
    let a = st.v[0] * fa;
    let a_prime = with_derivative.then(|| (st.w[0] - dm * st.v[0]) * fa);
    Ok(ScatteringData {
        lambda,
        a,
        a_prime,
        b: [st.v[1] * fb, st.v[2] * fb],
    })
}

/// Scattering coefficients by one-directional trapezoidal integration of the
/// left Jost solution across the whole window:
/// `a = phi_1 e^{i lambda t}` and `b = (phi_2, phi_3) e^{-i lambda t}` at the
/// last sample.
pub fn mzsp_scatter(
    sig: &DualPolSignal,
    lambda: C64,
    with_derivative: bool,
) -> Result<ScatteringData> {
    scatter_pass(sig, lambda, with_derivative, 1)
}

/// [`mzsp_scatter`] with a selectable integration scheme.
pub fn mzsp_scatter_with(
    sig: &DualPolSignal,
    lambda: C64,
    with_derivative: bool,
    scheme: Scheme,
) -> Result<ScatteringData> {
    let parts = scheme.combine(sig.len(), |stride| {
        scatter_pass(sig, lambda, with_derivative, stride)
    })?;
    Ok(ScatteringData {
        lambda,
        a: weighted(&parts, |s| s.a),
        a_prime: with_derivative.then(|| weighted(&parts, |s| s.a_prime.unwrap_or(ZERO))),
        b: [weighted(&parts, |s| s.b[0]), weighted(&parts, |s| s.b[1])],
    })
}

/// Newton-Raphson configuration for the eigenvalue search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seeds: Vec<C64>,
    pub max_iterations: usize,
    /// Stop when |delta lambda| falls below this.
    pub step_tolerance: f64,
    /// Stop when |a| falls below this.
    pub residual_tolerance: f64,
    /// Accepted roots must satisfy |a| below this.
    pub root_tolerance: f64,
    pub dedup_radius: f64,
    /// Roots closer than this to the real axis are discarded.
    pub min_imag: f64,
    /// Iterates leaving the disc of this radius are abandoned.
    pub max_modulus: f64,
    pub scheme: Scheme,
    /// Under extrapolated schemes, roots whose plain-trapezoid Newton step
    /// exceeds this are rejected as extrapolation artifacts.
    pub consistency_tolerance: f64,
}

impl Default for SearchConfig {
    /// 8 x 8 seeds on Re in [-2, 2], Im in (0, 2]. Eigenvalues close to the
    /// real axis have narrow basins; use a denser [`SearchConfig::grid`]
    /// when several of them are expected.
    fn default() -> Self {
        Self::grid(-2.0, 2.0, 2.0, 8, 8)
    }
}

impl SearchConfig {
    fn with_seeds(seeds: Vec<C64>, max_modulus: f64) -> Self {
        Self {
            seeds,
            max_iterations: 50,
            step_tolerance: 1e-12,
            residual_tolerance: 1e-10,
            root_tolerance: 1e-6,
            dedup_radius: 1e-3,
            min_imag: 1e-6,
            max_modulus,
            scheme: Scheme::default(),
            consistency_tolerance: 1e-2,
        }
    }

    /// Rectangular seed grid, cell-centered on Re in [re_min, re_max] and
    /// Im in (0, im_max]. Iterates straying beyond twice the extent of the
    /// box are abandoned.
    pub fn grid(re_min: f64, re_max: f64, im_max: f64, n_re: usize, n_im: usize) -> Self {
        let mut seeds = Vec::with_capacity(n_re * n_im);
        for i in 0..n_re {
            let re = re_min + (i as f64 + 0.5) * (re_max - re_min) / n_re as f64;
            for j in 0..n_im {
                let im = (j as f64 + 0.5) * im_max / n_im as f64;
                seeds.push(C64::new(re, im));
            }
        }
        let extent = re_min.abs().max(re_max.abs()).hypot(im_max);
        Self::with_seeds(seeds, 2.0 * extent)
    }

    /// Seeds placed at the expected eigenvalues.
    pub fn warm_start(expected: &[C64]) -> Self {
        let extent = expected.iter().map(|l| l.norm()).fold(1.0, f64::max);
        Self::with_seeds(expected.to_vec(), 2.0 * extent)
    }

    pub fn with_scheme(self, scheme: Scheme) -> Self {
        Self { scheme, ..self }
    }
}

/// Newton iteration on `a(lambda) / prod(lambda - r)` over the roots `found`
/// so far. Deflation keeps seeds from falling back into known roots; the
/// limit is still a zero of `a` itself.
fn newton(sig: &DualPolSignal, seed: C64, found: &[C64], cfg: &SearchConfig) -> Result<Option<C64>> {
    let mut lambda = seed;
    for _ in 0..cfg.max_iterations {
        let s = mzsp_scatter_with(sig, lambda, true, cfg.scheme)?;
        let a = s.a;
        let da = s.a_prime.unwrap_or(ZERO);
        if !a.is_finite() || !da.is_finite() {
            return Ok(None);
        }
        if a.norm() < cfg.residual_tolerance {
            return Ok(Some(lambda));
        }
        let poles: C64 = found.iter().map(|r| (lambda - r).inv()).sum();
        let delta = (da / a - poles).inv();
        if !delta.is_finite() {
            return Ok(None);
        }
        lambda -= delta;
        if lambda.norm() > cfg.max_modulus || lambda.im < -1.0 {
            return Ok(None);
        }
        if delta.norm() < cfg.step_tolerance {
            return Ok(Some(lambda));
        }
    }
    Ok(None)
}

/// Newton-Raphson search for the upper-half-plane zeros of a(lambda), with
/// each seed deflated by the roots already accepted. Seeds that do not
/// converge are dropped; the result is deduplicated and sorted by increasing
/// imaginary part.
pub fn find_discrete_eigenvalues(sig: &DualPolSignal, cfg: &SearchConfig) -> Result<Vec<C64>> {
    sig.require(Domain::Normalized)?;
    let mut found: Vec<C64> = Vec::new();
    for &seed in &cfg.seeds {
        let Some(lambda) = newton(sig, seed, &found, cfg)? else {
            continue;
        };
        if lambda.im <= cfg.min_imag {
            continue;
        }
        if found.iter().any(|f| (f - lambda).norm() <= cfg.dedup_radius) {
            continue;
        }
        let a = mzsp_scatter_with(sig, lambda, false, cfg.scheme)?.a;
        if a.norm() >= cfg.root_tolerance {
            continue;
        }
        if cfg.scheme.extrapolates(sig.len()) {
            let plain = mzsp_scatter(sig, lambda, true)?;
            let shift = plain.a / plain.a_prime.unwrap_or(ZERO);
            if !(shift.norm() < cfg.consistency_tolerance) {
                continue;
            }
        }
        found.push(lambda);
    }
    found.sort_by(|x, y| x.im.total_cmp(&y.im));
    Ok(found)
}

/// Where the forward and backward integrations meet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum MatchPoint {
    #[default]
    Midpoint,
    Sample(usize),
}

/// b-coefficients at (approximate) eigenvalues by forward-backward
/// integration: the left Jost solution is carried to the matching point from
/// the left, the right Jost basis from the right, and the projection of one
/// onto the other gives b, a and a'.
pub fn compute_b_coefficients(
    sig: &DualPolSignal,
    eigenvalues: &[C64],
    matching: MatchPoint,
) -> Result<DiscreteSpectrum> {
    compute_b_coefficients_with(sig, eigenvalues, matching, Scheme::default())
}

pub fn compute_b_coefficients_with(
    sig: &DualPolSignal,
    eigenvalues: &[C64],
    matching: MatchPoint,
    scheme: Scheme,
) -> Result<DiscreteSpectrum> {
    sig.require(Domain::Normalized)?;
    let n = sig.len();
    let m = match matching {
        MatchPoint::Midpoint => n / 2,
        MatchPoint::Sample(k) if k < n => k,
        MatchPoint::Sample(k) => {
            return Err(invalid("matching", format!("sample {k} outside {n} samples")))
        }
    };
    let mut entries = Vec::with_capacity(eigenvalues.len());
    for &lambda in eigenvalues {
        let parts = scheme.combine(n, |stride| match_at(sig, lambda, m, stride))?;
        entries.push(DiscreteEntry {
            lambda,
            b: [weighted(&parts, |e| e.b[0]), weighted(&parts, |e| e.b[1])],
            a_prime: weighted(&parts, |e| e.a_prime),
            a: weighted(&parts, |e| e.a),
            condition: parts.iter().map(|(_, e)| e.condition).fold(0.0, f64::max),
        });
    }
    Ok(DiscreteSpectrum { entries })
}

fn match_at(sig: &DualPolSignal, lambda: C64, m: usize, stride: usize) -> Result<DiscreteEntry> {
    let integ = Integrator::new(sig, lambda, stride)?;
    let last = integ.last();
    let m = integ.align(m);

    let mut phi = integ.left_jost();
    integ.run(0, m, &mut phi, true);
    let mut cols = integ.right_jost();
    for c in cols.iter_mut() {
        integ.run(last, m, c, true);
    }

    // Scaled columns: psi_k = psi_hat_k e^{L_k}. With psi_hat y = phi_hat,
    // x_k = y_k e^{L_phi - L_k}.
    let factor = |k: usize| (phi.log_scale - cols[k].log_scale).exp();

    // b: least-squares projection of phi onto the two decaying right Jost
    // columns. At a root phi lies in their span; unlike the full solve this
    // stays insensitive to a small residual a(lambda).
    let (p0, p1) = (&cols[0].v, &cols[1].v);
    let g00 = linalg::norm_sqr(p0);
    let g11 = linalg::norm_sqr(p1);
    let g01 = linalg::dot_h(p0, p1);
    let det = g00 * g11 - g01.norm_sqr();
    if !(det > 0.0) {
        return Err(invalid("lambda", format!("degenerate Jost basis at {lambda}")));
    }
    let r0 = linalg::dot_h(p0, &phi.v);
    let r1 = linalg::dot_h(p1, &phi.v);
    let y0 = (r0 * g11 - g01 * r1) / det;
    let y1 = (r1 * g00 - g01.conj() * r0) / det;
    // condition number of the 3x2 column matrix from its Gram eigenvalues
    let tr = g00 + g11;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let condition = ((tr + disc) / (tr - disc).max(f64::MIN_POSITIVE)).sqrt();

    // a and a' from the full solve: dx = psi^-1 (dphi - dpsi x)
    let basis = linalg::from_columns(&cols[0].v, &cols[1].v, &cols[2].v);
    let (a, a_prime) = match linalg::inverse(&basis) {
        Some(inv) => {
            let y = linalg::mat_vec(&inv, &phi.v);
            let mut rhs = phi.w;
            for (k, c) in cols.iter().enumerate() {
                for r in 0..3 {
                    rhs[r] -= c.w[r] * y[k];
                }
            }
            let dy = linalg::mat_vec(&inv, &rhs);
            (y[2] * factor(2), dy[2] * factor(2))
        }
        None => (ZERO, ZERO),
    };
    Ok(DiscreteEntry {
        lambda,
        b: [y0 * factor(0), y1 * factor(1)],
        a,
        a_prime,
        condition,
    })
}

/// Continuous spectral amplitudes b(lambda) / a(lambda) on a real grid.
pub fn continuous_spectrum(sig: &DualPolSignal, lambda_grid: &[f64]) -> Result<Vec<[C64; 2]>> {
    sig.require(Domain::Normalized)?;
    lambda_grid
        .iter()
        .map(|&l| {
            let s = mzsp_scatter(sig, C64::new(l, 0.0), false)?;
            if s.a.norm() < 1e-12 {
                return Err(Error::SpectralSingularity {
                    lambda: l,
                    magnitude: s.a.norm(),
                });
            }
            Ok([s.b[0] / s.a, s.b[1] / s.a])
        })
        .collect()
}
