//! Inverse transform by repeated Darboux transformation, starting from the
//! zero signal and adding one discrete eigenvalue per step.
//!
//! With `Phi` an auxiliary solution at `lambda0`, the dressing matrix is
//! `G0 = Psi M0 Psi^-1`, `M0 = diag(lambda0, lambda0*, lambda0*)`. The first
//! column of `Psi` is `Phi` and the other two span its orthogonal complement,
//! so `G0 = lambda0* I + (lambda0 - lambda0*) Phi Phi^H / |Phi|^2`. Both the
//! signal update and the auxiliary-solution update are evaluated in this
//! form, which stays finite where `Phi_1` vanishes and is invariant under a
//! per-sample rescaling of `Phi`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, V3};
use crate::signal::{Domain, DualPolSignal, TimeGrid};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

/// Solution of the spectral problem at `lambda`, stored with unit norm at
/// every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliarySolution {
    pub lambda: C64,
    pub values: Vec<V3>,
}

impl AuxiliarySolution {
    /// Vacuum solution `(A e^{-i lambda t}, B e^{i lambda t}, C e^{i lambda t})`
    /// with constants `(1, -b1, -b2)`.
    pub fn vacuum(grid: &TimeGrid, lambda: C64, b: [C64; 2]) -> Self {
        let one = C64::new(1.0, 0.0);
        let values = grid
            .times()
            .map(|t| {
                let e = 2.0 * I * lambda * t;
                // factor out whichever exponential is larger
                let v = if e.re <= 0.0 {
                    let g = e.exp();
                    [one, -b[0] * g, -b[1] * g]
                } else {
                    let g = (-e).exp();
                    [g, -b[0], -b[1]]
                };
                normalized(v)
            })
            .collect();
        Self { lambda, values }
    }
}

fn normalized(v: V3) -> V3 {
    let n = linalg::norm_sqr(&v).sqrt();
    if n > 0.0 && n.is_finite() {
        linalg::scale(&v, C64::new(1.0 / n, 0.0))
    } else {
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarbouxTarget {
    pub lambda: C64,
    pub b: [C64; 2],
}

/// Discrete spectrum to synthesize and the grid to synthesize it on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DarbouxPlan {
    pub targets: Vec<DarbouxTarget>,
    pub grid: TimeGrid,
}

impl DarbouxPlan {
    pub fn new(targets: Vec<DarbouxTarget>, grid: TimeGrid) -> Result<Self> {
        for (k, t) in targets.iter().enumerate() {
            if !(t.lambda.im > 0.0) || !t.lambda.is_finite() {
                return Err(invalid(
                    "targets",
                    format!("eigenvalue {} is not in the upper half plane", t.lambda),
                ));
            }
            if !t.b[0].is_finite() || !t.b[1].is_finite() {
                return Err(invalid("targets", format!("b of target {k} is not finite")));
            }
            if targets[..k].iter().any(|o| o.lambda == t.lambda) {
                return Err(invalid(
                    "targets",
                    format!("eigenvalue {} appears twice", t.lambda),
                ));
            }
        }
        Ok(Self { targets, grid })
    }

    /// Centered grid wide enough for the tails to fall below `threshold`
    /// of the peak. The slowest decay `2 min Im(lambda)` sets the width; each
    /// soliton's offset `ln|b| / (2 Im lambda)` and its position shift from
    /// the other solitons, `ln|(l_k - l_j*) / (l_k - l_j)| / Im l_k` per
    /// pair, are added.
    pub fn sized(targets: Vec<DarbouxTarget>, n_samples: usize, threshold: f64) -> Result<Self> {
        let eta_min = targets
            .iter()
            .map(|t| t.lambda.im)
            .fold(f64::INFINITY, f64::min);
        let shift = targets
            .iter()
            .enumerate()
            .map(|(k, t)| {
                let eta = t.lambda.im;
                let nb = (t.b[0].norm_sqr() + t.b[1].norm_sqr()).sqrt();
                let own = if nb > 0.0 { (nb.ln() / (2.0 * eta)).abs() } else { 0.0 };
                let pairs: f64 = targets
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, o)| {
                        ((t.lambda - o.lambda.conj()) / (t.lambda - o.lambda)).norm().ln() / eta
                    })
                    .sum();
                own + pairs
            })
            .fold(0.0, f64::max);
        let half = if eta_min.is_finite() {
            (2.0 / threshold).ln() / (2.0 * eta_min) + shift
        } else {
            1.0
        };
        // the boundary region starts inside the window edge
        let half = half / (1.0 - 2.0 * crate::signal::BOUNDARY_FRACTION);
        Self::new(targets, TimeGrid::centered(n_samples, 2.0 * half)?)
    }
}

/// Output of [`generate_from_spectrum`].
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub signal: DualPolSignal,
    /// Boundary amplitude relative to the peak.
    pub boundary_ratio: f64,
}

impl Synthesis {
    /// Whether the tails satisfy the vanishing condition at `threshold`.
    pub fn is_vanishing(&self, threshold: f64) -> bool {
        self.boundary_ratio < threshold
    }
}

/// Applies one Darboux transformation with the auxiliary solution `aux`:
/// adds `aux.lambda` to the spectrum of `seed` and maps every solution in
/// `others` to a solution for the new signal.
pub fn darboux_step(
    seed: &DualPolSignal,
    aux: &AuxiliarySolution,
    others: &[AuxiliarySolution],
) -> Result<(DualPolSignal, Vec<AuxiliarySolution>)> {
    seed.require(Domain::Normalized)?;
    let n = seed.len();
    for a in std::iter::once(aux).chain(others) {
        if a.values.len() != n {
            return Err(Error::LengthMismatch {
                what: "auxiliary solution",
                expected: n,
                found: a.values.len(),
            });
        }
    }
    let l0 = aux.lambda;
    let gap = l0 - l0.conj();
    let coeff = 2.0 * I * (l0.conj() - l0);

    let mut out = seed.clone();
    let mut mapped: Vec<AuxiliarySolution> = others
        .iter()
        .map(|o| AuxiliarySolution {
            lambda: o.lambda,
            values: Vec::with_capacity(n),
        })
        .collect();

    for i in 0..n {
        let phi = &aux.values[i];
        let n2 = linalg::norm_sqr(phi);
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::DegenerateAuxiliary { sample: i });
        }
        // q_j + 2i(l0* - l0) u_j* / (1 + |u|^2) = q_j + coeff Phi_1 Phi_{j+1}^* / |Phi|^2
        out.q1[i] += coeff * phi[0] * phi[1].conj() / n2;
        out.q2[i] += coeff * phi[0] * phi[2].conj() / n2;

        for (m, o) in mapped.iter_mut().zip(others) {
            let v = &o.values[i];
            let proj = linalg::dot_h(phi, v) * gap / n2;
            let shift = o.lambda - l0.conj();
            let w = [
                v[0] * shift - phi[0] * proj,
                v[1] * shift - phi[1] * proj,
                v[2] * shift - phi[2] * proj,
            ];
            if !(linalg::norm_sqr(&w) > 0.0) {
                return Err(Error::DegenerateAuxiliary { sample: i });
            }
            m.values.push(normalized(w));
        }
    }
    Ok((out, mapped))
}

/// Builds the signal whose discrete spectrum is `plan.targets`, adding the
/// eigenvalues in the given order.
pub fn generate_from_spectrum(plan: &DarbouxPlan) -> Result<Synthesis> {
    let mut signal = DualPolSignal::zeros(plan.grid, Domain::Normalized);
    let mut pending: Vec<AuxiliarySolution> = plan
        .targets
        .iter()
        .map(|t| AuxiliarySolution::vacuum(&plan.grid, t.lambda, t.b))
        .collect();
    while !pending.is_empty() {
        let aux = pending.remove(0);
        let (next, rest) = darboux_step(&signal, &aux, &pending)?;
        signal = next;
        pending = rest;
    }
    let boundary_ratio = signal.boundary_ratio();
    Ok(Synthesis {
        signal,
        boundary_ratio,
    })
}
