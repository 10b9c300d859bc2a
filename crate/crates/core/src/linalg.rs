//! Small fixed-size complex linear algebra for the 3x3 spectral problem.

use crate::C64;

pub type V3 = [C64; 3];
pub type M3 = [[C64; 3]; 3];

pub const ZERO: C64 = C64::new(0.0, 0.0);

// Sums are grouped as x0 + (x1 + x2) so that exchanging the two
// polarization components leaves results bit-identical.

pub fn norm_sqr(v: &V3) -> f64 {
    v[0].norm_sqr() + (v[1].norm_sqr() + v[2].norm_sqr())
}

pub fn max_abs(v: &V3) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn scale(v: &V3, s: C64) -> V3 {
    [v[0] * s, v[1] * s, v[2] * s]
}

/// Hermitian inner product u^H v.
pub fn dot_h(u: &V3, v: &V3) -> C64 {
    u[0].conj() * v[0] + (u[1].conj() * v[1] + u[2].conj() * v[2])
}

pub fn mat_vec(m: &M3, v: &V3) -> V3 {
    let mut out = [ZERO; 3];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
    }
    out
}

/// Matrix with the given vectors as columns.
pub fn from_columns(c0: &V3, c1: &V3, c2: &V3) -> M3 {
    let mut m = [[ZERO; 3]; 3];
    for r in 0..3 {
        m[r] = [c0[r], c1[r], c2[r]];
    }
    m
}

pub fn det(m: &M3) -> C64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse through the adjugate; `None` when the determinant vanishes.
pub fn inverse(m: &M3) -> Option<M3> {
    let d = det(m);
    if d.norm() == 0.0 || !d.is_finite() {
        return None;
    }
    let mut inv = [[ZERO; 3]; 3];
    for (r, row) in inv.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            // cofactor of (c, r)
            let (r0, r1) = others(c);
            let (c0, c1) = others(r);
            let minor = m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
            let sign = if (r + c) % 2 == 0 { 1.0 } else { -1.0 };
            *x = minor * sign / d;
        }
    }
    Some(inv)
}

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: C64 = C64::new(1.0, 0.0);

    #[test]
    fn inverse_round_trip() {
        let m = [
            [C64::new(1.0, 2.0), C64::new(0.5, -1.0), C64::new(0.0, 0.3)],
            [C64::new(-0.2, 0.0), C64::new(2.0, 0.1), C64::new(1.0, 1.0)],
            [C64::new(0.7, -0.7), C64::new(0.0, 0.0), C64::new(-1.0, 0.5)],
        ];
        let inv = inverse(&m).unwrap();
        for (i, e) in [[ONE, ZERO, ZERO], [ZERO, ONE, ZERO], [ZERO, ZERO, ONE]]
            .iter()
            .enumerate()
        {
            let col = mat_vec(&m, &mat_vec(&inv, e));
            for k in 0..3 {
                let want = if k == i { 1.0 } else { 0.0 };
                assert!((col[k] - want).norm() < 1e-14);
            }
        }
        let singular = [[ONE, ONE, ZERO], [ONE, ONE, ZERO], [ZERO, ZERO, ONE]];
        assert!(inverse(&singular).is_none());
    }
}
