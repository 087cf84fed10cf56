//! In-place application of a local `2^k x 2^k` operator to a row-major
//! `dim x dim` matrix or to a vector.

use num_complex::Complex64;

use crate::linalg::{CMatrix, ZERO};

/// Index offsets of the local basis states relative to a group base.
fn offsets(targets: &[usize]) -> Vec<usize> {
    let k = targets.len();
    (0..1usize << k)
        .map(|l| {
            targets
                .iter()
                .enumerate()
                .filter(|(j, _)| (l >> j) & 1 == 1)
                .map(|(_, &t)| 1usize << t)
                .sum()
        })
        .collect()
}

fn bases(dim: usize, targets: &[usize]) -> impl Iterator<Item = usize> {
    let mask: usize = targets.iter().map(|&t| 1usize << t).sum();
    (0..dim).filter(move |i| i & mask == 0)
}

/// `v <- U v` on the target subspace.
pub(crate) fn apply_vec(v: &mut [Complex64], u: &CMatrix, targets: &[usize]) {
    let off = offsets(targets);
    let m = off.len();
    let mut buf = vec![ZERO; m];
    for b in bases(v.len(), targets) {
        for (l, o) in off.iter().enumerate() {
            buf[l] = v[b + o];
        }
        for (r, o) in off.iter().enumerate() {
            let mut acc = ZERO;
            for l in 0..m {
                acc += u[(r, l)] * buf[l];
            }
            v[b + o] = acc;
        }
    }
}

/// `A <- U A` where `A` is `dim x dim` row-major.
pub(crate) fn apply_left(a: &mut [Complex64], dim: usize, u: &CMatrix, targets: &[usize]) {
    let off = offsets(targets);
    let m = off.len();
    let mut buf = vec![ZERO; m * dim];
    for b in bases(dim, targets) {
        for (l, o) in off.iter().enumerate() {
            buf[l * dim..(l + 1) * dim].copy_from_slice(&a[(b + o) * dim..(b + o + 1) * dim]);
        }
        for (r, o) in off.iter().enumerate() {
            let row = &mut a[(b + o) * dim..(b + o + 1) * dim];
            row.fill(ZERO);
            for l in 0..m {
                let coef = u[(r, l)];
                if coef == ZERO {
                    continue;
                }
                for (dst, &src) in row.iter_mut().zip(&buf[l * dim..(l + 1) * dim]) {
                    *dst += coef * src;
                }
            }
        }
    }
}

/// `A <- A U†` where `A` is `dim x dim` row-major.
pub(crate) fn apply_right_adjoint(a: &mut [Complex64], dim: usize, u: &CMatrix, targets: &[usize]) {
    let off = offsets(targets);
    let m = off.len();
    let ub: Vec<Complex64> = (0..m * m).map(|i| u[(i / m, i % m)].conj()).collect();
    let mut buf = vec![ZERO; m];
    let group: Vec<usize> = bases(dim, targets).collect();
    for r in 0..dim {
        let row = &mut a[r * dim..(r + 1) * dim];
        for &b in &group {
            for (l, o) in off.iter().enumerate() {
                buf[l] = row[b + o];
            }
            // (A U†)[r, b+o_c] = Σ_l A[r, b+o_l] conj(U[c, l])
            for (c, o) in off.iter().enumerate() {
                let mut acc = ZERO;
                for l in 0..m {
                    acc += buf[l] * ub[c * m + l];
                }
                row[b + o] = acc;
            }
        }
    }
}

/// `A <- U A U†`.
pub(crate) fn conjugate(a: &mut [Complex64], dim: usize, u: &CMatrix, targets: &[usize]) {
    apply_left(a, dim, u, targets);
    apply_right_adjoint(a, dim, u, targets);
}

/// Embeds a local operator into the full register by explicit Kronecker
/// expansion. Slow; used by tests as an independent reference.
pub fn embed(u: &CMatrix, targets: &[usize], n: usize) -> CMatrix {
    let dim = 1usize << n;
    let mut out = CMatrix::zeros(dim, dim);
    let mask: usize = targets.iter().map(|&t| 1usize << t).sum();
    let local = |i: usize| -> usize {
        targets
            .iter()
            .enumerate()
            .map(|(j, &t)| ((i >> t) & 1) << j)
            .sum()
    };
    for r in 0..dim {
        for c in 0..dim {
            if r & !mask != c & !mask {
                continue;
            }
            out[(r, c)] = u[(local(r), local(c))];
        }
    }
    out
}
