//! Raw amplitude kernels. Qubit 0 is the most significant bit of the basis
//! index, so qubit `q` of an `n`-qubit register lives at bit `n - 1 - q`.
//!
//! Callers guarantee index validity; these functions only `debug_assert`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64 as C64;

#[inline]
fn bit(n: usize, q: usize) -> usize {
    n - 1 - q
}

/// Insert a zero at bit position `pos` of `x`.
#[inline]
fn insert_zero(x: usize, pos: usize) -> usize {
    let low = x & ((1 << pos) - 1);
    ((x >> pos) << (pos + 1)) | low
}

pub fn apply_1q(amps: &mut [C64], n: usize, q: usize, m: &Matrix2<C64>) {
    debug_assert!(q < n && amps.len() == 1 << n);
    let stride = 1usize << bit(n, q);
    let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    for block in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x0, x1) = (*a0, *a1);
            *a0 = m00 * x0 + m01 * x1;
            *a1 = m10 * x0 + m11 * x1;
        }
    }
}

/// Applies `m` to the `(qa, qb)` pair; row/column index of `m` is `2*a + b`.
pub fn apply_2q(amps: &mut [C64], n: usize, qa: usize, qb: usize, m: &Matrix4<C64>) {
    debug_assert!(qa < n && qb < n && qa != qb && amps.len() == 1 << n);
    let (pa, pb) = (bit(n, qa), bit(n, qb));
    let (lo, hi) = if pa < pb { (pa, pb) } else { (pb, pa) };
    let (ma, mb) = (1usize << pa, 1usize << pb);
    let mut u = [[C64::new(0.0, 0.0); 4]; 4];
    for (r, row) in u.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = m[(r, c)];
        }
    }
    for k in 0..amps.len() >> 2 {
        let i00 = insert_zero(insert_zero(k, lo), hi);
        let idx = [i00, i00 | mb, i00 | ma, i00 | ma | mb];
        let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
        for (row, &i) in u.iter().zip(idx.iter()) {
            amps[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
        }
    }
}

pub fn apply_cz(amps: &mut [C64], n: usize, qa: usize, qb: usize) {
    let mask = (1usize << bit(n, qa)) | (1usize << bit(n, qb));
    for (i, a) in amps.iter_mut().enumerate() {
        if i & mask == mask {
            *a = -*a;
        }
    }
}

pub fn apply_cnot(amps: &mut [C64], n: usize, control: usize, target: usize) {
    let (pc, pt) = (bit(n, control), bit(n, target));
    let (lo, hi) = if pc < pt { (pc, pt) } else { (pt, pc) };
    let (mc, mt) = (1usize << pc, 1usize << pt);
    for k in 0..amps.len() >> 2 {
        let base = insert_zero(insert_zero(k, lo), hi) | mc;
        amps.swap(base, base | mt);
    }
}

/// Reverses the order of the `n` qubit labels inside a basis index.
pub fn reverse_bits(mut x: usize, n: usize) -> usize {
    let mut r = 0;
    for _ in 0..n {
        r = (r << 1) | (x & 1);
        x >>= 1;
    }
    r
}
