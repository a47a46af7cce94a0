//! Independent oracles shared by the integration and acceptance tests. None of
//! these route through the library's kernels.
#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64 as C64;
use vqc_core::ansatz::{CircuitLayout, GateKind};
use vqc_core::statevec::{cnot_matrix, cz_matrix, PlacedGate};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn id(d: usize) -> DMatrix<C64> {
    DMatrix::identity(d, d)
}

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// `I ⊗ … ⊗ g_q ⊗ … ⊗ I` by repeated Kronecker products.
pub fn dense_single(n: usize, q: usize, g: &Matrix2<C64>) -> DMatrix<C64> {
    let g = DMatrix::from_fn(2, 2, |i, j| g[(i, j)]);
    let left = id(1 << q);
    let right = id(1 << (n - 1 - q));
    kron(&kron(&left, &g), &right)
}

/// Two-qubit gate on `(a, b)` by enumerating matrix elements: `<i|G|j>` is
/// `g[(i_a i_b), (j_a j_b)]` when all other bits of `i` and `j` agree.
pub fn dense_two(n: usize, a: usize, b: usize, g: &Matrix4<C64>) -> DMatrix<C64> {
    let d = 1usize << n;
    let bit = |x: usize, q: usize| (x >> (n - 1 - q)) & 1;
    let mask = (1usize << (n - 1 - a)) | (1usize << (n - 1 - b));
    DMatrix::from_fn(d, d, |i, j| {
        if i & !mask != j & !mask {
            return c(0.0, 0.0);
        }
        g[(2 * bit(i, a) + bit(i, b), 2 * bit(j, a) + bit(j, b))]
    })
}

pub fn dense_gate(n: usize, g: &PlacedGate) -> DMatrix<C64> {
    match g {
        PlacedGate::Single { qubit, matrix } => dense_single(n, *qubit, matrix),
        PlacedGate::Two { a, b, matrix } => dense_two(n, *a, *b, matrix),
        PlacedGate::Cz { a, b } => dense_two(n, *a, *b, &cz_matrix()),
        PlacedGate::Cnot { control, target } => dense_two(n, *control, *target, &cnot_matrix()),
    }
}

/// Full circuit unitary as a product of embedded gate matrices.
pub fn dense_circuit(layout: &CircuitLayout, params: &[f64]) -> DMatrix<C64> {
    let n = layout.n_qubits;
    let gates = layout.compile(params).unwrap();
    gates.iter().fold(id(1 << n), |u, g| dense_gate(n, g) * u)
}

pub fn max_abs(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Ground energy of the periodic Ising chain from its free-fermion solution.
pub fn jordan_wigner_energy(n: usize, g: f64) -> f64 {
    let mut e = 0.0;
    for m in 0..n {
        let k = std::f64::consts::PI * (2 * m + 1) as f64 / n as f64;
        e -= (1.0 + g * g - 2.0 * g * k.cos()).sqrt();
    }
    e
}

/// Mean entanglement entropy in bits of a `d_a`-dimensional subsystem of a
/// Haar-random state in `d_a ⊗ d_b`, `d_a <= d_b`.
pub fn page_entropy_bits(d_a: usize, d_b: usize) -> f64 {
    let harmonic: f64 = (d_b + 1..=d_a * d_b).map(|j| 1.0 / j as f64).sum();
    (harmonic - (d_a as f64 - 1.0) / (2.0 * d_b as f64)) / std::f64::consts::LN_2
}

/// Parameter-shift gradient: every parameter is the angle of an
/// `exp(-iθP/2)` rotation, so `∂f = [f(θ + π/2) - f(θ - π/2)] / 2`.
pub fn parameter_shift<F: Fn(&[f64]) -> f64>(f: F, params: &[f64]) -> Vec<f64> {
    let h = std::f64::consts::FRAC_PI_2;
    (0..params.len())
        .map(|i| {
            let mut p = params.to_vec();
            p[i] += h;
            let plus = f(&p);
            p[i] -= 2.0 * h;
            0.5 * (plus - f(&p))
        })
        .collect()
}

/// True when every parametrized slot is a single Pauli rotation per angle.
pub fn is_rotation_only(layout: &CircuitLayout) -> bool {
    layout
        .slots()
        .all(|s| matches!(s.kind, GateKind::Rotation3 | GateKind::RotationY | GateKind::Cz | GateKind::Cnot))
}

/// Kolmogorov distance between the empirical CDF of `xs` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Least-squares line `y = a + b x`; returns `(slope, r_squared)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}
