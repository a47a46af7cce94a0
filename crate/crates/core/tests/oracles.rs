mod common;

use common::*;
use nalgebra::{DVector, Matrix2};
use num_complex::Complex64 as C64;
use rand::Rng;
use vqc_core::ansatz::{build_layout, universal_two_qubit, Architecture};
use vqc_core::rng::Seed;
use vqc_core::statevec::{
    cnot_matrix, haar_gate1, haar_gate2, haar_state, haar_unitary, rotation_gate, GateMatrix, PlacedGate,
    StateVector,
};

fn expm_series(m: &Matrix2<C64>) -> Matrix2<C64> {
    let mut term = Matrix2::identity();
    let mut sum = Matrix2::identity();
    for k in 1..40 {
        term = term * m / C64::new(k as f64, 0.0);
        sum += term;
    }
    sum
}

#[test]
fn rotation_matches_exponential_product() {
    let y = Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0));
    let z = Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0));
    let mut rng = Seed(1).rng();
    for _ in 0..50 {
        let t: [f64; 3] = [rng.random_range(-7.0..7.0), rng.random_range(-7.0..7.0), rng.random_range(-7.0..7.0)];
        let half = |a: f64| c(0.0, -a / 2.0);
        let want = expm_series(&(z * half(t[0]))) * expm_series(&(y * half(t[1]))) * expm_series(&(z * half(t[2])));
        let GateMatrix::One(got) = rotation_gate(t[0], t[1], t[2]).unwrap() else { panic!() };
        assert!((got - want).iter().all(|d| d.norm() < 1e-12));
    }
}

#[test]
fn random_single_qubit_gate_on_three_qubits() {
    let mut rng = Seed(2).rng();
    for _ in 0..20 {
        let psi = haar_state(3, &mut rng).unwrap();
        let g = haar_gate1(&mut rng);
        let mut out = psi.clone();
        out.apply_single_qubit(1, &GateMatrix::one(g).unwrap()).unwrap();
        let want = dense_single(3, 1, &g) * DVector::from_column_slice(psi.amplitudes());
        assert!(max_abs(out.amplitudes(), want.as_slice()) < 1e-12);
    }
}

#[test]
fn reversed_pair_on_four_qubits() {
    let mut rng = Seed(3).rng();
    for _ in 0..20 {
        let psi = haar_state(4, &mut rng).unwrap();
        let g = haar_gate2(&mut rng);
        let mut out = psi.clone();
        out.apply_two_qubit(3, 1, &GateMatrix::two(g).unwrap()).unwrap();
        let want = dense_two(4, 3, 1, &g) * DVector::from_column_slice(psi.amplitudes());
        assert!(max_abs(out.amplitudes(), want.as_slice()) < 1e-12);
    }
}

#[test]
fn every_gate_kind_matches_dense_oracle() {
    let mut rng = Seed(4).rng();
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let n = 1 + case % 4;
        let psi = haar_state(n, &mut rng).unwrap();
        let gate = if n == 1 || case % 5 == 0 {
            PlacedGate::Single { qubit: rng.random_range(0..n), matrix: haar_gate1(&mut rng) }
        } else {
            let a = rng.random_range(0..n);
            let b = (a + rng.random_range(1..n)) % n;
            match case % 3 {
                0 => PlacedGate::Two { a, b, matrix: haar_gate2(&mut rng) },
                1 => PlacedGate::Cz { a, b },
                _ => PlacedGate::Cnot { control: a, target: b },
            }
        };
        let mut out = psi.clone();
        out.apply(&gate).unwrap();
        let want = dense_gate(n, &gate) * DVector::from_column_slice(psi.amplitudes());
        worst = worst.max(max_abs(out.amplitudes(), want.as_slice()));
    }
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn cnot_oracle_agrees_with_kernel_examples() {
    let g = cnot_matrix();
    let d = dense_two(2, 0, 1, &g);
    // |10> -> |11>
    assert_eq!(d[(3, 2)], c(1.0, 0.0));
    assert_eq!(d[(0, 0)], c(1.0, 0.0));
}

#[test]
fn layouts_match_dense_products() {
    let mut rng = Seed(5).rng();
    for arch in Architecture::ALL {
        let n = 4;
        let depth = arch.max_depth(n).unwrap_or(3);
        let layout = build_layout(arch, n, depth).unwrap();
        let params: Vec<f64> = (0..layout.n_params()).map(|_| rng.random_range(0.0..6.3)).collect();
        let psi = haar_state(n, &mut rng).unwrap();
        let out = layout.apply(&params, &psi).unwrap();
        let want = dense_circuit(&layout, &params) * DVector::from_column_slice(psi.amplitudes());
        assert!(max_abs(out.amplitudes(), want.as_slice()) < 1e-10, "{arch}");
        assert!((out.norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn two_qubit_brickwall_is_one_template_gate() {
    let layout = build_layout(Architecture::BrickwallOpen, 2, 1).unwrap();
    let mut rng = Seed(6).rng();
    let params: Vec<f64> = (0..15).map(|_| rng.random_range(0.0..6.3)).collect();
    let out = layout.apply(&params, &StateVector::zero(2).unwrap()).unwrap();
    let GateMatrix::Two(u) = universal_two_qubit(&params).unwrap() else { panic!() };
    let want: Vec<C64> = (0..4).map(|i| u[(i, 0)]).collect();
    assert!(max_abs(out.amplitudes(), &want) < 1e-12);
}

#[test]
fn haar_first_moments() {
    let mut rng = Seed(7).rng();
    let m2 = (0..100_000).map(|_| haar_gate1(&mut rng)[(0, 0)].norm_sqr()).sum::<f64>() / 1e5;
    assert!((m2 - 0.5).abs() < 0.01, "{m2}");
    let m4 = (0..10_000).map(|_| haar_gate2(&mut rng)[(0, 0)].norm_sqr()).sum::<f64>() / 1e4;
    assert!((m4 - 0.25).abs() < 0.02, "{m4}");
}

#[test]
fn haar_overlap_law() {
    // |<0|U|0>|^2 over dim-2^n Haar unitaries has CDF 1 - (1 - x)^(d-1).
    let mut rng = Seed(8).rng();
    let d = 8usize;
    let xs: Vec<f64> = (0..10_000).map(|_| haar_unitary(d, &mut rng).unwrap()[(0, 0)].norm_sqr()).collect();
    let dist = ks_distance(&xs, |x| 1.0 - (1.0 - x).powi(d as i32 - 1));
    assert!(dist < 0.0163, "{dist}");
}
