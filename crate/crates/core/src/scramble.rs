//! Heisenberg evolution of a local Pauli operator through a circuit and its
//! operator size `Σ_S |α_S|² L(S)`.
//!
//! An operator `M` on `n` qubits is handled as the row-major vector
//! `vec(M)[r·2ⁿ + c] = M[r, c]` on `2n` qubits, scaled by `2^{-n/2}` so a
//! Hilbert-Schmidt-normalized operator is a unit vector. Conjugation
//! `G† M G` then becomes `G†` on the row qubits and `Gᵀ` on the column
//! qubits.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng as _;
use rayon::prelude::*;
use std::collections::HashMap;

use crate::ansatz::{build_layout, Architecture, CircuitLayout, GateKind};
use crate::error::{Error, Result};
use crate::rng::{stream, Seed};
use crate::statevec::{haar_gate1, haar_gate2, ry, PlacedGate, StateVector};
use crate::stats::MeanEstimate;

/// Dense operator budget.
pub const MAX_OPERATOR_QUBITS: usize = 8;

fn check_budget(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("operator needs at least one qubit".into()));
    }
    if n > MAX_OPERATOR_QUBITS {
        return Err(Error::Budget { what: "operator qubit count", limit: MAX_OPERATOR_QUBITS, requested: n });
    }
    Ok(())
}

fn pauli_1q(letter: char) -> Result<[[C64; 2]; 2]> {
    let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    Ok(match letter {
        'I' => [[l, o], [o, l]],
        'X' => [[o, l], [l, o]],
        'Y' => [[o, -i], [i, o]],
        'Z' => [[l, o], [o, -l]],
        c => return Err(Error::InvalidArgument(format!("unknown Pauli letter {c:?}"))),
    })
}

/// Dense matrix of a Pauli string such as `"XIZ"`, qubit 0 first.
pub fn pauli_string(label: &str) -> Result<DMatrix<C64>> {
    let letters: Vec<[[C64; 2]; 2]> = label.chars().map(pauli_1q).collect::<Result<_>>()?;
    let n = letters.len();
    check_budget(n)?;
    let d = 1usize << n;
    Ok(DMatrix::from_fn(d, d, |r, c| {
        letters.iter().enumerate().fold(C64::new(1.0, 0.0), |acc, (q, m)| {
            let shift = n - 1 - q;
            acc * m[(r >> shift) & 1][(c >> shift) & 1]
        })
    }))
}

/// `Z` on qubit `q` of `n`.
pub fn pauli_z(n: usize, q: usize) -> Result<DMatrix<C64>> {
    if q >= n {
        return Err(Error::QubitOutOfRange { index: q, n_qubits: n });
    }
    pauli_string(&(0..n).map(|k| if k == q { 'Z' } else { 'I' }).collect::<String>())
}

fn to_vector(n: usize, m: &DMatrix<C64>) -> Result<StateVector> {
    let d = 1usize << n;
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: m.nrows() });
    }
    let scale = (d as f64).sqrt().recip();
    let amps = (0..d * d).map(|k| m[(k / d, k % d)] * scale).collect();
    StateVector::from_amplitudes(amps).map_err(|_| {
        Error::InvalidArgument("operator must be Hilbert-Schmidt normalized, Tr(M†M) = 2^n".into())
    })
}

fn from_vector(n: usize, v: &StateVector) -> DMatrix<C64> {
    let d = 1usize << n;
    let scale = (d as f64).sqrt();
    DMatrix::from_row_iterator(d, d, v.amplitudes().iter().map(|a| a * scale))
}

fn conjugate_vec(n: usize, gates: &[PlacedGate], v: &mut StateVector) -> Result<()> {
    for g in gates.iter().rev() {
        v.apply(&g.adjoint())?;
        v.apply(&g.adjoint().conjugate().shifted(n))?;
    }
    Ok(())
}

/// `U† M U` for `U` the product of `gates` applied in order, one gate at a time.
pub fn evolve_gates(n: usize, gates: &[PlacedGate], initial: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    check_budget(n)?;
    let mut v = to_vector(n, initial)?;
    conjugate_vec(n, gates, &mut v)?;
    Ok(from_vector(n, &v))
}

/// `U_D† Z_q U_D` for the circuit `layout(params)`.
pub fn evolve_operator(layout: &CircuitLayout, params: &[f64], qubit: usize) -> Result<DMatrix<C64>> {
    let n = layout.n_qubits;
    check_budget(n)?;
    evolve_gates(n, &layout.compile(params)?, &pauli_z(n, qubit)?)
}

/// Coefficients `α_S = Tr(S M) / 2ⁿ` over all `4ⁿ` Pauli strings.
///
/// String index is base 4 with qubit 0 most significant and digits
/// `0 = I, 1 = X, 2 = Y, 3 = Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliDecomposition {
    pub n_qubits: usize,
    pub coefficients: Vec<C64>,
}

const LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

impl PauliDecomposition {
    pub fn index_of(label: &str) -> Result<usize> {
        label.chars().try_fold(0usize, |acc, c| {
            let digit = LETTERS
                .iter()
                .position(|&l| l == c)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown Pauli letter {c:?}")))?;
            Ok(acc * 4 + digit)
        })
    }

    pub fn label(&self, index: usize) -> String {
        (0..self.n_qubits)
            .map(|q| LETTERS[(index >> (2 * (self.n_qubits - 1 - q))) & 3])
            .collect()
    }

    pub fn coefficient(&self, label: &str) -> Result<C64> {
        if label.len() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, got: label.len() });
        }
        Ok(self.coefficients[Self::index_of(label)?])
    }

    /// Number of non-identity letters in string `index`.
    pub fn weight(&self, index: usize) -> usize {
        (0..self.n_qubits).filter(|q| (index >> (2 * q)) & 3 != 0).count()
    }

    /// Qubits carrying a non-identity letter in string `index`.
    pub fn support(&self, index: usize) -> Vec<usize> {
        (0..self.n_qubits)
            .filter(|q| (index >> (2 * (self.n_qubits - 1 - q))) & 3 != 0)
            .collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.coefficients.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `Σ_S α_S S`.
    pub fn reconstruct(&self) -> Result<DMatrix<C64>> {
        let d = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(d, d);
        for (k, a) in self.coefficients.iter().enumerate() {
            if a.norm() > 0.0 {
                m += pauli_string(&self.label(k))? * *a;
            }
        }
        Ok(m)
    }
}

fn walsh_hadamard(v: &mut [C64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (a, b) = block.split_at_mut(h);
            for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                let (s, t) = (*x + *y, *x - *y);
                *x = s;
                *y = t;
            }
        }
        h *= 2;
    }
}

/// Decomposition from a row-major operator.
///
/// Writing `S = (-i)^{|x∧z|} X^x Z^z` (a `Y` is a shared bit of `x` and `z`),
/// `Tr(S M) = (-i)^{|x∧z|} Σ_r (-1)^{r·z} M[r⊕x, r]`: one Walsh-Hadamard
/// transform per `x`.
fn decompose_row_major(n: usize, m: &[C64]) -> PauliDecomposition {
    let d = 1usize << n;
    let mut coefficients = vec![C64::new(0.0, 0.0); d * d];
    let mut f = vec![C64::new(0.0, 0.0); d];
    let phases = [C64::new(1.0, 0.0), C64::new(0.0, -1.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0)];
    for x in 0..d {
        for (r, slot) in f.iter_mut().enumerate() {
            *slot = m[(r ^ x) * d + r];
        }
        walsh_hadamard(&mut f);
        for (z, &t) in f.iter().enumerate() {
            let mut index = 0usize;
            for q in 0..n {
                let bit = n - 1 - q;
                let letter = match ((x >> bit) & 1, (z >> bit) & 1) {
                    (0, 0) => 0,
                    (1, 0) => 1,
                    (1, 1) => 2,
                    _ => 3,
                };
                index = index * 4 + letter;
            }
            let phase = phases[(x & z).count_ones() as usize % 4];
            coefficients[index] = phase * t / d as f64;
        }
    }
    PauliDecomposition { n_qubits: n, coefficients }
}

pub fn pauli_decompose(m: &DMatrix<C64>, n: usize) -> Result<PauliDecomposition> {
    check_budget(n)?;
    let d = 1usize << n;
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: m.nrows() });
    }
    let row_major: Vec<C64> = (0..d * d).map(|k| m[(k / d, k % d)]).collect();
    Ok(decompose_row_major(n, &row_major))
}

/// Tolerance on `Σ|α_S|² = 1` accepted by [`operator_size`].
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// `Σ_S |α_S|² L(S)`.
pub fn operator_size(dec: &PauliDecomposition) -> Result<f64> {
    let total = dec.total_weight();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(total));
    }
    Ok(dec
        .coefficients
        .iter()
        .enumerate()
        .map(|(k, a)| a.norm_sqr() * dec.weight(k) as f64)
        .sum())
}

/// Gates of `layout` with every parametrized gate replaced by a Haar sample.
/// Slots sharing parameters share the sample; `RotationY` slots get a uniform
/// angle; CZ/CNOT stay fixed.
pub fn random_instance(layout: &CircuitLayout, seed: Seed) -> Vec<PlacedGate> {
    let mut rng = seed.rng();
    let mut two: HashMap<usize, nalgebra::Matrix4<C64>> = HashMap::new();
    let mut one: HashMap<usize, nalgebra::Matrix2<C64>> = HashMap::new();
    layout
        .slots()
        .map(|s| {
            let q = &s.qubits;
            match s.kind {
                GateKind::Universal2q => {
                    let matrix = *two.entry(s.param_offset).or_insert_with(|| haar_gate2(&mut rng));
                    PlacedGate::Two { a: q[0], b: q[1], matrix }
                }
                GateKind::Rotation3 => {
                    let matrix = *one.entry(s.param_offset).or_insert_with(|| haar_gate1(&mut rng));
                    PlacedGate::Single { qubit: q[0], matrix }
                }
                GateKind::RotationY => {
                    let matrix = *one
                        .entry(s.param_offset)
                        .or_insert_with(|| ry(rng.random_range(0.0..std::f64::consts::TAU)));
                    PlacedGate::Single { qubit: q[0], matrix }
                }
                GateKind::Cz => PlacedGate::Cz { a: q[0], b: q[1] },
                GateKind::Cnot => PlacedGate::Cnot { control: q[0], target: q[1] },
            }
        })
        .collect()
}

/// Operator size of `Z_{floor(n/2)}` after one random instance.
pub fn random_circuit_size(layout: &CircuitLayout, seed: Seed) -> Result<f64> {
    let n = layout.n_qubits;
    check_budget(n)?;
    let mut v = to_vector(n, &pauli_z(n, n / 2)?)?;
    conjugate_vec(n, &random_instance(layout, seed), &mut v)?;
    let d = 1usize << n;
    let scale = (d as f64).sqrt();
    let m: Vec<C64> = v.amplitudes().iter().map(|a| a * scale).collect();
    operator_size(&decompose_row_major(n, &m))
}

/// Ensemble mean of the operator size over random instances of
/// `arch` at depth `depth`; instance `k` uses `seed / CIRCUITS / k`.
pub fn avg_operator_size(arch: Architecture, n: usize, depth: usize, samples: usize, seed: Seed) -> Result<MeanEstimate> {
    check_budget(n)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one circuit sample".into()));
    }
    let layout = build_layout(arch, n, depth)?;
    let base = seed.child(stream::CIRCUITS);
    let sizes = (0..samples as u64)
        .into_par_iter()
        .map(|k| random_circuit_size(&layout, base.child(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeanEstimate::from_samples(&sizes))
}
