//! Pure-state register, gate kernels, Haar sampling, and bipartite entropy.

mod gate;
pub mod kernel;

pub use gate::{
    cnot_matrix, cnot_reversed_matrix, cz_matrix, identity2, kron2, rotation_gate, ry, rz,
    GateMatrix, PlacedGate,
};
pub(crate) use gate::rotation_unchecked;

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Largest register the dense representation accepts.
pub const MAX_QUBITS: usize = 24;

pub const NORM_TOL: f64 = 1e-10;

/// An `n`-qubit pure state as `2^n` amplitudes, qubit 0 most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("a register needs at least one qubit".into()));
    }
    if n > MAX_QUBITS {
        return Err(Error::Budget {
            what: "statevector qubit count",
            limit: MAX_QUBITS,
            requested: n,
        });
    }
    Ok(())
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_n(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(StateVector { n_qubits: n, amps })
    }

    /// Wraps amplitudes that are already normalized to within 1e-10.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() < 2 || !amps.len().is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {} is not a power of two >= 2",
                amps.len()
            )));
        }
        check_n(n)?;
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "state is not normalized: sum |a|^2 = {norm_sq}"
            )));
        }
        Ok(StateVector { n_qubits: n, amps })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amps: Vec<C64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidArgument("cannot normalize a zero or non-finite vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::QubitOutOfRange { index: q, n_qubits: self.n_qubits });
        }
        Ok(())
    }

    pub fn apply_single_qubit(&mut self, q: usize, gate: &GateMatrix) -> Result<()> {
        self.check_qubit(q)?;
        match gate {
            GateMatrix::One(m) => {
                kernel::apply_1q(&mut self.amps, self.n_qubits, q, m);
                Ok(())
            }
            GateMatrix::Two(_) => Err(Error::DimensionMismatch { expected: 2, got: 4 }),
        }
    }

    /// `gate` rows/columns are ordered `2*a + b` with `a = q_a`.
    pub fn apply_two_qubit(&mut self, qa: usize, qb: usize, gate: &GateMatrix) -> Result<()> {
        self.check_qubit(qa)?;
        self.check_qubit(qb)?;
        if qa == qb {
            return Err(Error::DuplicateQubit(qa));
        }
        match gate {
            GateMatrix::Two(m) => {
                kernel::apply_2q(&mut self.amps, self.n_qubits, qa, qb, m);
                Ok(())
            }
            GateMatrix::One(_) => Err(Error::DimensionMismatch { expected: 4, got: 2 }),
        }
    }

    pub fn apply(&mut self, gate: &PlacedGate) -> Result<()> {
        gate.check(self.n_qubits)?;
        gate.apply_raw(&mut self.amps, self.n_qubits);
        Ok(())
    }

    pub fn apply_all(&mut self, gates: &[PlacedGate]) -> Result<()> {
        for g in gates {
            g.check(self.n_qubits)?;
        }
        for g in gates {
            g.apply_raw(&mut self.amps, self.n_qubits);
        }
        Ok(())
    }

    fn check_same(&self, other: &StateVector) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        Ok(())
    }

    /// `<self|other>`.
    pub fn inner_product(&self, other: &StateVector) -> Result<C64> {
        self.check_same(other)?;
        Ok(inner(&self.amps, &other.amps))
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner_product(other)?.norm_sqr())
    }

    /// Exact computational-basis outcome distribution.
    pub fn outcome_distribution(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Von Neumann entropy in bits of qubits `0..k` against the rest.
    pub fn bipartite_entropy(&self, k: usize) -> Result<f64> {
        let n = self.n_qubits;
        if k == 0 || k >= n {
            return Err(Error::InvalidArgument(format!(
                "cut must satisfy 1 <= k <= n-1, got k={k} for n={n}"
            )));
        }
        let (rows, cols) = (1usize << k, 1usize << (n - k));
        // Row-major amplitudes become the column-major storage of the transpose.
        let m = DMatrix::from_column_slice(cols, rows, &self.amps);
        let sigmas = m.singular_values();
        let entropy: f64 = sigmas
            .iter()
            .map(|s| s * s)
            .filter(|&p| p > 1e-300)
            .map(|p| -p * p.log2())
            .sum();
        Ok(entropy.clamp(0.0, k.min(n - k) as f64))
    }

    /// Relabels qubits cyclically: old qubit `q` becomes qubit `(q + shift) mod n`.
    pub fn cyclic_shift(&self, shift: usize) -> StateVector {
        let n = self.n_qubits;
        let shift = shift % n;
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            let mut j = 0usize;
            for q in 0..n {
                let b = (i >> (n - 1 - q)) & 1;
                let nq = (q + shift) % n;
                j |= b << (n - 1 - nq);
            }
            out[j] = a;
        }
        StateVector { n_qubits: n, amps: out }
    }
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random element of `U(dim)`: QR of a complex Ginibre matrix with
/// the phases of `diag(R)` pushed into `Q`.
///
/// The Ginibre matrix is filled column by column from `rng`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DMatrix<C64>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("Haar dimension must be >= 1".into()));
    }
    let data: Vec<C64> = (0..dim * dim).map(|_| complex_gaussian(rng)).collect();
    let z = DMatrix::from_vec(dim, dim, data);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let rkk = r[(k, k)];
        let phase = if rkk.norm() > 0.0 { rkk / rkk.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    Ok(q)
}

pub fn haar_gate1<R: Rng + ?Sized>(rng: &mut R) -> Matrix2<C64> {
    let u = haar_unitary(2, rng).expect("dim 2 is valid");
    Matrix2::from_iterator(u.iter().copied())
}

pub fn haar_gate2<R: Rng + ?Sized>(rng: &mut R) -> Matrix4<C64> {
    let u = haar_unitary(4, rng).expect("dim 4 is valid");
    Matrix4::from_iterator(u.iter().copied())
}

/// Haar-random state `U|0...0>`.
///
/// Only the first column of the Ginibre matrix is drawn: after the phase
/// fix the first column of `Q` is exactly that column normalized, so this is
/// the same state `haar_unitary` would produce from the same stream without
/// the `O(d^3)` factorization.
pub fn haar_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<StateVector> {
    check_n(n)?;
    let amps: Vec<C64> = (0..1usize << n).map(|_| complex_gaussian(rng)).collect();
    StateVector::normalized(amps)
}
