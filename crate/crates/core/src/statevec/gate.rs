use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64 as C64;

use super::kernel;
use crate::error::{Error, Result};

const UNITARY_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A validated single- or two-qubit unitary.
#[derive(Debug, Clone, PartialEq)]
pub enum GateMatrix {
    One(Matrix2<C64>),
    Two(Matrix4<C64>),
}

fn unitarity_defect(m: &DMatrix<C64>) -> f64 {
    let prod = m.adjoint() * m;
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for cc in 0..m.ncols() {
            let target = if r == cc { 1.0 } else { 0.0 };
            worst = worst.max((prod[(r, cc)] - c(target, 0.0)).norm());
        }
    }
    worst
}

impl GateMatrix {
    /// Checks unitarity to 1e-10 entrywise.
    pub fn one(m: Matrix2<C64>) -> Result<Self> {
        let defect = unitarity_defect(&DMatrix::from_iterator(2, 2, m.iter().copied()));
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(GateMatrix::One(m))
    }

    pub fn two(m: Matrix4<C64>) -> Result<Self> {
        let defect = unitarity_defect(&DMatrix::from_iterator(4, 4, m.iter().copied()));
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(GateMatrix::Two(m))
    }

    pub fn from_dmatrix(m: &DMatrix<C64>) -> Result<Self> {
        match (m.nrows(), m.ncols()) {
            (2, 2) => Self::one(Matrix2::from_iterator(m.iter().copied())),
            (4, 4) => Self::two(Matrix4::from_iterator(m.iter().copied())),
            (r, _) => Err(Error::InvalidArgument(format!(
                "gate matrices are 2x2 or 4x4, got {r}x{}",
                m.ncols()
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            GateMatrix::One(_) => 2,
            GateMatrix::Two(_) => 4,
        }
    }

    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        match self {
            GateMatrix::One(m) => DMatrix::from_iterator(2, 2, m.iter().copied()),
            GateMatrix::Two(m) => DMatrix::from_iterator(4, 4, m.iter().copied()),
        }
    }
}

pub fn rz(theta: f64) -> Matrix2<C64> {
    let h = theta / 2.0;
    Matrix2::new(c(h.cos(), -h.sin()), c(0.0, 0.0), c(0.0, 0.0), c(h.cos(), h.sin()))
}

pub fn ry(theta: f64) -> Matrix2<C64> {
    let (s, co) = (theta / 2.0).sin_cos();
    Matrix2::new(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0))
}

/// `RZ(t1) RY(t2) RZ(t3)` in closed form (operator order: `RZ(t3)` acts first).
pub(crate) fn rotation_unchecked(t1: f64, t2: f64, t3: f64) -> Matrix2<C64> {
    let (s, co) = (t2 / 2.0).sin_cos();
    let sum = (t1 + t3) / 2.0;
    let diff = (t1 - t3) / 2.0;
    Matrix2::new(
        C64::from_polar(co, -sum),
        -C64::from_polar(s, -diff),
        C64::from_polar(s, diff),
        C64::from_polar(co, sum),
    )
}

/// General single-qubit rotation `R(t1, t2, t3) = e^{-i t1 Z/2} e^{-i t2 Y/2} e^{-i t3 Z/2}`.
pub fn rotation_gate(t1: f64, t2: f64, t3: f64) -> Result<GateMatrix> {
    for (i, t) in [t1, t2, t3].into_iter().enumerate() {
        if !t.is_finite() {
            return Err(Error::InvalidArgument(format!("angle {} is not finite: {t}", i + 1)));
        }
    }
    Ok(GateMatrix::One(rotation_unchecked(t1, t2, t3)))
}

pub fn kron2(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|r, cc| a[(r >> 1, cc >> 1)] * b[(r & 1, cc & 1)])
}

pub fn identity2() -> Matrix2<C64> {
    Matrix2::identity()
}

/// CNOT in the `2*a + b` ordering with `a` as control.
pub fn cnot_matrix() -> Matrix4<C64> {
    let mut m = Matrix4::zeros();
    m[(0, 0)] = c(1.0, 0.0);
    m[(1, 1)] = c(1.0, 0.0);
    m[(2, 3)] = c(1.0, 0.0);
    m[(3, 2)] = c(1.0, 0.0);
    m
}

/// CNOT with `b` as control, `a` as target.
pub fn cnot_reversed_matrix() -> Matrix4<C64> {
    let mut m = Matrix4::zeros();
    m[(0, 0)] = c(1.0, 0.0);
    m[(2, 2)] = c(1.0, 0.0);
    m[(1, 3)] = c(1.0, 0.0);
    m[(3, 1)] = c(1.0, 0.0);
    m
}

pub fn cz_matrix() -> Matrix4<C64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new(
        c(1.0, 0.0),
        c(1.0, 0.0),
        c(1.0, 0.0),
        c(-1.0, 0.0),
    ))
}

/// A gate bound to concrete qubits.
#[derive(Debug, Clone, PartialEq)]
pub enum PlacedGate {
    Single { qubit: usize, matrix: Matrix2<C64> },
    Two { a: usize, b: usize, matrix: Matrix4<C64> },
    Cz { a: usize, b: usize },
    Cnot { control: usize, target: usize },
}

impl PlacedGate {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            PlacedGate::Single { qubit, .. } => (qubit, None),
            PlacedGate::Two { a, b, .. } | PlacedGate::Cz { a, b } => (a, Some(b)),
            PlacedGate::Cnot { control, target } => (control, Some(target)),
        }
    }

    pub(crate) fn check(&self, n: usize) -> Result<()> {
        let (a, b) = self.qubits();
        for q in std::iter::once(a).chain(b) {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, n_qubits: n });
            }
        }
        if Some(a) == b {
            return Err(Error::DuplicateQubit(a));
        }
        Ok(())
    }

    /// Applies to a raw amplitude slice; indices must already be checked.
    #[inline]
    pub(crate) fn apply_raw(&self, amps: &mut [C64], n: usize) {
        match self {
            PlacedGate::Single { qubit, matrix } => kernel::apply_1q(amps, n, *qubit, matrix),
            PlacedGate::Two { a, b, matrix } => kernel::apply_2q(amps, n, *a, *b, matrix),
            PlacedGate::Cz { a, b } => kernel::apply_cz(amps, n, *a, *b),
            PlacedGate::Cnot { control, target } => kernel::apply_cnot(amps, n, *control, *target),
        }
    }

    /// Adjoint of the gate (CZ and CNOT are self-inverse).
    pub fn adjoint(&self) -> PlacedGate {
        match self {
            PlacedGate::Single { qubit, matrix } => PlacedGate::Single {
                qubit: *qubit,
                matrix: matrix.adjoint(),
            },
            PlacedGate::Two { a, b, matrix } => PlacedGate::Two {
                a: *a,
                b: *b,
                matrix: matrix.adjoint(),
            },
            g => g.clone(),
        }
    }

    /// Entrywise complex conjugate (used to right-multiply via the transpose).
    pub fn conjugate(&self) -> PlacedGate {
        match self {
            PlacedGate::Single { qubit, matrix } => PlacedGate::Single {
                qubit: *qubit,
                matrix: matrix.map(|z| z.conj()),
            },
            PlacedGate::Two { a, b, matrix } => PlacedGate::Two {
                a: *a,
                b: *b,
                matrix: matrix.map(|z| z.conj()),
            },
            g => g.clone(),
        }
    }

    /// Same gate acting on qubits shifted by `offset`.
    pub fn shifted(&self, offset: usize) -> PlacedGate {
        match self.clone() {
            PlacedGate::Single { qubit, matrix } => PlacedGate::Single { qubit: qubit + offset, matrix },
            PlacedGate::Two { a, b, matrix } => PlacedGate::Two { a: a + offset, b: b + offset, matrix },
            PlacedGate::Cz { a, b } => PlacedGate::Cz { a: a + offset, b: b + offset },
            PlacedGate::Cnot { control, target } => PlacedGate::Cnot {
                control: control + offset,
                target: target + offset,
            },
        }
    }
}
