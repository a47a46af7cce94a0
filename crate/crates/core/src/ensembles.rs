//! Input-state families: Haar states, random local brickwall circuits
//! `H(D0)`, their translation-invariant variant `S(D0)`, and ground states of
//! the periodic transverse-field Ising chain `H = -Σ Z_i Z_{i+1} + g Σ X_i`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::rng::{stream, Seed};
use crate::statevec::{haar_gate2, haar_state, PlacedGate, StateVector};
use crate::stats::MeanEstimate;

/// Dense diagonalization budget for the Ising chain.
pub const TFIM_MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnsembleKind {
    Haar,
    LocalRandom { d0: usize },
    TiLocalRandom { d0: usize },
    TfimGround { g: f64 },
}

impl EnsembleKind {
    pub fn label(&self) -> String {
        match self {
            EnsembleKind::Haar => "haar".into(),
            EnsembleKind::LocalRandom { d0 } => format!("local-random(d0={d0})"),
            EnsembleKind::TiLocalRandom { d0 } => format!("ti-local-random(d0={d0})"),
            EnsembleKind::TfimGround { g } => format!("tfim(g={g})"),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            EnsembleKind::Haar => Ok(()),
            EnsembleKind::LocalRandom { d0 } | EnsembleKind::TiLocalRandom { d0 } => {
                if d0 == 0 {
                    return Err(Error::InvalidArgument("circuit ensembles need d0 >= 1".into()));
                }
                if n < 2 {
                    return Err(Error::InvalidArgument("circuit ensembles need n >= 2".into()));
                }
                if matches!(self, EnsembleKind::TiLocalRandom { .. }) && !n.is_multiple_of(2) {
                    return Err(Error::InvalidArgument(format!(
                        "translation-invariant ensemble needs even n, got {n}"
                    )));
                }
                Ok(())
            }
            EnsembleKind::TfimGround { g } => {
                if !g.is_finite() {
                    return Err(Error::InvalidArgument(format!("TFIM field must be finite, got {g}")));
                }
                if n < 2 {
                    return Err(Error::InvalidArgument("TFIM needs n >= 2".into()));
                }
                if n > TFIM_MAX_QUBITS {
                    return Err(Error::Budget { what: "TFIM qubit count", limit: TFIM_MAX_QUBITS, requested: n });
                }
                Ok(())
            }
        }
    }

    /// True when repeated draws differ (the Ising ground state is fixed).
    pub fn is_random(&self) -> bool {
        !matches!(self, EnsembleKind::TfimGround { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub kind: EnsembleKind,
    pub n_qubits: usize,
    pub seed: Seed,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, n_qubits: usize, seed: impl Into<Seed>) -> Self {
        EnsembleSpec { kind, n_qubits, seed: seed.into() }
    }
}

fn brick_layer(n: usize, layer: usize, periodic: bool) -> Vec<(usize, usize)> {
    let start = if layer % 2 == 1 { 0 } else { 1 };
    let mut pairs: Vec<_> = (start..n - 1).step_by(2).map(|i| (i, i + 1)).collect();
    if periodic && layer.is_multiple_of(2) {
        pairs.push((n - 1, 0));
    }
    pairs
}

/// Haar gates of a depth-`d0` brickwall preparation circuit.
///
/// With `translation_invariant`, each layer is periodic and reuses one gate at
/// every position.
pub fn random_brickwall(n: usize, d0: usize, translation_invariant: bool, seed: Seed) -> Vec<PlacedGate> {
    let mut rng = seed.rng();
    let mut gates = Vec::new();
    for layer in 1..=d0 {
        let shared = translation_invariant.then(|| haar_gate2(&mut rng));
        for (a, b) in brick_layer(n, layer, translation_invariant) {
            let matrix = shared.unwrap_or_else(|| haar_gate2(&mut rng));
            gates.push(PlacedGate::Two { a, b, matrix });
        }
    }
    gates
}

/// Draws one state; the spec's seed fully determines it.
pub fn sample_state(spec: &EnsembleSpec) -> Result<StateVector> {
    let n = spec.n_qubits;
    spec.kind.validate(n)?;
    match spec.kind {
        EnsembleKind::Haar => haar_state(n, &mut spec.seed.rng()),
        EnsembleKind::LocalRandom { d0 } | EnsembleKind::TiLocalRandom { d0 } => {
            let ti = matches!(spec.kind, EnsembleKind::TiLocalRandom { .. });
            let mut s = StateVector::zero(n)?;
            s.apply_all(&random_brickwall(n, d0, ti, spec.seed))?;
            Ok(s)
        }
        EnsembleKind::TfimGround { g } => Ok(tfim_ground(n, g)?.ground),
    }
}

/// The `index`-th pair drawn from an ensemble under a master seed.
pub fn sample_pair(kind: EnsembleKind, n: usize, seed: Seed, index: u64) -> Result<(StateVector, StateVector)> {
    let node = seed.path(&[stream::STATES, index]);
    let a = sample_state(&EnsembleSpec::new(kind, n, node.child(0)))?;
    let b = sample_state(&EnsembleSpec::new(kind, n, node.child(1)))?;
    Ok((a, b))
}

/// Monte-Carlo mean of `|<psi0|psi1>|^2` over independent pairs.
pub fn mean_overlap(kind: EnsembleKind, n: usize, seed: Seed, pairs: usize) -> Result<MeanEstimate> {
    if pairs == 0 {
        return Err(Error::InvalidArgument("need at least one pair".into()));
    }
    let overlaps = (0..pairs as u64)
        .into_par_iter()
        .map(|i| {
            let (a, b) = sample_pair(kind, n, seed, i)?;
            a.fidelity(&b)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MeanEstimate::from_samples(&overlaps))
}

/// Dense `H = -Σ_i Z_i Z_{i+1} + g Σ_i X_i` with the wrap bond `Z_{n-1} Z_0`.
pub fn tfim_hamiltonian(n: usize, g: f64) -> Result<DMatrix<f64>> {
    EnsembleKind::TfimGround { g }.validate(n)?;
    let dim = 1usize << n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let z = |i: usize, q: usize| if (i >> (n - 1 - q)) & 1 == 0 { 1.0 } else { -1.0 };
    for i in 0..dim {
        h[(i, i)] = -(0..n).map(|q| z(i, q) * z(i, (q + 1) % n)).sum::<f64>();
        for q in 0..n {
            h[(i ^ (1 << (n - 1 - q)), i)] += g;
        }
    }
    Ok(h)
}

/// Lowest two levels and the sign-fixed real ground state of the Ising chain.
#[derive(Debug, Clone)]
pub struct TfimSpectrum {
    pub e0: f64,
    pub e1: f64,
    pub ground: StateVector,
    /// Set when `e1 - e0 < 1e-10`; the ground state was then chosen by the
    /// spin-flip-symmetric rule.
    pub degenerate: bool,
}

const DEGENERACY_TOL: f64 = 1e-10;

/// Ground state by dense symmetric diagonalization.
///
/// In a degenerate ground space the returned state is the normalized
/// projection of `(|0…0> + |1…1>)/√2` onto that space (the spin-flip-even
/// combination, GHZ at `g = 0`). The sign is fixed so the first amplitude
/// with modulus above 1e-12 is positive.
pub fn tfim_ground(n: usize, g: f64) -> Result<TfimSpectrum> {
    let h = tfim_hamiltonian(n, g)?;
    let dim = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let e0 = eig.eigenvalues[order[0]];
    let e1 = eig.eigenvalues[order[1]];
    let ground_space: Vec<usize> = order
        .iter()
        .copied()
        .take_while(|&k| eig.eigenvalues[k] - e0 < DEGENERACY_TOL)
        .collect();
    let degenerate = ground_space.len() > 1;
    let mut v: Vec<f64> = if degenerate {
        let mut acc = vec![0.0; dim];
        for &k in &ground_space {
            let col = eig.eigenvectors.column(k);
            let weight = (col[0] + col[dim - 1]) / std::f64::consts::SQRT_2;
            acc.iter_mut().zip(col.iter()).for_each(|(a, c)| *a += weight * c);
        }
        let norm = acc.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            acc
        } else {
            eig.eigenvectors.column(ground_space[0]).iter().copied().collect()
        }
    } else {
        eig.eigenvectors.column(order[0]).iter().copied().collect()
    };
    if let Some(first) = v.iter().copied().find(|x| x.abs() > 1e-12) {
        if first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let ground = StateVector::normalized(v.into_iter().map(|x| C64::new(x, 0.0)).collect())?;
    Ok(TfimSpectrum { e0, e1, ground, degenerate })
}

/// Ground energy from the Jordan-Wigner free-fermion solution:
/// `E0 = -Σ_k sqrt(1 + g² - 2g cos k)` over the antiperiodic momenta
/// `k = π(2m+1)/n`, `m = 0..n`.
pub fn tfim_free_fermion_energy(n: usize, g: f64) -> f64 {
    -(0..n)
        .map(|m| {
            let k = std::f64::consts::PI * (2 * m + 1) as f64 / n as f64;
            (1.0 + g * g - 2.0 * g * k.cos()).sqrt()
        })
        .sum::<f64>()
}

// Binary state files.
//
// offset  size  field
//      0     8  magic b"VQCSTATE"
//      8     4  format version, u32 LE (= 1)
//     12     4  n_qubits, u32 LE
//     16     4  kind code, u32 LE: 0 haar, 1 local-random, 2 ti-local-random, 3 tfim-ground
//     20     8  kind parameter, f64 LE: d0 for circuit ensembles, g for tfim, 0 for haar
//     28     8  seed, u64 LE
//     36     4  state count, u32 LE
//     40     …  count × 2^n records of (re f64 LE, im f64 LE)

const MAGIC: &[u8; 8] = b"VQCSTATE";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateFileHeader {
    pub n_qubits: usize,
    pub kind: EnsembleKind,
    pub seed: Seed,
}

fn encode_kind(kind: EnsembleKind) -> (u32, f64) {
    match kind {
        EnsembleKind::Haar => (0, 0.0),
        EnsembleKind::LocalRandom { d0 } => (1, d0 as f64),
        EnsembleKind::TiLocalRandom { d0 } => (2, d0 as f64),
        EnsembleKind::TfimGround { g } => (3, g),
    }
}

fn decode_kind(code: u32, param: f64) -> Result<EnsembleKind> {
    let d0 = || {
        if param >= 0.0 && param.fract() == 0.0 {
            Ok(param as usize)
        } else {
            Err(Error::Format(format!("invalid depth parameter {param}")))
        }
    };
    Ok(match code {
        0 => EnsembleKind::Haar,
        1 => EnsembleKind::LocalRandom { d0: d0()? },
        2 => EnsembleKind::TiLocalRandom { d0: d0()? },
        3 => EnsembleKind::TfimGround { g: param },
        c => return Err(Error::Format(format!("unknown ensemble code {c}"))),
    })
}

pub fn write_states<W: Write>(mut w: W, header: &StateFileHeader, states: &[StateVector]) -> Result<()> {
    let (code, param) = encode_kind(header.kind);
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(header.n_qubits as u32).to_le_bytes())?;
    w.write_all(&code.to_le_bytes())?;
    w.write_all(&param.to_le_bytes())?;
    w.write_all(&header.seed.value().to_le_bytes())?;
    w.write_all(&(states.len() as u32).to_le_bytes())?;
    for s in states {
        if s.n_qubits() != header.n_qubits {
            return Err(Error::DimensionMismatch { expected: header.n_qubits, got: s.n_qubits() });
        }
        for a in s.amplitudes() {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_array<R: Read, const N: usize>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("truncated file".into()),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

pub fn read_states<R: Read>(mut r: R) -> Result<(StateFileHeader, Vec<StateVector>)> {
    if &read_array::<_, 8>(&mut r)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = u32::from_le_bytes(read_array(&mut r)?) as usize;
    if n == 0 || n > crate::statevec::MAX_QUBITS {
        return Err(Error::Format(format!("qubit count {n} out of range")));
    }
    let code = u32::from_le_bytes(read_array(&mut r)?);
    let param = f64::from_le_bytes(read_array(&mut r)?);
    let kind = decode_kind(code, param)?;
    let seed = Seed(u64::from_le_bytes(read_array(&mut r)?));
    let count = u32::from_le_bytes(read_array(&mut r)?) as usize;
    let mut states = Vec::with_capacity(count);
    for _ in 0..count {
        let amps = (0..1usize << n)
            .map(|_| {
                let re = f64::from_le_bytes(read_array(&mut r)?);
                let im = f64::from_le_bytes(read_array(&mut r)?);
                Ok(C64::new(re, im))
            })
            .collect::<Result<Vec<_>>>()?;
        states.push(StateVector::from_amplitudes(amps).map_err(|e| Error::Format(e.to_string()))?);
    }
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(Error::Format("trailing bytes after last record".into()));
    }
    Ok((StateFileHeader { n_qubits: n, kind, seed }, states))
}
