//! Binary discrimination of equal-prior pure states: the Helstrom limit, the
//! maximum-likelihood error after a circuit, the single-qubit baseline and
//! the two training costs.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_layout, Architecture, CircuitLayout};
use crate::error::{Error, Result};
use crate::optimize::{multi_restart_train, CircuitObjective, OptimizerConfig};
use crate::rng::Seed;
use crate::statevec::{inner, StateVector};
use crate::stats::MeanEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementMode {
    /// Every qubit measured, decision by maximum likelihood on the full string.
    FullMle,
    /// Only the given qubit measured in the Z basis.
    SingleQubit(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminationTask {
    pub psi0: StateVector,
    pub psi1: StateVector,
    pub mode: MeasurementMode,
}

impl DiscriminationTask {
    pub fn new(psi0: StateVector, psi1: StateVector, mode: MeasurementMode) -> Result<Self> {
        let n = psi0.n_qubits();
        if psi1.n_qubits() != n {
            return Err(Error::DimensionMismatch { expected: n, got: psi1.n_qubits() });
        }
        if let MeasurementMode::SingleQubit(q) = mode {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, n_qubits: n });
            }
        }
        Ok(DiscriminationTask { psi0, psi1, mode })
    }

    pub fn full(psi0: StateVector, psi1: StateVector) -> Result<Self> {
        Self::new(psi0, psi1, MeasurementMode::FullMle)
    }

    /// Single-qubit measurement on the central qubit `floor(n/2)`.
    pub fn central_qubit(psi0: StateVector, psi1: StateVector) -> Result<Self> {
        let q = psi0.n_qubits() / 2;
        Self::new(psi0, psi1, MeasurementMode::SingleQubit(q))
    }

    pub fn with_mode(&self, mode: MeasurementMode) -> Result<Self> {
        Self::new(self.psi0.clone(), self.psi1.clone(), mode)
    }

    pub fn n_qubits(&self) -> usize {
        self.psi0.n_qubits()
    }

    pub fn helstrom(&self) -> f64 {
        helstrom_from_fidelity(inner(self.psi0.amplitudes(), self.psi1.amplitudes()).norm_sqr())
    }
}

/// Outcome-to-hypothesis map; ties go to hypothesis 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionRule(pub Vec<u8>);

impl DecisionRule {
    pub fn from_likelihoods(q0: &[f64], q1: &[f64]) -> Self {
        DecisionRule(q0.iter().zip(q1).map(|(a, b)| u8::from(a < b)).collect())
    }

    pub fn decide(&self, outcome: usize) -> u8 {
        self.0[outcome]
    }

    /// Error probability of this rule for equal priors.
    pub fn error(&self, q0: &[f64], q1: &[f64]) -> f64 {
        let wrong: f64 = self
            .0
            .iter()
            .zip(q0.iter().zip(q1))
            .map(|(&d, (a, b))| if d == 0 { b } else { a })
            .sum();
        0.5 * wrong
    }
}

pub(crate) fn helstrom_from_fidelity(f: f64) -> f64 {
    (0.5 * (1.0 - (1.0 - f).max(0.0).sqrt())).clamp(0.0, 0.5)
}

/// `(1 - sqrt(1 - |<psi0|psi1>|^2)) / 2`.
pub fn helstrom_pure(psi0: &StateVector, psi1: &StateVector) -> Result<f64> {
    Ok(helstrom_from_fidelity(psi0.fidelity(psi1)?))
}

/// Maximum-likelihood error for two outcome distributions with equal priors.
pub fn mle_error_from_distributions(q0: &[f64], q1: &[f64]) -> f64 {
    let advantage: f64 = q0.iter().zip(q1).map(|(a, b)| (a - b).max(0.0)).sum();
    0.5 * (1.0 - advantage)
}

pub(crate) fn mle_error_from_amplitudes(a: &[C64], b: &[C64]) -> f64 {
    let advantage: f64 = a.iter().zip(b).map(|(x, y)| (x.norm_sqr() - y.norm_sqr()).max(0.0)).sum();
    0.5 * (1.0 - advantage)
}

pub(crate) fn single_qubit_error_from_amplitudes(a: &[C64], b: &[C64], n: usize, q: usize) -> f64 {
    let bit = 1usize << (n - 1 - q);
    let mut m = [[0.0f64; 2]; 2];
    for (j, (x, y)) in a.iter().zip(b).enumerate() {
        let k = usize::from(j & bit != 0);
        m[0][k] += x.norm_sqr();
        m[1][k] += y.norm_sqr();
    }
    mle_error_from_distributions(&m[0], &m[1])
}

pub(crate) fn error_from_outputs(mode: MeasurementMode, n: usize, out0: &[C64], out1: &[C64]) -> f64 {
    match mode {
        MeasurementMode::FullMle => mle_error_from_amplitudes(out0, out1),
        MeasurementMode::SingleQubit(q) => single_qubit_error_from_amplitudes(out0, out1, n, q),
    }
}

fn outputs(task: &DiscriminationTask, layout: &CircuitLayout, params: &[f64]) -> Result<(StateVector, StateVector)> {
    Ok((layout.apply(params, &task.psi0)?, layout.apply(params, &task.psi1)?))
}

/// MLE error after `U_D` with every qubit measured.
pub fn mle_error(task: &DiscriminationTask, layout: &CircuitLayout, params: &[f64]) -> Result<f64> {
    if task.mode != MeasurementMode::FullMle {
        return Err(Error::InvalidArgument("mle_error needs a full-measurement task".into()));
    }
    let (a, b) = outputs(task, layout, params)?;
    Ok(mle_error_from_amplitudes(a.amplitudes(), b.amplitudes()))
}

/// Error of the binary MLE rule applied to the marginal of one qubit.
pub fn single_qubit_error(task: &DiscriminationTask, layout: &CircuitLayout, params: &[f64]) -> Result<f64> {
    let MeasurementMode::SingleQubit(q) = task.mode else {
        return Err(Error::InvalidArgument("single_qubit_error needs a single-qubit task".into()));
    };
    let (a, b) = outputs(task, layout, params)?;
    Ok(single_qubit_error_from_amplitudes(a.amplitudes(), b.amplitudes(), task.n_qubits(), q))
}

/// Error probability in the task's own measurement mode.
pub fn error_probability(task: &DiscriminationTask, layout: &CircuitLayout, params: &[f64]) -> Result<f64> {
    let (a, b) = outputs(task, layout, params)?;
    Ok(error_from_outputs(task.mode, task.n_qubits(), a.amplitudes(), b.amplitudes()))
}

/// `P_E - P_H`.
pub fn cost_dis(task: &DiscriminationTask, layout: &CircuitLayout, params: &[f64]) -> Result<f64> {
    Ok(error_probability(task, layout, params)? - task.helstrom())
}

/// `1 - |<target|U_D|0...0>|^2`.
pub fn cost_gen(layout: &CircuitLayout, params: &[f64], target: &StateVector) -> Result<f64> {
    if target.n_qubits() != layout.n_qubits {
        return Err(Error::DimensionMismatch { expected: layout.n_qubits, got: target.n_qubits() });
    }
    let out = layout.apply(params, &StateVector::zero(layout.n_qubits)?)?;
    Ok(1.0 - target.fidelity(&out)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthPoint {
    pub depth: usize,
    pub error: MeanEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthScan {
    pub mean_helstrom: f64,
    pub threshold: f64,
    pub curve: Vec<DepthPoint>,
    /// `None` when the threshold was not reached by the deepest scanned depth.
    pub critical_depth: Option<usize>,
}

/// Below this ensemble-mean Helstrom limit the relative threshold is replaced
/// by [`ABSOLUTE_THRESHOLD`].
pub const DEGENERATE_HELSTROM: f64 = 1e-12;
pub const ABSOLUTE_THRESHOLD: f64 = 1e-6;

/// Smallest depth whose trained ensemble-mean error is at most
/// `multiplier * <P_H>`.
///
/// Depth 0 is the bare measurement. Each deeper scan point warm-starts one
/// restart per task from the previous depth's solution.
pub fn critical_depth(
    tasks: &[DiscriminationTask],
    arch: Architecture,
    max_depth: usize,
    multiplier: f64,
    config: &OptimizerConfig,
    seed: Seed,
) -> Result<DepthScan> {
    if tasks.is_empty() {
        return Err(Error::InvalidArgument("critical depth needs at least one task".into()));
    }
    if !arch.is_extensive() {
        return Err(Error::InvalidArgument(format!("critical depth needs an extensive architecture, got {arch}")));
    }
    let n = tasks[0].n_qubits();
    arch.check_size(n)?;
    let mean_helstrom = tasks.iter().map(DiscriminationTask::helstrom).sum::<f64>() / tasks.len() as f64;
    let threshold = if mean_helstrom < DEGENERATE_HELSTROM {
        ABSOLUTE_THRESHOLD
    } else {
        multiplier * mean_helstrom
    };

    let mut layout = CircuitLayout::identity(n);
    let mut solutions: Vec<Vec<f64>> = vec![Vec::new(); tasks.len()];
    let mut curve = Vec::new();
    for depth in 0..=max_depth {
        if depth > 0 {
            let deeper = build_layout(arch, n, depth)?;
            solutions = tasks
                .par_iter()
                .zip(solutions.par_iter())
                .enumerate()
                .map(|(t, (task, prev))| {
                    let objective = CircuitObjective::discrimination(task, &deeper)?;
                    let warm = deeper.embed_params(&layout, prev);
                    let result = multi_restart_train(
                        &objective,
                        config,
                        seed.path(&[depth as u64, t as u64]),
                        warm.as_deref(),
                    )?;
                    Ok(result.best_params)
                })
                .collect::<Result<Vec<_>>>()?;
            layout = deeper;
        }
        let errors = tasks
            .iter()
            .zip(&solutions)
            .map(|(task, p)| error_probability(task, &layout, p))
            .collect::<Result<Vec<_>>>()?;
        let error = MeanEstimate::from_samples(&errors);
        curve.push(DepthPoint { depth, error });
        if error.mean <= threshold {
            return Ok(DepthScan { mean_helstrom, threshold, curve, critical_depth: Some(depth) });
        }
    }
    Ok(DepthScan { mean_helstrom, threshold, curve, critical_depth: None })
}
