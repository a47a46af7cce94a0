//! Central finite-difference gradients, BFGS with a strong-Wolfe line search,
//! multi-restart training and gradient-variance statistics.

use std::f64::consts::TAU;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{CircuitLayout, GateSlot};
use crate::discriminate::{error_from_outputs, DiscriminationTask, MeasurementMode};
use crate::ensembles::{sample_pair, sample_state, EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};
use crate::rng::{stream, Seed};
use crate::statevec::{inner, PlacedGate, StateVector};

/// A scalar function of a parameter vector.
pub trait Objective: Sync {
    fn n_params(&self) -> usize;

    fn cost(&self, params: &[f64]) -> Result<f64>;

    fn gradient(&self, params: &[f64], step: f64) -> Result<Vec<f64>> {
        finite_diff_gradient(|p| self.cost(p), params, step)
    }
}

/// Wraps a closure as an [`Objective`].
pub struct FnObjective<F> {
    n_params: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(n_params: usize, f: F) -> Self {
        FnObjective { n_params, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn n_params(&self) -> usize {
        self.n_params
    }

    fn cost(&self, params: &[f64]) -> Result<f64> {
        Ok((self.f)(params))
    }
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {step}")))
    }
}

fn central_difference(index: usize, plus: Result<f64>, minus: Result<f64>, step: f64) -> Result<f64> {
    let wrap = |r: Result<f64>| match r {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(Error::CostEvaluation { index, reason: format!("non-finite cost {v}") }),
        Err(e) => Err(Error::CostEvaluation { index, reason: e.to_string() }),
    };
    Ok((wrap(plus)? - wrap(minus)?) / (2.0 * step))
}

/// `g_i = [f(θ + h e_i) - f(θ - h e_i)] / 2h`.
pub fn finite_diff_gradient<F>(mut f: F, params: &[f64], step: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    check_step(step)?;
    let mut x = params.to_vec();
    (0..params.len())
        .map(|i| {
            x[i] = params[i] + step;
            let plus = f(&x);
            x[i] = params[i] - step;
            let minus = f(&x);
            x[i] = params[i];
            central_difference(i, plus, minus, step)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostKind {
    Discrimination,
    Generation,
}

#[derive(Debug, Clone)]
enum Readout {
    Discrimination { mode: MeasurementMode, helstrom: f64 },
    Generation { target: Vec<C64> },
}

/// Training cost of a circuit layout: `C_dis` for a discrimination task or
/// `C_gen` for a target state.
///
/// Its gradient evaluates the same central differences as
/// [`finite_diff_gradient`] with bit-identical results, but reuses the state
/// prepared by the gates in front of the first slot a parameter touches.
#[derive(Debug, Clone)]
pub struct CircuitObjective {
    layout: CircuitLayout,
    inputs: Vec<Vec<C64>>,
    readout: Readout,
    /// For each slot, the parameters whose first use is that slot.
    first_use: Vec<Vec<usize>>,
    /// For each parameter, every slot reading it.
    users: Vec<Vec<usize>>,
}

impl CircuitObjective {
    fn build(layout: &CircuitLayout, inputs: Vec<Vec<C64>>, readout: Readout) -> Self {
        let slots: Vec<&GateSlot> = layout.slots().collect();
        let mut users = vec![Vec::new(); layout.n_params()];
        for (s, slot) in slots.iter().enumerate() {
            for p in slot.param_range() {
                users[p].push(s);
            }
        }
        let mut first_use = vec![Vec::new(); slots.len()];
        for (p, u) in users.iter().enumerate() {
            if let Some(&s) = u.first() {
                first_use[s].push(p);
            }
        }
        CircuitObjective { layout: layout.clone(), inputs, readout, first_use, users }
    }

    pub fn discrimination(task: &DiscriminationTask, layout: &CircuitLayout) -> Result<Self> {
        if task.n_qubits() != layout.n_qubits {
            return Err(Error::DimensionMismatch { expected: layout.n_qubits, got: task.n_qubits() });
        }
        let inputs = vec![task.psi0.amplitudes().to_vec(), task.psi1.amplitudes().to_vec()];
        Ok(Self::build(layout, inputs, Readout::Discrimination { mode: task.mode, helstrom: task.helstrom() }))
    }

    pub fn generation(target: &StateVector, layout: &CircuitLayout) -> Result<Self> {
        if target.n_qubits() != layout.n_qubits {
            return Err(Error::DimensionMismatch { expected: layout.n_qubits, got: target.n_qubits() });
        }
        let zero = StateVector::zero(layout.n_qubits)?.into_amplitudes();
        Ok(Self::build(layout, vec![zero], Readout::Generation { target: target.amplitudes().to_vec() }))
    }

    pub fn layout(&self) -> &CircuitLayout {
        &self.layout
    }

    fn readout(&self, outs: &[Vec<C64>]) -> f64 {
        match &self.readout {
            Readout::Discrimination { mode, helstrom } => {
                error_from_outputs(*mode, self.layout.n_qubits, &outs[0], &outs[1]) - helstrom
            }
            Readout::Generation { target } => 1.0 - inner(target, &outs[0]).norm_sqr(),
        }
    }
}

impl Objective for CircuitObjective {
    fn n_params(&self) -> usize {
        self.layout.n_params()
    }

    fn cost(&self, params: &[f64]) -> Result<f64> {
        let gates = self.layout.compile(params)?;
        let n = self.layout.n_qubits;
        let mut outs = self.inputs.clone();
        for o in outs.iter_mut() {
            gates.iter().for_each(|g| g.apply_raw(o, n));
        }
        Ok(self.readout(&outs))
    }

    fn gradient(&self, params: &[f64], step: f64) -> Result<Vec<f64>> {
        check_step(step)?;
        self.layout.check_params(params)?;
        let n = self.layout.n_qubits;
        let slots: Vec<&GateSlot> = self.layout.slots().collect();
        let gates = self.layout.compile_unchecked(params);
        let mut prefix = self.inputs.clone();
        let mut grad = vec![0.0; params.len()];
        let mut shifted = params.to_vec();
        let mut replaced: Vec<Option<PlacedGate>> = vec![None; slots.len()];
        for s in 0..slots.len() {
            for &i in &self.first_use[s] {
                let mut eval = |value: f64| {
                    shifted[i] = value;
                    for &u in &self.users[i] {
                        replaced[u] = Some(slots[u].compile(&shifted));
                    }
                    let mut outs = prefix.clone();
                    for o in outs.iter_mut() {
                        for t in s..slots.len() {
                            replaced[t].as_ref().unwrap_or(&gates[t]).apply_raw(o, n);
                        }
                    }
                    for &u in &self.users[i] {
                        replaced[u] = None;
                    }
                    Ok(self.readout(&outs))
                };
                let plus = eval(params[i] + step);
                let minus = eval(params[i] - step);
                shifted[i] = params[i];
                grad[i] = central_difference(i, plus, minus, step)?;
            }
            for o in prefix.iter_mut() {
                gates[s].apply_raw(o, n);
            }
        }
        Ok(grad)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub fd_step: f64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub cost_tolerance: f64,
    pub restarts: usize,
    pub c1: f64,
    pub c2: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            fd_step: 1e-6,
            max_iterations: 500,
            gradient_tolerance: 1e-8,
            cost_tolerance: 1e-12,
            restarts: 40,
            c1: 1e-4,
            c2: 0.9,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return bad(format!("fd_step must be positive, got {}", self.fd_step));
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1".into());
        }
        if !(0.0 < self.c1 && self.c1 < self.c2 && self.c2 < 1.0) {
            return bad(format!("need 0 < c1 < c2 < 1, got c1={} c2={}", self.c1, self.c2));
        }
        if self.gradient_tolerance < 0.0 || self.cost_tolerance < 0.0 {
            return bad("tolerances must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    GradientTolerance,
    CostTolerance,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub cost: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfgsResult {
    pub params: Vec<f64>,
    pub cost: f64,
    /// One entry per accepted iterate, starting with the initial point.
    pub history: Vec<IterationRecord>,
    pub iterations: usize,
    pub termination: Termination,
}

struct Point {
    x: DVector<f64>,
    f: f64,
    g: DVector<f64>,
}

struct Evaluator<'a, O: Objective + ?Sized> {
    objective: &'a O,
    step: f64,
}

impl<O: Objective + ?Sized> Evaluator<'_, O> {
    fn cost(&self, x: &DVector<f64>) -> Result<f64> {
        self.objective.cost(x.as_slice())
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(self.objective.gradient(x.as_slice(), self.step)?))
    }
}

const MAX_BRACKET: usize = 25;
const MAX_ZOOM: usize = 30;
const MAX_STEP: f64 = 1e4;

/// Strong-Wolfe line search (bracketing followed by zoom). Gradients are only
/// evaluated at trial points that pass the sufficient-decrease test. Returns
/// `None` when neither a Wolfe point nor any sufficient-decrease point is found.
fn line_search<O: Objective + ?Sized>(
    ev: &Evaluator<O>,
    start: &Point,
    p: &DVector<f64>,
    c1: f64,
    c2: f64,
) -> Result<Option<Point>> {
    let dphi0 = start.g.dot(p);
    let at = |a: f64| &start.x + p * a;
    let armijo = |a: f64, f: f64| f.is_finite() && f <= start.f + c1 * a * dphi0;
    // Best sufficient-decrease point seen so far, as the fallback.
    let mut best: Option<Point> = None;
    fn keep(pt: Point, best: &mut Option<Point>) {
        if best.as_ref().is_none_or(|b| pt.f < b.f) {
            *best = Some(pt);
        }
    }

    let (mut a_prev, mut f_prev, mut d_prev) = (0.0, start.f, dphi0);
    let mut a = 1.0;
    let mut bracket = None;
    for i in 0..MAX_BRACKET {
        let x = at(a);
        let f = ev.cost(&x)?;
        if !armijo(a, f) || (i > 0 && f >= f_prev) {
            bracket = Some((a_prev, f_prev, d_prev, a, f));
            break;
        }
        let g = ev.gradient(&x)?;
        let d = g.dot(p);
        if d.abs() <= -c2 * dphi0 {
            return Ok(Some(Point { x, f, g }));
        }
        let pt = Point { x, f, g };
        if d >= 0.0 {
            keep(pt, &mut best);
            bracket = Some((a, f, d, a_prev, f_prev));
            break;
        }
        keep(pt, &mut best);
        (a_prev, f_prev, d_prev) = (a, f, d);
        if a >= MAX_STEP {
            break;
        }
        a = (2.0 * a).min(MAX_STEP);
    }

    if let Some((mut lo, mut f_lo, mut d_lo, mut hi, mut f_hi)) = bracket {
        for _ in 0..MAX_ZOOM {
            let width = hi - lo;
            if width.abs() < 1e-14 * lo.abs().max(1.0) {
                break;
            }
            // Minimizer of the quadratic through (lo, f_lo, d_lo) and (hi, f_hi),
            // safeguarded towards bisection.
            let denom = 2.0 * (f_hi - f_lo - d_lo * width);
            let mut a_j = if denom > 0.0 && f_hi.is_finite() {
                lo - d_lo * width * width / denom
            } else {
                lo + 0.5 * width
            };
            let (min, max) = (lo.min(hi), lo.max(hi));
            let margin = 0.1 * (max - min);
            if !(a_j > min + margin && a_j < max - margin) {
                a_j = lo + 0.5 * width;
            }
            let x = at(a_j);
            let f = ev.cost(&x)?;
            if !armijo(a_j, f) || f >= f_lo {
                (hi, f_hi) = (a_j, f);
                continue;
            }
            let g = ev.gradient(&x)?;
            let d = g.dot(p);
            if d.abs() <= -c2 * dphi0 {
                return Ok(Some(Point { x, f, g }));
            }
            if d * (hi - lo) >= 0.0 {
                (hi, f_hi) = (lo, f_lo);
            }
            (lo, f_lo, d_lo) = (a_j, f, d);
            keep(Point { x, f, g }, &mut best);
        }
    }
    Ok(best.filter(|b| b.f < start.f))
}

/// BFGS on the inverse Hessian with a strong-Wolfe line search.
///
/// A failed line search resets the inverse Hessian to the identity once per
/// run; a second failure ends the run with [`Termination::LineSearchFailed`]
/// and returns the best iterate.
pub fn bfgs_minimize<O: Objective + ?Sized>(objective: &O, init: &[f64], config: &OptimizerConfig) -> Result<BfgsResult> {
    config.validate()?;
    if init.len() != objective.n_params() {
        return Err(Error::DimensionMismatch { expected: objective.n_params(), got: init.len() });
    }
    let ev = Evaluator { objective, step: config.fd_step };
    let dim = init.len();
    let x = DVector::from_column_slice(init);
    let f = ev.cost(&x)?;
    if !f.is_finite() {
        return Err(Error::InvalidArgument(format!("initial cost is not finite: {f}")));
    }
    let g = ev.gradient(&x)?;
    let mut cur = Point { x, f, g };
    let mut history = vec![IterationRecord { cost: cur.f, grad_norm: cur.g.norm() }];
    let mut h = DMatrix::<f64>::identity(dim, dim);
    let mut fresh = true;
    let mut reset_used = false;
    let mut iterations = 0;
    let termination = loop {
        if cur.g.norm() <= config.gradient_tolerance {
            break Termination::GradientTolerance;
        }
        if iterations >= config.max_iterations {
            break Termination::MaxIterations;
        }
        let mut p = -(&h * &cur.g);
        if p.dot(&cur.g) >= 0.0 {
            h.fill_with_identity();
            fresh = true;
            p = -cur.g.clone();
        }
        let Some(next) = line_search(&ev, &cur, &p, config.c1, config.c2)? else {
            if reset_used || fresh {
                break Termination::LineSearchFailed;
            }
            reset_used = true;
            h.fill_with_identity();
            fresh = true;
            continue;
        };
        let s = &next.x - &cur.x;
        let y = &next.g - &cur.g;
        let sy = s.dot(&y);
        if sy > 1e-14 * s.norm() * y.norm() {
            if fresh {
                h.fill_with_identity();
                h *= sy / y.dot(&y);
                fresh = false;
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H' = H - ρ(s (Hy)ᵀ + (Hy) sᵀ) + (ρ² yᵀHy + ρ) s sᵀ
            h.ger(-rho, &s, &hy, 1.0);
            h.ger(-rho, &hy, &s, 1.0);
            h.ger(rho * rho * yhy + rho, &s, &s, 1.0);
        }
        let decrease = cur.f - next.f;
        cur = next;
        iterations += 1;
        history.push(IterationRecord { cost: cur.f, grad_norm: cur.g.norm() });
        if decrease < config.cost_tolerance {
            break Termination::CostTolerance;
        }
    };
    Ok(BfgsResult {
        params: cur.x.as_slice().to_vec(),
        cost: cur.f,
        history,
        iterations,
        termination,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub restart: usize,
    pub seed: Seed,
    pub warm_start: bool,
    /// `None` when the run failed; see `error`.
    pub final_cost: Option<f64>,
    pub iterations: usize,
    pub termination: Option<Termination>,
    pub error: Option<String>,
    pub history: Vec<IterationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub best_params: Vec<f64>,
    pub best_cost: f64,
    pub best_restart: usize,
    pub per_restart: Vec<RestartRecord>,
    /// Accepted-iterate costs of the winning restart.
    pub cost_history: Vec<f64>,
}

/// Uniform `[0, 2π)` initial point for restart `r`.
pub fn initial_params(n_params: usize, seed: Seed) -> Vec<f64> {
    let mut rng = seed.rng();
    (0..n_params).map(|_| rng.random_range(0.0..TAU)).collect()
}

/// Independent BFGS runs from random initial points; the lowest final cost
/// wins, ties going to the lower restart index.
///
/// Restart `r` draws its initial point from `seed / RESTARTS / r`. A
/// `warm_start` replaces restart 0's initial point.
pub fn multi_restart_train<O: Objective + ?Sized>(
    objective: &O,
    config: &OptimizerConfig,
    seed: Seed,
    warm_start: Option<&[f64]>,
) -> Result<TrainResult> {
    config.validate()?;
    let n_params = objective.n_params();
    if let Some(w) = warm_start {
        if w.len() != n_params {
            return Err(Error::DimensionMismatch { expected: n_params, got: w.len() });
        }
    }
    let base = seed.child(stream::RESTARTS);
    let runs: Vec<(RestartRecord, Option<Vec<f64>>)> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let rseed = base.child(r as u64);
            let warm = r == 0 && warm_start.is_some();
            let init = match warm_start {
                Some(w) if warm => w.to_vec(),
                _ => initial_params(n_params, rseed),
            };
            match bfgs_minimize(objective, &init, config) {
                Ok(res) => (
                    RestartRecord {
                        restart: r,
                        seed: rseed,
                        warm_start: warm,
                        final_cost: Some(res.cost),
                        iterations: res.iterations,
                        termination: Some(res.termination),
                        error: None,
                        history: res.history,
                    },
                    Some(res.params),
                ),
                Err(e) => (
                    RestartRecord {
                        restart: r,
                        seed: rseed,
                        warm_start: warm,
                        final_cost: None,
                        iterations: 0,
                        termination: None,
                        error: Some(e.to_string()),
                        history: Vec::new(),
                    },
                    None,
                ),
            }
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for (r, (rec, _)) in runs.iter().enumerate() {
        if let Some(c) = rec.final_cost {
            if best.is_none_or(|(_, b)| c < b) {
                best = Some((r, c));
            }
        }
    }
    let (best_restart, best_cost) = best.ok_or(Error::AllRestartsFailed(config.restarts))?;
    let (per_restart, params): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    let best_params = params.into_iter().nth(best_restart).flatten().expect("winning restart has parameters");
    let cost_history = per_restart[best_restart].history.iter().map(|h| h.cost).collect();
    Ok(TrainResult { best_params, best_cost, best_restart, per_restart, cost_history })
}

/// Writes every restart's accepted iterates as CSV with header
/// `restart,iteration,cost,grad_norm`.
pub fn write_trace_csv<W: Write>(w: W, result: &TrainResult) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["restart", "iteration", "cost", "grad_norm"]).map_err(csv_error)?;
    for rec in &result.per_restart {
        for (it, h) in rec.history.iter().enumerate() {
            out.serialize((rec.restart, it, h.cost, h.grad_norm)).map_err(csv_error)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("{other:?}")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientVariance {
    /// `<Var(g_i)>_i`.
    pub mean_variance: f64,
    pub bootstrap_std_err: f64,
    pub per_coordinate: Vec<f64>,
    pub rows: usize,
}

pub const BOOTSTRAP_RESAMPLES: usize = 200;

fn mean_column_variance(rows: &[&Vec<f64>], dim: usize) -> (f64, Vec<f64>) {
    let m = rows.len() as f64;
    let per: Vec<f64> = (0..dim)
        .map(|i| {
            let mean = rows.iter().map(|r| r[i]).sum::<f64>() / m;
            rows.iter().map(|r| (r[i] - mean).powi(2)).sum::<f64>() / (m - 1.0)
        })
        .collect();
    (per.iter().sum::<f64>() / dim.max(1) as f64, per)
}

/// Gradient variance over tasks and uniformly drawn parameter points.
///
/// Each objective is evaluated at `n_param_samples` points drawn from
/// `seed / PARAM_SAMPLES / task / sample`. `Var(g_i)` is the unbiased
/// variance of coordinate `i` over all rows; the standard error comes from
/// resampling rows.
pub fn gradient_variance_of<O: Objective>(
    objectives: &[O],
    n_param_samples: usize,
    step: f64,
    seed: Seed,
) -> Result<GradientVariance> {
    check_step(step)?;
    let rows_wanted = objectives.len() * n_param_samples;
    if rows_wanted < 2 {
        return Err(Error::InvalidArgument("gradient variance needs at least two samples".into()));
    }
    let dim = objectives[0].n_params();
    if objectives.iter().any(|o| o.n_params() != dim) {
        return Err(Error::InvalidArgument("objectives disagree on parameter count".into()));
    }
    let base = seed.child(stream::PARAM_SAMPLES);
    let rows: Vec<Vec<f64>> = (0..rows_wanted)
        .into_par_iter()
        .map(|k| {
            let (t, s) = (k / n_param_samples, k % n_param_samples);
            let x = initial_params(dim, base.path(&[t as u64, s as u64]));
            objectives[t].gradient(&x, step)
        })
        .collect::<Result<_>>()?;
    let all: Vec<&Vec<f64>> = rows.iter().collect();
    let (mean_variance, per_coordinate) = mean_column_variance(&all, dim);
    let mut rng = seed.child(stream::BOOTSTRAP).rng();
    let boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let sample: Vec<&Vec<f64>> = (0..rows.len()).map(|_| &rows[rng.random_range(0..rows.len())]).collect();
            mean_column_variance(&sample, dim).0
        })
        .collect();
    Ok(GradientVariance {
        mean_variance,
        bootstrap_std_err: crate::stats::variance(&boot).sqrt(),
        per_coordinate,
        rows: rows.len(),
    })
}

/// [`gradient_variance_of`] for tasks drawn from an ensemble. Discrimination
/// tasks are the pairs of [`sample_pair`]; a generation target is the first
/// state of the pair with the same index.
pub fn gradient_variance(
    ensemble: EnsembleKind,
    layout: &CircuitLayout,
    cost: CostKind,
    n_tasks: usize,
    n_param_samples: usize,
    step: f64,
    seed: Seed,
) -> Result<GradientVariance> {
    let n = layout.n_qubits;
    let objectives = (0..n_tasks as u64)
        .map(|t| match cost {
            CostKind::Discrimination => {
                let (a, b) = sample_pair(ensemble, n, seed, t)?;
                CircuitObjective::discrimination(&DiscriminationTask::full(a, b)?, layout)
            }
            CostKind::Generation => {
                let target = sample_state(&EnsembleSpec::new(ensemble, n, seed.path(&[stream::STATES, t]).child(0)))?;
                CircuitObjective::generation(&target, layout)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    gradient_variance_of(&objectives, n_param_samples, step, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build_layout, Architecture};

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn fd_examples() {
        let g = finite_diff_gradient(|x| Ok(x.iter().map(|v| v * v).sum()), &[1.0, 2.0], 1e-6).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-6 && (g[1] - 4.0).abs() < 1e-6);
        let g = finite_diff_gradient(|_| Ok(3.0), &[0.1, 0.2, 0.3], 1e-6).unwrap();
        assert_eq!(g, vec![0.0; 3]);
        assert!(finite_diff_gradient(|_| Ok(0.0), &[0.0], 0.0).is_err());
    }

    #[test]
    fn fd_reports_offending_index() {
        let err = finite_diff_gradient(|x| Ok(if x[1] > 1.0 { f64::NAN } else { 0.0 }), &[0.0, 1.0], 1e-3).unwrap_err();
        assert!(matches!(err, Error::CostEvaluation { index: 1, .. }), "{err}");
    }

    #[test]
    fn rosenbrock_converges() {
        let obj = FnObjective::new(2, rosenbrock);
        let res = bfgs_minimize(&obj, &[-1.2, 1.0], &OptimizerConfig::default()).unwrap();
        assert!((res.params[0] - 1.0).abs() < 1e-5 && (res.params[1] - 1.0).abs() < 1e-5, "{res:?}");
        assert!(res.history.windows(2).all(|w| w[1].cost <= w[0].cost));
    }

    #[test]
    fn convex_quadratic() {
        let a = [
            [4.0, 1.0, 0.0, 0.5, 0.0],
            [1.0, 3.0, 0.2, 0.0, 0.0],
            [0.0, 0.2, 2.0, 0.1, 0.0],
            [0.5, 0.0, 0.1, 5.0, 1.0],
            [0.0, 0.0, 0.0, 1.0, 1.5],
        ];
        let obj = FnObjective::new(5, move |x: &[f64]| {
            (0..5).map(|i| (0..5).map(|j| x[i] * a[i][j] * x[j]).sum::<f64>()).sum()
        });
        let res = bfgs_minimize(&obj, &[1.0, -2.0, 0.5, 3.0, -1.0], &OptimizerConfig::default()).unwrap();
        assert!(res.cost < 1e-8, "{res:?}");
        assert!(res.iterations <= 50);
    }

    #[test]
    fn config_validation() {
        let mut c = OptimizerConfig::default();
        assert!(c.validate().is_ok());
        c.c2 = 1e-5;
        assert!(c.validate().is_err());
        let c = OptimizerConfig { restarts: 0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = OptimizerConfig { fd_step: -1.0, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn cached_gradient_is_bit_identical() {
        for arch in [Architecture::BrickwallOpen, Architecture::BrickwallTi, Architecture::Svqc, Architecture::Qcnn] {
            let layout = build_layout(arch, 4, 2).unwrap();
            let (a, b) = sample_pair(EnsembleKind::Haar, 4, Seed(3), 0).unwrap();
            let objective = CircuitObjective::discrimination(&DiscriminationTask::full(a.clone(), b).unwrap(), &layout).unwrap();
            let x = initial_params(layout.n_params(), Seed(11));
            let naive = finite_diff_gradient(|p| objective.cost(p), &x, 1e-6).unwrap();
            assert_eq!(objective.gradient(&x, 1e-6).unwrap(), naive, "{arch}");
            let gen = CircuitObjective::generation(&a, &layout).unwrap();
            let naive = finite_diff_gradient(|p| gen.cost(p), &x, 1e-6).unwrap();
            assert_eq!(gen.gradient(&x, 1e-6).unwrap(), naive, "{arch}");
        }
    }

    #[test]
    fn objective_matches_library_costs() {
        let layout = build_layout(Architecture::BrickwallOpen, 4, 2).unwrap();
        let (a, b) = sample_pair(EnsembleKind::Haar, 4, Seed(8), 0).unwrap();
        let task = DiscriminationTask::central_qubit(a.clone(), b).unwrap();
        let x = initial_params(layout.n_params(), Seed(2));
        let obj = CircuitObjective::discrimination(&task, &layout).unwrap();
        assert_eq!(obj.cost(&x).unwrap(), crate::discriminate::cost_dis(&task, &layout, &x).unwrap());
        let obj = CircuitObjective::generation(&a, &layout).unwrap();
        assert!((obj.cost(&x).unwrap() - crate::discriminate::cost_gen(&layout, &x, &a).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn orthogonal_pair_trains_to_zero() {
        let layout = build_layout(Architecture::BrickwallOpen, 2, 1).unwrap();
        let (a, _) = sample_pair(EnsembleKind::Haar, 2, Seed(5), 0).unwrap();
        // Any state orthogonal to a: swap and conjugate two amplitudes.
        let v = a.amplitudes();
        let b = StateVector::normalized(vec![-v[1].conj(), v[0].conj(), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let b = {
            let ov = b.inner_product(&a).unwrap();
            let amps: Vec<C64> = b.amplitudes().iter().zip(v).map(|(x, y)| x - ov * y).collect();
            StateVector::normalized(amps).unwrap()
        };
        let task = DiscriminationTask::full(a, b).unwrap();
        assert!(task.helstrom() < 1e-12);
        let obj = CircuitObjective::discrimination(&task, &layout).unwrap();
        let config = OptimizerConfig { restarts: 4, ..Default::default() };
        let res = multi_restart_train(&obj, &config, Seed(1), None).unwrap();
        assert!(res.best_cost < 1e-6, "{}", res.best_cost);
        assert_eq!(res.best_cost, res.per_restart.iter().filter_map(|r| r.final_cost).fold(f64::INFINITY, f64::min));
        assert_eq!(res, multi_restart_train(&obj, &config, Seed(1), None).unwrap());
    }

    #[test]
    fn warm_start_and_trace() {
        let obj = FnObjective::new(2, rosenbrock);
        let config = OptimizerConfig { restarts: 3, ..Default::default() };
        let res = multi_restart_train(&obj, &config, Seed(9), Some(&[1.0, 1.0])).unwrap();
        assert!(res.per_restart[0].warm_start);
        assert_eq!(res.per_restart[0].final_cost, Some(0.0));
        assert_eq!(res.best_restart, 0);
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &res).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("restart,iteration,cost,grad_norm\n0,0,0.0,"));
        let rows = res.per_restart.iter().map(|r| r.history.len()).sum::<usize>();
        assert_eq!(text.lines().count(), rows + 1);
        assert!(multi_restart_train(&obj, &config, Seed(9), Some(&[1.0])).is_err());
    }

    #[test]
    fn failed_restarts_are_recorded() {
        let obj = FnObjective::new(1, |x: &[f64]| if x[0] > 3.0 { f64::NAN } else { (x[0] - 1.0).powi(2) });
        let config = OptimizerConfig { restarts: 8, ..Default::default() };
        let res = multi_restart_train(&obj, &config, Seed(2), None).unwrap();
        assert!(res.per_restart.iter().any(|r| r.error.is_some()));
        assert!(res.best_cost < 1e-10);
        let always_nan = FnObjective::new(1, |_: &[f64]| f64::NAN);
        assert!(matches!(multi_restart_train(&always_nan, &config, Seed(2), None), Err(Error::AllRestartsFailed(8))));
    }

    #[test]
    fn constant_cost_has_no_variance() {
        fn one(_: &[f64]) -> f64 {
            1.0
        }
        let objs = vec![FnObjective::new(3, one), FnObjective::new(3, one)];
        let v = gradient_variance_of(&objs, 4, 1e-6, Seed(0)).unwrap();
        assert_eq!(v.mean_variance, 0.0);
        assert_eq!(v.bootstrap_std_err, 0.0);
        assert_eq!(v.rows, 8);
        assert!(gradient_variance_of(&objs[..1], 1, 1e-6, Seed(0)).is_err());
    }

    #[test]
    fn variance_of_known_gradient() {
        // f = sin(x0): g0 = cos(x0), x0 uniform on [0, 2π) gives Var = 1/2.
        let objs = vec![FnObjective::new(1, |x: &[f64]| x[0].sin())];
        let v = gradient_variance_of(&objs, 4000, 1e-6, Seed(6)).unwrap();
        assert!((v.mean_variance - 0.5).abs() < 4.0 * v.bootstrap_std_err, "{v:?}");
        assert!(v.bootstrap_std_err < 0.02);
    }
}
