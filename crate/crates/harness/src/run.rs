//! Experiment execution: independent work units on a worker pool, merged in
//! unit order so results do not depend on the worker count.
//!
//! Seed layout under the master seed `s`:
//! * input pair `i`: `s / STATES / i` (see `sample_pair`), shared by every
//!   experiment, depth and architecture;
//! * training of task `t` at depth `D`:
//!   `s / RESTARTS / n / ensemble point / arch index / t / D`, then the
//!   library's per-restart split.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use vqc_core::ansatz::{build_layout, Architecture, CircuitLayout};
use vqc_core::discriminate::{critical_depth, error_probability, DiscriminationTask, MeasurementMode};
use vqc_core::ensembles::{tfim_free_fermion_energy, tfim_ground, EnsembleKind};
use vqc_core::optimize::{gradient_variance, multi_restart_train, CircuitObjective, CostKind, Objective, OptimizerConfig};
use vqc_core::rng::{stream, Seed};
use vqc_core::scramble::avg_operator_size;
use vqc_core::statevec::StateVector;
use vqc_core::stats::MeanEstimate;

use crate::cache::load_pairs;
use crate::config::{EnsemblePoint, ExperimentConfig, ExperimentKind, Measurement};
use crate::error::{HarnessError, Result};
use crate::manifest::Manifest;
use crate::output::{write_csv, ResultRow};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "VQC_WORKERS";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Write the leading timestamp comment line.
    pub timestamp: bool,
    /// Print per-unit progress on stderr.
    pub progress: bool,
}

type UnitFn<'a> = Box<dyn Fn() -> vqc_core::Result<Vec<f64>> + Send + Sync + 'a>;

struct Unit<'a> {
    id: String,
    work: UnitFn<'a>,
}

impl<'a> Unit<'a> {
    fn new(id: String, work: impl Fn() -> vqc_core::Result<Vec<f64>> + Send + Sync + 'a) -> Self {
        Unit { id, work: Box::new(work) }
    }
}

struct Context<'c> {
    config: &'c ExperimentConfig,
    manifest: Option<Manifest>,
    progress: bool,
}

impl Context<'_> {
    fn run_units(&self, units: &[Unit<'_>]) -> Result<Vec<Vec<f64>>> {
        let total = units.len();
        let results: Vec<Result<Vec<f64>>> = units
            .par_iter()
            .enumerate()
            .map(|(k, unit)| {
                if let Some(v) = self.manifest.as_ref().and_then(|m| m.completed(k, &unit.id)) {
                    return Ok(v);
                }
                let values = (unit.work)()
                    .map_err(|e| HarnessError::Runtime(format!("unit {k} ({}) failed: {e}", unit.id)))?;
                if let Some(m) = &self.manifest {
                    m.record(k, &unit.id, &values)?;
                }
                if self.progress {
                    eprintln!("unit {}/{total} done: {}", k + 1, unit.id);
                }
                Ok(values)
            })
            .collect();
        results.into_iter().collect()
    }

    fn row(&self, arch: Option<Architecture>, point: Option<&EnsemblePoint>, n: usize) -> RowBuilder {
        RowBuilder {
            base: ResultRow {
                experiment: self.config.experiment.name().to_string(),
                arch: arch.map_or(String::new(), |a| a.name().to_string()),
                ensemble: point.map_or(String::new(), EnsemblePoint::label),
                n,
                depth: None,
                d_star: None,
                d0_or_g: point.map_or(String::new(), EnsemblePoint::parameter),
                seed: self.config.seed,
                metric: String::new(),
                value: f64::NAN,
                std_err: None,
                samples: 0,
                version: vqc_core::VERSION.to_string(),
            },
        }
    }
}

#[derive(Clone)]
struct RowBuilder {
    base: ResultRow,
}

impl RowBuilder {
    fn at_depth(&self, layout: &CircuitLayout) -> RowBuilder {
        let mut b = self.clone();
        b.base.depth = Some(layout.depth);
        b.base.d_star = Some(layout.entangler_layers);
        b
    }

    fn value(&self, metric: &str, value: f64, samples: usize) -> ResultRow {
        ResultRow { metric: metric.to_string(), value, samples, ..self.base.clone() }
    }

    fn estimate(&self, metric: &str, est: &MeanEstimate) -> ResultRow {
        ResultRow { metric: metric.to_string(), value: est.mean, std_err: Some(est.std_err), samples: est.samples, ..self.base.clone() }
    }
}

fn estimate(xs: impl IntoIterator<Item = f64>) -> MeanEstimate {
    MeanEstimate::from_samples(&xs.into_iter().collect::<Vec<_>>())
}

/// Runs an experiment and writes its CSV to the configured output (or
/// stdout). Returns the rows.
pub fn run(config: &ExperimentConfig, options: &RunOptions) -> Result<Vec<ResultRow>> {
    let workers = config.workers.or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()));
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| HarnessError::Runtime(format!("worker pool: {e}")))?;

    let manifest = match &config.output {
        Some(out) => Some(Manifest::open(&manifest_path(out), &config.fingerprint())?),
        None => None,
    };
    if let Some(m) = &manifest {
        if m.completed_count() > 0 && options.progress {
            eprintln!("resuming: {} units already complete", m.completed_count());
        }
    }
    let ctx = Context { config, manifest, progress: options.progress };
    let rows = pool.install(|| match config.experiment {
        ExperimentKind::Discriminate | ExperimentKind::ArchBench => discriminate(&ctx),
        ExperimentKind::Generate => generate(&ctx),
        ExperimentKind::Gradvar => gradvar(&ctx),
        ExperimentKind::Opsize => opsize(&ctx),
        ExperimentKind::HelstromStats => helstrom_stats(&ctx),
        ExperimentKind::DcScan => dc_scan(&ctx),
        ExperimentKind::Tfim => tfim(&ctx),
    })?;

    let timestamp = options
        .timestamp
        .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    match &config.output {
        Some(out) => {
            let io = |e| HarnessError::io(format!("output {}", out.display()), e);
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(io)?;
            }
            let tmp = out.with_extension("csv.tmp");
            write_csv(BufWriter::new(File::create(&tmp).map_err(io)?), &rows, timestamp.as_deref())?;
            std::fs::rename(&tmp, out).map_err(io)?;
        }
        None => write_csv(std::io::stdout().lock(), &rows, timestamp.as_deref())?,
    }
    if let Some(m) = ctx.manifest {
        m.finish()?;
    }
    Ok(rows)
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

fn mode(config: &ExperimentConfig, n: usize) -> MeasurementMode {
    match config.measurement {
        Measurement::Full => MeasurementMode::FullMle,
        Measurement::SingleQubit => MeasurementMode::SingleQubit(n / 2),
    }
}

fn input_pairs(ctx: &Context<'_>, n: usize, point: &EnsemblePoint) -> Result<Vec<(StateVector, StateVector)>> {
    let c = ctx.config;
    match *point {
        EnsemblePoint::Random(kind) => load_pairs(c.cache_dir.as_deref(), kind, n, c.seed, c.pairs),
        EnsemblePoint::TfimPair(g0, g1) => {
            let ground = |g| {
                tfim_ground(n, g)
                    .map(|s| s.ground)
                    .map_err(|e| HarnessError::Runtime(format!("TFIM ground state n={n} g={g}: {e}")))
            };
            Ok(vec![(ground(g0)?, ground(g1)?)])
        }
    }
}

fn tasks(ctx: &Context<'_>, n: usize, point: &EnsemblePoint) -> Result<Vec<DiscriminationTask>> {
    input_pairs(ctx, n, point)?
        .into_iter()
        .map(|(a, b)| DiscriminationTask::new(a, b, mode(ctx.config, n)))
        .collect::<vqc_core::Result<_>>()
        .map_err(|e| HarnessError::Runtime(format!("building tasks: {e}")))
}

fn train_seed(config: &ExperimentConfig, n: usize, point: usize, arch: usize, task: usize, depth: usize) -> Seed {
    Seed(config.seed).path(&[stream::RESTARTS, n as u64, point as u64, arch as u64, task as u64, depth as u64])
}

/// Trains one objective per depth in ascending order, seeding one restart
/// with the embedded solution of the previous depth. Returns the best
/// parameters per depth.
fn depth_sweep<O: Objective>(
    layouts: &[CircuitLayout],
    objective: impl Fn(&CircuitLayout) -> vqc_core::Result<O>,
    optimizer: &OptimizerConfig,
    seed: impl Fn(usize) -> Seed,
) -> vqc_core::Result<Vec<Vec<f64>>> {
    let mut solutions: Vec<Vec<f64>> = Vec::new();
    for (i, layout) in layouts.iter().enumerate() {
        let obj = objective(layout)?;
        let params = if layout.n_params() == 0 {
            Vec::new()
        } else {
            let warm = i.checked_sub(1).and_then(|j| layout.embed_params(&layouts[j], &solutions[j]));
            multi_restart_train(&obj, optimizer, seed(layout.depth), warm.as_deref())?.best_params
        };
        solutions.push(params);
    }
    Ok(solutions)
}

fn layouts(arch: Architecture, n: usize, depths: &[usize]) -> Result<Vec<CircuitLayout>> {
    depths
        .iter()
        .map(|&d| build_layout(arch, n, d).map_err(|e| HarnessError::from_validation(format!("{arch} n={n} D={d}"), e)))
        .collect()
}

/// Discrimination depth sweeps; with several architectures this is the
/// architecture benchmark.
fn discriminate(ctx: &Context<'_>) -> Result<Vec<ResultRow>> {
    let c = ctx.config;
    struct Group {
        n: usize,
        p: usize,
        a: usize,
        tasks: Vec<DiscriminationTask>,
        layouts: Vec<CircuitLayout>,
    }
    let mut groups = Vec::new();
    for &n in &c.ns {
        for (p, point) in c.points.iter().enumerate() {
            let tasks = tasks(ctx, n, point)?;
            for (a, &arch) in c.archs.iter().enumerate() {
                groups.push(Group { n, p, a, tasks: tasks.clone(), layouts: layouts(arch, n, &c.depths)? });
            }
        }
    }
    let units: Vec<Unit<'_>> = groups
        .iter()
        .flat_map(|g| {
            g.tasks.iter().enumerate().map(move |(t, task)| {
                let id = format!("n={} ensemble={} arch={} task={t}", g.n, c.points[g.p].parameter(), c.archs[g.a]);
                Unit::new(id, move || {
                    let sols = depth_sweep(
                        &g.layouts,
                        |l| CircuitObjective::discrimination(task, l),
                        &c.optimizer,
                        |d| train_seed(c, g.n, g.p, g.a, t, d),
                    )?;
                    let mut out = Vec::new();
                    for (layout, params) in g.layouts.iter().zip(&sols) {
                        let pe = error_probability(task, layout, params)?;
                        out.extend([pe, pe - task.helstrom(), task.helstrom()]);
                    }
                    Ok(out)
                })
            })
        })
        .collect();
    let results = ctx.run_units(&units)?;

    let mut rows = Vec::new();
    let mut offset = 0;
    for g in &groups {
        let res = &results[offset..offset + g.tasks.len()];
        offset += g.tasks.len();
        let base = ctx.row(Some(c.archs[g.a]), Some(&c.points[g.p]), g.n);
        for (i, layout) in g.layouts.iter().enumerate() {
            let b = base.at_depth(layout);
            let col = |k: usize| estimate(res.iter().map(|r| r[3 * i + k]));
            rows.push(b.estimate("mean_pe", &col(0)));
            rows.push(b.estimate("mean_cost_dis", &col(1)));
            rows.push(b.estimate("mean_helstrom", &col(2)));
            rows.push(b.value("n_params", layout.n_params() as f64, 1));
        }
    }
    Ok(rows)
}

fn generate(ctx: &Context<'_>) -> Result<Vec<ResultRow>> {
    let c = ctx.config;
    let arch = c.archs[0];
    let mut groups = Vec::new();
    for &n in &c.ns {
        for (p, point) in c.points.iter().enumerate() {
            let targets: Vec<StateVector> = match point {
                EnsemblePoint::TfimPair(..) => input_pairs(ctx, n, point)?.into_iter().flat_map(|(a, b)| [a, b]).collect(),
                EnsemblePoint::Random(_) => input_pairs(ctx, n, point)?.into_iter().map(|(a, _)| a).collect(),
            };
            groups.push((n, p, targets, layouts(arch, n, &c.depths)?));
        }
    }
    let units: Vec<Unit<'_>> = groups
        .iter()
        .flat_map(|(n, p, targets, layouts)| {
            targets.iter().enumerate().map(move |(t, target)| {
                let id = format!("n={n} ensemble={} target={t}", c.points[*p].parameter());
                Unit::new(id, move || {
                    let sols = depth_sweep(
                        layouts,
                        |l| CircuitObjective::generation(target, l),
                        &c.optimizer,
                        |d| train_seed(c, *n, *p, 0, t, d),
                    )?;
                    layouts
                        .iter()
                        .zip(&sols)
                        .map(|(l, params)| vqc_core::discriminate::cost_gen(l, params, target))
                        .collect()
                })
            })
        })
        .collect();
    let results = ctx.run_units(&units)?;

    let mut rows = Vec::new();
    let mut offset = 0;
    for (n, p, targets, layouts) in &groups {
        let res = &results[offset..offset + targets.len()];
        offset += targets.len();
        let base = ctx.row(Some(arch), Some(&c.points[*p]), *n);
        for (i, layout) in layouts.iter().enumerate() {
            let b = base.at_depth(layout);
            rows.push(b.estimate("mean_cost_gen", &estimate(res.iter().map(|r| r[i]))));
            rows.push(b.value("n_params", layout.n_params() as f64, 1));
        }
    }
    Ok(rows)
}

fn gradvar(ctx: &Context<'_>) -> Result<Vec<ResultRow>> {
    let c = ctx.config;
    let arch = c.archs[0];
    let mut cells = Vec::new();
    for &n in &c.ns {
        for (p, point) in c.points.iter().enumerate() {
            let EnsemblePoint::Random(kind) = *point else { unreachable!("rejected by validation") };
            for layout in layouts(arch, n, &c.depths)? {
                cells.push((n, p, kind, layout));
            }
        }
    }
    let units: Vec<Unit<'_>> = cells
        .iter()
        .map(|(n, p, kind, layout)| {
            let id = format!("n={n} ensemble={} D={}", c.points[*p].parameter(), layout.depth);
            Unit::new(id, move || {
                let v = gradient_variance(*kind, layout, c.cost, c.pairs, c.samples, c.optimizer.fd_step, Seed(c.seed))?;
                Ok(vec![v.mean_variance, v.bootstrap_std_err, v.rows as f64])
            })
        })
        .collect();
    let results = ctx.run_units(&units)?;
    let metric = match c.cost {
        CostKind::Discrimination => "mean_grad_variance_dis",
        CostKind::Generation => "mean_grad_variance_gen",
    };
    Ok(cells
        .iter()
        .zip(&results)
        .flat_map(|((n, p, _, layout), r)| {
            let b = ctx.row(Some(arch), Some(&c.points[*p]), *n).at_depth(layout);
            let mut row = b.value(metric, r[0], r[2] as usize);
            row.std_err = Some(r[1]);
            [row, b.value("n_params", layout.n_params() as f64, 1)]
        })
        .collect())
}

fn opsize(ctx: &Context<'_>) -> Result<Vec<ResultRow>> {
    let c = ctx.config;
    let arch = c.archs[0];
    let mut cells = Vec::new();
    for &n in &c.ns {
        cells.extend(layouts(arch, n, &c.depths)?.into_iter().map(|l| (n, l)));
    }
    let units: Vec<Unit<'_>> = cells
        .iter()
        .map(|(n, layout)| {
            Unit::new(format!("n={n} D={}", layout.depth), move || {
                let est = avg_operator_size(arch, *n, layout.depth, c.samples, Seed(c.seed))?;
                Ok(vec![est.mean, est.std_err])
            })
        })
        .collect();
    let results = ctx.run_units(&units)?;
    Ok(cells
        .iter()
        .zip(&results)
        .map(|((n, layout), r)| {
            let mut row = ctx.row(Some(arch), None, *n).at_depth(layout).value("mean_size", r[0], c.samples);
            row.std_err = Some(r[1]);
            row
        })
        .collect())
}

fn helstrom_stats(ctx: &Context<'_>) -> Result<Vec<ResultRow>> {
    let c = ctx.config;
    let mut cells = Vec::new();
    for &n in &c.ns {
        for (p, point) in c.points.iter().enumerate() {
            let EnsemblePoint::Random(kind) = *point else { unreachable!("rejected by validation") };
            cells.push((n, p, kind));
        }
    }
    let units: Vec<Unit<'_>> = cells
        .iter()
        .map(|&(n, p, kind)| {
            Unit::new(format!("n={n} ensemble={}", c.points[p].parameter()), move || {
                let overlaps = (0..c.pairs as u64)
                    .into_par_iter()
                    .map(|i| {
                        let (a, b) = vqc_core::ensembles::sample_pair(kind, n, Seed(c.seed), i)?;
                        a.fidelity(&b)
                    })
                    .collect::<vqc_core::Result<Vec<f64>>>()?;
                let ph = estimate(overlaps.iter().map(|f| 0.5 * (1.0 - (1.0 - f).sqrt())));
                let ov = estimate(overlaps.iter().copied());
                // Sup distance to the Haar overlap law 1 - (1 - x)^(d - 1).
                let d = (1u64 << n) as f64;
                let mut sorted = overlaps;
                sorted.sort_by(f64::total_cmp);
                let m = sorted.len() as f64;
                let ks = sorted.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
                    let f = 1.0 - (1.0 - x).powf(d - 1.0);
                    acc.max((f - i as f64 / m).abs()).max(((i + 1) as f64 / m - f).abs())
                });
                Ok(vec![ph.mean, ph.std_err, ov.mean, ov.std_err, ks])
            })
        })
        .collect();
    let results = ctx.run_units(&units)?;
    let mut rows = Vec::new();
    for (&(n, p, kind), r) in cells.iter().zip(&results) {
        let b = ctx.row(None, Some(&c.points[p]), n);
        let est = |mean, std_err| MeanEstimate { mean, std_err, samples: c.pairs };
        rows.push(b.estimate("mean_helstrom", &est(r[0], r[1])));
        rows.push(b.estimate("mean_overlap", &est(r[2], r[3])));
        rows.push(b.value("overlap_ks_vs_haar", r[4], c.pairs));
        if kind == EnsembleKind::Haar {
            rows.push(b.value("haar_helstrom_closed_form", 1.0 / (2.0 * ((1u64 << (n + 1)) as f64 - 1.0)), 0));
            rows.push(b.value("haar_overlap_closed_form", 1.0 / (1u64 << n) as f64, 0));
        }
    }
    Ok(rows)
}

fn tfim(ctx: &Context<'_>) -> Result<Vec<ResultRow>> {
    let c = ctx.config;
    let cells: Vec<(usize, usize, f64)> = c
        .ns
        .iter()
        .flat_map(|&n| {
            c.points.iter().enumerate().map(move |(p, point)| match point {
                EnsemblePoint::Random(EnsembleKind::TfimGround { g }) => (n, p, *g),
                _ => unreachable!("tfim points are ground states"),
            })
        })
        .collect();
    let units: Vec<Unit<'_>> = cells
        .iter()
        .map(|&(n, _, g)| {
            Unit::new(format!("n={n} g={g}"), move || {
                let s = tfim_ground(n, g)?;
                let entropy = s.ground.bipartite_entropy(n / 2)?;
                Ok(vec![s.e0, s.e1, tfim_free_fermion_energy(n, g), entropy])
            })
        })
        .collect();
    let results = ctx.run_units(&units)?;
    let mut rows = Vec::new();
    for (&(n, p, _), r) in cells.iter().zip(&results) {
        let b = ctx.row(None, Some(&c.points[p]), n);
        rows.push(b.value("ground_energy", r[0], 1));
        rows.push(b.value("free_fermion_ground_energy", r[2], 1));
        rows.push(b.value("ground_energy_abs_error", (r[0] - r[2]).abs(), 1));
        rows.push(b.value("first_excited_energy", r[1], 1));
        rows.push(b.value("gap", r[1] - r[0], 1));
        rows.push(b.value("half_chain_entropy_bits", r[3], 1));
    }
    Ok(rows)
}

fn dc_scan(ctx: &Context<'_>) -> Result<Vec<ResultRow>> {
    let c = ctx.config;
    let arch = c.archs[0];
    let max_depth = c.depths.iter().copied().max().unwrap_or(0);
    let mut cells = Vec::new();
    for &n in &c.ns {
        for (p, point) in c.points.iter().enumerate() {
            cells.push((n, p, tasks(ctx, n, point)?));
        }
    }
    let units: Vec<Unit<'_>> = cells
        .iter()
        .map(|(n, p, tasks)| {
            Unit::new(format!("n={n} ensemble={}", c.points[*p].parameter()), move || {
                let seed = Seed(c.seed).path(&[stream::RESTARTS, *n as u64, *p as u64]);
                let scan = critical_depth(tasks, arch, max_depth, c.multiplier, &c.optimizer, seed)?;
                let mut out = vec![scan.mean_helstrom, scan.threshold, scan.critical_depth.map_or(f64::NAN, |d| d as f64)];
                for point in &scan.curve {
                    out.extend([point.depth as f64, point.error.mean, point.error.std_err]);
                }
                Ok(out)
            })
        })
        .collect();
    let results = ctx.run_units(&units)?;
    let mut rows = Vec::new();
    for ((n, p, tasks), r) in cells.iter().zip(&results) {
        let b = ctx.row(Some(arch), Some(&c.points[*p]), *n);
        let m = tasks.len();
        for point in r[3..].chunks(3) {
            let layout = build_layout(arch, *n, point[0] as usize)
                .map_err(|e| HarnessError::Runtime(format!("rebuilding scan layout: {e}")))?;
            rows.push(b.at_depth(&layout).estimate("mean_pe", &MeanEstimate { mean: point[1], std_err: point[2], samples: m }));
        }
        rows.push(b.value("mean_helstrom", r[0], m));
        rows.push(b.value("threshold", r[1], m));
        rows.push(b.value("critical_depth", r[2], m));
    }
    Ok(rows)
}
