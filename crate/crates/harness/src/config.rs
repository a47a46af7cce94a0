//! Experiment configuration: JSON file plus command-line overrides, resolved
//! to concrete defaults and validated before any compute.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{DeserializeOwned, Error as _};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;
use vqc_core::ansatz::{build_layout, Architecture};
use vqc_core::ensembles::{EnsembleKind, TFIM_MAX_QUBITS};
use vqc_core::optimize::{CostKind, OptimizerConfig};
use vqc_core::scramble::MAX_OPERATOR_QUBITS;
use vqc_core::statevec::MAX_QUBITS;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Discriminate,
    Generate,
    Gradvar,
    Opsize,
    HelstromStats,
    DcScan,
    Tfim,
    ArchBench,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Discriminate => "discriminate",
            ExperimentKind::Generate => "generate",
            ExperimentKind::Gradvar => "gradvar",
            ExperimentKind::Opsize => "opsize",
            ExperimentKind::HelstromStats => "helstrom-stats",
            ExperimentKind::DcScan => "dc-scan",
            ExperimentKind::Tfim => "tfim",
            ExperimentKind::ArchBench => "arch-bench",
        }
    }

    fn uses_circuits(self) -> bool {
        !matches!(self, ExperimentKind::HelstromStats | ExperimentKind::Tfim)
    }

    fn uses_ensemble(self) -> bool {
        !matches!(self, ExperimentKind::Opsize | ExperimentKind::Tfim)
    }

    fn trains(self) -> bool {
        matches!(
            self,
            ExperimentKind::Discriminate | ExperimentKind::Generate | ExperimentKind::DcScan | ExperimentKind::ArchBench
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Input-state family. Circuit families take their depths from `d0`; the
/// Ising pair takes its two fields from `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleFamily {
    Haar,
    LocalRandom,
    TiLocalRandom,
    TfimPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measurement {
    /// Maximum-likelihood readout of all qubits.
    Full,
    /// Readout of qubit `n / 2` only.
    SingleQubit,
}

/// One concrete input ensemble of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnsemblePoint {
    Random(EnsembleKind),
    /// Ground states at two fields; a single deterministic task.
    TfimPair(f64, f64),
}

impl EnsemblePoint {
    pub fn label(&self) -> String {
        match self {
            EnsemblePoint::Random(EnsembleKind::Haar) => "haar".into(),
            EnsemblePoint::Random(EnsembleKind::LocalRandom { .. }) => "local-random".into(),
            EnsemblePoint::Random(EnsembleKind::TiLocalRandom { .. }) => "ti-local-random".into(),
            EnsemblePoint::Random(EnsembleKind::TfimGround { .. }) => "tfim".into(),
            EnsemblePoint::TfimPair(..) => "tfim-pair".into(),
        }
    }

    /// Contents of the `d0_or_g` column.
    pub fn parameter(&self) -> String {
        match self {
            EnsemblePoint::Random(EnsembleKind::LocalRandom { d0 } | EnsembleKind::TiLocalRandom { d0 }) => d0.to_string(),
            EnsemblePoint::Random(EnsembleKind::TfimGround { g }) => g.to_string(),
            EnsemblePoint::Random(EnsembleKind::Haar) => String::new(),
            EnsemblePoint::TfimPair(a, b) => format!("{a};{b}"),
        }
    }

    fn validate(&self, n: usize) -> std::result::Result<(), vqc_core::Error> {
        match *self {
            EnsemblePoint::Random(kind) => kind.validate(n),
            EnsemblePoint::TfimPair(a, b) => {
                EnsembleKind::TfimGround { g: a }.validate(n)?;
                EnsembleKind::TfimGround { g: b }.validate(n)
            }
        }
    }
}

/// The file format. Every field is optional so command-line flags can supply
/// or override it.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: Option<ExperimentKind>,
    pub arch: Option<Architecture>,
    pub archs: Option<Vec<Architecture>>,
    #[serde(default, deserialize_with = "de_usize_list")]
    pub n: Option<Vec<usize>>,
    #[serde(default, deserialize_with = "de_usize_list")]
    pub depths: Option<Vec<usize>>,
    pub ensemble: Option<EnsembleFamily>,
    #[serde(default, deserialize_with = "de_usize_list")]
    pub d0: Option<Vec<usize>>,
    #[serde(default, deserialize_with = "de_f64_list")]
    pub g: Option<Vec<f64>>,
    pub pairs: Option<usize>,
    pub samples: Option<usize>,
    pub cost: Option<CostKind>,
    pub measurement: Option<Measurement>,
    pub multiplier: Option<f64>,
    pub optimizer: Option<OptimizerConfig>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    /// Editor hint; ignored.
    #[serde(rename = "$schema")]
    pub schema: Option<String>,
}

/// Top-level keys accepted in a config file.
pub const FIELDS: [&str; 19] = [
    "experiment",
    "arch",
    "archs",
    "n",
    "depths",
    "ensemble",
    "d0",
    "g",
    "pairs",
    "samples",
    "cost",
    "measurement",
    "multiplier",
    "optimizer",
    "seed",
    "output",
    "cache_dir",
    "workers",
    "$schema",
];

fn de_usize_list<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<usize>>, D::Error> {
    let v = Value::deserialize(d)?;
    let items = match &v {
        Value::Number(_) => vec![v.clone()],
        Value::Array(xs) => xs.clone(),
        Value::String(s) => return parse_usize_list(s).map(Some).map_err(D::Error::custom),
        _ => return Err(D::Error::custom("expected an integer, an array of integers, or a range string like \"1..8\"")),
    };
    items
        .iter()
        .map(|x| x.as_u64().map(|u| u as usize).ok_or_else(|| D::Error::custom(format!("expected a non-negative integer, got {x}"))))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(Some)
}

fn de_f64_list<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<f64>>, D::Error> {
    let v = Value::deserialize(d)?;
    let items = match &v {
        Value::Number(_) => vec![v.clone()],
        Value::Array(xs) => xs.clone(),
        Value::String(s) => return parse_f64_list(s).map(Some).map_err(D::Error::custom),
        _ => return Err(D::Error::custom("expected a number, an array of numbers, or a comma list")),
    };
    items
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| D::Error::custom(format!("expected a number, got {x}"))))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(Some)
}

/// `"1..8"` (inclusive), `"2,4,6"`, or a mix such as `"1..3,8"`.
pub fn parse_usize_list(s: &str) -> std::result::Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        let bad = || format!("invalid integer list item `{part}` (use `a..b` or comma-separated integers)");
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a > b {
                return Err(format!("empty range `{part}`"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

pub fn parse_f64_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(str::trim)
        .map(|p| p.parse::<f64>().map_err(|_| format!("invalid number `{p}`")))
        .collect()
}

/// Parses a kebab-case enum value with the same enumerated-options message
/// as the file reader.
pub fn parse_enum<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|e| e.to_string())
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<ExperimentKind>,
    pub arch: Option<Architecture>,
    pub archs: Option<Vec<Architecture>>,
    pub n: Option<Vec<usize>>,
    pub depths: Option<Vec<usize>>,
    pub ensemble: Option<EnsembleFamily>,
    pub d0: Option<Vec<usize>>,
    pub g: Option<Vec<f64>>,
    pub pairs: Option<usize>,
    pub samples: Option<usize>,
    pub cost: Option<CostKind>,
    pub measurement: Option<Measurement>,
    pub multiplier: Option<f64>,
    pub restarts: Option<usize>,
    pub max_iterations: Option<usize>,
    pub fd_step: Option<f64>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub workers: Option<usize>,
}

/// A loaded config and where each field came from, for error locations.
#[derive(Debug, Clone, Default)]
pub struct ConfigSource {
    pub raw: RawConfig,
    path: Option<PathBuf>,
    text: Option<String>,
    overridden: BTreeSet<&'static str>,
}

impl ConfigSource {
    pub fn from_json(text: &str, path: Option<&Path>) -> Result<Self> {
        let name = path.map_or("<config>".to_string(), |p| p.display().to_string());
        let raw = serde_json::from_str::<RawConfig>(text).map_err(|e| {
            let (line, column) = error_position(text, &e);
            HarnessError::Schema(format!("{name}:{line}:{column}: {e}"))
        })?;
        Ok(ConfigSource { raw, path: path.map(Path::to_path_buf), text: Some(text.to_string()), overridden: BTreeSet::new() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(format!("cannot read {}", path.display()), e))?;
        Self::from_json(&text, Some(path))
    }

    pub fn apply(&mut self, o: Overrides) {
        macro_rules! set {
            ($field:ident, $flag:literal) => {
                if let Some(v) = o.$field {
                    self.raw.$field = Some(v);
                    self.overridden.insert($flag);
                }
            };
        }
        set!(experiment, "experiment");
        set!(arch, "arch");
        set!(archs, "archs");
        set!(n, "n");
        set!(depths, "depths");
        set!(ensemble, "ensemble");
        set!(d0, "d0");
        set!(g, "g");
        set!(pairs, "pairs");
        set!(samples, "samples");
        set!(cost, "cost");
        set!(measurement, "measurement");
        set!(multiplier, "multiplier");
        set!(seed, "seed");
        set!(output, "output");
        set!(cache_dir, "cache_dir");
        set!(workers, "workers");
        if o.restarts.is_some() || o.max_iterations.is_some() || o.fd_step.is_some() {
            let opt = self.raw.optimizer.get_or_insert_with(OptimizerConfig::default);
            if let Some(r) = o.restarts {
                opt.restarts = r;
            }
            if let Some(m) = o.max_iterations {
                opt.max_iterations = m;
            }
            if let Some(h) = o.fd_step {
                opt.fd_step = h;
            }
            self.overridden.insert("optimizer");
        }
    }

    /// Prefix naming where `field` was set: a file line or a flag.
    fn at(&self, field: &str) -> String {
        if self.overridden.contains(field) {
            return format!("--{}", field.replace('_', "-"));
        }
        let name = self.path.as_ref().map_or("<config>".to_string(), |p| p.display().to_string());
        let key = format!("\"{field}\"");
        match self.text.as_deref().and_then(|t| t.lines().position(|l| l.contains(&key))) {
            Some(line) => format!("{name}:{}", line + 1),
            None => format!("{name}: field `{field}`"),
        }
    }

    fn schema(&self, field: &str, msg: impl fmt::Display) -> HarnessError {
        HarnessError::Schema(format!("{}: {msg}", self.at(field)))
    }

    /// Applies per-experiment defaults and validates every field against the
    /// library without running any compute.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let r = &self.raw;
        let experiment = r
            .experiment
            .ok_or_else(|| HarnessError::Schema("missing experiment kind (positional argument or `experiment` field)".into()))?;
        use ExperimentKind as K;

        let ns = r.n.clone().ok_or_else(|| self.schema("n", "missing qubit count `n`"))?;
        if ns.is_empty() {
            return Err(self.schema("n", "`n` is empty"));
        }

        let archs = match (experiment, &r.archs, r.arch) {
            (_, Some(list), _) if list.is_empty() => return Err(self.schema("archs", "`archs` is empty")),
            (K::ArchBench, Some(list), _) => list.clone(),
            (_, Some(_), _) => return Err(self.schema("archs", "`archs` applies only to arch-bench; use `arch`")),
            (K::ArchBench, None, Some(a)) => vec![a],
            (K::ArchBench, None, None) => {
                vec![Architecture::BrickwallOpen, Architecture::Qcnn, Architecture::Ttn, Architecture::Mera]
            }
            (_, None, a) => vec![a.unwrap_or(Architecture::BrickwallOpen)],
        };

        let depths = match (&r.depths, experiment.uses_circuits()) {
            (Some(d), true) if d.is_empty() => return Err(self.schema("depths", "`depths` is empty")),
            (Some(d), true) => {
                let mut d = d.clone();
                d.sort_unstable();
                d.dedup();
                d
            }
            (None, true) => return Err(self.schema("depths", format!("{experiment} needs `depths`"))),
            (_, false) => Vec::new(),
        };

        let family = r.ensemble.unwrap_or(EnsembleFamily::Haar);
        let g = r.g.clone().unwrap_or_default();
        if g.iter().any(|x| !x.is_finite()) {
            return Err(self.schema("g", "fields must be finite"));
        }
        let points = if experiment == K::Tfim {
            if g.is_empty() {
                return Err(self.schema("g", "tfim needs at least one field value in `g`"));
            }
            g.iter().map(|&g| EnsemblePoint::Random(EnsembleKind::TfimGround { g })).collect()
        } else if !experiment.uses_ensemble() {
            Vec::new()
        } else {
            match family {
                EnsembleFamily::Haar => {
                    if r.d0.is_some() {
                        return Err(self.schema("d0", "`d0` applies only to local-random and ti-local-random ensembles"));
                    }
                    vec![EnsemblePoint::Random(EnsembleKind::Haar)]
                }
                EnsembleFamily::LocalRandom | EnsembleFamily::TiLocalRandom => {
                    let d0 = r.d0.clone().unwrap_or_default();
                    if d0.is_empty() {
                        return Err(self.schema("ensemble", "circuit ensembles need preparation depths in `d0`"));
                    }
                    let ti = family == EnsembleFamily::TiLocalRandom;
                    d0.into_iter()
                        .map(|d0| {
                            EnsemblePoint::Random(if ti {
                                EnsembleKind::TiLocalRandom { d0 }
                            } else {
                                EnsembleKind::LocalRandom { d0 }
                            })
                        })
                        .collect()
                }
                EnsembleFamily::TfimPair => {
                    if g.len() != 2 {
                        return Err(self.schema("ensemble", "tfim-pair needs exactly two fields in `g`"));
                    }
                    vec![EnsemblePoint::TfimPair(g[0], g[1])]
                }
            }
        };

        let default_pairs = if experiment == K::HelstromStats { 10_000 } else { 10 };
        let pairs = r.pairs.unwrap_or(default_pairs);
        if pairs == 0 {
            return Err(self.schema("pairs", "`pairs` must be at least 1"));
        }
        let samples = r.samples.unwrap_or(if experiment == K::Opsize { 200 } else { 10 });
        if samples == 0 {
            return Err(self.schema("samples", "`samples` must be at least 1"));
        }
        let cost = r.cost.unwrap_or(CostKind::Discrimination);
        let measurement = r.measurement.unwrap_or(Measurement::Full);
        if measurement == Measurement::SingleQubit
            && !matches!(experiment, K::Discriminate | K::DcScan | K::ArchBench)
        {
            return Err(self.schema("measurement", format!("{experiment} has no measurement setting")));
        }
        let multiplier = r.multiplier.unwrap_or(2.0);
        if !(multiplier.is_finite() && multiplier >= 1.0) {
            return Err(self.schema("multiplier", format!("`multiplier` must be finite and >= 1, got {multiplier}")));
        }
        let optimizer = r.optimizer.clone().unwrap_or_default();
        optimizer.validate().map_err(|e| self.schema("optimizer", e))?;
        if r.workers == Some(0) {
            return Err(self.schema("workers", "`workers` must be at least 1"));
        }

        let config = ExperimentConfig {
            experiment,
            archs,
            ns,
            depths,
            points,
            pairs,
            samples,
            cost,
            measurement,
            multiplier,
            optimizer,
            seed: r.seed.unwrap_or(0),
            output: r.output.clone(),
            cache_dir: r.cache_dir.clone(),
            workers: r.workers,
        };
        self.check_capacity(&config)?;
        Ok(config)
    }

    fn check_capacity(&self, c: &ExperimentConfig) -> Result<()> {
        use ExperimentKind as K;
        for &n in &c.ns {
            if n == 0 || n > MAX_QUBITS {
                let err = vqc_core::Error::Budget { what: "qubit count", limit: MAX_QUBITS, requested: n };
                return Err(HarnessError::from_validation(self.at("n"), err));
            }
            if c.experiment == K::Opsize && n > MAX_OPERATOR_QUBITS {
                let err = vqc_core::Error::Budget { what: "operator qubit count", limit: MAX_OPERATOR_QUBITS, requested: n };
                return Err(HarnessError::from_validation(self.at("n"), err));
            }
            for p in &c.points {
                let field = if c.experiment == K::Tfim { "g" } else { "ensemble" };
                p.validate(n).map_err(|e| HarnessError::from_validation(self.at(field), e))?;
            }
            if c.experiment == K::Gradvar && c.points.iter().any(|p| matches!(p, EnsemblePoint::TfimPair(..))) {
                return Err(self.schema("ensemble", "gradvar needs a random ensemble"));
            }
            if c.experiment == K::HelstromStats && c.points.iter().any(|p| matches!(p, EnsemblePoint::TfimPair(..))) {
                return Err(self.schema("ensemble", "helstrom-stats needs a random ensemble"));
            }
            if c.experiment == K::Gradvar && c.pairs * c.samples < 2 {
                return Err(self.schema("samples", "gradvar needs pairs * samples >= 2"));
            }
            if c.experiment == K::Tfim && n > TFIM_MAX_QUBITS {
                let err = vqc_core::Error::Budget { what: "TFIM qubit count", limit: TFIM_MAX_QUBITS, requested: n };
                return Err(HarnessError::from_validation(self.at("n"), err));
            }
            for &arch in &c.archs {
                if c.experiment == K::DcScan && !arch.is_extensive() {
                    return Err(self.schema("arch", format!("dc-scan needs an extensive architecture, got {arch}")));
                }
                if !c.experiment.uses_circuits() {
                    continue;
                }
                for &d in &c.scan_depths() {
                    build_layout(arch, n, d).map_err(|e| {
                        HarnessError::from_validation(format!("{} ({arch}, n={n}, D={d})", self.at("depths")), e)
                    })?;
                }
            }
        }
        Ok(())
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub archs: Vec<Architecture>,
    pub ns: Vec<usize>,
    /// Sorted, distinct.
    pub depths: Vec<usize>,
    #[serde(serialize_with = "ser_points")]
    pub points: Vec<EnsemblePoint>,
    pub pairs: usize,
    pub samples: usize,
    pub cost: CostKind,
    pub measurement: Measurement,
    pub multiplier: f64,
    pub optimizer: OptimizerConfig,
    pub seed: u64,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
    #[serde(skip)]
    pub workers: Option<usize>,
}

fn ser_points<S: serde::Serializer>(points: &[EnsemblePoint], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(points.iter().map(|p| format!("{}({})", p.label(), p.parameter())))
}

impl ExperimentConfig {
    /// Depths actually built: the configured list, or `0..=max` for a
    /// critical-depth scan.
    pub fn scan_depths(&self) -> Vec<usize> {
        if self.experiment == ExperimentKind::DcScan {
            (0..=self.depths.iter().copied().max().unwrap_or(0)).collect()
        } else {
            self.depths.clone()
        }
    }

    /// Identifies the result-determining fields; output location and worker
    /// count are excluded.
    pub fn fingerprint(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn trains(&self) -> bool {
        self.experiment.trains()
    }
}

/// Position of a serde error. Value errors are raised after the value and
/// any trailing whitespace, so they are moved back onto the value's line.
fn error_position(text: &str, e: &serde_json::Error) -> (usize, usize) {
    if !e.is_data() || e.line() == 0 {
        return (e.line(), e.column());
    }
    let offset: usize = text.split_inclusive('\n').take(e.line() - 1).map(str::len).sum::<usize>() + e.column().saturating_sub(1);
    let before = text[..offset.min(text.len())].trim_end();
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1);
    (line, column)
}
