//! Parameterized circuit layouts for every architecture, and the mapping
//! from a flat parameter vector onto placed gates.
//!
//! Layer rules (layers numbered from 1, pairs written `(a, b)`):
//!
//! * `brickwall-open`: odd layers `(0,1),(2,3),…`; even layers `(1,2),(3,4),…`.
//! * `brickwall-periodic`: as open, even layers also get `(n-1, 0)`.
//! * `brickwall-ti`: periodic pattern; all gates of a layer share one set of
//!   15 parameters, so the circuit commutes with a two-site translation.
//! * `prism`: open brickwall layer plus one long-range gate on
//!   `(ℓ mod n, (ℓ mod n + n/2) mod n)` appended to layer ℓ.
//! * `polygon`: layer ℓ uses stride `s = ((ℓ-1) mod n/2) + 1`. The graph
//!   `i ~ i+s (mod n)` splits into `g = gcd(n, s)` cycles of length `L = n/g`;
//!   walking each cycle from its smallest site, consecutive sites are paired,
//!   giving `g·⌊L/2⌋` gates.
//! * `qcnn`: each level on the active qubits `a_0 < a_1 < …` applies a
//!   convolution (pairs `(a_0,a_1),(a_2,a_3),…` then `(a_1,a_2),(a_3,a_4),…`)
//!   and a pooling sublayer on `(a_0,a_1),(a_2,a_3),…`, after which `a_1, a_3, …`
//!   leave the active set. Depth cap: levels until one qubit is active.
//! * `ttn`: each level pools as above without convolution; `n` a power of 2.
//! * `mera`: each level applies disentanglers `(a_1,a_2),(a_3,a_4),…` then
//!   the TTN isometries; `n` a power of 2.
//! * `svqc`: each of the `D*` layers is a `R(θ1,θ2,θ3)` on every qubit followed by
//!   an open CZ brick layer (odd/even pattern as brickwall); after every second
//!   CZ layer a CZ on `(n-1, 0)` is added. A final rotation on every qubit
//!   closes the circuit: `3n(D*+1)` parameters.
//! * `real-svqc`: as `svqc` with `RY` rotations: `n(D*+1)` parameters.
//!
//! All measured qubits stay in the register; "dropping" a qubit only removes
//! it from later levels of a tree-like architecture.

mod template;

pub use template::{euler_zyz, identity_params, kron_factor, universal_two_qubit, UNIVERSAL_PARAMS};
pub(crate) use template::universal_unchecked;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::statevec::{rotation_unchecked, ry, PlacedGate, StateVector, NORM_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    BrickwallOpen,
    BrickwallPeriodic,
    BrickwallTi,
    Prism,
    Polygon,
    Qcnn,
    Ttn,
    Mera,
    Svqc,
    RealSvqc,
}

impl Architecture {
    pub const ALL: [Architecture; 10] = [
        Architecture::BrickwallOpen,
        Architecture::BrickwallPeriodic,
        Architecture::BrickwallTi,
        Architecture::Prism,
        Architecture::Polygon,
        Architecture::Qcnn,
        Architecture::Ttn,
        Architecture::Mera,
        Architecture::Svqc,
        Architecture::RealSvqc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::BrickwallOpen => "brickwall-open",
            Architecture::BrickwallPeriodic => "brickwall-periodic",
            Architecture::BrickwallTi => "brickwall-ti",
            Architecture::Prism => "prism",
            Architecture::Polygon => "polygon",
            Architecture::Qcnn => "qcnn",
            Architecture::Ttn => "ttn",
            Architecture::Mera => "mera",
            Architecture::Svqc => "svqc",
            Architecture::RealSvqc => "real-svqc",
        }
    }

    /// Extensive architectures keep a constant gate count per layer.
    pub fn is_extensive(self) -> bool {
        !matches!(self, Architecture::Qcnn | Architecture::Ttn | Architecture::Mera)
    }

    /// Structural depth cap of non-extensive architectures.
    pub fn max_depth(self, n: usize) -> Option<usize> {
        if self.is_extensive() {
            return None;
        }
        // Levels until a single qubit remains active: ceil(log2 n).
        Some(n.next_power_of_two().trailing_zeros() as usize)
    }

    /// Open-boundary brickwall and the sVQC family take any `n >= 2`; the
    /// rest need even `n`, and TTN/MERA a power of two.
    pub fn check_size(self, n: usize) -> Result<()> {
        let odd_ok = matches!(self, Architecture::BrickwallOpen | Architecture::Svqc | Architecture::RealSvqc);
        if n < 2 {
            return Err(Error::InvalidArgument(format!("{} needs at least 2 qubits, got {n}", self.name())));
        }
        if !n.is_multiple_of(2) && !odd_ok {
            return Err(Error::InvalidArgument(format!(
                "{} needs an even qubit count, got {n}",
                self.name()
            )));
        }
        if matches!(self, Architecture::Ttn | Architecture::Mera) && !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "{} needs a power-of-two qubit count, got {n}",
                self.name()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let options: Vec<_> = Architecture::ALL.iter().map(|a| a.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown architecture `{s}`; expected one of: {}",
                    options.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateKind {
    Universal2q,
    Rotation3,
    RotationY,
    Cz,
    Cnot,
}

impl GateKind {
    pub fn n_params(self) -> usize {
        match self {
            GateKind::Universal2q => UNIVERSAL_PARAMS,
            GateKind::Rotation3 => 3,
            GateKind::RotationY => 1,
            GateKind::Cz | GateKind::Cnot => 0,
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Rotation3 | GateKind::RotationY => 1,
            _ => 2,
        }
    }
}

/// One gate position; parameters are `param_offset..param_offset + kind.n_params()`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSlot {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub param_offset: usize,
}

impl GateSlot {
    pub fn param_range(&self) -> std::ops::Range<usize> {
        self.param_offset..self.param_offset + self.kind.n_params()
    }

    pub(crate) fn compile(&self, params: &[f64]) -> PlacedGate {
        let p = &params[self.param_range()];
        let q = &self.qubits;
        match self.kind {
            GateKind::Universal2q => PlacedGate::Two {
                a: q[0],
                b: q[1],
                matrix: universal_unchecked(p),
            },
            GateKind::Rotation3 => PlacedGate::Single {
                qubit: q[0],
                matrix: rotation_unchecked(p[0], p[1], p[2]),
            },
            GateKind::RotationY => PlacedGate::Single { qubit: q[0], matrix: ry(p[0]) },
            GateKind::Cz => PlacedGate::Cz { a: q[0], b: q[1] },
            GateKind::Cnot => PlacedGate::Cnot { control: q[0], target: q[1] },
        }
    }
}

/// An ordered list of gate layers over a flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitLayout {
    /// `None` for hand-assembled layouts.
    pub architecture: Option<Architecture>,
    pub n_qubits: usize,
    /// Depth as requested: layers, tree levels, or `D*` for the sVQC family.
    pub depth: usize,
    pub layers: Vec<Vec<GateSlot>>,
    pub param_count: usize,
    pub entangler_layers: usize,
}

struct Builder {
    layers: Vec<Vec<GateSlot>>,
    next_param: usize,
}

impl Builder {
    fn new() -> Self {
        Builder { layers: Vec::new(), next_param: 0 }
    }

    fn layer(&mut self) -> &mut Vec<GateSlot> {
        self.layers.push(Vec::new());
        self.layers.last_mut().unwrap()
    }

    fn push(&mut self, kind: GateKind, qubits: Vec<usize>, shared_offset: Option<usize>) {
        let offset = shared_offset.unwrap_or_else(|| {
            let o = self.next_param;
            self.next_param += kind.n_params();
            o
        });
        self.layers
            .last_mut()
            .expect("layer opened")
            .push(GateSlot { kind, qubits, param_offset: offset });
    }

    fn reserve(&mut self, count: usize) -> usize {
        let o = self.next_param;
        self.next_param += count;
        o
    }
}

fn brick_pairs(n: usize, layer: usize, periodic: bool) -> Vec<(usize, usize)> {
    let start = if layer % 2 == 1 { 0 } else { 1 };
    let mut pairs: Vec<_> = (start..n.saturating_sub(1)).step_by(2).map(|i| (i, i + 1)).collect();
    if periodic && layer.is_multiple_of(2) && n >= 2 {
        pairs.push((n - 1, 0));
    }
    pairs
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

pub(crate) fn polygon_pairs(n: usize, stride: usize) -> Vec<(usize, usize)> {
    let g = gcd(n, stride);
    let len = n / g;
    let mut pairs = Vec::new();
    for start in 0..g {
        let cycle: Vec<usize> = (0..len).map(|k| (start + k * stride) % n).collect();
        pairs.extend(cycle.chunks_exact(2).map(|c| (c[0], c[1])));
    }
    pairs
}

fn pool_pairs(active: &[usize]) -> Vec<(usize, usize)> {
    active.chunks_exact(2).map(|c| (c[0], c[1])).collect()
}

fn offset_pairs(active: &[usize]) -> Vec<(usize, usize)> {
    active[1..].chunks_exact(2).map(|c| (c[0], c[1])).collect()
}

fn drop_odd(active: &[usize]) -> Vec<usize> {
    active.iter().copied().step_by(2).collect()
}

/// Builds the layout for `arch` on `n` qubits at depth `depth`.
///
/// Depth 0 yields the identity circuit (no layers) for the two-qubit-gate
/// families and only the closing rotation layer for the sVQC family.
pub fn build_layout(arch: Architecture, n: usize, depth: usize) -> Result<CircuitLayout> {
    arch.check_size(n)?;
    if let Some(max) = arch.max_depth(n) {
        if depth > max {
            return Err(Error::DepthCapacity {
                arch: arch.name().to_string(),
                n_qubits: n,
                max,
                requested: depth,
            });
        }
    }
    let mut b = Builder::new();
    let u = GateKind::Universal2q;
    match arch {
        Architecture::BrickwallOpen | Architecture::BrickwallPeriodic => {
            let periodic = arch == Architecture::BrickwallPeriodic;
            for l in 1..=depth {
                b.layer();
                for (x, y) in brick_pairs(n, l, periodic) {
                    b.push(u, vec![x, y], None);
                }
            }
        }
        Architecture::BrickwallTi => {
            for l in 1..=depth {
                b.layer();
                let shared = b.reserve(UNIVERSAL_PARAMS);
                for (x, y) in brick_pairs(n, l, true) {
                    b.push(u, vec![x, y], Some(shared));
                }
            }
        }
        Architecture::Prism => {
            for l in 1..=depth {
                b.layer();
                for (x, y) in brick_pairs(n, l, false) {
                    b.push(u, vec![x, y], None);
                }
                let s = l % n;
                b.push(u, vec![s, (s + n / 2) % n], None);
            }
        }
        Architecture::Polygon => {
            for l in 1..=depth {
                b.layer();
                let stride = (l - 1) % (n / 2) + 1;
                for (x, y) in polygon_pairs(n, stride) {
                    b.push(u, vec![x, y], None);
                }
            }
        }
        Architecture::Qcnn | Architecture::Ttn | Architecture::Mera => {
            let mut active: Vec<usize> = (0..n).collect();
            for _ in 0..depth {
                if arch == Architecture::Qcnn {
                    b.layer();
                    for (x, y) in pool_pairs(&active) {
                        b.push(u, vec![x, y], None);
                    }
                }
                if arch != Architecture::Ttn {
                    let pairs = offset_pairs(&active);
                    if !pairs.is_empty() {
                        b.layer();
                        for (x, y) in pairs {
                            b.push(u, vec![x, y], None);
                        }
                    }
                }
                b.layer();
                for (x, y) in pool_pairs(&active) {
                    b.push(u, vec![x, y], None);
                }
                active = drop_odd(&active);
            }
        }
        Architecture::Svqc | Architecture::RealSvqc => {
            let rot = if arch == Architecture::Svqc { GateKind::Rotation3 } else { GateKind::RotationY };
            for l in 1..=depth {
                b.layer();
                for q in 0..n {
                    b.push(rot, vec![q], None);
                }
                for (x, y) in brick_pairs(n, l, false) {
                    b.push(GateKind::Cz, vec![x, y], None);
                }
                if l % 2 == 0 && n > 2 {
                    b.push(GateKind::Cz, vec![n - 1, 0], None);
                }
            }
            b.layer();
            for q in 0..n {
                b.push(rot, vec![q], None);
            }
        }
    }
    let layers: Vec<_> = b.layers.into_iter().filter(|l| !l.is_empty()).collect();
    let mut layout = CircuitLayout {
        architecture: Some(arch),
        n_qubits: n,
        depth,
        layers,
        param_count: b.next_param,
        entangler_layers: 0,
    };
    layout.entangler_layers = layout.count_entangler_layers();
    Ok(layout)
}

impl CircuitLayout {
    /// A layout with no gates.
    pub fn identity(n: usize) -> Self {
        CircuitLayout {
            architecture: None,
            n_qubits: n,
            depth: 0,
            layers: Vec::new(),
            param_count: 0,
            entangler_layers: 0,
        }
    }

    /// Hand-assembled layout; parameter offsets are validated.
    pub fn custom(n: usize, layers: Vec<Vec<GateSlot>>) -> Result<Self> {
        let mut layout = CircuitLayout {
            architecture: None,
            n_qubits: n,
            depth: layers.len(),
            layers,
            param_count: 0,
            entangler_layers: 0,
        };
        layout.param_count = layout
            .slots()
            .map(|s| s.param_range().end)
            .max()
            .unwrap_or(0);
        layout.entangler_layers = layout.count_entangler_layers();
        layout.validate()?;
        Ok(layout)
    }

    pub fn slots(&self) -> impl Iterator<Item = &GateSlot> {
        self.layers.iter().flatten()
    }

    pub fn n_slots(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn n_params(&self) -> usize {
        self.param_count
    }

    /// Checks qubit indices and that every parameter index is referenced.
    pub fn validate(&self) -> Result<()> {
        let mut used = vec![false; self.param_count];
        for s in self.slots() {
            if s.qubits.len() != s.kind.arity() {
                return Err(Error::InvalidArgument(format!(
                    "{:?} slot needs {} qubits, got {:?}",
                    s.kind,
                    s.kind.arity(),
                    s.qubits
                )));
            }
            for &q in &s.qubits {
                if q >= self.n_qubits {
                    return Err(Error::QubitOutOfRange { index: q, n_qubits: self.n_qubits });
                }
            }
            if s.qubits.len() == 2 && s.qubits[0] == s.qubits[1] {
                return Err(Error::DuplicateQubit(s.qubits[0]));
            }
            let r = s.param_range();
            if r.end > self.param_count {
                return Err(Error::InvalidArgument(format!(
                    "slot parameters {r:?} exceed declared count {}",
                    self.param_count
                )));
            }
            used[r].iter_mut().for_each(|u| *u = true);
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::InvalidArgument(format!("parameter {i} is not used by any slot")));
        }
        if self.entangler_layers != self.count_entangler_layers() {
            return Err(Error::InvalidArgument("declared entangler layer count is inconsistent".into()));
        }
        Ok(())
    }

    /// Number of gate layers, i.e. circuit depth in layer time steps. Equals
    /// `depth` for the brickwall family; a tree level spans one to three.
    pub fn gate_layers(&self) -> usize {
        self.layers.len()
    }

    /// `D*`: three CNOT layers per layer of universal gates, otherwise one per
    /// layer holding a CZ/CNOT.
    pub fn count_entangler_layers(&self) -> usize {
        let has = |k: GateKind| self.slots().any(|s| s.kind == k);
        if has(GateKind::Universal2q) {
            3 * self
                .layers
                .iter()
                .filter(|l| l.iter().any(|s| s.kind == GateKind::Universal2q))
                .count()
        } else {
            self.layers
                .iter()
                .filter(|l| l.iter().any(|s| matches!(s.kind, GateKind::Cz | GateKind::Cnot)))
                .count()
        }
    }

    pub(crate) fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count {
            return Err(Error::DimensionMismatch { expected: self.param_count, got: params.len() });
        }
        if let Some(i) = params.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(format!("parameter {i} is not finite")));
        }
        Ok(())
    }

    /// Gates in application order.
    pub fn compile(&self, params: &[f64]) -> Result<Vec<PlacedGate>> {
        self.check_params(params)?;
        Ok(self.compile_unchecked(params))
    }

    pub(crate) fn compile_unchecked(&self, params: &[f64]) -> Vec<PlacedGate> {
        self.slots().map(|s| s.compile(params)).collect()
    }

    /// `U_D |input>`.
    pub fn apply(&self, params: &[f64], input: &StateVector) -> Result<StateVector> {
        if input.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, got: input.n_qubits() });
        }
        let gates = self.compile(params)?;
        let mut out = input.clone();
        out.apply_all(&gates)?;
        debug_assert!((out.norm() - 1.0).abs() < NORM_TOL);
        Ok(out)
    }

    /// Extends a solution of `shallower` to this layout when `shallower`'s
    /// slots are a prefix of this layout's; extra gates are set to identity.
    pub fn embed_params(&self, shallower: &CircuitLayout, params: &[f64]) -> Option<Vec<f64>> {
        if shallower.n_qubits != self.n_qubits || params.len() != shallower.param_count {
            return None;
        }
        let ours: Vec<&GateSlot> = self.slots().collect();
        let theirs: Vec<&GateSlot> = shallower.slots().collect();
        if theirs.len() > ours.len() || ours[..theirs.len()].iter().zip(&theirs).any(|(a, b)| a != b) {
            return None;
        }
        let mut out = vec![0.0; self.param_count];
        out[..params.len()].copy_from_slice(params);
        for s in &ours[theirs.len()..] {
            let r = s.param_range();
            // Fixed entanglers and parameters shared with the prefix cannot be
            // switched off.
            if matches!(s.kind, GateKind::Cz | GateKind::Cnot) || r.start < params.len() {
                return None;
            }
            if s.kind == GateKind::Universal2q {
                out[r].copy_from_slice(identity_params());
            }
        }
        Some(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let layout: CircuitLayout =
            serde_json::from_str(s).map_err(|e| Error::InvalidArgument(format!("layout JSON: {e}")))?;
        layout.validate()?;
        Ok(layout)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brickwall_counts() {
        let l = build_layout(Architecture::BrickwallOpen, 6, 2).unwrap();
        assert_eq!(l.n_slots(), 5);
        assert_eq!(l.n_params(), 75);
        assert_eq!(l.entangler_layers, 6);
        assert_eq!(l.layers[0].iter().map(|s| s.qubits.clone()).collect::<Vec<_>>(), vec![vec![0, 1], vec![2, 3], vec![4, 5]]);
        assert_eq!(l.layers[1].iter().map(|s| s.qubits.clone()).collect::<Vec<_>>(), vec![vec![1, 2], vec![3, 4]]);
    }

    #[test]
    fn tree_gate_layers() {
        let layers = |a| build_layout(a, 8, 3).unwrap().gate_layers();
        assert_eq!(layers(Architecture::Ttn), 3);
        assert_eq!(layers(Architecture::Mera), 5);
        assert_eq!(layers(Architecture::Qcnn), 8);
        assert_eq!(build_layout(Architecture::BrickwallOpen, 8, 5).unwrap().gate_layers(), 5);
    }

    #[test]
    fn svqc_counts() {
        assert_eq!(build_layout(Architecture::Svqc, 6, 1).unwrap().n_params(), 36);
        assert_eq!(build_layout(Architecture::RealSvqc, 6, 1).unwrap().n_params(), 12);
        assert_eq!(build_layout(Architecture::Svqc, 6, 2).unwrap().entangler_layers, 2);
        assert_eq!(build_layout(Architecture::RealSvqc, 6, 6).unwrap().entangler_layers, 6);
    }

    #[test]
    fn non_extensive_capacity() {
        assert_eq!(Architecture::Ttn.max_depth(8), Some(3));
        assert_eq!(Architecture::Qcnn.max_depth(6), Some(3));
        let err = build_layout(Architecture::Ttn, 8, 9).unwrap_err();
        assert!(err.to_string().contains("at most 3"), "{err}");
        assert!(build_layout(Architecture::Mera, 6, 1).is_err());
        assert!(build_layout(Architecture::BrickwallPeriodic, 5, 1).is_err());
        assert!(build_layout(Architecture::BrickwallOpen, 5, 1).is_ok());
    }

    #[test]
    fn ttn_tree() {
        let l = build_layout(Architecture::Ttn, 8, 3).unwrap();
        let pairs: Vec<Vec<Vec<usize>>> =
            l.layers.iter().map(|ly| ly.iter().map(|s| s.qubits.clone()).collect()).collect();
        assert_eq!(pairs, vec![
            vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![6, 7]],
            vec![vec![0, 2], vec![4, 6]],
            vec![vec![0, 4]],
        ]);
    }

    #[test]
    fn polygon_strides() {
        assert_eq!(polygon_pairs(6, 2), vec![(0, 2), (1, 3)]);
        assert_eq!(polygon_pairs(6, 3), vec![(0, 3), (1, 4), (2, 5)]);
        assert_eq!(polygon_pairs(8, 1), vec![(0, 1), (2, 3), (4, 5), (6, 7)]);
    }

    #[test]
    fn ti_layers_share_params() {
        let l = build_layout(Architecture::BrickwallTi, 6, 3).unwrap();
        assert_eq!(l.n_params(), 45);
        for layer in &l.layers {
            assert!(layer.iter().all(|s| s.param_offset == layer[0].param_offset));
        }
        l.validate().unwrap();
    }

    #[test]
    fn unknown_architecture_lists_options() {
        let err = "brickwall".parse::<Architecture>().unwrap_err().to_string();
        assert!(err.contains("brickwall-open") && err.contains("real-svqc"), "{err}");
    }

    #[test]
    fn json_roundtrip_validates() {
        let l = build_layout(Architecture::Qcnn, 6, 2).unwrap();
        let back = CircuitLayout::from_json(&l.to_json()).unwrap();
        assert_eq!(l, back);
        let broken = l.to_json().replace("\"param_count\": ", "\"param_count\": 1");
        assert!(CircuitLayout::from_json(&broken).is_err());
    }

    #[test]
    fn params_checked() {
        let l = build_layout(Architecture::BrickwallOpen, 2, 1).unwrap();
        let s = StateVector::zero(2).unwrap();
        assert!(l.apply(&[0.0; 14], &s).is_err());
        assert!(l.apply(&[0.0; 15], &StateVector::zero(3).unwrap()).is_err());
        let mut p = [0.0; 15];
        p[0] = f64::NAN;
        assert!(l.apply(&p, &s).is_err());
    }

    #[test]
    fn zero_svqc_keeps_zero_state() {
        let l = build_layout(Architecture::Svqc, 6, 3).unwrap();
        let s = StateVector::zero(6).unwrap();
        let out = l.apply(&vec![0.0; l.n_params()], &s).unwrap();
        assert!((out.fidelity(&s).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn embedding_rejects_non_prefix() {
        let d2 = build_layout(Architecture::Svqc, 4, 2).unwrap();
        let d3 = build_layout(Architecture::Svqc, 4, 3).unwrap();
        assert!(d3.embed_params(&d2, &vec![0.0; d2.n_params()]).is_none());
        let b2 = build_layout(Architecture::BrickwallOpen, 4, 2).unwrap();
        let b4 = build_layout(Architecture::BrickwallOpen, 4, 4).unwrap();
        assert!(b4.embed_params(&b2, &vec![0.1; b2.n_params()]).is_some());
    }
}
