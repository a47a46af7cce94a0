//! Sampled ensemble pairs stored in the library's binary state format, keyed
//! by ensemble, qubit count and master seed.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use vqc_core::ensembles::{read_states, sample_pair, write_states, EnsembleKind, StateFileHeader};
use vqc_core::rng::Seed;
use vqc_core::statevec::StateVector;

use crate::error::{HarnessError, Result};

pub fn cache_file(dir: &Path, kind: EnsembleKind, n: usize, seed: u64) -> PathBuf {
    let label = match kind {
        EnsembleKind::Haar => "haar".to_string(),
        EnsembleKind::LocalRandom { d0 } => format!("local-random-d0-{d0}"),
        EnsembleKind::TiLocalRandom { d0 } => format!("ti-local-random-d0-{d0}"),
        EnsembleKind::TfimGround { g } => format!("tfim-g-{g}"),
    };
    dir.join(format!("{label}-n{n}-seed{seed}.vqcs"))
}

/// The first `count` pairs of an ensemble, read from the cache when it holds
/// enough of them and sampled (then stored) otherwise. Pair `i` is stored as
/// states `2i` and `2i + 1`.
pub fn load_pairs(
    dir: Option<&Path>,
    kind: EnsembleKind,
    n: usize,
    seed: u64,
    count: usize,
) -> Result<Vec<(StateVector, StateVector)>> {
    let header = StateFileHeader { n_qubits: n, kind, seed: Seed(seed) };
    let path = dir.map(|d| cache_file(d, kind, n, seed));
    if let Some(p) = &path {
        if let Ok(f) = File::open(p) {
            match read_states(BufReader::new(f)) {
                Ok((h, states)) if h == header && states.len() >= 2 * count => {
                    let mut it = states.into_iter();
                    return Ok((0..count).map(|_| (it.next().unwrap(), it.next().unwrap())).collect());
                }
                Ok(_) => {}
                Err(e) => eprintln!("warning: ignoring unreadable cache {}: {e}", p.display()),
            }
        }
    }
    let pairs = (0..count as u64)
        .into_par_iter()
        .map(|i| sample_pair(kind, n, Seed(seed), i))
        .collect::<vqc_core::Result<Vec<_>>>()
        .map_err(|e| HarnessError::Runtime(format!("sampling {} pairs: {e}", kind.label())))?;
    if let (Some(p), Some(d)) = (&path, dir) {
        let io = |e| HarnessError::io(format!("cache {}", p.display()), e);
        std::fs::create_dir_all(d).map_err(io)?;
        let tmp = p.with_extension("vqcs.tmp");
        let flat: Vec<StateVector> = pairs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
        write_states(BufWriter::new(File::create(&tmp).map_err(io)?), &header, &flat)
            .map_err(|e| HarnessError::Runtime(format!("cache {}: {e}", p.display())))?;
        std::fs::rename(&tmp, p).map_err(io)?;
    }
    Ok(pairs)
}
