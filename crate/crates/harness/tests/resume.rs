use vqc_core::ensembles::{read_states, sample_pair, EnsembleKind};
use vqc_core::rng::Seed;
use vqc_harness::cache::cache_file;
use vqc_harness::config::ConfigSource;
use vqc_harness::manifest::Manifest;
use vqc_harness::output::read_csv;
use vqc_harness::run::{manifest_path, run, RunOptions};

fn quiet() -> RunOptions {
    RunOptions { timestamp: false, progress: false }
}

#[test]
fn completed_units_are_not_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tfim.csv");
    let text = format!(r#"{{"experiment": "tfim", "n": 4, "g": [1, 2], "output": {:?}}}"#, out.to_str().unwrap());
    let config = ConfigSource::from_json(&text, None).unwrap().resolve().unwrap();

    // Pretend unit 1 finished in an earlier, interrupted run.
    let m = Manifest::open(&manifest_path(&out), &config.fingerprint()).unwrap();
    m.record(1, "n=4 g=2", &[-100.0, -99.0, -100.0, 0.25]).unwrap();
    drop(m);

    let rows = run(&config, &quiet()).unwrap();
    let energies: Vec<f64> = rows.iter().filter(|r| r.metric == "ground_energy").map(|r| r.value).collect();
    assert_ne!(energies[0], -100.0);
    assert_eq!(energies[1], -100.0);
    assert!(!manifest_path(&out).exists());
    assert_eq!(read_csv(std::fs::File::open(&out).unwrap()).unwrap(), rows);
}

#[test]
fn stale_manifest_is_discarded() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tfim.csv");
    let text = format!(r#"{{"experiment": "tfim", "n": 4, "g": 1, "output": {:?}}}"#, out.to_str().unwrap());
    let config = ConfigSource::from_json(&text, None).unwrap().resolve().unwrap();
    let m = Manifest::open(&manifest_path(&out), "some other config").unwrap();
    m.record(0, "n=4 g=1", &[-100.0, -99.0, -100.0, 0.25]).unwrap();
    drop(m);
    let rows = run(&config, &quiet()).unwrap();
    assert!(rows.iter().all(|r| r.value != -100.0));
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let text = format!(
        r#"{{"experiment": "gradvar", "n": 4, "depths": [1, 2], "pairs": 2, "samples": 3, "seed": 11, "output": {:?}}}"#,
        out.to_str().unwrap()
    );
    let config = ConfigSource::from_json(&text, None).unwrap().resolve().unwrap();
    run(&config, &quiet()).unwrap();
    let first = std::fs::read(&out).unwrap();
    run(&config, &quiet()).unwrap();
    assert_eq!(first, std::fs::read(&out).unwrap());
}

#[test]
fn sampled_pairs_are_cached_and_shared() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let text = format!(
        r#"{{"experiment": "discriminate", "n": 2, "depths": [1], "ensemble": "local-random", "d0": 2, "pairs": 3,
            "optimizer": {{"restarts": 2}}, "seed": 5, "cache_dir": {:?}}}"#,
        cache.to_str().unwrap()
    );
    let mut source = ConfigSource::from_json(&text, None).unwrap();
    source.raw.output = Some(dir.path().join("d.csv"));
    run(&source.resolve().unwrap(), &quiet()).unwrap();

    let kind = EnsembleKind::LocalRandom { d0: 2 };
    let file = cache_file(&cache, kind, 2, 5);
    let (header, states) = read_states(std::fs::File::open(&file).unwrap()).unwrap();
    assert_eq!((header.n_qubits, header.kind, header.seed), (2, kind, Seed(5)));
    assert_eq!(states.len(), 6);
    let (a, b) = sample_pair(kind, 2, Seed(5), 2).unwrap();
    assert_eq!((&states[4], &states[5]), (&a, &b));

    // A generation sweep under the same key reads the cached file.
    source.raw.experiment = Some(vqc_harness::config::ExperimentKind::Generate);
    source.raw.output = Some(dir.path().join("g.csv"));
    let modified = std::fs::metadata(&file).unwrap().modified().unwrap();
    run(&source.resolve().unwrap(), &quiet()).unwrap();
    assert_eq!(std::fs::metadata(&file).unwrap().modified().unwrap(), modified);
}
