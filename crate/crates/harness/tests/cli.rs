use std::path::Path;
use std::process::{Command, Output};

use vqc_harness::output::{read_csv, ResultRow};

fn vqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vqc")).args(args).env_remove("VQC_WORKERS").output().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn rows(out: &Output) -> Vec<ResultRow> {
    assert!(out.status.success(), "{}", stderr(out));
    read_csv(out.stdout.as_slice()).unwrap()
}

fn metric<'a>(rows: &'a [ResultRow], name: &str) -> Vec<&'a ResultRow> {
    rows.iter().filter(|r| r.metric == name).collect()
}

#[test]
fn valid_config_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "c.json", r#"{"experiment": "discriminate", "n": 4, "depths": "1..3"}"#);
    let out = vqc(&["validate", &p]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
}

#[test]
fn shipped_examples_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/examples");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        let out = vqc(&["validate", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}: {}", p.display(), stderr(&out));
        count += 1;
    }
    assert!(count >= 8);
}

#[test]
fn depth_beyond_tree_capacity_is_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "c.json", "{\n  \"experiment\": \"discriminate\",\n  \"arch\": \"ttn\",\n  \"n\": 8,\n  \"depths\": [9]\n}\n");
    let out = vqc(&["validate", &p]);
    assert_eq!(out.status.code(), Some(3));
    let msg = stderr(&out);
    assert!(msg.contains("at most 3"), "{msg}");
    assert!(msg.contains(":5"), "{msg}");
}

#[test]
fn unknown_architecture_lists_options_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "c.json", "{\n  \"experiment\": \"discriminate\",\n  \"arch\": \"hexagon\",\n  \"n\": 4\n}\n");
    let out = vqc(&["validate", &p]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains(":3:") && msg.contains("hexagon") && msg.contains("brickwall-open") && msg.contains("mera"), "{msg}");
}

#[test]
fn schema_errors_are_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("{\n  \"experiment\": \"discriminate\",\n  \"n\": 4,\n", ":4"),
        ("{\n  \"experiment\": \"tfim\",\n  \"n\": 4,\n  \"colour\": 1\n}", "colour"),
        ("{\n  \"experiment\": \"discriminate\",\n  \"n\": 4\n}", "depths"),
        ("{\n  \"experiment\": \"opsize\",\n  \"n\": 4,\n  \"depths\": \"3..1\"\n}", ":4"),
        ("{\n  \"experiment\": \"discriminate\",\n  \"n\": 4,\n  \"depths\": 1,\n  \"optimizer\": {\"restarts\": 0}\n}", ":5"),
    ];
    for (text, needle) in cases {
        let p = write(dir.path(), "c.json", text);
        let out = vqc(&["validate", &p]);
        assert_eq!(out.status.code(), Some(2), "{text}: {}", stderr(&out));
        assert!(stderr(&out).contains(needle), "{needle}: {}", stderr(&out));
    }
}

#[test]
fn oversized_operator_is_exit_3() {
    let out = vqc(&["run", "opsize", "--n", "10", "--depths", "1"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn unknown_flag_value_is_exit_2() {
    let out = vqc(&["run", "discriminate", "--n", "4", "--depths", "1", "--ensemble", "gaussian"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("haar"));
}

#[test]
fn unwritable_output_is_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = vqc(&["run", "tfim", "--n", "4", "--g", "1", "-q", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn haar_helstrom_statistics() {
    let out = vqc(&["run", "helstrom-stats", "--n", "6", "--pairs", "10000", "--seed", "1", "--no-timestamp", "-q"]);
    let rows = rows(&out);
    let ph = metric(&rows, "mean_helstrom")[0];
    let want = 1.0 / 254.0;
    assert!((ph.value - want).abs() < 3.0 * ph.std_err.unwrap(), "{ph:?}");
    assert_eq!(metric(&rows, "haar_helstrom_closed_form")[0].value, want);
    assert!(rows.iter().all(|r| r.seed == 1 && r.version == vqc_core::VERSION && r.n == 6));
}

#[test]
fn tfim_energies_match_free_fermions() {
    let rows = rows(&vqc(&["run", "tfim", "--n", "6", "--g", "1,10", "--no-timestamp", "-q"]));
    let errs = metric(&rows, "ground_energy_abs_error");
    assert_eq!(errs.len(), 2);
    assert!(errs.iter().all(|r| r.value < 1e-8));
    assert_eq!(errs[0].d0_or_g, "1");
    assert_eq!(errs[1].d0_or_g, "10");
}

#[test]
fn discriminate_sweep_is_deterministic_across_worker_counts() {
    let args = [
        "run", "discriminate", "--n", "2", "--depths", "1..2", "--pairs", "3", "--restarts", "3", "--seed", "7",
        "--no-timestamp", "-q",
    ];
    let one = vqc(&[&args[..], &["--workers", "1"]].concat());
    let two = vqc(&[&args[..], &["--workers", "2"]].concat());
    assert_eq!(one.stdout, two.stdout);
    let rows = rows(&one);
    assert_eq!(rows.len(), 2 * 4);
    let pe = metric(&rows, "mean_pe");
    let ph = metric(&rows, "mean_helstrom");
    assert_eq!(pe.iter().map(|r| r.depth).collect::<Vec<_>>(), [Some(1), Some(2)]);
    for (e, h) in pe.iter().zip(&ph) {
        assert!(e.value >= h.value - 1e-10);
        assert_eq!(e.samples, 3);
    }
    // Two qubits saturate at depth 1.
    assert!(metric(&rows, "mean_cost_dis")[0].value < 1e-6);
}

#[test]
fn timestamp_line_is_optional() {
    let with = vqc(&["run", "tfim", "--n", "4", "--g", "1", "-q"]);
    let without = vqc(&["run", "tfim", "--n", "4", "--g", "1", "-q", "--no-timestamp"]);
    let with = String::from_utf8(with.stdout).unwrap();
    let without = String::from_utf8(without.stdout).unwrap();
    assert!(with.starts_with("# generated "));
    assert_eq!(with.split_once('\n').unwrap().1, without);
    assert!(without.starts_with("experiment,arch,ensemble,n,D,D_star,d0_or_g,seed,metric,value,std_err,samples,version\n"));
}

#[test]
fn flags_override_file_fields() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "c.json", r#"{"experiment": "opsize", "n": 6, "depths": [0, 1], "samples": 4, "seed": 3}"#);
    let rows = rows(&vqc(&["run", "-c", &p, "--n", "4", "--seed", "9", "--no-timestamp", "-q"]));
    assert!(rows.iter().all(|r| r.n == 4 && r.seed == 9 && r.samples == 4));
    assert_eq!(rows[0].value, 1.0);
}

#[test]
fn schema_lists_every_config_field() {
    let out = vqc(&["schema"]);
    let schema: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let mut keys: Vec<&str> = schema["properties"].as_object().unwrap().keys().map(String::as_str).collect();
    let mut fields = vqc_harness::config::FIELDS.to_vec();
    keys.sort_unstable();
    fields.sort_unstable();
    assert_eq!(keys, fields);
}
