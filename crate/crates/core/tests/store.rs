use std::io::Write;
use std::path::Path;

use dtc_core::store::{
    export, run_sweep, Dataset, ExportFormat, ResultRecord, Selector, SweepConfig, SweepOptions,
};
use dtc_core::Error;

fn config(dir: &Path, extra: &[&str]) -> SweepConfig {
    let text = r#"
l_values = [6, 8]
g_values = [0.85, 0.9, 0.95]
n_disorder = 4
master_seed = 11
l_t = 4
t_grid = "lin:0:24:8"
kinds = ["trajectory", "eigen-alpha", "eigen-cx"]
out_dir = "unused"
"#;
    let mut ov: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
    ov.push(format!("out_dir=\"{}\"", dir.display()));
    SweepConfig::from_toml(text, &ov).unwrap()
}

fn dump(dir: &Path) -> Vec<u8> {
    let ds = Dataset::open(dir).unwrap();
    let mut out = Vec::new();
    export(&ds, &Selector::default(), ExportFormat::Records, &mut out).unwrap();
    out
}

fn opts(workers: usize) -> SweepOptions<'static> {
    SweepOptions {
        workers,
        ..Default::default()
    }
}

#[test]
fn worker_count_does_not_change_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let sa = run_sweep(&config(&a, &[]), &opts(1)).unwrap();
    let sb = run_sweep(&config(&b, &[]), &opts(4)).unwrap();
    assert_eq!(sa.completed, 2 * 3 * 4 * 3);
    assert_eq!(sa.completed, sb.completed);
    assert_eq!(dump(&a), dump(&b));
    let ds = Dataset::open(&a).unwrap();
    assert_eq!(ds.manifest.as_ref().unwrap().completed, ds.len() as u64);
    assert_eq!(ds.len() as u64, ds.config.expected_records());
}

#[test]
fn interrupted_run_resumes_to_same_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let full = tmp.path().join("full");
    let part = tmp.path().join("part");
    run_sweep(&config(&full, &[]), &opts(2)).unwrap();

    let cfg = config(&part, &[]);
    let s = run_sweep(&cfg, &SweepOptions { max_units: Some(5), ..opts(2) }).unwrap();
    assert_eq!(s.new_records, 15);
    // a torn write at the end of a shard is discarded on load
    let shard = std::fs::read_dir(&part)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().ends_with(".jsonl"))
        .unwrap();
    std::fs::OpenOptions::new()
        .append(true)
        .open(&shard)
        .unwrap()
        .write_all(b"{\"schema\":1,\"kind\":\"traj")
        .unwrap();
    let s = run_sweep(&cfg, &opts(3)).unwrap();
    assert_eq!(s.new_records, 72 - 15);
    assert_eq!(dump(&full), dump(&part));

    let again = run_sweep(&cfg, &opts(1)).unwrap();
    assert_eq!(again.new_records, 0);
}

#[test]
fn refuses_to_mix_configurations() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("d");
    run_sweep(&config(&dir, &["kinds=[\"eigen-alpha\"]"]), &opts(1)).unwrap();
    let err = run_sweep(&config(&dir, &["kinds=[\"eigen-alpha\"]", "master_seed=12"]), &opts(1)).unwrap_err();
    assert!(matches!(err, Error::ConfigMismatch { .. }), "{err}");
}

#[test]
fn selectors_and_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("d");
    run_sweep(&config(&dir, &[]), &opts(2)).unwrap();
    let ds = Dataset::open(&dir).unwrap();

    let sel = Selector::parse(&["kind=trajectory,L=8", "g=0.9"]).unwrap();
    let picked: Vec<&ResultRecord> = ds.select(&sel).collect();
    assert_eq!(picked.len(), 4);
    assert!(picked.iter().all(|r| r.l == 8 && r.g == 0.9));
    assert!(matches!(Selector::parse(&["colour=red"]), Err(Error::Selector(_))));

    let text = String::from_utf8(dump(&dir)).unwrap();
    assert_eq!(text.lines().count(), ds.len());
    let reparsed: Vec<String> = text
        .lines()
        .map(|l| ResultRecord::parse_line(l).unwrap().to_line().unwrap())
        .collect();
    assert_eq!(reparsed.join("\n") + "\n", text);

    let mut table = Vec::new();
    export(&ds, &Selector::parse(&["kind=eigen-alpha"]).unwrap(), ExportFormat::Table, &mut table).unwrap();
    let table = String::from_utf8(table).unwrap();
    assert!(table.starts_with("# L\tg\tindex\talpha"));
    assert_eq!(table.lines().count(), 1 + 24);
}

#[test]
fn same_realization_shares_couplings_across_g() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("d");
    run_sweep(&config(&dir, &["kinds=[\"trajectory\"]"]), &opts(1)).unwrap();
    let ds = Dataset::open(&dir).unwrap();
    for r in ds.records() {
        let other = ds
            .records()
            .find(|q| q.l == r.l && q.index == r.index && q.g != r.g)
            .unwrap();
        assert_eq!(r.seed, other.seed);
    }
}
