use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dtc_core::analysis::detuning;
use dtc_core::store::{Payload, ResultRecord, SweepConfig};

fn dtc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtc")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_demo(dir: &Path, kinds: &str) -> PathBuf {
    let cfg = dir.join("demo.cfg");
    std::fs::write(
        &cfg,
        format!(
            "l_values = [6, 8]\ng_values = [0.8, 0.9, 0.95]\nn_disorder = 10\nmaster_seed = 3\n\
             l_t = 10\nt_grid = \"lin:0:200:2\"\nkinds = {kinds}\nout_dir = \"{}\"\n",
            dir.join("data").display()
        ),
    )
    .unwrap();
    cfg
}

fn manifest_completed(dir: &Path) -> u64 {
    let text = std::fs::read_to_string(dir.join("manifest")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["completed"].as_u64().unwrap()
}

#[test]
fn sweep_counts_overrides_and_resume() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_demo(tmp.path(), "[\"trajectory\"]");
    let cfg = cfg.to_str().unwrap();

    let half = tmp.path().join("half");
    let o = dtc(&["sweep", "--config", cfg, "--set", "n_disorder=5", "--set", &format!("out_dir={}", half.display())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(manifest_completed(&half), 30);

    let o = dtc(&["sweep", "--config", cfg, "--workers", "2"]);
    assert_eq!(code(&o), 0);
    let data = tmp.path().join("data");
    assert_eq!(manifest_completed(&data), 60);
    assert!(String::from_utf8_lossy(&o.stderr).contains("60/60 records"));

    let o = dtc(&["sweep", "--config", cfg, "--quiet"]);
    assert_eq!(code(&o), 0);
    assert_eq!(manifest_completed(&data), 60);

    // fit-relax: 5 columns, idempotent
    let d = data.to_str().unwrap();
    let a = dtc(&["fit-relax", "--data", d]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let text = stdout(&a);
    assert!(text.starts_with("# g\tL\ttau\tsse\tdegenerate\n"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.split('\t').count() == 5));
    assert_eq!(stdout(&dtc(&["fit-relax", "--config", cfg])), text);

    // export with selector
    let o = dtc(&["export", "--data", d, "--select", "kind=trajectory,L=8,g=0.9"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 10);
    let o = dtc(&["export", "--data", d, "--select", "flavour=up"]);
    assert_eq!(code(&o), 2);

    // eigen tables need eigen records
    let o = dtc(&["eigen", "--data", d]);
    assert_eq!(code(&o), 4);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_demo(tmp.path(), "[\"eigen-alpha\"]");
    let cfg = cfg.to_str().unwrap();
    assert_eq!(code(&dtc(&["sweep", "--config", cfg, "--set", "n_disorder=0"])), 2);
    assert_eq!(code(&dtc(&["sweep", "--config", cfg, "--set", "bogus=1"])), 2);
    assert_eq!(code(&dtc(&["sweep", "--config", "/nonexistent/x.cfg"])), 2);
    assert_eq!(code(&dtc(&["sweep", "--config", cfg, "--frobnicate"])), 2);

    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = dtc(&["sweep", "--config", cfg, "--set", &format!("out_dir={}/sub", blocker.display())]);
    assert_eq!(code(&o), 3);

    assert_eq!(code(&dtc(&["sweep", "--config", cfg, "--quiet", "--set", "n_disorder=2"])), 0);
    let d = tmp.path().join("data");
    let o = dtc(&["fit-relax", "--data", d.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("(6, 0.8)"));
    let o = dtc(&["eigen", "--data", d.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 7);
}

#[test]
fn help_lists_flags() {
    for (sub, flags) in [
        ("sweep", &["--config", "--set", "--workers"][..]),
        ("fit-relax", &["--data", "--average", "--bootstrap", "--out"][..]),
        ("eigen", &["--data", "--table"][..]),
        ("collapse", &["--mode", "--nu", "--band", "--resamples", "--out-dir"][..]),
        ("export", &["--select", "--format"][..]),
    ] {
        let o = dtc(&[sub, "--help"]);
        assert_eq!(code(&o), 0);
        let text = stdout(&o);
        for f in flags {
            assert!(text.contains(f), "{sub} --help lacks {f}");
        }
    }
}

/// Writes a dataset directory from in-memory records.
fn write_dataset(dir: &Path, cfg_text: &str, records: &[ResultRecord]) {
    std::fs::create_dir_all(dir).unwrap();
    let cfg = SweepConfig::from_toml(cfg_text, &[format!("out_dir=\"{}\"", dir.display())]).unwrap();
    std::fs::write(dir.join("config.toml"), cfg.to_toml()).unwrap();
    std::fs::write(dir.join("config-hash"), cfg.hash() + "\n").unwrap();
    let lines: Vec<String> = records.iter().map(|r| r.to_line().unwrap() + "\n").collect();
    std::fs::write(dir.join("records-0001-000.jsonl"), lines.concat()).unwrap();
}

#[test]
fn collapse_exit_codes_and_band_slice() {
    let tmp = tempfile::tempdir().unwrap();
    let ls = [20usize, 24, 28, 32, 36, 40];
    let gs: Vec<f64> = (0..9).map(|k| 0.86 + 0.01 * k as f64).collect();
    let head = format!("l_values = {ls:?}\ng_values = {gs:?}\nn_disorder = 1\nmaster_seed = 0\nl_t = 10\n");

    // alpha independent of L
    let flat: Vec<ResultRecord> = ls
        .iter()
        .flat_map(|&l| {
            gs.iter().map(move |&g| ResultRecord {
                l,
                g,
                index: 0,
                seed: 0,
                payload: Payload::Alpha { alpha: 2.0 + 5.0 * (g - 0.9), energy: 0.0, branch_warning: false, degenerate: false },
            })
        })
        .collect();
    let flat_dir = tmp.path().join("flat");
    write_dataset(&flat_dir, &format!("{head}t_grid = [1]\nkinds = [\"eigen-alpha\"]\nout_dir = \"x\"\n"), &flat);
    let o = dtc(&["collapse", "--data", flat_dir.to_str().unwrap(), "--mode", "1d", "--resamples", "0"]);
    assert_eq!(code(&o), 5, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("unidentifiable\t1"));

    // O(T) of the activated-scaling form with beta = 0.32, b = 0.45, T0 = 2
    let times: Vec<u64> = (0..12)
        .map(|k| (108f64.ln() + (806f64.ln() - 108f64.ln()) * k as f64 / 11.0).exp().round() as u64)
        .collect();
    let s = 0.2 * std::f64::consts::PI;
    let surf: Vec<ResultRecord> = ls
        .iter()
        .flat_map(|&l| {
            let times = times.clone();
            gs.iter().map(move |&g| {
                let lf = l as f64;
                let x = detuning(g, 0.9, s) * lf.powf(0.5);
                let o = times
                    .iter()
                    .map(|&t| {
                        let y = (t as f64 / 2.0).ln() * lf.powf(-0.45);
                        lf.powf(-0.16) * (-(0.3 * y) * (0.15 * x).exp()).exp() * (1.0 + 0.2 * (0.3 * x).tanh()) / 1.3
                    })
                    .collect();
                ResultRecord { l, g, index: 0, seed: 0, payload: Payload::Trajectory { l_t: 10, t: times.clone(), o } }
            })
        })
        .collect();
    let surf_dir = tmp.path().join("surf");
    write_dataset(
        &surf_dir,
        &format!("{head}t_grid = {times:?}\nkinds = [\"trajectory\"]\nout_dir = \"x\"\n"),
        &surf,
    );
    let out_dir = tmp.path().join("report");
    let o = dtc(&[
        "collapse", "--data", surf_dir.to_str().unwrap(), "--mode", "2d", "--nu", "2.0", "--band", "1.00:1.02",
        "--resamples", "0", "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}\n{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    let report = stdout(&o);
    let b: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("b\t"))
        .and_then(|r| r.split('\t').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((b - 0.45).abs() < 0.05 * 0.45, "{report}");
    let slice = std::fs::read_to_string(out_dir.join("slice.tsv")).unwrap();
    assert!(slice.starts_with("# L\tg\tT\tx\ty\tv\n"));
    for row in slice.lines().skip(1) {
        let y: f64 = row.split('\t').nth(4).unwrap().parse().unwrap();
        assert!((1.0..=1.02).contains(&y));
    }
    assert!(out_dir.join("report.json").exists() && out_dir.join("collapsed.tsv").exists());

    let o = dtc(&["collapse", "--data", surf_dir.to_str().unwrap(), "--mode", "1d", "--band", "1:2"]);
    assert_eq!(code(&o), 2);
}
