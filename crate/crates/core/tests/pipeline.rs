use dtc_core::analysis::{detuning, CollapseMode};
use dtc_core::model::{DisorderConfig, ModelParams};
use dtc_core::observables::{trajectory, AverageMode};
use dtc_core::pipeline::{
    alpha_table, collapse_dataset, missing_cells, relaxation_table, CollapseRequest, RelaxOptions,
};
use dtc_core::store::{Dataset, Payload, RecordKind, ResultRecord, SweepConfig};
use dtc_core::Error;

fn config(ls: &[usize], gs: &[f64], n: u64, kind: &str) -> SweepConfig {
    let text = format!(
        "l_values = {ls:?}\ng_values = {gs:?}\nn_disorder = {n}\nmaster_seed = 1\nl_t = 10\n\
         t_grid = \"lin:0:200:2\"\nkinds = [\"{kind}\"]\nout_dir = \"mem\"\n"
    );
    SweepConfig::from_toml(&text, &[]).unwrap()
}

fn alpha_record(l: usize, g: f64, index: u64, alpha: f64) -> ResultRecord {
    ResultRecord {
        l,
        g,
        index,
        seed: 0,
        payload: Payload::Alpha {
            alpha,
            energy: 0.0,
            branch_warning: false,
            degenerate: false,
        },
    }
}

#[test]
fn perfect_flip_is_degenerate_everywhere() {
    let gs = [1.0];
    let ls = [6, 8];
    let cfg = config(&ls, &gs, 2, "trajectory");
    let times = cfg.times();
    let mut recs = Vec::new();
    for &l in &ls {
        for index in 0..2 {
            let p = ModelParams { l_t: 10, ..ModelParams::new(l, 1.0) };
            let tr = trajectory(&DisorderConfig::uniform(l, 0.0).unwrap(), &p, &times).unwrap();
            assert!(tr.o.iter().all(|o| (o - 1.0).abs() < 1e-10));
            recs.push(ResultRecord {
                l,
                g: 1.0,
                index,
                seed: 0,
                payload: Payload::Trajectory { l_t: 10, t: tr.t, o: tr.o },
            });
        }
    }
    let ds = Dataset::from_records(cfg, recs).unwrap();
    let rows = relaxation_table(&ds, &RelaxOptions::default()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.degenerate));
}

#[test]
fn missing_cells_are_reported() {
    let cfg = config(&[6, 8], &[0.8, 0.9], 2, "eigen-alpha");
    let recs = vec![alpha_record(6, 0.8, 0, 1.0), alpha_record(6, 0.8, 1, 1.0)];
    let ds = Dataset::from_records(cfg, recs).unwrap();
    assert_eq!(missing_cells(&ds, RecordKind::EigenAlpha).len(), 3);
    match alpha_table(&ds) {
        Err(Error::MissingRecords(m)) => assert_eq!(m, vec![(6, 0.9), (8, 0.8), (8, 0.9)]),
        other => panic!("{other:?}"),
    }
}

fn scaling_dataset(a: f64, nu: f64, constant_in_l: bool) -> Dataset {
    let ls = [20, 24, 28, 32, 36, 40];
    let gs: Vec<f64> = (0..12).map(|k| 0.84 + 0.01 * k as f64).collect();
    let cfg = config(&ls, &gs, 3, "eigen-alpha");
    let s = cfg.sigma_j();
    let mut recs = Vec::new();
    for &l in &ls {
        for &g in &gs {
            let lf = l as f64;
            let u = detuning(g, 0.9, s) * lf.powf(1.0 / nu);
            let f = 1.0 / (1.0 + (0.25 * u).exp()) + 0.1;
            let value = if constant_in_l { 1.0 + 5.0 * (g - 0.9) } else { lf.powf(-a) * f };
            // realizations scatter symmetrically around the generator value
            for (index, w) in [0.9, 1.0, 1.1].into_iter().enumerate() {
                recs.push(alpha_record(l, g, index as u64, value * w));
            }
        }
    }
    Dataset::from_records(cfg, recs).unwrap()
}

#[test]
fn collapse_pipeline_recovers_generator() {
    let ds = scaling_dataset(-0.17, 2.0, false);
    let req = CollapseRequest {
        mode: CollapseMode::OneD,
        average: AverageMode::Mean,
        resamples: 40,
        ..Default::default()
    };
    let out = collapse_dataset(&ds, &req).unwrap();
    assert!(!out.fit.unidentifiable);
    assert!((out.fit.nu - 2.0).abs() < 0.04, "nu {}", out.fit.nu);
    assert!((out.fit.a.unwrap() + 0.17).abs() < 0.02 * 0.17, "a {:?}", out.fit.a);
    assert!(out.fit.errors["nu"] >= 0.0 && out.fit.errors["a"] >= 0.0);
    assert_eq!(out.collapsed.len(), 72);
    // identical requests give identical reports
    assert_eq!(collapse_dataset(&ds, &req).unwrap(), out);
}

#[test]
fn constant_in_size_is_unidentifiable() {
    let ds = scaling_dataset(0.0, 1.0, true);
    let req = CollapseRequest { resamples: 0, ..Default::default() };
    assert!(collapse_dataset(&ds, &req).unwrap().fit.unidentifiable);
}
