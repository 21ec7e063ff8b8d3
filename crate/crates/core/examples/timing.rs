use std::time::Instant;

use dtc_core::majorana::{build_floquet_matrix, build_initial_state};
use dtc_core::model::{sample_disorder, ModelParams};
use dtc_core::observables::sz_profile;

fn main() {
    for l in [20, 40, 60] {
        let p = ModelParams::new(l, 0.9);
        let cfg = sample_disorder(&p, 1, 0).unwrap();
        let v = build_floquet_matrix(&cfg, &p).unwrap();
        let mut s = build_initial_state(&cfg, &p).unwrap();
        let t0 = Instant::now();
        for _ in 0..100 {
            s = s.step(&v);
        }
        let step = t0.elapsed().as_secs_f64() / 100.0;
        let t0 = Instant::now();
        for _ in 0..100 {
            std::hint::black_box(sz_profile(&s).unwrap());
        }
        let prof = t0.elapsed().as_secs_f64() / 100.0;
        println!("L={l}: step {:.1} us, profile {:.1} us", step * 1e6, prof * 1e6);
    }
}
