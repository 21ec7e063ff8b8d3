use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{disorder_seed, EigenstateRule, SweepConfig};
use super::record::{Payload, RecordKind, ResultRecord};
use super::{load_records, shard_files, shard_run, Manifest, RunEntry, CONFIG_FILE, HASH_FILE};
use crate::eigenstates::{eigen_observables, Occupation};
use crate::error::{Error, Result};
use crate::model::sample_disorder;
use crate::observables::trajectory;

pub struct SweepOptions<'a> {
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    /// Called after every completed realization with `(records done, total)`.
    pub progress: Option<&'a (dyn Fn(u64, u64) + Sync)>,
    /// Stop after this many new realizations (the rest is left for a resume).
    pub max_units: Option<usize>,
}

impl Default for SweepOptions<'_> {
    fn default() -> Self {
        Self {
            workers: 0,
            progress: None,
            max_units: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub dir: PathBuf,
    pub expected: u64,
    pub completed: u64,
    pub new_records: u64,
}

/// One realization at one `(L, g)`; produces every requested kind still missing.
struct Unit {
    l: usize,
    g: f64,
    index: u64,
    kinds: Vec<RecordKind>,
}

fn compute(cfg: &SweepConfig, times: &[u64], u: &Unit) -> Result<Vec<ResultRecord>> {
    let params = cfg.params(u.l, u.g);
    let seed = disorder_seed(cfg.master_seed, u.l);
    let disorder = sample_disorder(&params, seed, u.index)?;
    let record = |payload| ResultRecord {
        l: u.l,
        g: u.g,
        index: u.index,
        seed,
        payload,
    };
    let mut out = Vec::new();
    if u.kinds.contains(&RecordKind::Trajectory) {
        let tr = trajectory(&disorder, &params, times)?;
        out.push(record(Payload::Trajectory {
            l_t: tr.l_t,
            t: tr.t,
            o: tr.o,
        }));
    }
    let alpha = u.kinds.contains(&RecordKind::EigenAlpha);
    let cx = u.kinds.contains(&RecordKind::EigenCx);
    if alpha || cx {
        let occupation = match cfg.eigenstate.unwrap_or_default() {
            EigenstateRule::Ground => Occupation::Ground,
            EigenstateRule::Highest => Occupation::Highest,
            EigenstateRule::Random => Occupation::Random {
                seed: seed ^ u.index.rotate_left(32) ^ u.g.to_bits(),
            },
        };
        let e = eigen_observables(&disorder, &params, &occupation)?;
        if alpha {
            out.push(record(Payload::Alpha {
                alpha: e.alpha,
                energy: e.energy,
                branch_warning: e.branch_warning,
                degenerate: e.degenerate,
            }));
        }
        if cx {
            out.push(record(Payload::Cx { cx: e.cx }));
        }
    }
    Ok(out)
}

/// Checks or claims `dir` for `cfg`: writes `config.toml` and `config-hash`
/// on first use, refuses a directory that belongs to another configuration.
fn claim_dir(cfg: &SweepConfig, dir: &Path) -> Result<String> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let hash = cfg.hash();
    let hash_path = dir.join(HASH_FILE);
    match std::fs::read_to_string(&hash_path) {
        Ok(found) if found.trim() != hash => {
            return Err(Error::ConfigMismatch {
                path: dir.to_path_buf(),
                found: found.trim().to_string(),
                expected: hash,
            })
        }
        Ok(_) => {}
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            if !shard_files(dir)?.is_empty() {
                return Err(Error::ConfigMismatch {
                    path: dir.to_path_buf(),
                    found: "<none>".into(),
                    expected: hash,
                });
            }
            let cfg_path = dir.join(CONFIG_FILE);
            std::fs::write(&cfg_path, cfg.to_toml()).map_err(|e| Error::io(cfg_path, e))?;
            std::fs::write(&hash_path, format!("{hash}\n")).map_err(|e| Error::io(&hash_path, e))?;
        }
        Err(e) => return Err(Error::io(hash_path, e)),
    }
    Ok(hash)
}

struct Shards {
    dir: PathBuf,
    run: u32,
    open: BTreeMap<usize, BufWriter<File>>,
}

impl Shards {
    fn append(&mut self, worker: usize, lines: &[String]) -> Result<()> {
        if !self.open.contains_key(&worker) {
            let path = self.dir.join(format!("records-{:04}-{:03}.jsonl", self.run, worker));
            let f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&path)
                .map_err(|e| Error::io(&path, e))?;
            self.open.insert(worker, BufWriter::new(f));
        }
        let w = self.open.get_mut(&worker).expect("shard opened above");
        let mut buf = String::new();
        for l in lines {
            buf.push_str(l);
            buf.push('\n');
        }
        w.write_all(buf.as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(&self.dir, e))
    }
}

/// Computes every missing record of `cfg` into `cfg.out_dir`.
///
/// Realizations are distributed over a worker pool; finished records are
/// sent to this thread, which appends them to the worker's shard. Record
/// content depends only on the configuration, so the sorted dataset is the
/// same for any worker count and any interruption pattern.
pub fn run_sweep(cfg: &SweepConfig, opts: &SweepOptions) -> Result<SweepSummary> {
    cfg.validate()?;
    let dir = cfg.out_dir.clone();
    let hash = claim_dir(cfg, &dir)?;
    let existing = load_records(&dir)?;
    let times = cfg.times();
    let expected = cfg.expected_records();

    let mut units = Vec::new();
    // largest sizes first for load balance
    let mut sizes = cfg.l_values.clone();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    for &l in &sizes {
        for index in 0..cfg.n_disorder {
            for &g in &cfg.g_values {
                let kinds: Vec<RecordKind> = cfg
                    .kinds
                    .iter()
                    .copied()
                    .filter(|k| !existing.contains_key(&(*k, l, g.to_bits(), index)))
                    .collect();
                if !kinds.is_empty() {
                    units.push(Unit { l, g, index, kinds });
                }
            }
        }
    }
    if let Some(max) = opts.max_units {
        units.truncate(max);
    }
    let previous = existing.len() as u64;
    drop(existing);
    if units.is_empty() {
        if super::Manifest::read(&dir)?.is_none() {
            Manifest {
                schema: super::SCHEMA_VERSION,
                config_hash: hash,
                expected,
                completed: previous,
                runs: Vec::new(),
            }
            .write(&dir)?;
        }
        return Ok(SweepSummary {
            dir,
            expected,
            completed: previous,
            new_records: 0,
        });
    }

    let run = shard_files(&dir)?.iter().filter_map(|p| shard_run(p)).max().unwrap_or(0) + 1;
    let mut shards = Shards {
        dir: dir.clone(),
        run,
        open: BTreeMap::new(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let workers = pool.current_num_threads();
    let start = Instant::now();
    let abort = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(usize, Result<Vec<String>>)>();
    let mut new_records = 0u64;
    let mut failure: Option<Error> = None;

    std::thread::scope(|s| {
        let units = &units;
        let abort = &abort;
        let times = &times;
        s.spawn(move || {
            pool.install(|| {
                units.par_iter().for_each_with(tx, |tx, u| {
                    if abort.load(Ordering::Relaxed) {
                        return;
                    }
                    let lines = compute(cfg, times, u)
                        .and_then(|recs| recs.iter().map(|r| r.to_line()).collect());
                    let worker = rayon::current_thread_index().unwrap_or(0);
                    let _ = tx.send((worker, lines));
                });
            });
        });
        for (worker, lines) in rx {
            if failure.is_some() {
                continue;
            }
            match lines.and_then(|lines| {
                shards.append(worker, &lines)?;
                Ok(lines.len())
            }) {
                Ok(n) => {
                    new_records += n as u64;
                    if let Some(p) = opts.progress {
                        p(previous + new_records, expected);
                    }
                }
                Err(e) => {
                    abort.store(true, Ordering::Relaxed);
                    failure = Some(e);
                }
            }
        }
    });

    let mut manifest = super::Manifest::read(&dir)?.unwrap_or(Manifest {
        schema: super::SCHEMA_VERSION,
        config_hash: hash.clone(),
        expected,
        completed: 0,
        runs: Vec::new(),
    });
    manifest.config_hash = hash;
    manifest.expected = expected;
    manifest.completed = previous + new_records;
    manifest.runs.push(RunEntry {
        run,
        workers,
        new_records,
        wall_time_s: start.elapsed().as_secs_f64(),
    });
    manifest.write(&dir)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(SweepSummary {
        dir,
        expected,
        completed: previous + new_records,
        new_records,
    })
}
