//! Disorder-ensemble sweeps over `(L, g)` grids and their on-disk datasets.
//!
//! A dataset directory holds `config.toml` (the normalized configuration),
//! `config-hash`, `manifest` (JSON summary of runs) and append-only shards
//! `records-RRRR-WWW.jsonl`, one per run and worker. Each shard line is one
//! [`ResultRecord`]; a torn final line (no newline) is ignored on load.

mod config;
mod record;
mod run;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use config::{disorder_seed, EigenstateRule, SweepConfig, TimeGrid};
pub use record::{fmt_f64, Payload, RecordKey, RecordKind, ResultRecord, SCHEMA_VERSION};
pub use run::{run_sweep, SweepOptions, SweepSummary};

pub const CONFIG_FILE: &str = "config.toml";
pub const HASH_FILE: &str = "config-hash";
pub const MANIFEST_FILE: &str = "manifest";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub run: u32,
    pub workers: usize,
    pub new_records: u64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub config_hash: String,
    pub expected: u64,
    pub completed: u64,
    pub runs: Vec<RunEntry>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Option<Self>> {
        let path = dir.join(MANIFEST_FILE);
        match std::fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    /// Replaces the manifest atomically.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let tmp = dir.join(format!("{MANIFEST_FILE}.tmp"));
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        std::fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
        let dst = dir.join(MANIFEST_FILE);
        std::fs::rename(&tmp, &dst).map_err(|e| Error::io(dst, e))
    }
}

fn shard_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let entries = match std::fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
        Err(e) => return Err(Error::io(dir, e)),
    };
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with("records-") && name.ends_with(".jsonl") {
            out.push(entry.path());
        }
    }
    out.sort();
    Ok(out)
}

/// Run number encoded in a shard name, `records-RRRR-WWW.jsonl`.
fn shard_run(path: &Path) -> Option<u32> {
    path.file_name()?.to_str()?.strip_prefix("records-")?.split('-').next()?.parse().ok()
}

/// Reads every complete record from the shards of `dir`, keyed and sorted.
pub(crate) fn load_records(dir: &Path) -> Result<BTreeMap<RecordKey, ResultRecord>> {
    let mut out = BTreeMap::new();
    for path in shard_files(dir)? {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let complete = match text.rfind('\n') {
            Some(k) => &text[..k],
            None => "",
        };
        for line in complete.lines().filter(|l| !l.trim().is_empty()) {
            let rec = ResultRecord::parse_line(line)?;
            match out.get(&rec.key()) {
                Some(prev) if *prev != rec => {
                    return Err(Error::Consistency(format!(
                        "conflicting duplicate record {} L={} g={} index={} in {}",
                        rec.kind().name(),
                        rec.l,
                        rec.g,
                        rec.index,
                        path.display()
                    )))
                }
                Some(_) => {}
                None => {
                    out.insert(rec.key(), rec);
                }
            }
        }
    }
    Ok(out)
}

/// A dataset directory loaded into memory, records sorted by key.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub dir: PathBuf,
    pub config: SweepConfig,
    pub manifest: Option<Manifest>,
    records: BTreeMap<RecordKey, ResultRecord>,
}

impl Dataset {
    pub fn open(dir: &Path) -> Result<Self> {
        let cfg_path = dir.join(CONFIG_FILE);
        let mut config = SweepConfig::load(&cfg_path, &[])?;
        config.out_dir = dir.to_path_buf();
        let hash_path = dir.join(HASH_FILE);
        let stored = std::fs::read_to_string(&hash_path).map_err(|e| Error::io(&hash_path, e))?;
        let expected = config.hash();
        if stored.trim() != expected {
            return Err(Error::ConfigMismatch {
                path: dir.to_path_buf(),
                found: stored.trim().to_string(),
                expected,
            });
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: Manifest::read(dir)?,
            records: load_records(dir)?,
            config,
        })
    }

    /// In-memory dataset, for synthetic inputs.
    pub fn from_records(config: SweepConfig, records: Vec<ResultRecord>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for r in records {
            if map.insert(r.key(), r).is_some() {
                return Err(Error::Consistency("duplicate record key".into()));
            }
        }
        Ok(Self {
            dir: config.out_dir.clone(),
            config,
            manifest: None,
            records: map,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// All records in key order.
    pub fn records(&self) -> impl Iterator<Item = &ResultRecord> {
        self.records.values()
    }

    pub fn select<'a>(&'a self, sel: &'a Selector) -> impl Iterator<Item = &'a ResultRecord> + 'a {
        self.records.values().filter(move |r| sel.matches(r))
    }
}

/// Record filter built from `key=value` terms; keys `kind`, `L`, `g`, `index`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Selector {
    pub kind: Option<RecordKind>,
    pub l: Option<usize>,
    pub g: Option<f64>,
    pub index: Option<u64>,
}

/// Selector `g` matches within this absolute tolerance.
const G_MATCH_TOL: f64 = 1e-12;

impl Selector {
    /// Parses terms like `kind=trajectory`, `L=40,g=0.9` (comma separated,
    /// possibly spread over several strings).
    pub fn parse<S: AsRef<str>>(terms: &[S]) -> Result<Self> {
        let mut sel = Selector::default();
        for term in terms.iter().flat_map(|t| t.as_ref().split(',').map(str::to_string).collect::<Vec<_>>()) {
            let term = term.trim();
            if term.is_empty() {
                continue;
            }
            let (k, v) = term
                .split_once('=')
                .ok_or_else(|| Error::Selector(term.to_string()))?;
            let bad = || Error::Parse(format!("selector value `{v}` for `{k}`"));
            match k.trim() {
                "kind" => sel.kind = Some(v.trim().parse()?),
                "L" => sel.l = Some(v.trim().parse().map_err(|_| bad())?),
                "g" => sel.g = Some(v.trim().parse().map_err(|_| bad())?),
                "index" => sel.index = Some(v.trim().parse().map_err(|_| bad())?),
                other => return Err(Error::Selector(other.to_string())),
            }
        }
        Ok(sel)
    }

    pub fn matches(&self, r: &ResultRecord) -> bool {
        self.kind.is_none_or(|k| k == r.kind())
            && self.l.is_none_or(|l| l == r.l)
            && self.g.is_none_or(|g| (g - r.g).abs() <= G_MATCH_TOL)
            && self.index.is_none_or(|i| i == r.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExportFormat {
    #[default]
    Records,
    Table,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "records" => Ok(Self::Records),
            "table" => Ok(Self::Table),
            other => Err(Error::Parameter(format!("unknown export format `{other}`"))),
        }
    }
}

fn table_header(kind: RecordKind) -> &'static str {
    match kind {
        RecordKind::Trajectory => "# L\tg\tindex\tT\tO",
        RecordKind::EigenAlpha => "# L\tg\tindex\talpha\tenergy\tbranch_warning\tdegenerate",
        RecordKind::EigenCx => "# L\tg\tindex\tx\tcx",
    }
}

/// Writes the selected records as JSON lines or as tab-separated tables (one
/// `#` header per record kind). Returns the number of records written.
pub fn export<W: Write>(ds: &Dataset, sel: &Selector, format: ExportFormat, mut w: W) -> Result<usize> {
    let io = |e| Error::io("<export>", e);
    let mut count = 0;
    let mut current: Option<RecordKind> = None;
    for r in ds.select(sel) {
        count += 1;
        match format {
            ExportFormat::Records => writeln!(w, "{}", r.to_line()?).map_err(io)?,
            ExportFormat::Table => {
                if current != Some(r.kind()) {
                    writeln!(w, "{}", table_header(r.kind())).map_err(io)?;
                    current = Some(r.kind());
                }
                let head = format!("{}\t{}\t{}", r.l, fmt_f64(r.g), r.index);
                match &r.payload {
                    Payload::Trajectory { t, o, .. } => {
                        for (ti, oi) in t.iter().zip(o) {
                            writeln!(w, "{head}\t{ti}\t{}", fmt_f64(*oi)).map_err(io)?;
                        }
                    }
                    Payload::Alpha { alpha, energy, branch_warning, degenerate } => writeln!(
                        w,
                        "{head}\t{}\t{}\t{}\t{}",
                        fmt_f64(*alpha),
                        fmt_f64(*energy),
                        *branch_warning as u8,
                        *degenerate as u8
                    )
                    .map_err(io)?,
                    Payload::Cx { cx } => {
                        for (x, c) in cx.iter().enumerate() {
                            writeln!(w, "{head}\t{}\t{}", x + 1, fmt_f64(*c)).map_err(io)?;
                        }
                    }
                }
            }
        }
    }
    w.flush().map_err(io)?;
    Ok(count)
}
