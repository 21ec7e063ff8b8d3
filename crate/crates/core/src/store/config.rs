use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::record::RecordKind;
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Time grid: an explicit list, `"lin:start:stop:step"` (inclusive) or
/// `"log:start:stop:n"` (`n` log-spaced points rounded to integers, duplicates
/// dropped).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeGrid {
    List(Vec<u64>),
    Spec(String),
}

impl TimeGrid {
    pub fn resolve(&self) -> Result<Vec<u64>> {
        let mut t = match self {
            TimeGrid::List(v) => v.clone(),
            TimeGrid::Spec(s) => parse_grid_spec(s)?,
        };
        if t.is_empty() {
            return Err(Error::Config("t_grid is empty".into()));
        }
        t.sort_unstable();
        t.dedup();
        Ok(t)
    }
}

fn parse_grid_spec(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("t_grid `{s}`: expected lin:start:stop:step or log:start:stop:n"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(bad());
    }
    let nums: Vec<u64> = parts[1..]
        .iter()
        .map(|p| p.trim().parse::<u64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (a, b, c) = (nums[0], nums[1], nums[2]);
    if b < a || c == 0 {
        return Err(bad());
    }
    match parts[0] {
        "lin" => Ok((a..=b).step_by(c as usize).collect()),
        "log" => {
            if a == 0 {
                return Err(Error::Config(format!("t_grid `{s}`: log grid must start above 0")));
            }
            if c == 1 {
                return Ok(vec![a]);
            }
            let (la, lb) = ((a as f64).ln(), (b as f64).ln());
            let mut v: Vec<u64> = (0..c)
                .map(|k| (la + (lb - la) * k as f64 / (c - 1) as f64).exp().round() as u64)
                .collect();
            v.dedup();
            Ok(v)
        }
        _ => Err(bad()),
    }
}

/// Which Floquet eigenstate the eigen records use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenstateRule {
    #[default]
    Ground,
    Highest,
    /// Random mode filling seeded by the record seed.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub l_values: Vec<usize>,
    pub g_values: Vec<f64>,
    pub n_disorder: u64,
    pub master_seed: u64,
    pub l_t: usize,
    pub t_grid: TimeGrid,
    pub kinds: Vec<RecordKind>,
    pub out_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_typ: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recenter: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenstate: Option<EigenstateRule>,
}

/// Parses one `key=value` override; the value is read as a TOML value and
/// falls back to a bare string.
fn override_value(raw: &str) -> Result<(String, toml::Value)> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{raw}` is not key=value")))?;
    let key = key.trim().to_string();
    let value = value.trim();
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((key, parsed))
}

impl SweepConfig {
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        for raw in overrides {
            let (k, v) = override_value(raw)?;
            table.insert(k, v);
        }
        let cfg: SweepConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.l_values.is_empty() || self.g_values.is_empty() || self.kinds.is_empty() {
            return fail("l_values, g_values and kinds must be non-empty".into());
        }
        if self.n_disorder < 1 {
            return fail("n_disorder must be >= 1".into());
        }
        if self.l_values.iter().collect::<BTreeSet<_>>().len() != self.l_values.len() {
            return fail("l_values has duplicates".into());
        }
        let gbits: BTreeSet<u64> = self.g_values.iter().map(|g| g.to_bits()).collect();
        if gbits.len() != self.g_values.len() {
            return fail("g_values has duplicates".into());
        }
        if self.kinds.iter().collect::<BTreeSet<_>>().len() != self.kinds.len() {
            return fail("kinds has duplicates".into());
        }
        self.t_grid.resolve()?;
        for &l in &self.l_values {
            for &g in &self.g_values {
                self.params(l, g).validate().map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<u64> {
        self.t_grid.resolve().unwrap_or_default()
    }

    pub fn params(&self, l: usize, g: f64) -> ModelParams {
        let d = ModelParams::default();
        ModelParams {
            l,
            g,
            l_t: self.l_t,
            j_typ: self.j_typ.unwrap_or(d.j_typ),
            sigma_j: self.sigma_j.unwrap_or(d.sigma_j),
            recenter: self.recenter.unwrap_or(d.recenter),
            ..d
        }
    }

    pub fn sigma_j(&self) -> f64 {
        self.sigma_j.unwrap_or(ModelParams::default().sigma_j)
    }

    /// Number of records a complete dataset holds.
    pub fn expected_records(&self) -> u64 {
        (self.l_values.len() * self.g_values.len() * self.kinds.len()) as u64 * self.n_disorder
    }

    /// Hex SHA-256 over every field that affects record content (the output
    /// directory is excluded).
    pub fn hash(&self) -> String {
        let canonical = serde_json::json!({
            "schema": super::record::SCHEMA_VERSION,
            "l_values": self.l_values,
            "g_values": self.g_values.iter().map(|g| format!("{:.16e}", g)).collect::<Vec<_>>(),
            "n_disorder": self.n_disorder,
            "master_seed": self.master_seed,
            "l_t": self.l_t,
            "t_grid": self.times(),
            "kinds": self.kinds,
            "params": {
                "j_typ": format!("{:.16e}", self.params(2, 0.0).j_typ),
                "sigma_j": format!("{:.16e}", self.sigma_j()),
                "recenter": self.params(2, 0.0).recenter,
            },
            "eigenstate": self.eigenstate.unwrap_or_default(),
        });
        let digest = Sha256::digest(canonical.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Disorder seed shared by every `g` and realization at size `l`; the
/// realization index selects the generator stream. Realization `k` therefore
/// has the same couplings at every `g`.
pub fn disorder_seed(master_seed: u64, l: usize) -> u64 {
    splitmix64(splitmix64(master_seed) ^ l as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = r#"
l_values = [6, 8]
g_values = [0.85, 0.9, 0.95]
n_disorder = 10
master_seed = 7
l_t = 10
t_grid = "lin:0:40:4"
kinds = ["trajectory"]
out_dir = "demo"
"#;

    #[test]
    fn parses_and_counts() {
        let c = SweepConfig::from_toml(DEMO, &[]).unwrap();
        assert_eq!(c.expected_records(), 60);
        assert_eq!(c.times(), (0..=40).step_by(4).collect::<Vec<u64>>());
    }

    #[test]
    fn overrides_are_typed() {
        let c = SweepConfig::from_toml(DEMO, &["n_disorder=5".into()]).unwrap();
        assert_eq!(c.expected_records(), 30);
        assert!(SweepConfig::from_toml(DEMO, &["n_disorder=many".into()]).is_err());
        assert!(SweepConfig::from_toml(DEMO, &["colour=3".into()]).is_err());
        let c = SweepConfig::from_toml(DEMO, &["g_values=[0.9]".into(), "out_dir=x/y".into()]).unwrap();
        assert_eq!(c.g_values, vec![0.9]);
        assert_eq!(c.out_dir, PathBuf::from("x/y"));
    }

    #[test]
    fn log_grid() {
        let t = parse_grid_spec("log:108:806:12").unwrap();
        assert_eq!(t.len(), 12);
        assert_eq!((t[0], t[11]), (108, 806));
        assert!(parse_grid_spec("log:0:10:3").is_err());
        assert!(parse_grid_spec("cubic:1:2:3").is_err());
    }

    #[test]
    fn hash_ignores_out_dir() {
        let a = SweepConfig::from_toml(DEMO, &[]).unwrap();
        let b = SweepConfig::from_toml(DEMO, &["out_dir=elsewhere".into()]).unwrap();
        let c = SweepConfig::from_toml(DEMO, &["master_seed=8".into()]).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn rejects_invalid() {
        assert!(SweepConfig::from_toml(DEMO, &["l_values=[]".into()]).is_err());
        assert!(SweepConfig::from_toml(DEMO, &["g_values=[1.5]".into()]).is_err());
        assert!(SweepConfig::from_toml(DEMO, &["kinds=[\"spin\"]".into()]).is_err());
    }
}
