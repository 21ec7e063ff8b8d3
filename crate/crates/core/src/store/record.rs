use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RecordKind {
    #[serde(rename = "trajectory")]
    Trajectory,
    #[serde(rename = "eigen-alpha")]
    EigenAlpha,
    #[serde(rename = "eigen-cx")]
    EigenCx,
}

impl RecordKind {
    pub fn name(self) -> &'static str {
        match self {
            RecordKind::Trajectory => "trajectory",
            RecordKind::EigenAlpha => "eigen-alpha",
            RecordKind::EigenCx => "eigen-cx",
        }
    }
}

impl std::str::FromStr for RecordKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trajectory" => Ok(RecordKind::Trajectory),
            "eigen-alpha" => Ok(RecordKind::EigenAlpha),
            "eigen-cx" => Ok(RecordKind::EigenCx),
            other => Err(Error::Parse(format!("unknown record kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Trajectory { l_t: usize, t: Vec<u64>, o: Vec<f64> },
    Alpha { alpha: f64, energy: f64, branch_warning: bool, degenerate: bool },
    Cx { cx: Vec<f64> },
}

/// Sort and identity key: `(kind, L, g, index)`. `g` is ordered through its
/// bit pattern, which is monotone for the non-negative values allowed.
pub type RecordKey = (RecordKind, usize, u64, u64);

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub l: usize,
    pub g: f64,
    pub index: u64,
    pub seed: u64,
    pub payload: Payload,
}

/// 17 significant digits; parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_list<T>(out: &mut String, key: &str, v: &[T], f: impl Fn(&T) -> String) {
    let _ = write!(out, ",\"{key}\":[");
    for (k, x) in v.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(&f(x));
    }
    out.push(']');
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    schema: u32,
    kind: RecordKind,
    #[serde(rename = "L")]
    l: usize,
    g: f64,
    index: u64,
    seed: u64,
    #[serde(rename = "L_t")]
    l_t: Option<usize>,
    #[serde(rename = "T")]
    t: Option<Vec<u64>>,
    #[serde(rename = "O")]
    o: Option<Vec<f64>>,
    alpha: Option<f64>,
    energy: Option<f64>,
    branch_warning: Option<bool>,
    degenerate: Option<bool>,
    cx: Option<Vec<f64>>,
}

impl ResultRecord {
    pub fn kind(&self) -> RecordKind {
        match self.payload {
            Payload::Trajectory { .. } => RecordKind::Trajectory,
            Payload::Alpha { .. } => RecordKind::EigenAlpha,
            Payload::Cx { .. } => RecordKind::EigenCx,
        }
    }

    pub fn key(&self) -> RecordKey {
        (self.kind(), self.l, self.g.to_bits(), self.index)
    }

    /// One JSON object, fixed key order, no trailing newline.
    pub fn to_line(&self) -> Result<String> {
        let finite = match &self.payload {
            Payload::Trajectory { o, .. } => o.iter().all(|x| x.is_finite()),
            Payload::Alpha { alpha, energy, .. } => alpha.is_finite() && energy.is_finite(),
            Payload::Cx { cx } => cx.iter().all(|x| x.is_finite()),
        };
        if !finite || !self.g.is_finite() {
            return Err(Error::Consistency(format!(
                "non-finite value in {} record L={} g={} index={}",
                self.kind().name(),
                self.l,
                self.g,
                self.index
            )));
        }
        let mut s = String::with_capacity(256);
        let _ = write!(
            s,
            "{{\"schema\":{SCHEMA_VERSION},\"kind\":\"{}\",\"L\":{},\"g\":{},\"index\":{},\"seed\":{}",
            self.kind().name(),
            self.l,
            fmt_f64(self.g),
            self.index,
            self.seed
        );
        match &self.payload {
            Payload::Trajectory { l_t, t, o } => {
                let _ = write!(s, ",\"L_t\":{l_t}");
                push_list(&mut s, "T", t, |x| x.to_string());
                push_list(&mut s, "O", o, |x| fmt_f64(*x));
            }
            Payload::Alpha { alpha, energy, branch_warning, degenerate } => {
                let _ = write!(
                    s,
                    ",\"alpha\":{},\"energy\":{},\"branch_warning\":{branch_warning},\"degenerate\":{degenerate}",
                    fmt_f64(*alpha),
                    fmt_f64(*energy)
                );
            }
            Payload::Cx { cx } => push_list(&mut s, "cx", cx, |x| fmt_f64(*x)),
        }
        s.push('}');
        Ok(s)
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let raw: RawRecord =
            serde_json::from_str(line).map_err(|e| Error::Parse(format!("{e}: {line}")))?;
        if raw.schema != SCHEMA_VERSION {
            return Err(Error::Parse(format!("unsupported schema version {}", raw.schema)));
        }
        let missing = |f: &str| Error::Parse(format!("{} record lacks `{f}`", raw.kind.name()));
        let payload = match raw.kind {
            RecordKind::Trajectory => {
                let t = raw.t.ok_or_else(|| missing("T"))?;
                let o = raw.o.ok_or_else(|| missing("O"))?;
                if t.len() != o.len() {
                    return Err(Error::Parse("T and O lengths differ".into()));
                }
                Payload::Trajectory { l_t: raw.l_t.ok_or_else(|| missing("L_t"))?, t, o }
            }
            RecordKind::EigenAlpha => Payload::Alpha {
                alpha: raw.alpha.ok_or_else(|| missing("alpha"))?,
                energy: raw.energy.ok_or_else(|| missing("energy"))?,
                branch_warning: raw.branch_warning.ok_or_else(|| missing("branch_warning"))?,
                degenerate: raw.degenerate.ok_or_else(|| missing("degenerate"))?,
            },
            RecordKind::EigenCx => Payload::Cx { cx: raw.cx.ok_or_else(|| missing("cx"))? },
        };
        Ok(Self { l: raw.l, g: raw.g, index: raw.index, seed: raw.seed, payload })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples() -> Vec<ResultRecord> {
        vec![
            ResultRecord {
                l: 20,
                g: 0.9,
                index: 3,
                seed: u64::MAX,
                payload: Payload::Trajectory { l_t: 10, t: vec![108, 200], o: vec![0.1, 1.0 / 3.0] },
            },
            ResultRecord {
                l: 8,
                g: 0.1 + 0.2,
                index: 0,
                seed: 1,
                payload: Payload::Alpha { alpha: 2.5, energy: -1e-300, branch_warning: false, degenerate: true },
            },
            ResultRecord { l: 4, g: 0.0, index: 9, seed: 2, payload: Payload::Cx { cx: vec![] } },
        ]
    }

    #[test]
    fn round_trip_is_exact() {
        for r in samples() {
            let line = r.to_line().unwrap();
            let back = ResultRecord::parse_line(&line).unwrap();
            assert_eq!(back, r);
            assert_eq!(back.to_line().unwrap(), line);
        }
    }

    #[test]
    fn key_order_is_fixed() {
        let line = samples()[0].to_line().unwrap();
        assert!(line.starts_with("{\"schema\":1,\"kind\":\"trajectory\",\"L\":20,\"g\":9.0000000000000002e-1,"));
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(ResultRecord::parse_line("{\"schema\":1}").is_err());
        let line = samples()[2].to_line().unwrap().replace("\"cx\"", "\"cy\"");
        assert!(ResultRecord::parse_line(&line).is_err());
        let mut r = samples()[1].clone();
        r.payload = Payload::Alpha { alpha: f64::NAN, energy: 0.0, branch_warning: false, degenerate: false };
        assert!(r.to_line().is_err());
    }
}
