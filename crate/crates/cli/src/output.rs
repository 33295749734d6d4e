//! CSV series and JSON summaries. Floats are written with 17 significant
//! digits so that every emitted value round-trips exactly.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rangewalk::estimators::Estimate;
use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;

/// 17 significant digits, positional notation for moderate magnitudes.
pub fn fmt_float(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_float(*v),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Write `header` and `rows` as CSV with LF line endings.
pub fn emit_series(
    dir: &Path,
    name: &str,
    header: &[&str],
    rows: &[Vec<Cell>],
) -> std::io::Result<()> {
    if let Some(r) = rows.iter().find(|r| r.len() != header.len()) {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            format!(
                "{name}: row of {} cells under a {}-column header",
                r.len(),
                header.len()
            ),
        ));
    }
    let mut w = BufWriter::new(File::create(dir.join(name))?);
    w.write_all(header.join(",").as_bytes())?;
    w.write_all(b"\n")?;
    for r in rows {
        let line: Vec<String> = r.iter().map(Cell::render).collect();
        w.write_all(line.join(",").as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// A summary value: an estimate with its standard error, or an exact number.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Reported {
    Estimate { value: f64, stderr: f64 },
    Exact { value: f64, exact: bool },
}

impl From<Estimate> for Reported {
    fn from(e: Estimate) -> Self {
        Reported::Estimate {
            value: e.value,
            stderr: e.stderr,
        }
    }
}

impl Reported {
    pub fn exact(value: f64) -> Self {
        Reported::Exact { value, exact: true }
    }
}

/// The summary written next to the series of every run.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub code_version: String,
    pub master_seed: u64,
    pub config: ExperimentConfig,
    #[serde(flatten)]
    pub values: BTreeMap<String, Reported>,
    pub censored: usize,
    pub details: BTreeMap<String, Value>,
    pub invariant_violations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl ResultRecord {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        ResultRecord {
            experiment: cfg.experiment.name().to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: cfg.seed,
            config: cfg.clone(),
            values: BTreeMap::new(),
            censored: 0,
            details: BTreeMap::new(),
            invariant_violations: Vec::new(),
            wall_clock_seconds: None,
        }
    }

    pub fn value(&mut self, key: &str, v: impl Into<Reported>) {
        self.values.insert(key.to_string(), v.into());
    }

    pub fn detail(&mut self, key: &str, v: impl Serialize) {
        self.details.insert(
            key.to_string(),
            serde_json::to_value(v).expect("serialisable"),
        );
    }

    pub fn write(&self, dir: &Path, name: &str) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(dir.join(name), text)
    }
}
