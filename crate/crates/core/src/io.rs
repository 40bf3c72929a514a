//! CSV and metadata output, plus parsers for round-tripping the files.
//!
//! Series files carry exactly the columns
//! `t,P_numeric,P_perturbative,I_numeric,I_model,S_A,S_B`; sweep files
//! `c,inv_c_squared,T_target,valid`. Floats are printed with 12 significant
//! digits so repeated runs with the same seeds emit byte-identical files.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::{GridSpec, RateFit, SweepResult, SweepRow, TimeSeries};

pub const SERIES_HEADER: &str = "t,P_numeric,P_perturbative,I_numeric,I_model,S_A,S_B";
pub const SWEEP_HEADER: &str = "c,inv_c_squared,T_target,valid";

/// 12 significant digits, scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn series_to_csv(series: &TimeSeries) -> String {
    let mut out = String::with_capacity(series.len() * 120 + 72);
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for j in 0..series.len() {
        let row = [
            series.t[j],
            series.p_numeric[j],
            series.p_perturbative[j],
            series.i_numeric[j],
            series.i_model[j],
            series.s_a[j],
            series.s_b[j],
        ];
        let cells: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn parse_float(cell: &str, line: usize) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("line {line}: bad float {cell:?}")))
}

/// Parse a series CSV back into memory. The companion metadata is stored
/// separately, so `meta` comes back `None`.
pub fn parse_series_csv(text: &str) -> Result<TimeSeries> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == SERIES_HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "bad series header: {:?}",
                other.map(|(_, h)| h)
            )))
        }
    }
    let mut series = TimeSeries {
        t: Vec::new(),
        p_numeric: Vec::new(),
        p_perturbative: Vec::new(),
        i_numeric: Vec::new(),
        i_model: Vec::new(),
        s_a: Vec::new(),
        s_b: Vec::new(),
        meta: None,
    };
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 7 {
            return Err(Error::Config(format!(
                "line {}: expected 7 columns, got {}",
                idx + 1,
                cells.len()
            )));
        }
        series.t.push(parse_float(cells[0], idx + 1)?);
        series.p_numeric.push(parse_float(cells[1], idx + 1)?);
        series.p_perturbative.push(parse_float(cells[2], idx + 1)?);
        series.i_numeric.push(parse_float(cells[3], idx + 1)?);
        series.i_model.push(parse_float(cells[4], idx + 1)?);
        series.s_a.push(parse_float(cells[5], idx + 1)?);
        series.s_b.push(parse_float(cells[6], idx + 1)?);
    }
    Ok(series)
}

pub fn sweep_to_csv(sweep: &SweepResult) -> String {
    let mut out = String::with_capacity(sweep.rows.len() * 60 + 40);
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for row in &sweep.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_float(row.c),
            format_float(row.inv_c_squared),
            format_float(row.t_target),
            row.valid
        ));
    }
    out
}

/// Parse a sweep CSV back into memory; the fit lives in the metadata file,
/// so it comes back `None` and the target as NaN.
pub fn parse_sweep_csv(text: &str) -> Result<SweepResult> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == SWEEP_HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "bad sweep header: {:?}",
                other.map(|(_, h)| h)
            )))
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 4 {
            return Err(Error::Config(format!(
                "line {}: expected 4 columns, got {}",
                idx + 1,
                cells.len()
            )));
        }
        let valid = match cells[3].trim() {
            "true" => true,
            "false" => false,
            other => {
                return Err(Error::Config(format!(
                    "line {}: bad valid flag {other:?}",
                    idx + 1
                )))
            }
        };
        rows.push(SweepRow {
            c: parse_float(cells[0], idx + 1)?,
            inv_c_squared: parse_float(cells[1], idx + 1)?,
            t_target: parse_float(cells[2], idx + 1)?,
            valid,
        });
    }
    Ok(SweepResult {
        target: f64::NAN,
        rows,
        fit: None,
    })
}

/// Companion record for every run: seeds, configuration, and fit results.
/// Deliberately timestamp-free so reruns are byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub command: String,
    pub model_source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    pub seed_a: u64,
    pub seed_b: u64,
    pub couplings: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<RateFit>,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub extras: serde_json::Map<String, serde_json::Value>,
}

impl RunMetadata {
    pub fn new(command: &str, model_source: &str) -> Self {
        Self {
            command: command.to_string(),
            model_source: model_source.to_string(),
            master_seed: None,
            seed_a: 0,
            seed_b: 0,
            couplings: Vec::new(),
            grid: None,
            target: None,
            fit: None,
            extras: serde_json::Map::new(),
        }
    }
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_series_csv(path: &Path, series: &TimeSeries) -> Result<()> {
    std::fs::write(path, series_to_csv(series))?;
    Ok(())
}

pub fn write_sweep_csv(path: &Path, sweep: &SweepResult) -> Result<()> {
    std::fs::write(path, sweep_to_csv(sweep))?;
    Ok(())
}

pub fn write_metadata<T: Serialize>(path: &Path, meta: &T) -> Result<()> {
    std::fs::write(path, to_json_pretty(meta)?)?;
    Ok(())
}
