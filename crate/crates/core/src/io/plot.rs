//! Whitespace-delimited plot data with a JSON sidecar. Nothing is rendered.

use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::store::{
    fmt_f64, ResultStore, GAME_GRID_COLUMNS, GAME_GRID_FILE, GAP_COLUMNS, GAP_FILE, SWEEP_FILE,
};
use crate::error::{KacError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum PlotKind {
    PressureVsGamma,
    PayoffSurface,
    GapVsBeta,
}

impl PlotKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlotKind::PressureVsGamma => "pressure_vs_gamma",
            PlotKind::PayoffSurface => "payoff_surface",
            PlotKind::GapVsBeta => "gap_vs_beta",
        }
    }
}

/// Paths of the emitted data file and its sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotFiles {
    pub data: PathBuf,
    pub sidecar: PathBuf,
    pub rows: usize,
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or(f64::NAN)
}

/// Writes `plot_<kind>.dat` and `plot_<kind>.json` into the store directory.
pub fn emit_plot_data(kind: PlotKind, store: &ResultStore) -> Result<PlotFiles> {
    let (columns, lines, source, note): (Vec<&str>, Vec<String>, &str, &str) = match kind {
        PlotKind::PressureVsGamma => {
            let recs = store.read_sweep()?;
            let lines = recs
                .iter()
                .map(|r| {
                    format!(
                        "{} {} {} {} {} {} {}",
                        r.l,
                        fmt_f64(r.beta),
                        fmt_f64(r.gamma_minus),
                        fmt_f64(r.gamma_plus),
                        fmt_f64(r.pressure),
                        fmt_f64(r.density),
                        r.config_hash
                    )
                })
                .collect();
            (
                vec!["L", "beta", "gamma_minus", "gamma_plus", "pressure", "density", "config_hash"],
                lines,
                SWEEP_FILE,
                "one row per sweep record, in record order",
            )
        }
        PlotKind::PayoffSurface => {
            let rows = store.read_table(GAME_GRID_FILE, &GAME_GRID_COLUMNS)?;
            // sort by (hash, beta, c_minus, c_plus) so axes are monotone
            let mut parsed: Vec<(String, f64, f64, f64, f64)> = rows
                .iter()
                .map(|r| (r[0].clone(), num(&r[1]), num(&r[2]), num(&r[3]), num(&r[4])))
                .collect();
            parsed.sort_by(|a, b| {
                (&a.0, a.1, a.2, a.3)
                    .partial_cmp(&(&b.0, b.1, b.2, b.3))
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            let mut lines = Vec::with_capacity(parsed.len());
            let mut prev: Option<(String, f64, f64)> = None;
            for (h, beta, cm, cp, v) in &parsed {
                let block = (h.clone(), *beta, *cm);
                if prev.as_ref().is_some_and(|p| *p != block) {
                    // blank line between scan lines of the grid
                    lines.push(String::new());
                }
                prev = Some(block);
                lines.push(format!(
                    "{} {} {} {}",
                    fmt_f64(*beta),
                    fmt_f64(*cm),
                    fmt_f64(*cp),
                    fmt_f64(*v)
                ));
            }
            (
                vec!["beta", "c_minus", "c_plus", "payoff"],
                lines,
                GAME_GRID_FILE,
                "blocks of constant c_minus separated by blank lines; c_plus increases within a block",
            )
        }
        PlotKind::GapVsBeta => {
            let rows = store.read_table(GAP_FILE, &GAP_COLUMNS)?;
            let mut parsed: Vec<(f64, &Vec<String>)> = rows.iter().map(|r| (num(&r[1]), r)).collect();
            parsed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
            let lines = parsed
                .iter()
                .map(|(_, r)| format!("{} {} {} {} {}", r[1], r[2], r[3], r[4], r[6]))
                .collect();
            (
                vec!["beta", "c_minus", "c_plus", "residual", "converged"],
                lines,
                GAP_FILE,
                "gap-equation solutions sorted by beta",
            )
        }
    };
    let rows = lines.iter().filter(|l| !l.is_empty()).count();
    if rows == 0 {
        return Err(KacError::MissingRecords(format!(
            "{} needs records in {source}",
            kind.as_str()
        )));
    }
    let data = store.path(&format!("plot_{}.dat", kind.as_str()));
    let sidecar = store.path(&format!("plot_{}.json", kind.as_str()));
    let mut text = format!("# {}\n", columns.join(" "));
    for l in &lines {
        text.push_str(l);
        text.push('\n');
    }
    fs::write(&data, text).map_err(|e| KacError::Io(format!("{}: {e}", data.display())))?;
    store.write_json(
        &format!("plot_{}.json", kind.as_str()),
        &json!({
            "kind": kind.as_str(),
            "data_file": data.file_name().map(|n| n.to_string_lossy().to_string()),
            "source": source,
            "columns": columns,
            "rows": rows,
            "layout": note,
        }),
    )?;
    Ok(PlotFiles { data, sidecar, rows })
}
