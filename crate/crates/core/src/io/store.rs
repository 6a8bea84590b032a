//! Append-only result store: CSV tables with fixed headers plus JSON manifests.

use std::collections::BTreeSet;
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::{KacError, Result};
use crate::lattice::Boundary;
use crate::sweep::SweepRecord;

pub const SWEEP_COLUMNS: [&str; 10] = [
    "d",
    "L",
    "beta",
    "gamma_minus",
    "gamma_plus",
    "boundary",
    "pressure",
    "density",
    "runtime_ms",
    "config_hash",
];

pub const SWEEP_FILE: &str = "sweep.csv";
pub const PRESSURE_ED_FILE: &str = "pressure_ed.csv";
pub const PRESSURE_MF_FILE: &str = "pressure_mf.csv";
pub const GAME_GRID_FILE: &str = "game_grid.csv";
pub const GAP_FILE: &str = "gap.csv";
pub const GAME_FILE: &str = "game.json";
pub const SWEEP_MANIFEST: &str = "sweep_manifest.json";

pub const GAME_GRID_COLUMNS: [&str; 5] = ["config_hash", "beta", "c_minus", "c_plus", "payoff"];
pub const GAP_COLUMNS: [&str; 7] = [
    "config_hash",
    "beta",
    "c_minus",
    "c_plus",
    "residual",
    "iterations",
    "converged",
];
pub const PRESSURE_MF_COLUMNS: [&str; 7] = [
    "config_hash",
    "beta",
    "c_minus",
    "c_plus",
    "pressure",
    "density",
    "pair_amplitude",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> KacError {
    KacError::Io(format!("{}: {e}", path.display()))
}

fn parse_f64(s: &str, path: &Path) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| io_err(path, format!("bad number `{s}`")))
}

fn parse_usize(s: &str, path: &Path) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| io_err(path, format!("bad integer `{s}`")))
}

pub fn sweep_row(r: &SweepRecord) -> Vec<String> {
    vec![
        r.d.to_string(),
        r.l.to_string(),
        fmt_f64(r.beta),
        fmt_f64(r.gamma_minus),
        fmt_f64(r.gamma_plus),
        r.boundary.as_str().to_string(),
        fmt_f64(r.pressure),
        fmt_f64(r.density),
        r.runtime_ms.to_string(),
        r.config_hash.clone(),
    ]
}

fn sweep_from_row(row: &[String], path: &Path) -> Result<SweepRecord> {
    let boundary = match row[5].as_str() {
        "open" => Boundary::Open,
        "periodic" => Boundary::Periodic,
        other => return Err(io_err(path, format!("bad boundary `{other}`"))),
    };
    Ok(SweepRecord {
        d: parse_usize(&row[0], path)?,
        l: parse_usize(&row[1], path)?,
        beta: parse_f64(&row[2], path)?,
        gamma_minus: parse_f64(&row[3], path)?,
        gamma_plus: parse_f64(&row[4], path)?,
        boundary,
        pressure: parse_f64(&row[6], path)?,
        density: parse_f64(&row[7], path)?,
        runtime_ms: parse_usize(&row[8], path)? as u64,
        config_hash: row[9].clone(),
    })
}

/// Key columns of the sweep table: everything except the results and the timing.
fn sweep_key(row: &[String]) -> Vec<String> {
    [0, 1, 2, 3, 4, 5, 9].iter().map(|i| row[*i].clone()).collect()
}

/// A directory of result tables. One writer at a time.
#[derive(Debug, Clone)]
pub struct ResultStore {
    dir: PathBuf,
}

impl ResultStore {
    /// Opens the store, creating the directory if needed.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        Ok(ResultStore { dir })
    }

    /// Opens an existing store without creating anything.
    pub fn existing(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        if !dir.is_dir() {
            return Err(KacError::MissingRecords(format!(
                "no result store at {}",
                dir.display()
            )));
        }
        Ok(ResultStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    /// Rows of a table after checking its header. A missing file reads as empty.
    pub fn read_table(&self, file: &str, columns: &[&str]) -> Result<Vec<Vec<String>>> {
        let path = self.path(file);
        if !path.exists() {
            return Ok(Vec::new());
        }
        let mut rdr = csv::Reader::from_path(&path).map_err(|e| io_err(&path, e))?;
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| io_err(&path, e))?
            .iter()
            .map(str::to_string)
            .collect();
        if header != columns {
            return Err(io_err(
                &path,
                format!("header {header:?} differs from {columns:?}"),
            ));
        }
        rdr.records()
            .map(|r| {
                r.map(|rec| rec.iter().map(str::to_string).collect())
                    .map_err(|e| io_err(&path, e))
            })
            .collect()
    }

    /// Appends rows whose key is not yet present. Returns the number written.
    pub fn append_rows(
        &self,
        file: &str,
        columns: &[&str],
        rows: &[Vec<String>],
        key: impl Fn(&[String]) -> Vec<String>,
    ) -> Result<usize> {
        let existing = self.read_table(file, columns)?;
        let mut seen: BTreeSet<Vec<String>> = existing.iter().map(|r| key(r)).collect();
        let path = self.path(file);
        let fresh = !path.exists();
        let handle = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| io_err(&path, e))?;
        let mut w = csv::Writer::from_writer(handle);
        if fresh {
            w.write_record(columns).map_err(|e| io_err(&path, e))?;
        }
        let mut written = 0;
        for row in rows {
            if row.len() != columns.len() {
                return Err(io_err(&path, "row length differs from header"));
            }
            if seen.insert(key(row)) {
                w.write_record(row).map_err(|e| io_err(&path, e))?;
                written += 1;
            }
        }
        w.flush().map_err(|e| io_err(&path, e))?;
        Ok(written)
    }

    pub fn read_sweep(&self) -> Result<Vec<SweepRecord>> {
        self.read_records(SWEEP_FILE)
    }

    pub fn read_records(&self, file: &str) -> Result<Vec<SweepRecord>> {
        let path = self.path(file);
        self.read_table(file, &SWEEP_COLUMNS)?
            .iter()
            .map(|r| sweep_from_row(r, &path))
            .collect()
    }

    pub fn append_records(&self, file: &str, records: &[SweepRecord]) -> Result<usize> {
        let rows: Vec<Vec<String>> = records.iter().map(sweep_row).collect();
        self.append_rows(file, &SWEEP_COLUMNS, &rows, sweep_key)
    }

    pub fn read_json(&self, file: &str) -> Result<Option<Value>> {
        let path = self.path(file);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| io_err(&path, e))
    }

    pub fn write_json(&self, file: &str, value: &Value) -> Result<()> {
        let path = self.path(file);
        let text = serde_json::to_string_pretty(value).map_err(|e| io_err(&path, e))?;
        // write then rename so readers never see a half-written manifest
        let tmp = self.path(&format!(".{file}.tmp"));
        fs::write(&tmp, text + "\n").map_err(|e| io_err(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| io_err(&path, e))
    }

    /// Merges `entry` under `runs.<hash>` of a manifest file.
    pub fn record_run(&self, file: &str, hash: &str, entry: Value) -> Result<()> {
        let mut manifest = self
            .read_json(file)?
            .unwrap_or_else(|| json!({ "runs": {} }));
        let runs = manifest
            .get_mut("runs")
            .and_then(Value::as_object_mut)
            .ok_or_else(|| io_err(&self.path(file), "manifest has no `runs` object"))?;
        runs.insert(hash.to_string(), entry);
        self.write_json(file, &manifest)
    }

    /// Every config hash of the sweep table is described in the manifest.
    pub fn check_sweep_manifest(&self) -> Result<()> {
        let records = self.read_sweep()?;
        let manifest = self.read_json(SWEEP_MANIFEST)?;
        let runs = manifest
            .as_ref()
            .and_then(|m| m.get("runs"))
            .and_then(Value::as_object);
        for r in &records {
            if !runs.is_some_and(|m| m.contains_key(&r.config_hash)) {
                return Err(KacError::MissingRecords(format!(
                    "config hash {} is missing from the sweep manifest",
                    r.config_hash
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(l: usize, p: f64) -> SweepRecord {
        SweepRecord {
            d: 1,
            l,
            beta: 1.0,
            gamma_minus: 0.1,
            gamma_plus: 0.2,
            boundary: Boundary::Periodic,
            pressure: p,
            density: 1.0 / 3.0,
            runtime_ms: 7,
            config_hash: "abc".into(),
        }
    }

    #[test]
    fn records_round_trip_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let store = ResultStore::open(dir.path()).unwrap();
        let recs = vec![record(0, std::f64::consts::PI), record(1, 0.1 + 0.2)];
        store.append_records(SWEEP_FILE, &recs).unwrap();
        assert_eq!(store.read_sweep().unwrap(), recs);
    }

    #[test]
    fn rerun_does_not_duplicate() {
        let dir = tempfile::tempdir().unwrap();
        let store = ResultStore::open(dir.path()).unwrap();
        let recs = vec![record(0, 1.0)];
        assert_eq!(store.append_records(SWEEP_FILE, &recs).unwrap(), 1);
        let mut again = recs.clone();
        again[0].runtime_ms = 99;
        assert_eq!(store.append_records(SWEEP_FILE, &again).unwrap(), 0);
        assert_eq!(store.read_sweep().unwrap().len(), 1);
    }

    #[test]
    fn header_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let store = ResultStore::open(dir.path()).unwrap();
        store.append_records(SWEEP_FILE, &[record(0, 1.0)]).unwrap();
        let text = fs::read_to_string(store.path(SWEEP_FILE)).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "d,L,beta,gamma_minus,gamma_plus,boundary,pressure,density,runtime_ms,config_hash"
        );
    }

    #[test]
    fn manifest_tracks_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let store = ResultStore::open(dir.path()).unwrap();
        store.append_records(SWEEP_FILE, &[record(0, 1.0)]).unwrap();
        assert!(store.check_sweep_manifest().is_err());
        store.record_run(SWEEP_MANIFEST, "abc", json!({})).unwrap();
        store.check_sweep_manifest().unwrap();
    }
}
