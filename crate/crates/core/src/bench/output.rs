//! Sweep output files.
//!
//! `records.csv` holds one row per (kind, size, trial, solver) in run
//! order with columns
//! `matrix,size,solver,trial,matrix_seed,rhs_seed,program_seed,status,relative_error,error`.
//! It is a pure function of the sweep config. Wall-clock times live in
//! `timings.csv` so the records file stays byte-reproducible.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::plot;
use super::stats::{aggregate, GroupStats};
use super::{showcase, SweepConfig, SweepRecord, TrialSeeds};
use crate::cost::{cost_reports, CostConfig};
use crate::error::{Error, Result};
use crate::matgen::MatrixKind;
use crate::solver::SolverKind;

pub const RECORDS_CSV: &str = "records.csv";
pub const TIMINGS_CSV: &str = "timings.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
struct RecordRow {
    matrix: MatrixKind,
    size: usize,
    solver: SolverKind,
    trial: usize,
    matrix_seed: u64,
    rhs_seed: u64,
    program_seed: u64,
    status: String,
    relative_error: Option<f64>,
    error: String,
}

#[derive(Debug, Serialize)]
struct TimingRow {
    matrix: MatrixKind,
    size: usize,
    solver: SolverKind,
    trial: usize,
    wall_time_s: f64,
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Parse(format!("{other:?}")),
        }
    } else {
        Error::Parse(e.to_string())
    }
}

/// Writes `records.csv` content. An empty slice yields the header only.
pub fn write_records_csv<W: Write>(records: &[SweepRecord], w: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record([
        "matrix",
        "size",
        "solver",
        "trial",
        "matrix_seed",
        "rhs_seed",
        "program_seed",
        "status",
        "relative_error",
        "error",
    ])
    .map_err(csv_err)?;
    for r in records {
        wtr.serialize(RecordRow {
            matrix: r.matrix,
            size: r.size,
            solver: r.solver,
            trial: r.trial,
            matrix_seed: r.seeds.matrix,
            rhs_seed: r.seeds.rhs,
            program_seed: r.seeds.program,
            status: if r.ok() { "ok" } else { "failed" }.to_string(),
            relative_error: r.relative_error,
            error: r.error.clone(),
        })
        .map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Parses `records.csv`; wall times are not stored there and read as zero.
pub fn read_records_csv<R: Read>(r: R) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize::<RecordRow>()
        .map(|row| {
            let row = row.map_err(csv_err)?;
            Ok(SweepRecord {
                matrix: row.matrix,
                size: row.size,
                solver: row.solver,
                trial: row.trial,
                seeds: TrialSeeds { matrix: row.matrix_seed, rhs: row.rhs_seed, program: row.program_seed },
                relative_error: row.relative_error,
                error: row.error,
                wall_time_s: 0.0,
            })
        })
        .collect()
}

pub fn write_timings_csv<W: Write>(records: &[SweepRecord], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in records {
        wtr.serialize(TimingRow {
            matrix: r.matrix,
            size: r.size,
            solver: r.solver,
            trial: r.trial,
            wall_time_s: r.wall_time_s,
        })
        .map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(stats: &[GroupStats], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for s in stats {
        wtr.serialize(s).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn current() -> Self {
        Environment {
            package: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialEntry {
    pub matrix: MatrixKind,
    pub size: usize,
    pub trial: usize,
    pub seeds: TrialSeeds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: SweepConfig,
    pub environment: Environment,
    pub records: usize,
    pub failed: usize,
    pub files: Vec<String>,
    pub trials: Vec<TrialEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitOptions {
    pub plots: bool,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions { plots: true }
    }
}

/// Writes records, timings, summary and manifest into `cfg.out_dir`, plus
/// the error-vs-size, overlay and cost plots when enabled. Returns the
/// written paths.
pub fn emit(cfg: &SweepConfig, records: &[SweepRecord], opts: EmitOptions) -> Result<Vec<PathBuf>> {
    let dir = &cfg.out_dir;
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: Vec<u8>| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, bytes)?;
        written.push(path);
        Ok(())
    };

    let mut buf = Vec::new();
    write_records_csv(records, &mut buf)?;
    put(RECORDS_CSV, buf)?;
    let mut buf = Vec::new();
    write_timings_csv(records, &mut buf)?;
    put(TIMINGS_CSV, buf)?;
    let stats = aggregate(records);
    let mut buf = Vec::new();
    write_summary_csv(&stats, &mut buf)?;
    put(SUMMARY_CSV, buf)?;

    let mut files = [RECORDS_CSV, TIMINGS_CSV, SUMMARY_CSV, MANIFEST_JSON].map(String::from).to_vec();
    if opts.plots {
        for &kind in &cfg.kinds {
            let name = format!("error_vs_size_{}.svg", kind.as_str());
            put(&name, plot::error_vs_size(&stats, kind).into_bytes())?;
            files.push(name);
        }
        let (&kind, &n) = (&cfg.kinds[0], cfg.sizes.iter().max().expect("validated nonempty"));
        if let Ok(sc) = showcase(cfg, kind, n, 0) {
            put("overlay.svg", plot::overlay(&sc).into_bytes())?;
            files.push("overlay.svg".into());
        }
        put("cost.svg", plot::cost_bars(&cost_reports(n, None, &CostConfig::calibrated())).into_bytes())?;
        files.push("cost.svg".into());
    }

    let mut trials: Vec<TrialEntry> = Vec::new();
    for r in records {
        if trials.last().is_none_or(|t| (t.matrix, t.size, t.trial) != (r.matrix, r.size, r.trial)) {
            trials.push(TrialEntry { matrix: r.matrix, size: r.size, trial: r.trial, seeds: r.seeds });
        }
    }
    let manifest = Manifest {
        config: cfg.clone(),
        environment: Environment::current(),
        records: records.len(),
        failed: records.iter().filter(|r| !r.ok()).count(),
        files,
        trials,
    };
    let json = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::Parse(e.to_string()))?;
    put(MANIFEST_JSON, json)?;
    Ok(written)
}

/// Reads a records CSV from disk.
pub fn load_records(path: &Path) -> Result<Vec<SweepRecord>> {
    read_records_csv(fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::run_sweep;

    #[test]
    fn empty_records_header_only() {
        let mut buf = Vec::new();
        write_records_csv(&[], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "matrix,size,solver,trial,matrix_seed,rhs_seed,program_seed,status,relative_error,error\n");
        assert!(read_records_csv(s.as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn csv_round_trip() {
        let cfg = SweepConfig { sizes: vec![4], trials: 2, array_max: Some(2), ..SweepConfig::default() };
        let mut recs = run_sweep(&cfg).unwrap();
        assert!(recs.iter().any(|r| !r.ok()));
        let mut buf = Vec::new();
        write_records_csv(&recs, &mut buf).unwrap();
        for r in &mut recs {
            r.wall_time_s = 0.0;
        }
        assert_eq!(read_records_csv(buf.as_slice()).unwrap(), recs);
    }

    #[test]
    fn emit_writes_files() {
        let dir = std::env::temp_dir().join(format!("blockamc-emit-{}", std::process::id()));
        let cfg = SweepConfig { sizes: vec![4, 8], trials: 2, out_dir: dir.clone(), ..SweepConfig::default() };
        let recs = run_sweep(&cfg).unwrap();
        let files = emit(&cfg, &recs, EmitOptions::default()).unwrap();
        for f in &files {
            assert!(f.exists(), "{}", f.display());
        }
        assert!(dir.join("overlay.svg").exists());
        let m: Manifest = serde_json::from_slice(&fs::read(dir.join(MANIFEST_JSON)).unwrap()).unwrap();
        assert_eq!(m.trials.len(), 2 * 2 * 2);
        fs::remove_dir_all(dir).unwrap();
    }
}
