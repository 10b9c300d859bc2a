//! Report files: one CSV row or JSON object per sweep point, plus
//! constellation dumps.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::run::{ConstellationDump, RunReport};

pub const CSV_COLUMNS: [&str; 10] = [
    "sweep_value",
    "ber_avg",
    "ber_l1_p1",
    "ber_l1_p2",
    "ber_l2_p1",
    "ber_l2_p2",
    "stddev",
    "papr_db",
    "bw99_hz",
    "pwr_dbm",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn report_csv(report: &RunReport) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for p in &report.points {
        let b = p.ber_per_constellation;
        let row = [p.sweep_value, p.ber_avg, b[0], b[1], b[2], b[3], p.stddev, p.papr_db, p.bw99_hz, p.pwr_dbm];
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn report_json(report: &RunReport) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| CliError::Parse(e.to_string()))
}

/// `symbol,point,re,im,erased` rows; erased points have empty coordinates.
pub fn constellation_csv(dump: &ConstellationDump) -> String {
    let mut out = String::from("symbol,point,re,im,erased\n");
    for (k, s) in dump.points.iter().enumerate() {
        for (p, x) in s.iter().enumerate() {
            match x {
                Some(x) => writeln!(out, "{k},{p},{},{},0", x.re, x.im),
                None => writeln!(out, "{k},{p},,,1"),
            }
            .expect("writing to a String cannot fail");
        }
    }
    out
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf> {
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// Writes the report (and, when present, the constellation dumps) into
/// `dir`. Returns the written paths.
pub fn emit_report(report: &RunReport, format: Format, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = vec![match format {
        Format::Csv => write(dir.join("report.csv"), &report_csv(report))?,
        Format::Json => write(dir.join("report.json"), &report_json(report)?)?,
    }];
    for (k, dump) in report.constellations.iter().enumerate() {
        written.push(write(dir.join(format!("constellation_{k:03}.csv")), &constellation_csv(dump))?);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Mode;
    use crate::run::PointResult;
    use dpnfdm_core::C64;

    fn point(v: f64) -> PointResult {
        PointResult {
            sweep_value: v,
            ber_avg: 0.01,
            ber_per_constellation: [0.0, 0.01, 0.02, 0.03],
            stddev: 0.001,
            papr_db: 9.5,
            bw99_hz: 12.3e9,
            pwr_dbm: 5.3,
            block_ber: vec![0.01],
            total_bits: 800,
            errors: [0.0, 2.0, 4.0, 6.0],
            erased_points: 0,
            sync_failures: 0,
        }
    }

    fn report() -> RunReport {
        RunReport {
            mode: Mode::BackToBack,
            seed: 1,
            points: vec![point(10.0), point(12.0), point(14.0)],
            round_trip: None,
            constellations: vec![ConstellationDump {
                sweep_value: 10.0,
                points: vec![[Some(C64::new(1.0, -2.0)), None, None, Some(C64::new(0.5, 0.0))]],
            }],
        }
    }

    #[test]
    fn csv_layout() {
        let csv = report_csv(&report());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(lines.len(), 1 + 3);
        assert!(lines[1].starts_with("10,0.01,0,0.01,0.02,0.03,0.001,9.5,12300000000,5.3"));
    }

    #[test]
    fn json_round_trip() {
        let r = report();
        let back: RunReport = serde_json::from_str(&report_json(&r).unwrap()).unwrap();
        assert_eq!(back.points, r.points);
    }

    #[test]
    fn files_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_report(&report(), Format::Csv, dir.path()).unwrap();
        assert_eq!(paths.len(), 2);
        let dump = std::fs::read_to_string(&paths[1]).unwrap();
        assert_eq!(dump.lines().nth(1), Some("0,0,1,-2,0"));
        assert_eq!(dump.lines().nth(2), Some("0,1,,,1"));
        let err = emit_report(&report(), Format::Json, &paths[0].join("sub")).unwrap_err();
        assert!(err.to_string().contains("report.csv"));
    }
}
