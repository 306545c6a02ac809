//! Output files: `series.csv`, `report.json` and `profile_t<k>.csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenarios::report::{ExperimentReport, ProfileSnapshot, SeriesRow};

use super::config::RunConfig;

/// Environment variable that overrides the configured output directory.
pub const OUT_ENV: &str = "CH_TAILS_OUT";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnvironmentStamp {
    pub crate_name: &'static str,
    pub version: &'static str,
    pub os: &'static str,
    pub arch: &'static str,
}

impl EnvironmentStamp {
    pub fn current() -> Self {
        Self {
            crate_name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
        }
    }
}

/// `explicit`, else `$CH_TAILS_OUT`, else the configured directory.
pub fn output_dir(cfg: &RunConfig, explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match std::env::var_os(OUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(&cfg.output.directory),
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io { path: path.display().to_string(), message: e.to_string() }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Values are printed with round-trip precision; missing quantities as `NaN`.
pub fn series_csv(rows: &[SeriesRow]) -> String {
    let mut s = String::from(SeriesRow::HEADER);
    s.push('\n');
    for r in rows {
        let line: Vec<String> = r.values().iter().map(|v| format!("{v:?}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

/// Inverse of [`series_csv`].
pub fn parse_series_csv(text: &str) -> Result<Vec<SeriesRow>> {
    let bad = |message: String| Error::Parameter { key: "series.csv".into(), message };
    let mut lines = text.lines();
    if lines.next() != Some(SeriesRow::HEADER) {
        return Err(bad("unexpected header".into()));
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let v: Vec<f64> = line
                .split(',')
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(format!("row {k}: {e}")))?;
            let v: [f64; 16] = v.try_into().map_err(|v: Vec<f64>| bad(format!("row {k}: {} columns", v.len())))?;
            Ok(SeriesRow {
                t: v[0],
                h1: v[1],
                m0: v[2],
                e_plus: v[3],
                e_minus: v[4],
                de_plus_pred: v[5],
                c_plus: v[6],
                c_minus: v[7],
                slope_right: v[8],
                slope_left: v[9],
                supp_left: v[10],
                supp_right: v[11],
                eta_a: v[12],
                eta_b: v[13],
                wsup_u: v[14],
                wsup_ux: v[15],
            })
        })
        .collect()
}

pub fn profile_csv(p: &ProfileSnapshot) -> String {
    let mut s = String::from("x,u,h\n");
    for ((x, u), h) in p.x.iter().zip(&p.u).zip(&p.h) {
        let _ = writeln!(s, "{x:?},{u:?},{h:?}");
    }
    s
}

/// Report with the environment stamp merged in. Non-finite numbers become
/// `null`.
pub fn report_json(report: &ExperimentReport) -> String {
    let mut v = serde_json::to_value(report).expect("report serializes");
    v["environment"] = serde_json::to_value(EnvironmentStamp::current()).expect("stamp serializes");
    serde_json::to_string_pretty(&v).expect("value prints")
}

/// Writes the formats requested by `cfg.output.formats` into `dir`.
pub fn write_outputs(report: &ExperimentReport, cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    if cfg.output.wants("csv") {
        let p = dir.join("series.csv");
        write_file(&p, &series_csv(&report.rows))?;
        written.push(p);
    }
    if cfg.output.wants("json") {
        let p = dir.join("report.json");
        write_file(&p, &report_json(report))?;
        written.push(p);
    }
    if cfg.output.wants("profiles") {
        for (k, snap) in report.profiles.iter().enumerate() {
            let p = dir.join(format!("profile_t{k}.csv"));
            write_file(&p, &profile_csv(snap))?;
            written.push(p);
        }
    }
    Ok(written)
}

/// Any serializable value, pretty JSON with the environment stamp.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    let mut v = serde_json::to_value(value).map_err(|e| io_err(path, e))?;
    v["environment"] = serde_json::to_value(EnvironmentStamp::current()).expect("stamp serializes");
    write_file(path, &serde_json::to_string_pretty(&v).expect("value prints"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64) -> SeriesRow {
        let mut v = [f64::NAN; 16];
        for (k, x) in v.iter_mut().enumerate().take(8) {
            *x = t + k as f64 / 3.0;
        }
        SeriesRow {
            t,
            h1: v[1],
            m0: v[2],
            e_plus: v[3],
            e_minus: v[4],
            de_plus_pred: v[5],
            c_plus: v[6],
            c_minus: -v[7],
            slope_right: f64::NAN,
            slope_left: f64::NAN,
            supp_left: -1e-300,
            supp_right: 1e300,
            eta_a: f64::NAN,
            eta_b: f64::NAN,
            wsup_u: 0.1,
            wsup_ux: 0.2,
        }
    }

    #[test]
    fn series_round_trips_exactly() {
        let rows = vec![row(0.0), row(0.1), row(1.0 / 3.0)];
        let text = series_csv(&rows);
        let back = parse_series_csv(&text).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in rows.iter().zip(&back) {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
            }
        }
        assert!(text.starts_with("t,H1,M0,E_plus"));
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(parse_series_csv("t,u\n1,2\n").is_err());
    }

    #[test]
    fn report_has_environment() {
        let rep = ExperimentReport::new("persistence", serde_json::json!({}));
        let v: serde_json::Value = serde_json::from_str(&report_json(&rep)).unwrap();
        assert_eq!(v["environment"]["crate_name"], "ch-tails");
        assert_eq!(v["status"], "pass");
    }

    #[test]
    fn writes_requested_formats_only() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::reference(crate::cli_io::config::Experiment::Persistence);
        cfg.output.formats = vec!["csv".into()];
        let mut rep = ExperimentReport::new("persistence", serde_json::json!({}));
        rep.rows = vec![row(0.0)];
        let written = write_outputs(&rep, &cfg, dir.path()).unwrap();
        assert_eq!(written, vec![dir.path().join("series.csv")]);
    }
}
