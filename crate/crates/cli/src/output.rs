//! Report and archive serialization: line-delimited JSON with 17
//! significant digits per number, so files round-trip losslessly and diff
//! cleanly. The wall-clock timestamp lives only in the header line; all
//! record lines are deterministic for a fixed config and seed.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use nibb_core::VerificationReport;

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "\"nan\"".into()
    } else if x > 0.0 {
        "\"inf\"".into()
    } else {
        "\"-inf\"".into()
    }
}

pub fn report_line(r: &VerificationReport) -> String {
    format!(
        r#"{{"check":"{}","measured":{},"expected":{},"tol_or_stderr":{},"status":"{}"}}"#,
        r.check_name,
        fmt_f64(r.measured),
        fmt_f64(r.expected),
        fmt_f64(r.uncertainty_or_tolerance),
        r.status.as_str()
    )
}

pub fn report_csv_line(r: &VerificationReport) -> String {
    format!(
        "{},{},{},{}",
        r.check_name,
        fmt_f64(r.measured),
        fmt_f64(r.expected),
        r.status.as_str()
    )
}

#[derive(Debug, Clone)]
pub struct ArchiveRecord {
    pub index: usize,
    pub lambda: Vec<f64>,
    pub overlaps: Option<Vec<f64>>,
}

pub fn archive_line(rec: &ArchiveRecord) -> String {
    let mut line = String::new();
    write!(line, r#"{{"index":{},"lambda":["#, rec.index).unwrap();
    for (i, v) in rec.lambda.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str(&fmt_f64(*v));
    }
    line.push(']');
    if let Some(overlaps) = &rec.overlaps {
        line.push_str(r#","overlaps":["#);
        for (i, v) in overlaps.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&fmt_f64(*v));
        }
        line.push(']');
    }
    line.push('}');
    line
}

pub fn header_line(suite: &str, seed: u64) -> String {
    let unix_time = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!(
        r#"{{"type":"header","suite":"{suite}","version":"{}","seed":{seed},"unix_time":{unix_time}}}"#,
        env!("CARGO_PKG_VERSION")
    )
}

pub struct SuiteFiles {
    pub report_path: PathBuf,
    pub csv_path: Option<PathBuf>,
}

pub fn write_suite_output(
    out_dir: &Path,
    suite: &str,
    seed: u64,
    reports: &[VerificationReport],
    archive: &[ArchiveRecord],
    csv: bool,
) -> anyhow::Result<SuiteFiles> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let report_path = out_dir.join(format!("{suite}.jsonl"));
    let mut file = fs::File::create(&report_path)
        .with_context(|| format!("creating {}", report_path.display()))?;
    writeln!(file, "{}", header_line(suite, seed))?;
    for r in reports {
        writeln!(file, "{}", report_line(r))?;
    }
    for rec in archive {
        writeln!(file, "{}", archive_line(rec))?;
    }

    let csv_path = if csv && !reports.is_empty() {
        let path = out_dir.join(format!("{suite}.csv"));
        let mut file =
            fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        writeln!(file, "check,measured,expected,status")?;
        for r in reports {
            writeln!(file, "{}", report_csv_line(r))?;
        }
        Some(path)
    } else {
        None
    };

    Ok(SuiteFiles {
        report_path,
        csv_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_carry_17_significant_digits() {
        let s = fmt_f64(std::f64::consts::PI);
        assert_eq!(s, "3.1415926535897931e0");
        let parsed: f64 = s.parse().unwrap();
        assert_eq!(parsed, std::f64::consts::PI);
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
    }

    #[test]
    fn archive_lines_are_valid_json() {
        let rec = ArchiveRecord {
            index: 3,
            lambda: vec![0.5, -1.25],
            overlaps: Some(vec![0.25, 0.75]),
        };
        let line = archive_line(&rec);
        let value: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(value["index"], 3);
        assert_eq!(value["lambda"].as_array().unwrap().len(), 2);
        assert_eq!(value["overlaps"].as_array().unwrap().len(), 2);
    }
}
