//! Evaluation reports and per-case tables.
//!
//! A case row holds the reference volume (`volume_manual_mm3`), the tool
//! volume (`volume_tool_mm3`), the Hausdorff distance in voxels, the Dice
//! score in percent and an optional interaction time in minutes. Summaries
//! report volumes in cm³.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use growcut_core::metrics::{summarize, EvaluationReport, HausdorffMode, SummaryStats};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] growcut_core::Error),
}

pub type Result<T> = std::result::Result<T, ReportError>;

pub fn mode_name(mode: HausdorffMode) -> &'static str {
    match mode {
        HausdorffMode::FullSet => "full-set",
        HausdorffMode::Boundary => "boundary",
    }
}

/// JSON form of an [`EvaluationReport`]; `a` is the evaluated mask and `b`
/// the reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportDoc {
    pub dsc: f64,
    pub hausdorff_voxel: f64,
    pub volume_a_mm3: f64,
    pub volume_b_mm3: f64,
    pub hausdorff_mode: &'static str,
}

impl ReportDoc {
    pub fn new(r: &EvaluationReport, mode: HausdorffMode) -> Self {
        Self {
            dsc: r.dsc,
            hausdorff_voxel: r.hausdorff_voxel,
            volume_a_mm3: r.volume_a_mm3,
            volume_b_mm3: r.volume_b_mm3,
            hausdorff_mode: mode_name(mode),
        }
    }
}

pub fn report_json(r: &EvaluationReport, mode: HausdorffMode) -> String {
    serde_json::to_string_pretty(&ReportDoc::new(r, mode)).expect("report serializes")
}

/// Columns in table order.
type StatFn = fn(&SummaryStats) -> Option<f64>;

pub const CASE_COLUMNS: [&str; 5] = [
    "volume_manual_mm3",
    "volume_tool_mm3",
    "hausdorff_voxel",
    "dsc_percent",
    "time_min",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    pub volume_manual_mm3: f64,
    pub volume_tool_mm3: f64,
    pub hausdorff_voxel: f64,
    pub dsc_percent: f64,
    pub time_min: Option<f64>,
}

impl CaseRow {
    pub fn from_report(r: &EvaluationReport, time_min: Option<f64>) -> Self {
        Self {
            volume_manual_mm3: r.volume_b_mm3,
            volume_tool_mm3: r.volume_a_mm3,
            hausdorff_voxel: r.hausdorff_voxel,
            dsc_percent: 100.0 * r.dsc,
            time_min,
        }
    }
}

pub fn read_cases<R: Read>(reader: R) -> Result<Vec<CaseRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    for col in &CASE_COLUMNS[..4] {
        if !headers.iter().any(|h| h == *col) {
            return Err(ReportError::Invalid(format!("case table has no '{col}' column")));
        }
    }
    let rows = rdr.deserialize().collect::<std::result::Result<Vec<CaseRow>, _>>()?;
    Ok(rows)
}

pub fn write_cases<W: Write>(writer: W, rows: &[CaseRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Column summaries; `time_min` is present only when every row has a time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseSummary {
    pub volume_manual_cm3: SummaryStats,
    pub volume_tool_cm3: SummaryStats,
    pub hausdorff_voxel: SummaryStats,
    pub dsc_percent: SummaryStats,
    pub time_min: Option<SummaryStats>,
}

pub fn summarize_cases(rows: &[CaseRow]) -> Result<CaseSummary> {
    let col = |f: fn(&CaseRow) -> f64| summarize(&rows.iter().map(f).collect::<Vec<_>>());
    let times: Option<Vec<f64>> = rows.iter().map(|r| r.time_min).collect();
    Ok(CaseSummary {
        volume_manual_cm3: col(|r| r.volume_manual_mm3 / 1000.0)?,
        volume_tool_cm3: col(|r| r.volume_tool_mm3 / 1000.0)?,
        hausdorff_voxel: col(|r| r.hausdorff_voxel)?,
        dsc_percent: col(|r| r.dsc_percent)?,
        time_min: match times {
            Some(t) if !t.is_empty() => Some(summarize(&t)?),
            _ => None,
        },
    })
}

impl CaseSummary {
    fn columns(&self) -> [(&'static str, Option<&SummaryStats>); 5] {
        [
            ("volume_manual_cm3", Some(&self.volume_manual_cm3)),
            ("volume_tool_cm3", Some(&self.volume_tool_cm3)),
            ("hausdorff_voxel", Some(&self.hausdorff_voxel)),
            ("dsc_percent", Some(&self.dsc_percent)),
            ("time_min", self.time_min.as_ref()),
        ]
    }

    /// Rows `minimum`, `maximum`, `mean`, `sample_std`; empty cells where a
    /// statistic is undefined.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let cols = self.columns();
        let mut header = vec!["statistic"];
        header.extend(cols.iter().map(|c| c.0));
        w.write_record(&header)?;
        let stats: [(&str, StatFn); 4] = [
            ("minimum", |s| Some(s.minimum)),
            ("maximum", |s| Some(s.maximum)),
            ("mean", |s| Some(s.mean)),
            ("sample_std", |s| s.sample_std),
        ];
        for (name, get) in stats {
            let mut rec = vec![name.to_string()];
            rec.extend(
                cols.iter()
                    .map(|c| c.1.and_then(get).map(|v| v.to_string()).unwrap_or_default()),
            );
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let stat = |s: &SummaryStats| {
            serde_json::json!({
                "n": s.n,
                "minimum": s.minimum,
                "maximum": s.maximum,
                "mean": s.mean,
                "sample_std": s.sample_std,
            })
        };
        let mut map = serde_json::Map::new();
        for (name, s) in self.columns() {
            map.insert(name.into(), s.map_or(serde_json::Value::Null, stat));
        }
        serde_json::Value::Object(map)
    }

    /// One `name: mean ± std (min, max)` line per column.
    pub fn display_lines(&self) -> Vec<String> {
        self.columns()
            .iter()
            .filter_map(|(name, s)| {
                s.map(|s| match s.sample_std {
                    Some(sd) => format!(
                        "{name}: {:.2} ± {:.2} (min {}, max {})",
                        s.mean,
                        sd,
                        trim_noise(s.minimum),
                        trim_noise(s.maximum)
                    ),
                    None => format!("{name}: {:.2}", s.mean),
                })
            })
            .collect()
    }
}

/// Drops unit-conversion noise below 1e-9 so 59.2163 does not print as
/// 59.216300000000004.
fn trim_noise(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cases_round_trip_with_optional_time() {
        let rows = vec![
            CaseRow {
                volume_manual_mm3: 1000.0,
                volume_tool_mm3: 1200.5,
                hausdorff_voxel: 3.0,
                dsc_percent: 91.0,
                time_min: None,
            },
            CaseRow {
                volume_manual_mm3: 2000.0,
                volume_tool_mm3: 1800.0,
                hausdorff_voxel: 5.0,
                dsc_percent: 80.0,
                time_min: Some(4.0),
            },
        ];
        let mut buf = Vec::new();
        write_cases(&mut buf, &rows).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with(&CASE_COLUMNS.join(",")));
        assert_eq!(read_cases(&buf[..]).unwrap(), rows);
        let s = summarize_cases(&rows).unwrap();
        assert!(s.time_min.is_none());
        assert_eq!(s.volume_manual_cm3.mean, 1.5);
    }

    #[test]
    fn missing_column_is_rejected() {
        assert!(read_cases("volume_manual_mm3,volume_tool_mm3\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn single_row_summary_has_no_std() {
        let rows = [CaseRow {
            volume_manual_mm3: 1.0,
            volume_tool_mm3: 1.0,
            hausdorff_voxel: 0.0,
            dsc_percent: 100.0,
            time_min: Some(1.0),
        }];
        let s = summarize_cases(&rows).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().last().unwrap(), "sample_std,,,,,");
    }
}
