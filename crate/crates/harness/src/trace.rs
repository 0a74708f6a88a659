//! Per-round trace CSV.
//!
//! Header (fixed):
//! `t,l_sub,l_est,total,R_t,R_sub_t,beta_t,g_norm,bound_adaptive,bound_offset,bound_gap`.
//! Reals use 17 significant digits (`{:.16e}`), which round-trips `f64`
//! exactly. Cells that do not apply to a run are left empty.

use std::path::Path;

use crate::error::{HarnessError, Result};

pub const TRACE_HEADER: [&str; 11] = [
    "t",
    "l_sub",
    "l_est",
    "total",
    "R_t",
    "R_sub_t",
    "beta_t",
    "g_norm",
    "bound_adaptive",
    "bound_offset",
    "bound_gap",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: usize,
    pub l_sub: f64,
    pub l_est: Option<f64>,
    pub total: Option<f64>,
    pub regret: f64,
    pub subopt_regret: f64,
    pub beta: f64,
    pub g_norm: f64,
    pub bound_adaptive: Option<f64>,
    pub bound_offset: Option<f64>,
    pub bound_gap: Option<f64>,
}

pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn cell(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

impl TraceRow {
    pub fn cells(&self) -> [String; 11] {
        [
            self.t.to_string(),
            format_real(self.l_sub),
            cell(self.l_est),
            cell(self.total),
            format_real(self.regret),
            format_real(self.subopt_regret),
            format_real(self.beta),
            format_real(self.g_norm),
            cell(self.bound_adaptive),
            cell(self.bound_offset),
            cell(self.bound_gap),
        ]
    }
}

pub fn write_trace<W: std::io::Write>(out: W, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for row in rows {
        w.write_record(row.cells())?;
    }
    w.flush().map_err(|e| HarnessError::io("<trace>", e))?;
    Ok(())
}

pub fn write_trace_file(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    write_trace(std::io::BufWriter::new(file), rows)
}

/// Read a trace back; used to compare runs.
pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != TRACE_HEADER {
        return Err(HarnessError::Parse { path: path.display().to_string(), line: 1, message: "unexpected header".into() });
    }
    let parse_err = |line: usize, what: &str| HarnessError::Parse {
        path: path.display().to_string(),
        line,
        message: format!("bad {what}"),
    };
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let real = |j: usize| rec[j].parse::<f64>().map_err(|_| parse_err(line, TRACE_HEADER[j]));
        let opt = |j: usize| -> Result<Option<f64>> { if rec[j].is_empty() { Ok(None) } else { real(j).map(Some) } };
        rows.push(TraceRow {
            t: rec[0].parse().map_err(|_| parse_err(line, "t"))?,
            l_sub: real(1)?,
            l_est: opt(2)?,
            total: opt(3)?,
            regret: real(4)?,
            subopt_regret: real(5)?,
            beta: real(6)?,
            g_norm: real(7)?,
            bound_adaptive: opt(8)?,
            bound_offset: opt(9)?,
            bound_gap: opt(10)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
        assert_eq!(format_real(0.0), "0.0000000000000000e0");
    }

    proptest! {
        #[test]
        fn rows_round_trip_exactly(vals in prop::collection::vec(-1e300f64..1e300, 8), t in 1usize..100000, missing in any::<bool>()) {
            let row = TraceRow {
                t,
                l_sub: vals[0],
                l_est: if missing { None } else { Some(vals[1]) },
                total: Some(vals[2]),
                regret: vals[3],
                subopt_regret: vals[4],
                beta: vals[5],
                g_norm: vals[6],
                bound_adaptive: Some(vals[7]),
                bound_offset: None,
                bound_gap: if missing { Some(vals[1]) } else { None },
            };
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("trace.csv");
            write_trace_file(&path, &[row]).unwrap();
            let back = read_trace(&path).unwrap();
            prop_assert_eq!(back.len(), 1);
            prop_assert_eq!(back[0].cells(), row.cells());
            prop_assert_eq!(back[0].l_sub.to_bits(), row.l_sub.to_bits());
        }
    }
}
