//! Result rows as CSV.

use std::path::Path;

use crate::error::{Error, Result};
use crate::optimize::SolverKind;

use super::{ExperimentKind, ResultRow};

pub const CSV_HEADER: &str = "experiment,sweep_value,b0_hz,seed,solver,utility,avg_rate_bps,unserved,iterations,wall_ms";

/// Renders rows as CSV text. Floats use the shortest representation that
/// parses back to the same value, so output is byte-stable.
pub fn write_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.experiment, r.sweep_value, r.b0_hz, r.seed, r.solver, r.utility, r.avg_rate_bps, r.unserved, r.iterations, r.wall_ms
        ));
    }
    out
}

pub fn emit_csv(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_csv(rows)).map_err(|e| Error::io(path, e))
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == CSV_HEADER => {}
        _ => return Err(Error::Parse { line: 1, message: format!("expected header {CSV_HEADER:?}") }),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let err = |message: String| Error::Parse { line: line_no, message };
        let f: Vec<&str> = line.trim_end().split(',').collect();
        if f.len() != 10 {
            return Err(err(format!("expected 10 fields, got {}", f.len())));
        }
        fn num<T: std::str::FromStr>(s: &str, name: &str) -> std::result::Result<T, String> {
            s.parse().map_err(|_| format!("bad {name} {s:?}"))
        }
        let row = (|| -> std::result::Result<ResultRow, String> {
            Ok(ResultRow {
                experiment: ExperimentKind::parse(f[0]).map_err(|e| e.to_string())?,
                sweep_value: num(f[1], "sweep_value")?,
                b0_hz: num(f[2], "b0_hz")?,
                seed: num(f[3], "seed")?,
                solver: SolverKind::parse(f[4]).map_err(|e| e.to_string())?,
                utility: num(f[5], "utility")?,
                avg_rate_bps: num(f[6], "avg_rate_bps")?,
                unserved: num(f[7], "unserved")?,
                iterations: num(f[8], "iterations")?,
                wall_ms: num(f[9], "wall_ms")?,
            })
        })()
        .map_err(err)?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ResultRow {
        ResultRow {
            experiment: ExperimentKind::HapPowerSweep,
            sweep_value: 40.0,
            b0_hz: 4e6,
            seed: u64::MAX,
            solver: SolverKind::LowComplexity,
            utility: 123_456_789.123_456_79,
            avg_rate_bps: 0.1 + 0.2,
            unserved: 3,
            iterations: 7,
            wall_ms: 0.0,
        }
    }

    #[test]
    fn empty_rows_give_header_only() {
        assert_eq!(write_csv(&[]), format!("{CSV_HEADER}\n"));
        assert!(parse_csv(&write_csv(&[])).unwrap().is_empty());
    }

    #[test]
    fn row_round_trips() {
        let text = write_csv(&[row()]);
        assert_eq!(parse_csv(&text).unwrap(), vec![row()]);
        let line = text.lines().nth(1).unwrap();
        assert!(line.starts_with("happower,40,4000000,18446744073709551615,lowcomplexity,"), "{line}");
    }

    #[test]
    fn error_rows_round_trip() {
        let bad = ResultRow { utility: f64::NAN, avg_rate_bps: f64::NAN, ..row() };
        let back = parse_csv(&write_csv(&[bad])).unwrap()[0];
        assert!(back.is_error() && back.avg_rate_bps.is_nan());
        assert_eq!((back.seed, back.unserved), (bad.seed, bad.unserved));
    }

    #[test]
    fn malformed_input_reports_line() {
        assert!(matches!(parse_csv("nope\n"), Err(Error::Parse { line: 1, .. })));
        let text = format!("{CSV_HEADER}\nusers,1,2,3,approx,1,1,0,1,0\nusers,1,2\n");
        assert!(matches!(parse_csv(&text), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn unwritable_path_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("out.csv");
        match emit_csv(&[], &path) {
            Err(Error::Io { path: p, .. }) => assert_eq!(p, path),
            other => panic!("{other:?}"),
        }
    }
}
