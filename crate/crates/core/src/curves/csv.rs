//! Curve history CSV: `date,tenor_months,rate_cc`, one row per node.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use super::{CurveHistory, SpotCurve};
use crate::error::{FundingError, Result};

const HEADER: [&str; 3] = ["date", "tenor_months", "rate_cc"];

pub fn read_history_csv(path: impl AsRef<Path>) -> Result<CurveHistory> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| FundingError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_history_csv(file, &path.display().to_string())
}

/// Parses a curve history; `source_name` labels errors.
pub fn parse_history_csv<R: Read>(input: R, source_name: &str) -> Result<CurveHistory> {
    let err = |line: Option<u64>, message: String| FundingError::Parse {
        source_name: source_name.to_string(),
        line,
        message,
    };

    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader.headers().map_err(|e| err(None, e.to_string()))?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(err(Some(1), "file is empty".into()));
    }
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(err(
            Some(1),
            format!(
                "expected header `{}`, found `{}`",
                HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut by_date: BTreeMap<NaiveDate, BTreeMap<u32, f64>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line());
            err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line());
        let field = |i: usize| record.get(i).unwrap_or_default();

        let date = NaiveDate::parse_from_str(field(0), "%Y-%m-%d")
            .map_err(|e| err(line, format!("bad date `{}`: {e}", field(0))))?;
        let months: u32 = field(1)
            .parse()
            .map_err(|e| err(line, format!("bad tenor_months `{}`: {e}", field(1))))?;
        if months == 0 {
            return Err(err(line, "tenor_months must be positive".into()));
        }
        let rate: f64 = field(2)
            .parse()
            .map_err(|e| err(line, format!("bad rate_cc `{}`: {e}", field(2))))?;
        if !rate.is_finite() {
            return Err(err(line, format!("rate_cc `{}` is not finite", field(2))));
        }
        if by_date.entry(date).or_default().insert(months, rate).is_some() {
            return Err(err(line, format!("duplicate node {date} / {months}M")));
        }
    }
    if by_date.is_empty() {
        return Err(err(None, "no data rows".into()));
    }

    let mut grid: Option<Vec<u32>> = None;
    let mut curves = Vec::with_capacity(by_date.len());
    for (date, nodes) in by_date {
        let months: Vec<u32> = nodes.keys().copied().collect();
        match &grid {
            None => grid = Some(months.clone()),
            Some(g) if *g != months => {
                return Err(err(None, format!("curve {date} has tenors {months:?}, expected {g:?}")));
            }
            Some(_) => {}
        }
        let tenors = months.iter().map(|&m| f64::from(m) / 12.0).collect();
        let rates = nodes.values().copied().collect();
        curves.push(SpotCurve::new(date, tenors, rates).map_err(|e| err(None, e.to_string()))?);
    }
    CurveHistory::new(curves).map_err(|e| err(None, e.to_string()))
}

/// Writes a history in the ingest format, rates to 10 decimal places.
pub fn write_history_csv<W: Write>(out: W, history: &CurveHistory) -> Result<()> {
    let io = |e: csv::Error| FundingError::Io {
        path: "<history csv>".into(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER).map_err(io)?;
    for curve in history.entries() {
        let date = curve.as_of().format("%Y-%m-%d").to_string();
        for (tenor, rate) in curve.nodes() {
            let months = (tenor * 12.0).round() as u32;
            w.write_record([date.clone(), months.to_string(), format!("{rate:.10}")])
                .map_err(io)?;
        }
    }
    w.flush().map_err(|source| FundingError::Io {
        path: "<history csv>".into(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::ZeroCurve;

    const SAMPLE: &str = "date,tenor_months,rate_cc
2001-01-05,1,0.0500
2001-01-05,12,0.0600
2001-01-05,3,0.0525
2001-01-12,1,0.0490
2001-01-12,3,0.0515
2001-01-12,12,0.0590
";

    #[test]
    fn parses_and_sorts_nodes() {
        let h = parse_history_csv(SAMPLE.as_bytes(), "sample").unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.tenors(), &[1.0 / 12.0, 0.25, 1.0]);
        assert_eq!(h.entries()[1].short_rate(), 0.049);
    }

    #[test]
    fn empty_file_names_the_source() {
        let e = parse_history_csv("".as_bytes(), "us.csv").unwrap_err();
        assert!(matches!(e, FundingError::Parse { .. }));
        assert!(e.to_string().contains("us.csv"), "{e}");
        let e = parse_history_csv("date,tenor_months,rate_cc\n".as_bytes(), "us.csv").unwrap_err();
        assert!(e.to_string().contains("us.csv"), "{e}");
    }

    #[test]
    fn bad_rows_carry_line_numbers() {
        let bad = "date,tenor_months,rate_cc\n2001-01-05,1,0.05\n2001-01-05,x,0.05\n";
        let e = parse_history_csv(bad.as_bytes(), "bp.csv").unwrap_err();
        match e {
            FundingError::Parse { line, .. } => assert_eq!(line, Some(3)),
            other => panic!("unexpected {other}"),
        }
        let dup = "date,tenor_months,rate_cc\n2001-01-05,1,0.05\n2001-01-05,1,0.06\n";
        assert!(parse_history_csv(dup.as_bytes(), "x").is_err());
        let header = "day,tenor,rate\n2001-01-05,1,0.05\n";
        assert!(parse_history_csv(header.as_bytes(), "x").is_err());
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let bad = "date,tenor_months,rate_cc\n2001-01-05,1,0.05\n2001-01-05,12,0.05\n2001-01-12,1,0.05\n";
        assert!(parse_history_csv(bad.as_bytes(), "x").is_err());
    }
}
