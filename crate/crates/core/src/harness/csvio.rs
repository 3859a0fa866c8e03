//! CSV output for runs, bound reports and comparisons.
//!
//! Run CSV: `t, l_1..l_K, w_1..w_K, r_1..r_K, ghat` (`ghat` empty when not
//! defined). Bound CSV: `I1, I2, Kset, R, V, bound_name, bound, slack`.
//! Floats use Rust's shortest round-trip formatting, so identical runs give
//! byte-identical files.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::compare::Comparison;
use crate::harness::report::BoundReport;
use crate::harness::run::{RoundRow, RunRecord};

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Csv {
            line,
            message: format!("{kind:?}"),
        },
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

pub fn run_header(experts: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for prefix in ["l", "w", "r"] {
        h.extend((1..=experts).map(|k| format!("{prefix}_{k}")));
    }
    h.push("ghat".into());
    h
}

pub fn write_run<W: Write>(record: &RunRecord, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(run_header(record.experts()))
        .map_err(csv_error)?;
    for r in &record.rows {
        let mut fields = vec![r.t.to_string()];
        fields.extend(r.losses.iter().map(|&x| num(x)));
        fields.extend(r.weights.iter().map(|&x| num(x)));
        fields.extend(r.regret.iter().map(|&x| num(x)));
        fields.push(r.ghat.map(num).unwrap_or_default());
        w.write_record(&fields).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_run_csv(record: &RunRecord, path: &Path) -> Result<()> {
    write_run(record, File::create(path)?)
}

/// Parses a run CSV back into rows (`q_support` is not stored).
pub fn read_run<R: Read>(input: R) -> Result<Vec<RoundRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(csv_error)?.clone();
    let cols = header.len();
    if cols < 5 || (cols - 2) % 3 != 0 {
        return Err(Error::Csv {
            line: 1,
            message: format!("{cols} columns do not fit t, l, w, r, ghat"),
        });
    }
    let k = (cols - 2) / 3;
    let expected = run_header(k);
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Csv {
            line: 1,
            message: format!("unexpected header, wanted {}", expected.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|e| Error::Csv {
                line,
                message: format!("column {}: {e}", &header[i]),
            })
        };
        let t = rec[0].parse::<usize>().map_err(|e| Error::Csv {
            line,
            message: format!("column t: {e}"),
        })?;
        let block = |start: usize| (start..start + k).map(field).collect::<Result<Vec<_>>>();
        let ghat = if rec[cols - 1].is_empty() {
            None
        } else {
            Some(field(cols - 1)?)
        };
        rows.push(RoundRow {
            t,
            losses: block(1)?,
            weights: block(1 + k)?,
            regret: block(1 + 2 * k)?,
            ghat,
            q_support: None,
        });
    }
    Ok(rows)
}

pub fn read_run_csv(path: &Path) -> Result<Vec<RoundRow>> {
    read_run(File::open(path)?)
}

pub const BOUND_HEADER: [&str; 8] = ["I1", "I2", "Kset", "R", "V", "bound_name", "bound", "slack"];

pub fn write_bounds<W: Write>(report: &BoundReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BOUND_HEADER).map_err(csv_error)?;
    for r in &report.rows {
        w.write_record([
            r.interval.start().to_string(),
            r.interval.end().to_string(),
            r.comparator.to_string(),
            num(r.regret),
            num(r.variance),
            r.bound_name.to_string(),
            num(r.bound),
            num(r.slack),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_bound_csv(report: &BoundReport, path: &Path) -> Result<()> {
    write_bounds(report, File::create(path)?)
}

/// `I1, I2, algorithm, seeds, mean_regret, mean_bound`, one line per
/// interval and algorithm.
pub fn write_comparison<W: Write>(table: &Comparison, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "I1",
        "I2",
        "algorithm",
        "seeds",
        "mean_regret",
        "mean_bound",
    ])
    .map_err(csv_error)?;
    for (i, interval) in table.intervals.iter().enumerate() {
        for c in &table.columns {
            w.write_record([
                interval.start().to_string(),
                interval.end().to_string(),
                c.algorithm.to_string(),
                c.seeds.to_string(),
                num(c.mean_regret[i]),
                c.mean_bound[i].map(num).unwrap_or_default(),
            ])
            .map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_comparison_csv(table: &Comparison, path: &Path) -> Result<()> {
    write_comparison(table, File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envsim::scenario;
    use crate::harness::config::{Algorithm, ExperimentConfig};
    use crate::harness::report::evaluate_bounds;
    use crate::harness::run::run;

    fn record(a: Algorithm) -> (ExperimentConfig, RunRecord) {
        let c = ExperimentConfig::new(a, scenario("drift", 3, 25, 6).unwrap());
        let r = run(&c).unwrap();
        (c, r)
    }

    #[test]
    fn run_csv_round_trips() {
        for a in [Algorithm::Hedge, Algorithm::SquintCeJun] {
            let (_, rec) = record(a);
            let mut buf = Vec::new();
            write_run(&rec, &mut buf).unwrap();
            let text = String::from_utf8(buf.clone()).unwrap();
            assert_eq!(text.lines().count(), 25 + 1);
            assert!(text.starts_with("t,l_1,l_2,l_3,w_1,w_2,w_3,r_1,r_2,r_3,ghat\n"));
            let rows = read_run(buf.as_slice()).unwrap();
            let expected: Vec<RoundRow> = rec
                .rows
                .iter()
                .map(|r| RoundRow {
                    q_support: None,
                    ..r.clone()
                })
                .collect();
            assert_eq!(rows, expected);
        }
    }

    #[test]
    fn identical_runs_give_identical_bytes() {
        let (c, a) = record(Algorithm::CbceSquint);
        let b = run(&c).unwrap();
        let (mut x, mut y) = (Vec::new(), Vec::new());
        write_run(&a, &mut x).unwrap();
        write_run(&b, &mut y).unwrap();
        assert_eq!(x, y);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        write_bounds(&evaluate_bounds(&a, &c).unwrap(), &mut x).unwrap();
        write_bounds(&evaluate_bounds(&b, &c).unwrap(), &mut y).unwrap();
        assert_eq!(x, y);
        assert!(String::from_utf8(x)
            .unwrap()
            .starts_with("I1,I2,Kset,R,V,bound_name,bound,slack\n"));
    }

    #[test]
    fn bad_csv_reports_line() {
        let text = "t,l_1,w_1,r_1,ghat\n1,0.5,1,0,\n2,oops,1,0,\n";
        match read_run(text.as_bytes()).unwrap_err() {
            Error::Csv { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("l_1"));
            }
            e => panic!("unexpected {e}"),
        }
        assert!(matches!(
            read_run("t,x,ghat\n".as_bytes()),
            Err(Error::Csv { line: 1, .. })
        ));
    }
}
