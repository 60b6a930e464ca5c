//! CSV and JSON formats.
//!
//! | file | columns |
//! |------|---------|
//! | volatility path | `t,sigma` |
//! | fan chart | `path_id,q,ecdf` (`path_id = unconditional` for the mean row) |
//! | power | `path_id,c,rejection_rate` |
//! | oracle | `replicate,v1,m1,discrete_v1` (`discrete_v1` may be empty) |
//! | oracle summary | `metric,value` |
//!
//! Floats use Rust's shortest round-trip formatting, so parsing a written
//! file reproduces the table bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use volboot_core::montecarlo::{FanChartTable, PowerTable};
use volboot_core::{Statistic, VolatilityPath};

use crate::error::{AppError, Result};
use crate::harness::{OracleRun, OracleSample, OracleSummary};

pub const UNCONDITIONAL: &str = "unconditional";

fn writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| AppError::Parse(e.to_string()))
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| AppError::Parse(format!("not a number: {s:?}")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| AppError::Parse(format!("not an index: {s:?}")))
}

fn records(bytes: &[u8], header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_reader(bytes);
    let found: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(AppError::Parse(format!("expected header {header:?}, found {found:?}")));
    }
    r.records().map(|rec| rec.map_err(AppError::from)).collect()
}

pub fn volpath_csv(path: &VolatilityPath) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(["t", "sigma"])?;
    for (t, s) in path.sigmas().iter().enumerate() {
        w.write_record([(t + 1).to_string(), num(*s)])?;
    }
    finish(w)
}

pub fn parse_volpath_csv(bytes: &[u8]) -> Result<Vec<f64>> {
    records(bytes, &["t", "sigma"])?
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            if parse_usize(&rec[0])? != i + 1 {
                return Err(AppError::Parse(format!("row {} out of order", i + 1)));
            }
            parse_f64(&rec[1])
        })
        .collect()
}

pub fn fanchart_csv(table: &FanChartTable) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(["path_id", "q", "ecdf"])?;
    for (p, row) in table.per_path_cdf.iter().enumerate() {
        let id = (p + 1).to_string();
        for (q, v) in table.q_grid.iter().zip(row) {
            w.write_record([id.as_str(), &num(*q), &num(*v)])?;
        }
    }
    for (q, v) in table.q_grid.iter().zip(&table.unconditional_cdf) {
        w.write_record([UNCONDITIONAL, &num(*q), &num(*v)])?;
    }
    finish(w)
}

/// Rows grouped by `path_id` in file order; the grid is read from the
/// unconditional rows.
pub fn parse_fanchart_csv(bytes: &[u8], stat: Statistic) -> Result<FanChartTable> {
    let mut q_grid = Vec::new();
    let mut unconditional = Vec::new();
    let mut rows: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    for rec in records(bytes, &["path_id", "q", "ecdf"])? {
        let (q, v) = (parse_f64(&rec[1])?, parse_f64(&rec[2])?);
        if &rec[0] == UNCONDITIONAL {
            q_grid.push(q);
            unconditional.push(v);
            continue;
        }
        let id = parse_usize(&rec[0])?;
        match rows.last_mut() {
            Some((last, cells)) if *last == id => cells.push((q, v)),
            _ => rows.push((id, vec![(q, v)])),
        }
    }
    let mut per_path_cdf = Vec::with_capacity(rows.len());
    for (i, (id, cells)) in rows.into_iter().enumerate() {
        if id != i + 1 {
            return Err(AppError::Parse(format!("path {id} out of order")));
        }
        if cells.len() != q_grid.len() || cells.iter().zip(&q_grid).any(|((q, _), g)| q != g) {
            return Err(AppError::Parse(format!("path {id} does not match the q grid")));
        }
        per_path_cdf.push(cells.into_iter().map(|(_, v)| v).collect());
    }
    Ok(FanChartTable {
        stat,
        q_grid,
        per_path_cdf,
        unconditional_cdf: unconditional,
    })
}

pub fn power_csv(table: &PowerTable) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(["path_id", "c", "rejection_rate"])?;
    for (p, row) in table.per_path_rejection.iter().enumerate() {
        let id = (p + 1).to_string();
        for (c, v) in table.c_grid.iter().zip(row) {
            w.write_record([id.as_str(), &num(*c), &num(*v)])?;
        }
    }
    finish(w)
}

pub fn parse_power_csv(bytes: &[u8], stat: Statistic, alpha: f64) -> Result<PowerTable> {
    let mut rows: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    for rec in records(bytes, &["path_id", "c", "rejection_rate"])? {
        let id = parse_usize(&rec[0])?;
        let cell = (parse_f64(&rec[1])?, parse_f64(&rec[2])?);
        match rows.last_mut() {
            Some((last, cells)) if *last == id => cells.push(cell),
            _ => rows.push((id, vec![cell])),
        }
    }
    let c_grid: Vec<f64> = rows.first().map(|(_, c)| c.iter().map(|x| x.0).collect()).unwrap_or_default();
    let mut per_path_rejection = Vec::with_capacity(rows.len());
    for (i, (id, cells)) in rows.into_iter().enumerate() {
        if id != i + 1 || cells.len() != c_grid.len() || cells.iter().zip(&c_grid).any(|(a, c)| a.0 != *c) {
            return Err(AppError::Parse(format!("path {id} is out of order or off the c grid")));
        }
        per_path_rejection.push(cells.into_iter().map(|x| x.1).collect());
    }
    Ok(PowerTable {
        stat,
        c_grid,
        alpha,
        per_path_rejection,
    })
}

pub fn oracle_csv(run: &OracleRun) -> Result<Vec<u8>> {
    let mut w = writer();
    w.write_record(["replicate", "v1", "m1", "discrete_v1"])?;
    for (i, s) in run.samples.iter().enumerate() {
        let d = run.discrete_v1.get(i).map(|v| num(*v)).unwrap_or_default();
        w.write_record([s.replicate.to_string(), num(s.v1), num(s.m1), d])?;
    }
    finish(w)
}

pub fn parse_oracle_csv(bytes: &[u8]) -> Result<(Vec<OracleSample>, Vec<f64>)> {
    let mut samples = Vec::new();
    let mut discrete = Vec::new();
    for rec in records(bytes, &["replicate", "v1", "m1", "discrete_v1"])? {
        samples.push(OracleSample {
            replicate: parse_usize(&rec[0])?,
            v1: parse_f64(&rec[1])?,
            m1: parse_f64(&rec[2])?,
        });
        if !rec[3].is_empty() {
            discrete.push(parse_f64(&rec[3])?);
        }
    }
    Ok((samples, discrete))
}

pub fn oracle_summary_csv(s: &OracleSummary) -> Result<Vec<u8>> {
    let opt = |v: Option<String>| v.unwrap_or_default();
    let mut w = writer();
    w.write_record(["metric", "value"])?;
    for (k, v) in [
        ("reps", s.reps.to_string()),
        ("steps", s.steps.to_string()),
        ("mean_v1", num(s.mean_v1)),
        ("var_v1", num(s.var_v1)),
        ("mean_m1", num(s.mean_m1)),
        ("var_m1", num(s.var_m1)),
        ("discrete_n", opt(s.discrete_n.map(|n| n.to_string()))),
        ("ks_discrete", opt(s.ks_discrete.map(num))),
    ] {
        w.write_record([k, v.as_str()])?;
    }
    finish(w)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    Ok(serde_json::from_slice(&bytes)?)
}

/// Files staged in memory and written together. If any write fails, the
/// files already written are removed again.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.files.push((path, bytes));
    }

    pub fn paths(&self) -> Vec<PathBuf> {
        self.files.iter().map(|(p, _)| p.clone()).collect()
    }

    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut written = Vec::with_capacity(self.files.len());
        for (path, bytes) in self.files {
            if let Err(e) = fs::write(&path, &bytes) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(AppError::io(path, e));
            }
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use volboot_core::montecarlo::default_q_grid;
    use volboot_core::volatility::{GarchSpec, VolSpec};

    fn table(p_values: &[Vec<f64>]) -> FanChartTable {
        FanChartTable::from_p_values(Statistic::LocationStudentized, &default_q_grid(), p_values)
    }

    #[test]
    fn fanchart_layout() {
        let t = table(&[vec![0.05, 0.5], vec![0.9]]);
        let text = String::from_utf8(fanchart_csv(&t).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "path_id,q,ecdf");
        assert_eq!(lines[1], "1,0.01,0");
        assert_eq!(lines[5], "1,0.05,0.5");
        assert_eq!(lines.len(), 1 + 3 * 99);
        assert!(lines[1 + 2 * 99].starts_with("unconditional,0.01,"));
    }

    #[test]
    fn volpath_round_trip() {
        let sigmas = vec![1.0, 0.1 + 0.2, 1e-300, 7.25];
        let path = VolatilityPath::new(sigmas.clone(), VolSpec::Garch(GarchSpec::monte_carlo_default())).unwrap();
        assert_eq!(parse_volpath_csv(&volpath_csv(&path).unwrap()).unwrap(), sigmas);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_power_csv(b"path,c,rate\n", Statistic::Location, 0.05).is_err());
        assert!(parse_power_csv(b"path_id,c,rejection_rate\n2,0,0.1\n", Statistic::Location, 0.05).is_err());
        assert!(parse_fanchart_csv(b"path_id,q,ecdf\n1,0.5,x\n", Statistic::Location).is_err());
    }

    #[test]
    fn oracle_round_trip() {
        let summary = OracleSummary {
            reps: 2,
            steps: 100,
            mean_v1: 1.0,
            var_v1: 0.5,
            mean_m1: 0.0,
            var_m1: 1.0,
            discrete_n: None,
            ks_discrete: None,
        };
        let run = OracleRun {
            samples: vec![
                OracleSample { replicate: 1, v1: 0.3, m1: -1.25 },
                OracleSample { replicate: 2, v1: 1.0 / 3.0, m1: 2.0 },
            ],
            discrete_v1: vec![],
            summary: summary.clone(),
        };
        let (s, d) = parse_oracle_csv(&oracle_csv(&run).unwrap()).unwrap();
        assert_eq!(s, run.samples);
        assert!(d.is_empty());
        let text = String::from_utf8(oracle_summary_csv(&summary).unwrap()).unwrap();
        assert!(text.contains("ks_discrete,\n"));
    }

    #[test]
    fn outputs_roll_back_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Outputs::default();
        out.add(dir.path().join("a.csv"), b"x".to_vec());
        out.add(dir.path().join("missing/b.csv"), b"y".to_vec());
        assert!(out.commit().is_err());
        assert!(!dir.path().join("a.csv").exists());
    }

    proptest! {
        #[test]
        fn fanchart_round_trip(rows in proptest::collection::vec(proptest::collection::vec(0.0f64..=1.0, 1..20), 1..6)) {
            let t = table(&rows);
            let back = parse_fanchart_csv(&fanchart_csv(&t).unwrap(), t.stat).unwrap();
            prop_assert_eq!(back, t);
        }

        #[test]
        fn power_round_trip(rows in proptest::collection::vec(proptest::collection::vec(0.0f64..=1.0, 3), 1..6)) {
            let t = PowerTable {
                stat: Statistic::DickeyFullerRatio,
                c_grid: vec![0.0, 2.5, 1.0 / 3.0 + 10.0],
                alpha: 0.05,
                per_path_rejection: rows,
            };
            let back = parse_power_csv(&power_csv(&t).unwrap(), t.stat, t.alpha).unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
