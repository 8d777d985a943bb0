//! CSV persistence for records, clouds and report tables.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which reads back
//! to the identical `f64`.

use std::fs;
use std::path::Path;

use crate::attractor::PointCloud;
use crate::error::{BeamError, Result};
use crate::integrator::TrajectoryRecord;
use crate::model::State;
use crate::spectral::ModalVector;

/// Lossless decimal form used in every CSV.
pub fn fmt_csv(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_cell(s: &str, row: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| BeamError::Io(format!("row {row}: cannot parse '{s}' as a number")))
}

/// Column names of a record file for `m` modes and the given observers.
pub fn record_header(m: usize, observers: &[String]) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=m).map(|j| format!("y_{j}")));
    h.extend((1..=m).map(|j| format!("v_{j}")));
    h.extend(["energy", "dissipation_rate", "dissipated", "norm_H"].map(String::from));
    h.extend(observers.iter().cloned());
    h
}

pub fn write_record(path: &Path, record: &TrajectoryRecord) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(record_header(record.config.modes(), &record.observer_names))?;
    for s in &record.samples {
        let mut row = vec![fmt_csv(s.state.t)];
        row.extend(s.state.y.iter().map(|x| fmt_csv(*x)));
        row.extend(s.state.v.iter().map(|x| fmt_csv(*x)));
        row.extend(
            [s.energy, s.dissipation_rate, s.dissipated, s.phase_norm]
                .iter()
                .chain(&s.observed)
                .map(|x| fmt_csv(*x)),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// States `(t, y, v)` of every row of a record file.
pub fn read_record_states(path: &Path) -> Result<Vec<State>> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let m = header.iter().filter(|h| h.starts_with("y_")).count();
    if m == 0 || header.get(0) != Some("t") {
        return Err(BeamError::Io(format!("{} is not a record file", path.display())));
    }
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        if row.len() < 1 + 2 * m {
            return Err(BeamError::Io(format!("row {}: too few columns", i + 1)));
        }
        let t = parse_cell(&row[0], i + 1)?;
        let y = (1..=m).map(|k| parse_cell(&row[k], i + 1)).collect::<Result<Vec<_>>>()?;
        let v = (m + 1..=2 * m)
            .map(|k| parse_cell(&row[k], i + 1))
            .collect::<Result<Vec<_>>>()?;
        out.push(State::new(ModalVector::from_vec(y), ModalVector::from_vec(v), t));
    }
    Ok(out)
}

/// Last row of a record file, to restart a run from where it stopped.
pub fn read_restart_state(path: &Path) -> Result<State> {
    read_record_states(path)?
        .pop()
        .ok_or_else(|| BeamError::Io(format!("{} has no rows", path.display())))
}

/// One state per row: `y_1..y_m, v_1..v_m`.
pub fn write_cloud(path: &Path, cloud: &PointCloud) -> Result<()> {
    let m = cloud.norm.y_weight.len();
    let mut w = csv::Writer::from_path(path)?;
    let mut h: Vec<String> = (1..=m).map(|j| format!("y_{j}")).collect();
    h.extend((1..=m).map(|j| format!("v_{j}")));
    w.write_record(&h)?;
    for s in &cloud.states {
        let row: Vec<String> = s.y.iter().chain(s.v.iter()).map(|x| fmt_csv(*x)).collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// A cell of a report table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_csv(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        if r.len() != header.len() {
            return Err(BeamError::DimensionMismatch {
                expected: header.len(),
                found: r.len(),
            });
        }
        w.write_record(r.iter().map(Cell::render))?;
    }
    w.flush()?;
    Ok(())
}

/// `key = value` lines, one file per output directory.
pub fn write_metadata(dir: &Path, entries: &[(String, String)], config_echo: &str) -> Result<()> {
    let mut text = String::new();
    for (k, v) in entries {
        text.push_str(&format!("{k} = {v}\n"));
    }
    text.push_str("\n[config]\n");
    text.push_str(config_echo);
    fs::write(dir.join(METADATA_FILE), text)?;
    Ok(())
}

pub const METADATA_FILE: &str = "metadata.txt";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{integrate, IntegrationSettings, Scheme};
    use crate::model::{ConstitutiveFunctions, ModelConfig};
    use crate::norms::DiagonalNorm;
    use crate::spectral::SpectralBasis;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn csv_float_roundtrip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(fmt_csv(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn record_roundtrip_and_restart() {
        let dir = tempfile::tempdir().unwrap();
        let b = Arc::new(SpectralBasis::new(PI, 4).unwrap());
        let c = ModelConfig::unforced(0.2, 1.0, 1.0, b, ConstitutiveFunctions::named("wk-cubic").unwrap()).unwrap();
        let z0 = State::at_rest(ModalVector::from_vec(vec![0.3, 0.1, 0.0, -0.05]));
        let rec = integrate(&c, &z0, &IntegrationSettings::new(0.5, 0.01, 7, Scheme::Rk4), &[]).unwrap();
        let p = dir.path().join("record.csv");
        write_record(&p, &rec).unwrap();
        let back = read_record_states(&p).unwrap();
        assert_eq!(back.len(), rec.len());
        for (a, b) in back.iter().zip(rec.states()) {
            assert_eq!(a, b);
        }
        assert_eq!(&read_restart_state(&p).unwrap(), rec.last_state());
    }

    #[test]
    fn cloud_and_table_files() {
        let dir = tempfile::tempdir().unwrap();
        let cloud = PointCloud::new(
            vec![State::zero(2), State::at_rest(ModalVector::unit(2, 1))],
            DiagonalNorm { y_weight: vec![1.0; 2], v_weight: vec![1.0; 2] },
        )
        .unwrap();
        write_cloud(&dir.path().join("c.csv"), &cloud).unwrap();
        let text = fs::read_to_string(dir.path().join("c.csv")).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(write_table(&dir.path().join("t.csv"), &["a", "b"], &[vec![Cell::from(1.0)]]).is_err());
        assert!(read_record_states(&dir.path().join("c.csv")).is_err());
    }
}
