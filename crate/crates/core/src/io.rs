//! CSV output: energy/mass series, field snapshots and strength diagnostics.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::ExperimentConfig;
use crate::legendre::gauss_rule;
use crate::sbp::OperatorSet;
use crate::semidisc::SolutionField;
use crate::time::{DiagnosticRow, SimulationOutput, StepRecord};

pub const ENERGY_HEADER: [&str; 7] = ["step", "time", "energy", "mass", "eps_min", "eps_max", "clamped_elements"];
pub const SNAPSHOT_HEADER: [&str; 4] = ["element", "node", "x", "u"];
pub const DIAGNOSTICS_HEADER: [&str; 9] = ["step", "time", "element", "A", "B", "C", "discriminant", "epsilon", "clamped"];

pub const ENERGY_FILE: &str = "energy.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const CONFIG_FILE: &str = "config.txt";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn real(v: f64) -> String {
    format!("{v:e}")
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<(), IoError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let csv_err = |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_energy_csv(path: &Path, records: &[StepRecord]) -> Result<(), IoError> {
    write_rows(
        path,
        &ENERGY_HEADER,
        records.iter().map(|r| {
            vec![
                r.step.to_string(),
                real(r.time),
                real(r.energy),
                real(r.mass),
                real(r.eps_min),
                real(r.eps_max),
                r.clamped_elements.to_string(),
            ]
        }),
    )
}

/// Point values for export: the nodal values themselves, or for the modal
/// basis the expansion evaluated at `p + 1` Gauss points.
pub fn snapshot_points(field: &SolutionField, ops: &OperatorSet) -> Vec<(usize, usize, f64, f64)> {
    let mesh = field.mesh();
    let mut rows = Vec::with_capacity(ops.size() * mesh.elements());
    match ops.nodes() {
        Some(rule) => {
            for i in 0..mesh.elements() {
                let u = field.element(i);
                for (k, &xi) in rule.nodes().iter().enumerate() {
                    rows.push((i, k, mesh.to_physical(i, xi), u[k]));
                }
            }
        }
        None => {
            let rule = gauss_rule(ops.degree()).expect("degree of a built operator set is valid");
            for i in 0..mesh.elements() {
                let u = field.element(i);
                for (k, &xi) in rule.nodes().iter().enumerate() {
                    rows.push((i, k, mesh.to_physical(i, xi), ops.evaluate(u, xi)));
                }
            }
        }
    }
    rows
}

pub fn write_snapshot_csv(path: &Path, field: &SolutionField, ops: &OperatorSet) -> Result<(), IoError> {
    write_rows(
        path,
        &SNAPSHOT_HEADER,
        snapshot_points(field, ops)
            .into_iter()
            .map(|(e, k, x, u)| vec![e.to_string(), k.to_string(), real(x), real(u)]),
    )
}

pub fn write_diagnostics_csv(path: &Path, rows: &[DiagnosticRow]) -> Result<(), IoError> {
    write_rows(
        path,
        &DIAGNOSTICS_HEADER,
        rows.iter().map(|d| {
            let r = &d.report;
            vec![
                d.step.to_string(),
                real(d.time),
                r.element.to_string(),
                real(r.a),
                real(r.b),
                real(r.c),
                real(r.discriminant),
                real(r.epsilon),
                r.clamped.to_string(),
            ]
        }),
    )
}

pub fn snapshot_file_name(step: usize) -> String {
    format!("snapshot_{step}.csv")
}

/// Writes the resolved config and every CSV of a (possibly partial) run into
/// `config.output.dir`, returning the files written.
pub fn write_outputs(config: &ExperimentConfig, output: &SimulationOutput) -> Result<Vec<PathBuf>, IoError> {
    let dir = &config.output.dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();

    let path = dir.join(CONFIG_FILE);
    fs::File::create(&path)
        .and_then(|mut f| f.write_all(config.to_config_text().as_bytes()))
        .map_err(io_err(&path))?;
    written.push(path);

    let path = dir.join(ENERGY_FILE);
    write_energy_csv(&path, &output.records)?;
    written.push(path);

    for snap in &output.snapshots {
        let path = dir.join(snapshot_file_name(snap.step));
        write_snapshot_csv(&path, &snap.field, &output.ops)?;
        written.push(path);
    }
    if config.output.diagnostics {
        let path = dir.join(DIAGNOSTICS_FILE);
        write_diagnostics_csv(&path, &output.diagnostics)?;
        written.push(path);
    }
    Ok(written)
}
