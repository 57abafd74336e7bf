//! Scenario, sensor-series and report files.

use crate::error::{CliError, CliResult};
use pointsource_core::model::{validate_scenario, Scenario};
use pointsource_core::{Point, TimeGrid};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

/// Float format for CSV cells: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn read_scenario(path: &Path) -> CliResult<Scenario> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::validation("scenario", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::validation("scenario", format!("{}: {e}", path.display())))
}

/// Reads a scenario and rejects it if any invariant fails, listing all of them.
pub fn load_scenario(path: &Path) -> CliResult<Scenario> {
    let scenario = read_scenario(path)?;
    check_scenario(&scenario)?;
    Ok(scenario)
}

pub fn check_scenario(scenario: &Scenario) -> CliResult<()> {
    let violations = validate_scenario(scenario);
    if violations.is_empty() {
        return Ok(());
    }
    let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
    Err(CliError::validation("scenario validation", list.join("; ")))
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::validation("output", format!("{}: {e}", dir.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::validation("output", e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::validation("output", format!("{}: {e}", path.display())))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, stage: &str) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::validation(stage, format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::validation(stage, format!("{}: {e}", path.display())))
}

/// Writes a header row and string rows.
pub fn write_rows(path: &Path, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
    let io_err = |e: csv::Error| CliError::validation("output", format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(row).map_err(io_err)?;
    }
    w.flush().map_err(|e| CliError::validation("output", format!("{}: {e}", path.display())))
}

/// Time series table: `t,<prefix>_1,…` with one row per grid time.
pub fn write_series_csv(path: &Path, grid: &TimeGrid, columns: &[Vec<f64>], prefix: &str) -> CliResult<()> {
    let mut header = vec!["t".to_string()];
    header.extend((1..=columns.len()).map(|j| format!("{prefix}_{j}")));
    let rows: Vec<Vec<String>> = (0..grid.len())
        .map(|k| {
            let mut row = vec![fmt_f64(grid.time(k))];
            row.extend(columns.iter().map(|c| fmt_f64(c[k])));
            row
        })
        .collect();
    write_rows(path, &header, &rows)
}

/// Sensor series in JSON form.
#[derive(Serialize, Deserialize)]
pub struct SensorFile {
    pub schema_version: u32,
    pub grid: TimeGrid,
    pub sensors: Vec<SensorSeries>,
}

#[derive(Serialize, Deserialize)]
pub struct SensorSeries {
    pub location: Point,
    pub samples: Vec<f64>,
}

/// Locates the sensor data for `identify`: the explicit path, or
/// `sensors.csv` / `sensors.json` in the output directory.
pub fn resolve_data_path(explicit: Option<&Path>, out: &Path) -> CliResult<PathBuf> {
    if let Some(p) = explicit {
        return Ok(p.to_path_buf());
    }
    for name in ["sensors.csv", "sensors.json"] {
        let p = out.join(name);
        if p.exists() {
            return Ok(p);
        }
    }
    Err(CliError::validation("sensor data", format!("no sensors.csv or sensors.json in {}", out.display())))
}

/// Reads sensor series and checks them against the scenario's grid and sensors.
pub fn read_sensor_data(path: &Path, scenario: &Scenario) -> CliResult<Vec<Vec<f64>>> {
    let stage = "sensor data";
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let (times, columns) = if is_json {
        let file: SensorFile = read_json(path, stage)?;
        if file.grid != scenario.grid {
            return Err(CliError::validation(stage, "time grid differs from the scenario"));
        }
        for (j, (s, b)) in file.sensors.iter().zip(&scenario.sensors).enumerate() {
            if s.location != *b {
                return Err(CliError::validation(
                    stage,
                    format!("sensor {} location differs from the scenario", j + 1),
                ));
            }
        }
        let times: Vec<f64> = scenario.grid.times().collect();
        (times, file.sensors.into_iter().map(|s| s.samples).collect::<Vec<_>>())
    } else {
        read_series_csv(path)?
    };
    if columns.len() != scenario.sensors.len() {
        return Err(CliError::validation(
            stage,
            format!("{} sensor columns, scenario has {} sensors", columns.len(), scenario.sensors.len()),
        ));
    }
    let grid = &scenario.grid;
    if times.len() != grid.len() {
        return Err(CliError::validation(stage, format!("{} samples, grid has {}", times.len(), grid.len())));
    }
    for (k, t) in times.iter().enumerate() {
        if (t - grid.time(k)).abs() > 1e-9 * grid.step.max(grid.horizon() * 1e-6) {
            return Err(CliError::validation(stage, format!("sample {k} at t = {t}, grid expects {}", grid.time(k))));
        }
    }
    if let Some(j) = columns.iter().position(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(CliError::validation(stage, format!("sensor {} has non-finite samples", j + 1)));
    }
    Ok(columns)
}

/// Parses a `t,psi_1,…` table into times and columns.
pub fn read_series_csv(path: &Path) -> CliResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let stage = "sensor data";
    let err = |e: csv::Error| CliError::validation(stage, format!("{}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(err)?;
    let width = r.headers().map_err(err)?.len();
    if width < 2 {
        return Err(CliError::validation(stage, "expected columns t,psi_1,..."));
    }
    let mut times = Vec::new();
    let mut columns = vec![Vec::new(); width - 1];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(err)?;
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| CliError::validation(stage, format!("row {}: `{field}` is not a number", line + 2)))?;
            if c == 0 {
                times.push(v);
            } else {
                columns[c - 1].push(v);
            }
        }
    }
    Ok((times, columns))
}
