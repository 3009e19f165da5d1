//! File formats: TOML for scenarios, configurations, weights and metrics;
//! CSV for executed trajectories.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimizer::CostWeights;
use crate::sim::config::RunConfig;
use crate::sim::report::{Aggregate, Metrics, RunReport, StageTiming};
use crate::sim::scenario::Scenario;

pub const TRAJECTORY_HEADER: [&str; 12] = [
    "tick", "robot_id", "t", "px", "py", "pz", "vx", "vy", "vz", "ax", "ay", "az",
];

pub fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::Parse(e.to_string()))
}

pub fn from_toml<T: DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    from_toml(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_scenario(path: &Path) -> Result<Scenario> {
    let s: Scenario = read_toml(path)?;
    s.validate()?;
    Ok(s)
}

pub fn write_scenario(path: &Path, scenario: &Scenario) -> Result<()> {
    write_text(path, &to_toml(scenario)?)
}

/// Missing keys take their defaults.
pub fn read_config(path: &Path) -> Result<RunConfig> {
    let c: RunConfig = read_toml(path)?;
    c.validate()?;
    Ok(c)
}

pub fn write_config(path: &Path, config: &RunConfig) -> Result<()> {
    write_text(path, &to_toml(config)?)
}

/// All five weights must be present.
pub fn read_weights(path: &Path) -> Result<CostWeights<f64>> {
    let w: CostWeights<f64> = read_toml(path)?;
    w.validate()?;
    Ok(w)
}

pub fn write_metrics(path: &Path, metrics: &Metrics) -> Result<()> {
    write_text(path, &to_toml(metrics)?)
}

pub fn read_metrics(path: &Path) -> Result<Metrics> {
    read_toml(path)
}

/// Wall-clock statistics go to their own file so that the metrics file is
/// reproducible byte for byte.
pub fn write_timing(path: &Path, timing: &StageTiming) -> Result<()> {
    write_text(path, &to_toml(timing)?)
}

pub fn write_trajectories<W: Write>(out: W, report: &RunReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(TRAJECTORY_HEADER).map_err(csv_err)?;
    for s in &report.samples {
        let mut row = vec![s.tick.to_string(), s.robot.to_string(), s.t.to_string()];
        for v in s.state.pos.iter().chain(&s.state.vel).chain(&s.state.acc) {
            row.push(v.to_string());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectories_file(path: &Path, report: &RunReport) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_trajectories(std::io::BufWriter::new(f), report)
}

#[derive(Serialize)]
struct AggregateRow<'a> {
    label: &'a str,
    #[serde(flatten)]
    aggregate: &'a Aggregate,
}

/// One `[[row]]` table per sweep configuration.
pub fn aggregate_table(rows: &[(String, Aggregate)]) -> Result<String> {
    #[derive(Serialize)]
    struct Table<'a> {
        row: Vec<AggregateRow<'a>>,
    }
    to_toml(&Table {
        row: rows
            .iter()
            .map(|(label, aggregate)| AggregateRow { label, aggregate })
            .collect(),
    })
}
