//! Result tables (CSV or JSON) and the JSON run manifest.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::CliError;

/// Writes `rows` to `path`, or to stdout when no path is given.
pub fn write_table<T: Serialize>(rows: &[T], format: Format, path: Option<&Path>) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::Config(format!("cannot write output: {e}"));
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io_err)?)),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            for r in rows {
                w.serialize(r).map_err(|e| CliError::Config(format!("cannot write output: {e}")))?;
            }
            w.flush().map_err(io_err)
        }
        Format::Json => {
            let mut sink = sink;
            serde_json::to_writer_pretty(&mut sink, rows)
                .map_err(|e| CliError::Config(format!("cannot write output: {e}")))?;
            writeln!(sink).map_err(io_err)?;
            sink.flush().map_err(io_err)
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RowError {
    pub sweep: f64,
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct CalibrationRecord {
    pub sweep: f64,
    pub amplitude: f64,
    pub mean_photons: f64,
    pub asymptotic: bool,
    pub non_monotonic: bool,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub sps_core: &'static str,
    pub sps_cli: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub versions: Versions,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_b: Option<RunConfig>,
    pub sweep_axis: Option<&'static str>,
    pub seed: u64,
    pub trials: usize,
    pub rows: usize,
    pub calibrations: Vec<CalibrationRecord>,
    pub errors: Vec<RowError>,
    pub extra: serde_json::Value,
    pub wall_time_s: f64,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            command: command.to_string(),
            versions: Versions { sps_core: sps_core::VERSION, sps_cli: env!("CARGO_PKG_VERSION") },
            config: config.clone(),
            config_b: None,
            sweep_axis: config.sweep.map(|s| s.axis.name()),
            seed: config.mc.seed,
            trials: config.mc.trials,
            rows: 0,
            calibrations: Vec::new(),
            errors: Vec::new(),
            extra: serde_json::Value::Null,
            wall_time_s: 0.0,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest is always serializable");
        std::fs::write(path, text + "\n").map_err(|e| CliError::Config(format!("cannot write manifest: {e}")))
    }
}

/// `<out>.manifest.json` next to the table.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
