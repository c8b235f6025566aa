//! CSV logs, the run summary and plain-table plot data.
//!
//! `log.csv` holds one [`LogRecord`] per vehicle per control step, with
//! columns in field order. The column set is versioned by
//! [`LOG_SCHEMA_VERSION`], which is also written to `summary.json`.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use reactive_traj::coordination::VehicleBeacon;

use crate::run::{RunOutput, SegmentRecord};

pub const LOG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

/// One vehicle at one control step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub t: f64,
    pub vehicle: u32,
    pub pd_x: f64,
    pub pd_y: f64,
    pub vd_x: f64,
    pub vd_y: f64,
    pub ad_x: f64,
    pub ad_y: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
    pub v_x: f64,
    pub v_y: f64,
    pub v_z: f64,
    /// Desired heading, rad.
    pub phi: f64,
    /// Heading and speed change from the latest planning step.
    pub dphi_cmd: f64,
    pub dv_cmd: f64,
    /// Commanded thrust magnitude, N.
    pub thrust: f64,
    /// Distance from p_d to the nearest obstacle boundary, m.
    pub clearance_obstacle: f64,
    /// Distance from p_d to the nearest other vehicle's p_d, m.
    pub clearance_vehicle: f64,
    /// ‖p − p_d‖, m
    pub tracking_error: f64,
    /// `(m‖p̈_d‖ + K_d (‖ṗ_d‖ + v_air)²) / f_planar`.
    pub budget_ratio: f64,
    /// Selection rule branch of the latest decision, 0 when nothing was sensed.
    pub branch: u8,
    pub tau_f: f64,
    pub v_c: f64,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> LogError + '_ {
    move |source| LogError::Io { path: path.into(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> LogError + '_ {
    move |source| LogError::Csv { path: path.into(), source }
}

/// Writes `records` to `path`. An empty slice gives a header-only file.
pub fn write_records(records: &[LogRecord], path: &Path) -> Result<(), LogError> {
    write_csv(records.iter().copied(), path)
}

pub fn read_records(path: &Path) -> Result<Vec<LogRecord>, LogError> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err(path))?;
    rd.deserialize().collect::<Result<Vec<_>, _>>().map_err(csv_err(path))
}

/// A row type with a fixed, documented column order.
pub trait CsvRow: Serialize {
    const COLUMNS: &'static [&'static str];
}

impl CsvRow for LogRecord {
    const COLUMNS: &'static [&'static str] = &[
        "t",
        "vehicle",
        "pd_x",
        "pd_y",
        "vd_x",
        "vd_y",
        "ad_x",
        "ad_y",
        "p_x",
        "p_y",
        "p_z",
        "v_x",
        "v_y",
        "v_z",
        "phi",
        "dphi_cmd",
        "dv_cmd",
        "thrust",
        "clearance_obstacle",
        "clearance_vehicle",
        "tracking_error",
        "budget_ratio",
        "branch",
        "tau_f",
        "v_c",
    ];
}

impl CsvRow for SegmentRecord {
    const COLUMNS: &'static [&'static str] =
        &["vehicle", "kind", "t_issue", "t_o", "tau_f", "delta", "branch", "certified", "stretch", "stop"];
}

#[derive(Serialize)]
struct BeaconRow {
    id: u32,
    p_x: f64,
    p_y: f64,
    v_x: f64,
    v_y: f64,
    v_c: f64,
    timestamp: f64,
}

impl CsvRow for BeaconRow {
    const COLUMNS: &'static [&'static str] = &["id", "p_x", "p_y", "v_x", "v_y", "v_c", "timestamp"];
}

impl From<&VehicleBeacon> for BeaconRow {
    fn from(b: &VehicleBeacon) -> Self {
        Self { id: b.id, p_x: b.p.x, p_y: b.p.y, v_x: b.v.x, v_y: b.v.y, v_c: b.v_c, timestamp: b.timestamp }
    }
}

fn write_csv<T: CsvRow>(rows: impl IntoIterator<Item = T>, path: &Path) -> Result<(), LogError> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_err(path))?;
    // serde only emits headers alongside the first row; write them up front
    // so an empty run still gets a header line
    wr.write_record(T::COLUMNS).map_err(csv_err(path))?;
    for r in rows {
        wr.serialize(r).map_err(csv_err(path))?;
    }
    wr.flush().map_err(io_err(path))
}

/// Writes `log.csv`, `segments.csv`, `beacons.csv`, `summary.json` and the
/// plot tables into `out_dir`, creating it if needed.
pub fn write_logs(out: &RunOutput, out_dir: &Path) -> Result<(), LogError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    write_records(&out.records, &out_dir.join("log.csv"))?;
    write_csv(out.segments.iter().cloned(), &out_dir.join("segments.csv"))?;
    write_csv(out.beacons.iter().map(BeaconRow::from), &out_dir.join("beacons.csv"))?;

    let path = out_dir.join("summary.json");
    let text = serde_json::to_string_pretty(&out.summary).map_err(|source| LogError::Json { path: path.clone(), source })?;
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    emit_plot_data(&out.records, out_dir)
}

/// Whitespace-separated tables, one per vehicle and quantity:
/// `trajectory_<id>.dat` (t, p_d, p), `heading_<id>.dat` (t, φ),
/// `thrust_<id>.dat` (t, ‖f‖) and `clearance_<id>.dat`.
pub fn emit_plot_data(records: &[LogRecord], out_dir: &Path) -> Result<(), LogError> {
    let mut ids: Vec<u32> = records.iter().map(|r| r.vehicle).collect();
    ids.sort_unstable();
    ids.dedup();
    for id in ids {
        let rows: Vec<&LogRecord> = records.iter().filter(|r| r.vehicle == id).collect();
        table(out_dir, &format!("trajectory_{id}.dat"), "t pd_x pd_y p_x p_y", &rows, |r| {
            vec![r.t, r.pd_x, r.pd_y, r.p_x, r.p_y]
        })?;
        table(out_dir, &format!("heading_{id}.dat"), "t phi", &rows, |r| vec![r.t, r.phi])?;
        table(out_dir, &format!("thrust_{id}.dat"), "t thrust", &rows, |r| vec![r.t, r.thrust])?;
        table(out_dir, &format!("clearance_{id}.dat"), "t obstacle vehicle", &rows, |r| {
            vec![r.t, r.clearance_obstacle, r.clearance_vehicle]
        })?;
    }
    Ok(())
}

fn table(
    dir: &Path,
    name: &str,
    header: &str,
    rows: &[&LogRecord],
    cols: impl Fn(&LogRecord) -> Vec<f64>,
) -> Result<(), LogError> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>| -> io::Result<()> {
        writeln!(w, "# {header}")?;
        for r in rows {
            let line: Vec<String> = cols(r).iter().map(|v| format!("{v:.6}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        w.flush()
    };
    write(&mut w).map_err(io_err(&path))
}
