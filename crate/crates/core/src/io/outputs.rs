use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::trajectory_file::StateRecord;
use crate::error::{Error, Result};
use crate::reconstruction::MetricConfig;
use crate::relabel::RelabeledDataset;
use crate::solver::{Extraction, WaypointSet};

pub const WAYPOINTS_SCHEMA: &str = "awe-waypoints-v1";
pub const RELABEL_SCHEMA: &str = "awe-relabel-v1";
pub const TOOL_VERSION: &str = concat!("awe ", env!("CARGO_PKG_VERSION"));

/// Where an output came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub tool_version: String,
    pub source_name: String,
    pub eta: f64,
    pub metric: MetricConfig,
    /// Seconds since the Unix epoch; omitted for reproducible output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_unix: Option<u64>,
}

impl Provenance {
    pub fn new(source_name: impl Into<String>, eta: f64, metric: MetricConfig) -> Self {
        Provenance {
            tool_version: TOOL_VERSION.to_string(),
            source_name: source_name.into(),
            eta,
            metric,
            created_unix: None,
        }
    }

    pub fn stamped(mut self) -> Self {
        self.created_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointsFile {
    pub schema_version: String,
    pub provenance: Provenance,
    pub trajectory_length: usize,
    pub indices: Vec<usize>,
    pub segment_loss: f64,
    pub global_loss: f64,
}

impl WaypointsFile {
    pub fn waypoints(&self) -> Result<WaypointSet> {
        WaypointSet::new(self.indices.clone(), self.trajectory_length)
    }
}

pub fn save_waypoints(path: impl AsRef<Path>, extraction: &Extraction, provenance: &Provenance) -> Result<()> {
    let path = path.as_ref();
    let doc = WaypointsFile {
        schema_version: WAYPOINTS_SCHEMA.to_string(),
        provenance: provenance.clone(),
        trajectory_length: extraction.waypoints.last() + 1,
        indices: extraction.waypoints.indices().to_vec(),
        segment_loss: extraction.segment_loss,
        global_loss: extraction.global_loss,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("waypoints serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_waypoints(path: impl AsRef<Path>) -> Result<WaypointsFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: WaypointsFile = serde_json::from_str(&text).map_err(|e| {
        if e.is_syntax() || e.is_eof() {
            Error::Parse {
                path: path.to_path_buf(),
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
        } else {
            Error::Schema {
                path: path.to_path_buf(),
                message: e.to_string(),
            }
        }
    })?;
    if doc.schema_version != WAYPOINTS_SCHEMA {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            message: format!(
                "schema_version is \"{}\", expected \"{WAYPOINTS_SCHEMA}\"",
                doc.schema_version
            ),
        });
    }
    doc.waypoints().map_err(|e| Error::Validation {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(doc)
}

/// One line of a relabeled dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelabeledRecord {
    pub schema_version: String,
    pub source_name: String,
    pub eta: f64,
    pub t: usize,
    pub timestep: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obs_ref: Option<String>,
    pub state: StateRecord,
    pub target_index: usize,
    pub target: StateRecord,
    pub waypoints_remaining: usize,
}

/// Writes one JSON record per frame.
pub fn save_relabeled(path: impl AsRef<Path>, ds: &RelabeledDataset) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for f in &ds.frames {
        let record = RelabeledRecord {
            schema_version: RELABEL_SCHEMA.to_string(),
            source_name: ds.source_name.clone(),
            eta: ds.eta,
            t: f.t,
            timestep: f.timestep,
            obs_ref: f.obs_ref.clone(),
            state: (&f.state).into(),
            target_index: f.target_index,
            target: (&f.target_waypoint).into(),
            waypoints_remaining: f.waypoints_remaining,
        };
        serde_json::to_writer(&mut out, &record).expect("record serializes");
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn load_relabeled(path: impl AsRef<Path>) -> Result<Vec<RelabeledRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            column: e.column(),
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}
