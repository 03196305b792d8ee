//! File formats: trajectories in, waypoints and relabeled datasets out,
//! task defaults, and plot tables.
//!
//! All documents are JSON with a literal `schema_version`. Angles are stored
//! as rotation vectors (axis times angle, radians); numbers are written in
//! shortest round-trip form, so load and save are exact inverses.

mod defaults;
mod outputs;
mod plot;
mod trajectory_file;

pub use defaults::{normalize_task_name, TaskDefaults, TASK_DEFAULTS_ENV};
pub use outputs::{
    load_relabeled, load_waypoints, save_relabeled, save_waypoints, Provenance, RelabeledRecord,
    WaypointsFile, RELABEL_SCHEMA, TOOL_VERSION, WAYPOINTS_SCHEMA,
};
pub use plot::{emit_plot_data, write_plot_data, PLOT_HEADER, SAMPLES_PER_CHORD};
pub use trajectory_file::{
    load_trajectory, parse_trajectory, save_trajectory, trajectory_to_string, StateRecord,
    TRAJECTORY_SCHEMA,
};

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Trajectory files (`*.json`) in a directory, sorted by file name. A file
/// path is returned as-is.
pub fn trajectory_paths(input: &Path) -> Result<Vec<PathBuf>> {
    if input.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    let entries = std::fs::read_dir(input).map_err(|e| Error::io(input, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let p = entry.map_err(|e| Error::io(input, e))?.path();
        if p.is_file() && p.extension().is_some_and(|x| x == "json") {
            paths.push(p);
        }
    }
    paths.sort();
    Ok(paths)
}
