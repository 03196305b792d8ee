use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::Extraction;
use crate::state_space::{interpolate_unchecked, Trajectory};

pub const PLOT_HEADER: [&str; 6] = ["eta", "kind", "t", "x", "y", "z"];

/// Samples drawn on each reconstructed chord, start included, end excluded
/// (the final chord also gets its end point).
pub const SAMPLES_PER_CHORD: usize = 10;

/// Writes a long-format table with the original path, the reconstruction,
/// and the waypoints for every budget of a sweep.
pub fn write_plot_data<W: Write>(out: W, traj: &Trajectory, sweep: &[(f64, Extraction)]) -> Result<()> {
    if sweep.is_empty() {
        return Err(Error::InvalidInput("empty sweep".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::InvalidInput(format!("writing plot data: {e}"));
    w.write_record(PLOT_HEADER).map_err(csv_err)?;
    let mut row = |eta: f64, kind: &str, t: f64, xyz: [f64; 3]| {
        w.write_record([
            eta.to_string(),
            kind.to_string(),
            t.to_string(),
            xyz[0].to_string(),
            xyz[1].to_string(),
            xyz[2].to_string(),
        ])
    };
    for (eta, extraction) in sweep {
        for (t, s) in traj.states().enumerate() {
            row(*eta, "original", t as f64, s.plot_xyz()).map_err(csv_err)?;
        }
        let idx = extraction.waypoints.indices();
        for (k, pair) in idx.windows(2).enumerate() {
            let (i, j) = (pair[0], pair[1]);
            let last_chord = k + 2 == idx.len();
            let samples = SAMPLES_PER_CHORD + usize::from(last_chord);
            for s in 0..samples {
                let u = s as f64 / SAMPLES_PER_CHORD as f64;
                let state = interpolate_unchecked(traj.state(i), traj.state(j), u);
                let t = i as f64 + (j - i) as f64 * u;
                row(*eta, "reconstructed", t, state.plot_xyz()).map_err(csv_err)?;
            }
        }
        for &i in idx {
            row(*eta, "waypoint", i as f64, traj.state(i).plot_xyz()).map_err(csv_err)?;
        }
    }
    w.flush()
        .map_err(|e| Error::InvalidInput(format!("writing plot data: {e}")))
}

pub fn emit_plot_data(path: impl AsRef<Path>, traj: &Trajectory, sweep: &[(f64, Extraction)]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_plot_data(file, traj, sweep)
}
