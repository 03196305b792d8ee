//! Next-waypoint relabeling of demonstration frames.
//!
//! Every frame except the last is paired with the first waypoint strictly
//! after it, so frames between two waypoints all target the later one.

use crate::error::{Error, Result};
use crate::solver::{extract_waypoints_dp, ErrorBudget, WaypointSet};
use crate::state_space::{State, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct RelabeledFrame {
    /// Frame position in the source trajectory.
    pub t: usize,
    /// The frame's own recorded timestep.
    pub timestep: u64,
    pub obs_ref: Option<String>,
    pub state: State,
    pub target_waypoint: State,
    pub target_index: usize,
    /// Waypoints from the target through the end, target included.
    pub waypoints_remaining: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelabeledDataset {
    pub source_name: String,
    pub eta: f64,
    pub waypoint_indices: Vec<usize>,
    pub frames: Vec<RelabeledFrame>,
}

impl RelabeledDataset {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// First waypoint index strictly greater than `t`.
pub fn next_waypoint_index(t: usize, wp: &WaypointSet) -> Result<usize> {
    let idx = wp.indices();
    let pos = idx.partition_point(|w| *w <= t);
    idx.get(pos).copied().ok_or(Error::NoFutureWaypoint {
        t,
        last: wp.last(),
    })
}

pub fn relabel_trajectory(traj: &Trajectory, wp: &WaypointSet, eta: f64) -> Result<RelabeledDataset> {
    if wp.last() != traj.len() - 1 {
        return Err(Error::Contract(format!(
            "waypoints end at {} but trajectory has {} frames",
            wp.last(),
            traj.len()
        )));
    }
    let idx = wp.indices();
    let mut frames = Vec::with_capacity(traj.len() - 1);
    for (t, frame) in traj.frames()[..traj.len() - 1].iter().enumerate() {
        let target_index = next_waypoint_index(t, wp)?;
        let remaining = idx.len() - idx.partition_point(|w| *w < target_index);
        frames.push(RelabeledFrame {
            t,
            timestep: frame.t,
            obs_ref: frame.obs_ref.clone(),
            state: frame.state.clone(),
            target_waypoint: traj.state(target_index).clone(),
            target_index,
            waypoints_remaining: remaining,
        });
    }
    Ok(RelabeledDataset {
        source_name: traj.name().to_string(),
        eta,
        waypoint_indices: idx.to_vec(),
        frames,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    pub trajectories: usize,
    pub failed: usize,
    pub total_frames: usize,
    pub mean_waypoints: f64,
    /// Mean of per-trajectory waypoint-to-length ratios.
    pub mean_ratio: f64,
}

#[derive(Debug)]
pub struct CorpusRelabeling {
    pub datasets: Vec<RelabeledDataset>,
    /// Trajectories that could not be processed, by name.
    pub failures: Vec<(String, Error)>,
    pub stats: CorpusStats,
}

/// Extracts and relabels every trajectory, keeping input order. Failures are
/// collected and do not stop the batch.
pub fn relabel_corpus(trajs: &[Trajectory], budget: &ErrorBudget) -> Result<CorpusRelabeling> {
    if trajs.is_empty() {
        return Err(Error::InvalidInput("empty corpus".into()));
    }
    let mut datasets = Vec::with_capacity(trajs.len());
    let mut failures = Vec::new();
    let (mut wp_sum, mut ratio_sum, mut frames) = (0usize, 0.0, 0usize);
    for traj in trajs {
        let result = extract_waypoints_dp(traj, budget)
            .and_then(|(e, _)| relabel_trajectory(traj, &e.waypoints, budget.eta()).map(|d| (e, d)));
        match result {
            Ok((extraction, dataset)) => {
                wp_sum += extraction.waypoints.len();
                ratio_sum += extraction.waypoints.ratio();
                frames += dataset.len();
                datasets.push(dataset);
            }
            Err(e) => failures.push((traj.name().to_string(), e)),
        }
    }
    let ok = datasets.len();
    let mean = |s: f64| if ok == 0 { 0.0 } else { s / ok as f64 };
    let stats = CorpusStats {
        trajectories: ok,
        failed: failures.len(),
        total_frames: frames,
        mean_waypoints: mean(wp_sum as f64),
        mean_ratio: mean(ratio_sum),
    };
    Ok(CorpusRelabeling {
        datasets,
        failures,
        stats,
    })
}
