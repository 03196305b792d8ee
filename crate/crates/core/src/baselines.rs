//! Heuristic waypoint selectors used as comparison baselines.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::solver::WaypointSet;
use crate::state_space::{joint_distance, State, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicConfig {
    /// Frames whose backward-difference speed is at most this are "stopped".
    pub velocity_threshold: f64,
    /// Minimum gripper range before gripper flips are considered at all.
    pub gripper_delta_threshold: f64,
    pub fixed_interval: usize,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            velocity_threshold: 1e-3,
            gripper_delta_threshold: 1e-6,
            fixed_interval: 8,
        }
    }
}

impl HeuristicConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.velocity_threshold >= 0.0 && self.gripper_delta_threshold >= 0.0) {
            return Err(Error::InvalidConfig("heuristic thresholds must be >= 0".into()));
        }
        if self.fixed_interval == 0 {
            return Err(Error::InvalidConfig("fixed interval must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeuristicMethod {
    ZeroVelocity,
    FixedInterval,
}

impl fmt::Display for HeuristicMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeuristicMethod::ZeroVelocity => "zero-vel",
            HeuristicMethod::FixedInterval => "fixed",
        })
    }
}

impl FromStr for HeuristicMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero-vel" | "zero-velocity" => Ok(HeuristicMethod::ZeroVelocity),
            "fixed" | "fixed-interval" => Ok(HeuristicMethod::FixedInterval),
            other => Err(Error::InvalidConfig(format!("unknown heuristic `{other}`"))),
        }
    }
}

/// Per-frame speed by backward difference over position (EE) or the
/// non-gripper joints. Frame 0 has no predecessor and gets `None`.
fn speeds(traj: &Trajectory) -> Vec<Option<f64>> {
    let arm_dims: Option<Vec<usize>> = traj.joint_dim().map(|d| {
        (0..d).filter(|k| !traj.gripper_dims().contains(k)).collect()
    });
    let mut out = vec![None];
    for w in traj.frames().windows(2) {
        let v = match (&w[0].state, &w[1].state) {
            (State::Ee(a), State::Ee(b)) => (b.position() - a.position()).norm(),
            (State::Joint(a), State::Joint(b)) => {
                let dims = arm_dims.as_deref().unwrap_or(&[]);
                let pick = |s: &[f64]| dims.iter().map(|k| s[*k]).collect::<Vec<_>>();
                joint_distance(&pick(a.joints()), &pick(b.joints()), None)
            }
            _ => unreachable!("trajectories hold one state kind"),
        };
        out.push(Some(v));
    }
    out
}

/// Gripper signals per frame: the EE width, or each declared gripper joint.
fn gripper_channels(traj: &Trajectory) -> Vec<Vec<f64>> {
    match traj.joint_dim() {
        None => vec![traj
            .states()
            .map(|s| s.as_ee().map_or(0.0, |e| e.gripper()))
            .collect()],
        Some(_) => traj
            .gripper_dims()
            .iter()
            .map(|k| {
                traj.states()
                    .map(|s| s.as_joint().map_or(0.0, |j| j.joints()[*k]))
                    .collect()
            })
            .collect(),
    }
}

/// Frames where the binarized gripper (threshold at the mid-range) changes.
fn gripper_flips(traj: &Trajectory, min_range: f64) -> Vec<bool> {
    let mut flips = vec![false; traj.len()];
    for channel in gripper_channels(traj) {
        let lo = channel.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = channel.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo <= min_range {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        for t in 1..channel.len() {
            if (channel[t] > mid) != (channel[t - 1] > mid) {
                flips[t] = true;
            }
        }
    }
    flips
}

fn zero_velocity_from(speeds: &[Option<f64>], flips: &[bool], threshold: f64) -> WaypointSet {
    let n = speeds.len();
    let mut indices = vec![0];
    let mut in_pause = false;
    for t in 1..n {
        let stopped = speeds[t].is_some_and(|v| v <= threshold);
        let pause_onset = stopped && !in_pause;
        in_pause = stopped;
        if (pause_onset || flips[t]) && t != n - 1 {
            indices.push(t);
        }
    }
    indices.push(n - 1);
    WaypointSet::from_valid(indices)
}

/// Waypoints at pause onsets (speed at or below the threshold, one per run of
/// stopped frames) and at gripper open/close events.
pub fn heuristic_zero_velocity(traj: &Trajectory, cfg: &HeuristicConfig) -> Result<WaypointSet> {
    cfg.validate()?;
    let flips = gripper_flips(traj, cfg.gripper_delta_threshold);
    Ok(zero_velocity_from(&speeds(traj), &flips, cfg.velocity_threshold))
}

/// Every `k`-th frame plus the final frame.
pub fn heuristic_fixed_interval(traj: &Trajectory, k: usize) -> Result<WaypointSet> {
    if k == 0 {
        return Err(Error::InvalidConfig("fixed interval must be >= 1".into()));
    }
    Ok(fixed_interval_indices(traj.len(), k))
}

fn fixed_interval_indices(n: usize, k: usize) -> WaypointSet {
    let mut indices: Vec<usize> = (0..n).step_by(k).collect();
    if *indices.last().unwrap() != n - 1 {
        indices.push(n - 1);
    }
    WaypointSet::from_valid(indices)
}

/// Result of matching a heuristic's waypoint count to a target.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub config: HeuristicConfig,
    pub waypoints: WaypointSet,
    /// False when no setting reproduces the target count exactly.
    pub exact: bool,
}

/// Tunes the method's knob so the waypoint count lands as close as possible
/// to `target_count`, preferring the smaller count on ties.
///
/// The fixed interval is bisected (its count is monotone in `k`). The
/// zero-velocity count is not monotone in the threshold (pauses merge as it
/// rises), so every distinct speed value is tried instead; the count only
/// changes at those values.
pub fn calibrate_to_count(
    traj: &Trajectory,
    method: HeuristicMethod,
    target_count: usize,
) -> Result<Calibration> {
    let n = traj.len();
    if target_count < 2 || target_count > n {
        return Err(Error::InvalidInput(format!(
            "target count {target_count} outside [2, {n}]"
        )));
    }
    let better = |count: usize, best: usize| {
        let (d, db) = (count.abs_diff(target_count), best.abs_diff(target_count));
        d < db || (d == db && count < best)
    };
    let mut config = HeuristicConfig::default();
    match method {
        HeuristicMethod::FixedInterval => {
            // largest k whose count is still >= target, then compare with k + 1
            let count = |k: usize| (n - 1).div_ceil(k) + 1;
            let (mut lo, mut hi) = (1usize, (n - 1).max(1));
            while lo < hi {
                let mid = (lo + hi).div_ceil(2);
                if count(mid) >= target_count {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            let mut k = lo;
            if k < n - 1 && better(count(k + 1), count(k)) {
                k += 1;
            }
            config.fixed_interval = k;
            let waypoints = fixed_interval_indices(n, k);
            Ok(Calibration {
                exact: waypoints.len() == target_count,
                config,
                waypoints,
            })
        }
        HeuristicMethod::ZeroVelocity => {
            let speeds = speeds(traj);
            let flips = gripper_flips(traj, config.gripper_delta_threshold);
            let mut candidates: Vec<f64> = speeds.iter().flatten().copied().collect();
            candidates.push(0.0);
            candidates.sort_by(f64::total_cmp);
            candidates.dedup();
            let mut best: Option<(f64, WaypointSet)> = None;
            for threshold in candidates {
                let wp = zero_velocity_from(&speeds, &flips, threshold);
                let replace = match &best {
                    None => true,
                    Some((_, b)) => better(wp.len(), b.len()),
                };
                if replace {
                    best = Some((threshold, wp));
                }
            }
            let (threshold, waypoints) = best.expect("at least one candidate");
            config.velocity_threshold = threshold;
            Ok(Calibration {
                exact: waypoints.len() == target_count,
                config,
                waypoints,
            })
        }
    }
}
