//! Kinematic waypoint follower.
//!
//! A dynamics-free stand-in for replaying extracted waypoints on a position
//! controlled robot: the follower starts at the first frame, steps toward one
//! waypoint at a time along the interpolation path, and the executed path is
//! scored against the demonstration. It says which waypoint set tracks the
//! demonstration better; it does not model contact or task success.

use crate::error::{Error, Result};
use crate::reconstruction::{nearest_on_polyline, MetricConfig};
use crate::solver::WaypointSet;
use crate::state_space::{ee_distance, interpolate_unchecked, joint_distance, State, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct FollowerConfig {
    /// Largest move per tick, in metric units.
    pub max_step: f64,
    pub reach_tolerance: f64,
    /// Each waypoint gets `frames since previous waypoint × multiplier` ticks.
    pub control_multiplier: u32,
    pub tick_limit: usize,
    /// Advance only once a waypoint is reached, never on budget expiry.
    pub blocking: bool,
    pub metric: MetricConfig,
}

impl FollowerConfig {
    /// A follower as fast as the demonstration's fastest frame-to-frame move.
    pub fn for_trajectory(traj: &Trajectory, metric: MetricConfig, control_multiplier: u32) -> Self {
        let max_step = traj
            .frames()
            .windows(2)
            .map(|w| distance(&w[0].state, &w[1].state, &metric))
            .fold(0.0, f64::max);
        FollowerConfig {
            max_step: if max_step > 0.0 { max_step } else { 1e-3 },
            reach_tolerance: 1e-3,
            control_multiplier,
            tick_limit: 4 * traj.len() * control_multiplier.max(1) as usize,
            blocking: false,
            metric,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_step.is_finite() && self.max_step > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "max_step must be positive, got {}",
                self.max_step
            )));
        }
        if !(self.reach_tolerance >= 0.0 && self.reach_tolerance.is_finite()) {
            return Err(Error::InvalidConfig("reach_tolerance must be >= 0".into()));
        }
        if self.control_multiplier == 0 {
            return Err(Error::InvalidConfig("control multiplier must be >= 1".into()));
        }
        self.metric.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub reached_final: bool,
    pub per_waypoint_reached: Vec<bool>,
    /// Worst distance of an executed state from the demonstration path.
    pub max_tracking_deviation: f64,
    /// Worst distance of an executed state from the waypoint polyline.
    pub max_polyline_deviation: f64,
    pub executed_path: Vec<State>,
    pub ticks_used: usize,
}

fn distance(a: &State, b: &State, metric: &MetricConfig) -> f64 {
    match (a, b) {
        (State::Ee(a), State::Ee(b)) => ee_distance(a, b, metric),
        (State::Joint(a), State::Joint(b)) => {
            joint_distance(a.joints(), b.joints(), metric.joint_mask.as_deref())
        }
        _ => unreachable!("one state kind per trajectory"),
    }
}

pub fn replay_waypoints(traj: &Trajectory, wp: &WaypointSet, cfg: &FollowerConfig) -> Result<ReplayReport> {
    cfg.validate()?;
    cfg.metric.check_for(traj)?;
    if wp.last() != traj.len() - 1 {
        return Err(Error::Contract(format!(
            "waypoints end at {} but trajectory has {} frames",
            wp.last(),
            traj.len()
        )));
    }
    let idx = wp.indices();
    let mut current = traj.state(0).clone();
    let mut path = vec![current.clone()];
    let mut reached = vec![false; idx.len()];
    reached[0] = true;
    let mut ticks = 0usize;

    'waypoints: for k in 1..idx.len() {
        let target = traj.state(idx[k]);
        let budget = (idx[k] - idx[k - 1]) * cfg.control_multiplier as usize;
        let mut spent = 0usize;
        loop {
            let d = distance(&current, target, &cfg.metric);
            if d <= cfg.reach_tolerance {
                reached[k] = true;
                break;
            }
            if ticks >= cfg.tick_limit {
                break 'waypoints;
            }
            if !cfg.blocking && spent >= budget {
                break;
            }
            current = if d <= cfg.max_step {
                target.clone()
            } else {
                interpolate_unchecked(&current, target, cfg.max_step / d)
            };
            ticks += 1;
            spent += 1;
            path.push(current.clone());
        }
    }

    let all_frames: Vec<usize> = (0..traj.len()).collect();
    let deviation = |polyline: &[usize]| {
        path.iter()
            .map(|s| nearest_on_polyline(s, traj, polyline, &cfg.metric).distance)
            .fold(0.0, f64::max)
    };
    Ok(ReplayReport {
        reached_final: *reached.last().unwrap(),
        per_waypoint_reached: reached,
        max_tracking_deviation: deviation(&all_frames),
        max_polyline_deviation: deviation(idx),
        executed_path: path,
        ticks_used: ticks,
    })
}
