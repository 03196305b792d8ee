//! Matched-count comparison of the optimal selector against the heuristics.
//!
//! The optimal extraction fixes a waypoint count; each heuristic is
//! calibrated to that count and every selection is scored by its
//! reconstruction losses and by a kinematic replay.

use std::fmt;
use std::str::FromStr;

use crate::baselines::{calibrate_to_count, HeuristicMethod};
use crate::error::{Error, Result};
use crate::reconstruction::{reconstruction_loss, segment_losses};
use crate::replay::{replay_waypoints, FollowerConfig};
use crate::solver::{extract_waypoints_dp, ErrorBudget, WaypointSet};
use crate::state_space::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Awe,
    Heuristic(HeuristicMethod),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Awe => f.write_str("awe"),
            Method::Heuristic(h) => h.fmt(f),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "awe" | "dp" => Ok(Method::Awe),
            other => other.parse().map(Method::Heuristic),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodScore {
    pub method: Method,
    pub waypoints: WaypointSet,
    /// Whether the heuristic hit the target count exactly (always true for `awe`).
    pub exact_count: bool,
    pub segment_loss: f64,
    pub global_loss: f64,
    pub replay_deviation: f64,
    pub replay_reached_final: bool,
}

/// Scores every method at the waypoint count chosen by the optimal extraction.
///
/// `follower` is built per trajectory from the metric and multiplier when
/// `None`.
pub fn compare_methods(
    traj: &Trajectory,
    budget: &ErrorBudget,
    methods: &[Method],
    control_multiplier: u32,
    follower: Option<&FollowerConfig>,
) -> Result<Vec<MethodScore>> {
    let (optimal, _) = extract_waypoints_dp(traj, budget)?;
    let target = optimal.waypoints.len();
    let metric = budget.metric();
    let follower = match follower {
        Some(f) => f.clone(),
        None => FollowerConfig::for_trajectory(traj, metric.clone(), control_multiplier),
    };
    methods
        .iter()
        .map(|&method| {
            let (waypoints, exact_count) = match method {
                Method::Awe => (optimal.waypoints.clone(), true),
                Method::Heuristic(h) => {
                    let c = calibrate_to_count(traj, h, target)?;
                    (c.waypoints, c.exact)
                }
            };
            let segment_loss = segment_losses(traj, waypoints.indices(), metric)?
                .into_iter()
                .fold(0.0, f64::max);
            let global_loss = reconstruction_loss(traj, waypoints.indices(), metric)?;
            let replay = replay_waypoints(traj, &waypoints, &follower)?;
            Ok(MethodScore {
                method,
                waypoints,
                exact_count,
                segment_loss,
                global_loss,
                replay_deviation: replay.max_tracking_deviation,
                replay_reached_final: replay.reached_final,
            })
        })
        .collect()
}
