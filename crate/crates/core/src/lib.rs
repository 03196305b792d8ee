//! Waypoint extraction for robot demonstrations.
//!
//! A demonstration is decomposed into the fewest frames (waypoints) whose
//! piecewise interpolation stays within an error budget of every recorded
//! state. The crate also relabels frames with their next waypoint for
//! behavior-cloning datasets, provides heuristic baselines and a kinematic
//! replay follower for comparison, and a CLI (`awe`) over versioned JSON files.
//!
//! ```
//! use awe::{extract_waypoints_dp, ErrorBudget, EeState, State, Trajectory};
//!
//! let corner: Vec<State> = (0..=5)
//!     .map(|x| [x as f64, 0.0, 0.0])
//!     .chain((1..=5).map(|y| [5.0, y as f64, 0.0]))
//!     .map(|p| State::Ee(EeState::from_axis_angle(p, [0.0; 3], 0.0)))
//!     .collect();
//! let traj = Trajectory::from_states("corner", 20.0, corner).unwrap();
//! let (extraction, _) = extract_waypoints_dp(&traj, &ErrorBudget::with_eta(0.1).unwrap()).unwrap();
//! assert_eq!(extraction.waypoints.indices(), &[0, 5, 10]);
//! ```

pub mod baselines;
pub mod cli;
pub mod comparison;
pub mod error;
pub mod io;
pub mod reconstruction;
pub mod relabel;
pub mod replay;
pub mod solver;
pub mod state_space;
pub mod synthetic;

pub use baselines::{
    calibrate_to_count, heuristic_fixed_interval, heuristic_zero_velocity, Calibration,
    HeuristicConfig, HeuristicMethod,
};
pub use comparison::{compare_methods, Method, MethodScore};
pub use error::{Error, Result};
pub use reconstruction::{
    project_onto_chord, project_onto_polyline, reconstruction_loss, segment_loss, segment_losses,
    MetricConfig, ProjectionResult,
};
pub use relabel::{
    next_waypoint_index, relabel_corpus, relabel_trajectory, CorpusRelabeling, CorpusStats,
    RelabeledDataset, RelabeledFrame,
};
pub use replay::{replay_waypoints, FollowerConfig, ReplayReport};
pub use solver::{
    eta_for_ratio, extract_waypoints_bruteforce, extract_waypoints_dp, mean_ratio, sweep_eta,
    ErrorBudget, Extraction, SolveStats, WaypointSet, BRUTE_FORCE_LIMIT,
};
pub use state_space::{
    axis_angle_to_quaternion, geodesic_angle, interpolate, quaternion_to_axis_angle,
    slerp_shortest, state_distance, EeState, Frame, JointState, State, StateSpace, Trajectory,
};
