//! Reconstruction losses: how far demonstration states stray from the
//! piecewise interpolation through a set of waypoints.
//!
//! Two losses are exposed. [`segment_loss`] measures the frames of one segment
//! against that segment's own chord and is what the solver constrains.
//! [`reconstruction_loss`] lets each frame pick its nearest chord anywhere on
//! the reconstructed path, so it never exceeds the largest segment loss.

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state_space::{
    check_compatible, ee_distance, interpolate_ee, joint_distance, quaternion_to_axis_angle,
    EeState, State, Trajectory,
};

/// Weights of the state distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    /// Multiplies the Euclidean position distance (meters).
    pub position_weight: f64,
    /// Multiplies the geodesic orientation angle (radians).
    pub orientation_weight: f64,
    /// Adds `gripper_weight * |Δgripper|` in EE mode.
    pub include_gripper: bool,
    pub gripper_weight: f64,
    /// Per-joint weights for joint mode; `None` is plain L2.
    pub joint_mask: Option<Vec<f64>>,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            position_weight: 1.0,
            orientation_weight: 1.0,
            include_gripper: false,
            gripper_weight: 1.0,
            joint_mask: None,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        let weights = [
            ("position_weight", self.position_weight),
            ("orientation_weight", self.orientation_weight),
            ("gripper_weight", self.gripper_weight),
        ];
        for (name, w) in weights {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and non-negative, got {w}"
                )));
            }
        }
        let gripper = if self.include_gripper {
            self.gripper_weight
        } else {
            0.0
        };
        if self.position_weight == 0.0 && self.orientation_weight == 0.0 && gripper == 0.0 {
            return Err(Error::InvalidConfig("all metric weights are zero".into()));
        }
        if let Some(mask) = &self.joint_mask {
            if let Some(w) = mask.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
                return Err(Error::InvalidConfig(format!(
                    "joint_mask entries must be finite and non-negative, got {w}"
                )));
            }
            if mask.iter().all(|w| *w == 0.0) {
                return Err(Error::InvalidConfig("joint_mask is all zeros".into()));
            }
        }
        Ok(())
    }

    pub(crate) fn check_joint_dim(&self, dim: usize) -> Result<()> {
        match &self.joint_mask {
            Some(mask) if mask.len() != dim => Err(Error::DimensionMismatch {
                expected: dim,
                found: mask.len(),
            }),
            _ => Ok(()),
        }
    }

    /// Validates the config and its compatibility with `traj`.
    pub fn check_for(&self, traj: &Trajectory) -> Result<()> {
        self.validate()?;
        if let Some(dim) = traj.joint_dim() {
            self.check_joint_dim(dim)?;
        }
        Ok(())
    }
}

/// Closest point of a chord (or of a polyline of chords) to a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionResult {
    pub distance: f64,
    /// Which chord of the polyline the minimum was found on.
    pub segment_index: usize,
    /// Interpolation parameter of the foot point, in `[0, 1]`.
    pub u: f64,
}

/// Projects `x` onto the interpolation between `a` and `b`.
///
/// The foot parameter comes from positions (EE) or weighted joint vectors;
/// the distance is then measured to the interpolated state at that parameter,
/// orientation included.
pub fn project_onto_chord(
    x: &State,
    a: &State,
    b: &State,
    cfg: &MetricConfig,
) -> Result<ProjectionResult> {
    check_compatible(x, a)?;
    check_compatible(a, b)?;
    if let State::Joint(j) = x {
        cfg.check_joint_dim(j.dim())?;
    }
    let (distance, u) = project_unchecked(x, a, b, cfg);
    Ok(ProjectionResult {
        distance,
        segment_index: 0,
        u,
    })
}

pub(crate) fn project_unchecked(x: &State, a: &State, b: &State, cfg: &MetricConfig) -> (f64, f64) {
    match (x, a, b) {
        (State::Ee(x), State::Ee(a), State::Ee(b)) => project_ee(x, a, b, cfg),
        (State::Joint(x), State::Joint(a), State::Joint(b)) => {
            project_joint(x.joints(), a.joints(), b.joints(), cfg.joint_mask.as_deref())
        }
        _ => unreachable!("kinds checked by caller"),
    }
}

fn project_ee(x: &EeState, a: &EeState, b: &EeState, cfg: &MetricConfig) -> (f64, f64) {
    let u = ee_chord_parameter(x, a, b);
    let foot = interpolate_ee(a, b, u);
    (ee_distance(x, &foot, cfg), u)
}

fn ee_chord_parameter(x: &EeState, a: &EeState, b: &EeState) -> f64 {
    let d = b.position() - a.position();
    let len2 = d.dot(&d);
    if len2 > 0.0 {
        return ((x.position() - a.position()).dot(&d) / len2).clamp(0.0, 1.0);
    }
    // Pure rotation in place: project in the tangent space at `a`.
    if x.orientation() == a.orientation() {
        return 0.0;
    }
    if x.orientation() == b.orientation() {
        return 1.0;
    }
    let omega = relative_rotation(a.orientation(), b.orientation());
    let w2 = omega.dot(&omega);
    if w2 > 0.0 {
        let v = relative_rotation(a.orientation(), x.orientation());
        (v.dot(&omega) / w2).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

fn relative_rotation(from: &UnitQuaternion<f64>, to: &UnitQuaternion<f64>) -> Vector3<f64> {
    Vector3::from(quaternion_to_axis_angle(&(from.inverse() * to)))
}

fn project_joint(x: &[f64], a: &[f64], b: &[f64], mask: Option<&[f64]>) -> (f64, f64) {
    let weight = |k: usize| mask.map_or(1.0, |m| m[k] * m[k]);
    let mut len2 = 0.0;
    let mut dot = 0.0;
    for k in 0..a.len() {
        let d = b[k] - a[k];
        let w = weight(k);
        len2 += w * d * d;
        dot += w * (x[k] - a[k]) * d;
    }
    let u = if len2 > 0.0 {
        (dot / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let distance = if u == 0.0 {
        joint_distance(x, a, mask)
    } else if u == 1.0 {
        joint_distance(x, b, mask)
    } else {
        let mut acc = 0.0;
        for k in 0..a.len() {
            let r = x[k] - (a[k] + (b[k] - a[k]) * u);
            acc += weight(k) * r * r;
        }
        acc.sqrt()
    };
    (distance, u)
}

fn check_segment(traj: &Trajectory, start: usize, end: usize) -> Result<()> {
    if start < end && end < traj.len() {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange {
            start,
            end,
            len: traj.len(),
        })
    }
}

/// Largest distance of frames `start..=end` from the chord between the two endpoints.
pub fn segment_loss(traj: &Trajectory, start: usize, end: usize, cfg: &MetricConfig) -> Result<f64> {
    check_segment(traj, start, end)?;
    cfg.check_for(traj)?;
    let a = traj.state(start);
    let b = traj.state(end);
    Ok((start..=end)
        .map(|t| project_unchecked(traj.state(t), a, b, cfg).0)
        .fold(0.0, f64::max))
}

/// Every chord's segment loss, in waypoint order.
pub fn segment_losses(traj: &Trajectory, waypoints: &[usize], cfg: &MetricConfig) -> Result<Vec<f64>> {
    check_waypoints(traj, waypoints)?;
    waypoints
        .windows(2)
        .map(|w| segment_loss(traj, w[0], w[1], cfg))
        .collect()
}

pub(crate) fn check_waypoints(traj: &Trajectory, waypoints: &[usize]) -> Result<()> {
    let last = traj.len() - 1;
    match (waypoints.first(), waypoints.last()) {
        (Some(0), Some(&end)) if end == last && waypoints.len() >= 2 => {}
        _ => {
            return Err(Error::Contract(format!(
                "waypoints must start at 0 and end at {last}, got {waypoints:?}"
            )))
        }
    }
    if waypoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Contract(format!(
            "waypoint indices must be strictly increasing, got {waypoints:?}"
        )));
    }
    Ok(())
}

/// Nearest point of the polyline through `traj[waypoints]` to `x`.
pub fn project_onto_polyline(
    x: &State,
    traj: &Trajectory,
    waypoints: &[usize],
    cfg: &MetricConfig,
) -> Result<ProjectionResult> {
    check_waypoints(traj, waypoints)?;
    check_compatible(traj.state(0), x)?;
    cfg.check_for(traj)?;
    Ok(nearest_on_polyline(x, traj, waypoints, cfg))
}

pub(crate) fn nearest_on_polyline(
    x: &State,
    traj: &Trajectory,
    waypoints: &[usize],
    cfg: &MetricConfig,
) -> ProjectionResult {
    let mut best = ProjectionResult {
        distance: f64::INFINITY,
        segment_index: 0,
        u: 0.0,
    };
    for (k, w) in waypoints.windows(2).enumerate() {
        let (distance, u) = project_unchecked(x, traj.state(w[0]), traj.state(w[1]), cfg);
        if distance < best.distance {
            best = ProjectionResult {
                distance,
                segment_index: k,
                u,
            };
        }
    }
    best
}

/// Global reconstruction loss: the worst frame's distance to its nearest
/// chord of the reconstructed path.
pub fn reconstruction_loss(traj: &Trajectory, waypoints: &[usize], cfg: &MetricConfig) -> Result<f64> {
    check_waypoints(traj, waypoints)?;
    cfg.check_for(traj)?;
    Ok(traj
        .states()
        .map(|x| nearest_on_polyline(x, traj, waypoints, cfg).distance)
        .fold(0.0, f64::max))
}

/// Early-exit feasibility test for the solver.
///
/// `hint` carries the frame that broke the previous check, which usually
/// breaks the next (longer) segment from the same start too.
pub(crate) fn segment_within(
    traj: &Trajectory,
    start: usize,
    end: usize,
    eta: f64,
    cfg: &MetricConfig,
    hint: &mut Option<usize>,
    evaluations: &mut u64,
) -> bool {
    let a = traj.state(start);
    let b = traj.state(end);
    if let Some(h) = *hint {
        if h > start && h < end {
            *evaluations += 1;
            if project_unchecked(traj.state(h), a, b, cfg).0 > eta {
                return false;
            }
        }
    }
    for t in start + 1..end {
        *evaluations += 1;
        if project_unchecked(traj.state(t), a, b, cfg).0 > eta {
            *hint = Some(t);
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state_space::{EeState, JointState};

    fn ee(p: [f64; 3]) -> State {
        State::Ee(EeState::from_axis_angle(p, [0.0; 3], 0.0))
    }

    fn path(points: &[[f64; 3]]) -> Trajectory {
        Trajectory::from_states("path", 10.0, points.iter().map(|p| ee(*p))).unwrap()
    }

    #[test]
    fn projection_examples() {
        let cfg = MetricConfig::default();
        let a = ee([0.0; 3]);
        let b = ee([2.0, 0.0, 0.0]);

        let r = project_onto_chord(&ee([1.0, 1.0, 0.0]), &a, &b, &cfg).unwrap();
        assert!((r.distance - 1.0).abs() < 1e-15);
        assert_eq!(r.u, 0.5);

        let r = project_onto_chord(&ee([0.7, 0.0, 0.0]), &a, &b, &cfg).unwrap();
        assert_eq!(r.distance, 0.0);

        let r = project_onto_chord(&ee([-1.0, 0.0, 0.0]), &a, &b, &cfg).unwrap();
        assert_eq!(r.u, 0.0);
        assert_eq!(r.distance, 1.0);
    }

    #[test]
    fn degenerate_chord_uses_start() {
        let cfg = MetricConfig::default();
        let a = ee([1.0, 1.0, 1.0]);
        let r = project_onto_chord(&ee([1.0, 1.0, 2.0]), &a, &a, &cfg).unwrap();
        assert_eq!(r.u, 0.0);
        assert_eq!(r.distance, 1.0);
    }

    #[test]
    fn rotation_in_place_projects_on_orientation() {
        let cfg = MetricConfig::default();
        let a = State::Ee(EeState::from_axis_angle([0.0; 3], [0.0; 3], 0.0));
        let b = State::Ee(EeState::from_axis_angle([0.0; 3], [0.0, 0.0, 1.0], 0.0));
        let x = State::Ee(EeState::from_axis_angle([0.0; 3], [0.0, 0.0, 0.25], 0.0));
        let r = project_onto_chord(&x, &a, &b, &cfg).unwrap();
        assert!((r.u - 0.25).abs() < 1e-12);
        assert!(r.distance < 1e-9);
    }

    #[test]
    fn orientation_follows_position_parameter() {
        // foot at u = 0.5 compares against the half-way rotation
        let cfg = MetricConfig::default();
        let a = State::Ee(EeState::from_axis_angle([0.0; 3], [0.0; 3], 0.0));
        let b = State::Ee(EeState::from_axis_angle([2.0, 0.0, 0.0], [0.0, 0.0, 1.0], 0.0));
        let x = State::Ee(EeState::from_axis_angle([1.0, 0.0, 0.0], [0.0; 3], 0.0));
        let r = project_onto_chord(&x, &a, &b, &cfg).unwrap();
        assert_eq!(r.u, 0.5);
        assert!((r.distance - 0.5).abs() < 1e-12);
    }

    #[test]
    fn joint_projection() {
        let cfg = MetricConfig::default();
        let j = |v: [f64; 2]| State::Joint(JointState::new(v.to_vec()));
        let r = project_onto_chord(&j([1.0, 1.0]), &j([0.0, 0.0]), &j([2.0, 0.0]), &cfg).unwrap();
        assert_eq!(r.u, 0.5);
        assert!((r.distance - 1.0).abs() < 1e-15);
    }

    #[test]
    fn segment_loss_examples() {
        let cfg = MetricConfig::default();
        let line = path(&[[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]);
        assert_eq!(segment_loss(&line, 0, 2, &cfg).unwrap(), 0.0);
        let apex = path(&[[0.0; 3], [1.0, 1.0, 0.0], [2.0, 0.0, 0.0]]);
        assert!((segment_loss(&apex, 0, 2, &cfg).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(segment_loss(&apex, 0, 1, &cfg).unwrap(), 0.0);
        assert_eq!(segment_loss(&apex, 1, 2, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn segment_loss_rejects_bad_bounds() {
        let cfg = MetricConfig::default();
        let t = path(&[[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]);
        assert!(matches!(segment_loss(&t, 1, 1, &cfg), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(segment_loss(&t, 0, 3, &cfg), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(segment_loss(&t, 2, 1, &cfg), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn reconstruction_loss_examples() {
        let cfg = MetricConfig::default();
        let apex = path(&[[0.0; 3], [1.0, 1.0, 0.0], [2.0, 0.0, 0.0]]);
        assert_eq!(reconstruction_loss(&apex, &[0, 1, 2], &cfg).unwrap(), 0.0);
        let line = path(&[[0.0; 3], [1.0, 0.0, 0.0], [3.0, 0.0, 0.0], [4.0, 0.0, 0.0]]);
        assert_eq!(reconstruction_loss(&line, &[0, 3], &cfg).unwrap(), 0.0);
    }

    #[test]
    fn global_loss_can_be_below_segment_loss() {
        // frame 3 sits on the first chord while belonging to the second
        let cfg = MetricConfig::default();
        let t = path(&[
            [0.0; 3],
            [1.0, 0.0, 0.0],
            [2.0, 0.0, 0.0],
            [1.5, 0.0, 0.0],
            [2.0, 1.0, 0.0],
        ]);
        let global = reconstruction_loss(&t, &[0, 2, 4], &cfg).unwrap();
        let seg = segment_loss(&t, 2, 4, &cfg).unwrap();
        assert_eq!(global, 0.0);
        assert!(seg > 0.3);
    }

    #[test]
    fn reconstruction_loss_requires_endpoints() {
        let cfg = MetricConfig::default();
        let t = path(&[[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]);
        assert!(matches!(reconstruction_loss(&t, &[0, 1], &cfg), Err(Error::Contract(_))));
        assert!(matches!(reconstruction_loss(&t, &[1, 2], &cfg), Err(Error::Contract(_))));
        assert!(matches!(reconstruction_loss(&t, &[0, 2, 1, 2], &cfg), Err(Error::Contract(_))));
        assert!(matches!(reconstruction_loss(&t, &[], &cfg), Err(Error::Contract(_))));
    }

    #[test]
    fn metric_config_validation() {
        assert!(MetricConfig::default().validate().is_ok());
        let zero = MetricConfig {
            position_weight: 0.0,
            orientation_weight: 0.0,
            ..MetricConfig::default()
        };
        assert!(zero.validate().is_err());
        let gripper_only = MetricConfig {
            include_gripper: true,
            ..zero.clone()
        };
        assert!(gripper_only.validate().is_ok());
        let negative = MetricConfig {
            position_weight: -1.0,
            ..MetricConfig::default()
        };
        assert!(negative.validate().is_err());
        let mask = MetricConfig {
            joint_mask: Some(vec![0.0, 0.0]),
            ..MetricConfig::default()
        };
        assert!(mask.validate().is_err());
    }
}
