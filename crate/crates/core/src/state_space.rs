//! Proprioceptive states, trajectories, and the interpolation between states.
//!
//! Two state spaces are supported: end-effector poses (position, unit
//! quaternion, gripper width) and joint vectors. A trajectory never mixes the
//! two. Everything here is immutable after construction.

use std::fmt;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reconstruction::MetricConfig;

/// Which proprioceptive representation a trajectory uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateSpace {
    Ee,
    Joint,
}

impl StateSpace {
    pub fn as_str(self) -> &'static str {
        match self {
            StateSpace::Ee => "ee",
            StateSpace::Joint => "joint",
        }
    }
}

impl fmt::Display for StateSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Flips the quaternion so its scalar part is non-negative.
///
/// When the scalar part is exactly zero the first nonzero vector component is
/// made positive, so both representatives of a half turn map to one value.
pub fn canonicalize(q: UnitQuaternion<f64>) -> UnitQuaternion<f64> {
    let mut c = q.into_inner().coords;
    let norm = c.norm();
    if norm > 0.0 && norm != 1.0 {
        c /= norm;
    }
    // coords are stored [i, j, k, w]
    let flip = if c[3] != 0.0 {
        c[3] < 0.0
    } else {
        c.iter().take(3).find(|v| **v != 0.0).is_some_and(|v| *v < 0.0)
    };
    if flip {
        c = -c;
    }
    UnitQuaternion::new_unchecked(Quaternion::from(c))
}

/// Exponential map from a rotation vector (axis times angle, radians).
pub fn axis_angle_to_quaternion(v: [f64; 3]) -> UnitQuaternion<f64> {
    canonicalize(UnitQuaternion::from_scaled_axis(Vector3::from(v)))
}

/// Logarithm map of a unit quaternion, returning a rotation vector with angle in `[0, π]`.
pub fn quaternion_to_axis_angle(q: &UnitQuaternion<f64>) -> [f64; 3] {
    let q = canonicalize(*q);
    let imag = q.imag();
    let s = imag.norm();
    if s == 0.0 {
        return [0.0; 3];
    }
    let angle = 2.0 * s.atan2(q.w);
    let v = imag * (angle / s);
    [v.x, v.y, v.z]
}

/// Rotation angle (radians) taking `a` to `b`, in `[0, π]`.
///
/// Equal to `2·acos(min(1, |⟨a, b⟩|))`; evaluated through `atan2` of the chord
/// lengths, which keeps precision for nearly equal rotations.
pub fn geodesic_angle(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>) -> f64 {
    let qa = a.as_ref().coords;
    let mut qb = b.as_ref().coords;
    if qa.dot(&qb) < 0.0 {
        qb = -qb;
    }
    4.0 * (qa - qb).norm().atan2((qa + qb).norm())
}

/// Spherical interpolation along the shorter arc. Exact at `u = 0` and `u = 1`.
pub fn slerp_shortest(
    a: &UnitQuaternion<f64>,
    b: &UnitQuaternion<f64>,
    u: f64,
) -> UnitQuaternion<f64> {
    if u <= 0.0 {
        return *a;
    }
    if u >= 1.0 {
        return *b;
    }
    let q = a.try_slerp(b, u, 1e-12).unwrap_or_else(|| {
        // nearly identical rotations: normalized lerp is exact to rounding
        let ca = a.as_ref().coords;
        let mut cb = b.as_ref().coords;
        if ca.dot(&cb) < 0.0 {
            cb = -cb;
        }
        UnitQuaternion::from_quaternion(Quaternion::from(ca + (cb - ca) * u))
    });
    canonicalize(UnitQuaternion::new_normalize(q.into_inner()))
}

/// End-effector pose plus gripper width.
#[derive(Debug, Clone, PartialEq)]
pub struct EeState {
    position: Vector3<f64>,
    orientation: UnitQuaternion<f64>,
    gripper: f64,
    source_axis_angle: Option<[f64; 3]>,
}

impl EeState {
    pub fn new(position: [f64; 3], orientation: UnitQuaternion<f64>, gripper: f64) -> Self {
        EeState {
            position: Vector3::from(position),
            orientation: canonicalize(orientation),
            gripper,
            source_axis_angle: None,
        }
    }

    /// Builds a state from a rotation vector, remembering the vector for output.
    pub fn from_axis_angle(position: [f64; 3], axis_angle: [f64; 3], gripper: f64) -> Self {
        EeState {
            position: Vector3::from(position),
            orientation: axis_angle_to_quaternion(axis_angle),
            gripper,
            source_axis_angle: Some(axis_angle),
        }
    }

    pub fn position(&self) -> &Vector3<f64> {
        &self.position
    }

    pub fn orientation(&self) -> &UnitQuaternion<f64> {
        &self.orientation
    }

    pub fn gripper(&self) -> f64 {
        self.gripper
    }

    pub fn source_axis_angle(&self) -> Option<[f64; 3]> {
        self.source_axis_angle
    }

    /// The rotation vector this state was read from, or one derived from the quaternion.
    pub fn axis_angle(&self) -> [f64; 3] {
        self.source_axis_angle
            .unwrap_or_else(|| quaternion_to_axis_angle(&self.orientation))
    }

    fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.orientation.coords.iter().all(|v| v.is_finite())
            && self.gripper.is_finite()
            && self
                .source_axis_angle
                .is_none_or(|v| v.iter().all(|c| c.is_finite()))
    }

    fn translated(&self, offset: &Vector3<f64>) -> Self {
        EeState {
            position: self.position + offset,
            ..self.clone()
        }
    }
}

/// Joint-space configuration (radians).
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    joints: Vec<f64>,
}

impl JointState {
    pub fn new(joints: Vec<f64>) -> Self {
        JointState { joints }
    }

    pub fn joints(&self) -> &[f64] {
        &self.joints
    }

    pub fn dim(&self) -> usize {
        self.joints.len()
    }
}

/// A proprioceptive state in one of the supported spaces.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Ee(EeState),
    Joint(JointState),
}

impl State {
    pub fn kind(&self) -> StateSpace {
        match self {
            State::Ee(_) => StateSpace::Ee,
            State::Joint(_) => StateSpace::Joint,
        }
    }

    pub fn as_ee(&self) -> Option<&EeState> {
        match self {
            State::Ee(s) => Some(s),
            State::Joint(_) => None,
        }
    }

    pub fn as_joint(&self) -> Option<&JointState> {
        match self {
            State::Joint(s) => Some(s),
            State::Ee(_) => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            State::Ee(s) => s.is_finite(),
            State::Joint(s) => s.joints.iter().all(|v| v.is_finite()),
        }
    }

    /// First three coordinates, used for plotting: the position in EE mode,
    /// the leading joints (zero padded) in joint mode.
    pub fn plot_xyz(&self) -> [f64; 3] {
        match self {
            State::Ee(s) => [s.position.x, s.position.y, s.position.z],
            State::Joint(s) => {
                let mut out = [0.0; 3];
                for (o, v) in out.iter_mut().zip(&s.joints) {
                    *o = *v;
                }
                out
            }
        }
    }
}

pub(crate) fn check_compatible(a: &State, b: &State) -> Result<()> {
    match (a, b) {
        (State::Ee(_), State::Ee(_)) => Ok(()),
        (State::Joint(x), State::Joint(y)) => {
            if x.dim() == y.dim() {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: x.dim(),
                    found: y.dim(),
                })
            }
        }
        _ => Err(Error::KindMismatch {
            expected: a.kind().as_str(),
            found: b.kind().as_str(),
        }),
    }
}

/// Linear interpolation between two states, with slerp for orientations.
///
/// `u = 0` returns a clone of `a` and `u = 1` a clone of `b`.
pub fn interpolate(a: &State, b: &State, u: f64) -> Result<State> {
    check_compatible(a, b)?;
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::InvalidInput(format!(
            "interpolation parameter {u} outside [0, 1]"
        )));
    }
    Ok(interpolate_unchecked(a, b, u))
}

pub(crate) fn interpolate_unchecked(a: &State, b: &State, u: f64) -> State {
    if u == 0.0 {
        return a.clone();
    }
    if u == 1.0 {
        return b.clone();
    }
    match (a, b) {
        (State::Ee(a), State::Ee(b)) => State::Ee(interpolate_ee(a, b, u)),
        (State::Joint(a), State::Joint(b)) => State::Joint(JointState {
            joints: a
                .joints
                .iter()
                .zip(&b.joints)
                .map(|(x, y)| x + (y - x) * u)
                .collect(),
        }),
        _ => unreachable!("kinds checked by caller"),
    }
}

pub(crate) fn interpolate_ee(a: &EeState, b: &EeState, u: f64) -> EeState {
    if u == 0.0 {
        return a.clone();
    }
    if u == 1.0 {
        return b.clone();
    }
    EeState {
        position: a.position + (b.position - a.position) * u,
        orientation: slerp_shortest(&a.orientation, &b.orientation, u),
        gripper: a.gripper + (b.gripper - a.gripper) * u,
        source_axis_angle: None,
    }
}

/// Distance between two states under `cfg`.
///
/// EE mode sums weighted position distance (meters) and geodesic angle
/// (radians), plus the gripper gap if enabled. Joint mode is a (masked) L2.
pub fn state_distance(x: &State, y: &State, cfg: &MetricConfig) -> Result<f64> {
    check_compatible(x, y)?;
    match (x, y) {
        (State::Ee(a), State::Ee(b)) => Ok(ee_distance(a, b, cfg)),
        (State::Joint(a), State::Joint(b)) => {
            cfg.check_joint_dim(a.dim())?;
            Ok(joint_distance(&a.joints, &b.joints, cfg.joint_mask.as_deref()))
        }
        _ => unreachable!(),
    }
}

pub(crate) fn ee_distance(a: &EeState, b: &EeState, cfg: &MetricConfig) -> f64 {
    let mut d = 0.0;
    if cfg.position_weight != 0.0 {
        d += cfg.position_weight * (a.position - b.position).norm();
    }
    if cfg.orientation_weight != 0.0 {
        d += cfg.orientation_weight * geodesic_angle(&a.orientation, &b.orientation);
    }
    if cfg.include_gripper {
        d += cfg.gripper_weight * (a.gripper - b.gripper).abs();
    }
    d
}

pub(crate) fn joint_distance(a: &[f64], b: &[f64], mask: Option<&[f64]>) -> f64 {
    match mask {
        None => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
        Some(w) => a
            .iter()
            .zip(b)
            .zip(w)
            .map(|((x, y), w)| {
                let d = w * (x - y);
                d * d
            })
            .sum::<f64>()
            .sqrt(),
    }
}

/// One timestep of a demonstration.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub t: u64,
    pub state: State,
    /// Opaque reference to an external observation (image path, key, ...).
    pub obs_ref: Option<String>,
}

impl Frame {
    pub fn new(t: u64, state: State) -> Self {
        Frame {
            t,
            state,
            obs_ref: None,
        }
    }
}

/// A validated demonstration: at least two frames of one state kind,
/// timesteps strictly increasing from zero, all values finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    name: String,
    state_space: StateSpace,
    frequency_hz: f64,
    gripper_dims: Vec<usize>,
    frames: Vec<Frame>,
}

impl Trajectory {
    pub fn new(name: impl Into<String>, frequency_hz: f64, frames: Vec<Frame>) -> Result<Self> {
        Self::with_gripper_dims(name, frequency_hz, frames, Vec::new())
    }

    /// Like [`Trajectory::new`], marking which joint dimensions are grippers.
    pub fn with_gripper_dims(
        name: impl Into<String>,
        frequency_hz: f64,
        frames: Vec<Frame>,
        gripper_dims: Vec<usize>,
    ) -> Result<Self> {
        if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
            return Err(Error::InvalidInput(format!(
                "frequency must be positive, got {frequency_hz}"
            )));
        }
        if frames.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "trajectory needs at least 2 frames, got {}",
                frames.len()
            )));
        }
        let first = &frames[0];
        if first.t != 0 {
            return Err(Error::InvalidInput(format!(
                "frame 0 has t={}, expected 0",
                first.t
            )));
        }
        for (i, frame) in frames.iter().enumerate() {
            if !frame.state.is_finite() {
                return Err(Error::InvalidInput(format!("frame {i} has a non-finite value")));
            }
            check_compatible(&first.state, &frame.state)
                .map_err(|e| Error::InvalidInput(format!("frame {i}: {e}")))?;
            if i > 0 && frame.t <= frames[i - 1].t {
                return Err(Error::InvalidInput(format!(
                    "frame {i}: t={} does not increase (previous t={})",
                    frame.t,
                    frames[i - 1].t
                )));
            }
        }
        let state_space = first.state.kind();
        if !gripper_dims.is_empty() {
            let dim = match &first.state {
                State::Joint(j) => j.dim(),
                State::Ee(_) => {
                    return Err(Error::InvalidInput(
                        "gripper_dims only applies to joint trajectories".into(),
                    ))
                }
            };
            if let Some(bad) = gripper_dims.iter().find(|d| **d >= dim) {
                return Err(Error::InvalidInput(format!(
                    "gripper dim {bad} out of range for {dim} joints"
                )));
            }
        }
        Ok(Trajectory {
            name: name.into(),
            state_space,
            frequency_hz,
            gripper_dims,
            frames,
        })
    }

    /// Convenience constructor numbering frames `0, 1, 2, ...`.
    pub fn from_states(
        name: impl Into<String>,
        frequency_hz: f64,
        states: impl IntoIterator<Item = State>,
    ) -> Result<Self> {
        let frames = states
            .into_iter()
            .enumerate()
            .map(|(t, s)| Frame::new(t as u64, s))
            .collect();
        Self::new(name, frequency_hz, frames)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn state_space(&self) -> StateSpace {
        self.state_space
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    pub fn gripper_dims(&self) -> &[usize] {
        &self.gripper_dims
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn state(&self, index: usize) -> &State {
        &self.frames[index].state
    }

    pub fn states(&self) -> impl Iterator<Item = &State> {
        self.frames.iter().map(|f| &f.state)
    }

    /// Joint dimension in joint mode, `None` in EE mode.
    pub fn joint_dim(&self) -> Option<usize> {
        self.frames[0].state.as_joint().map(JointState::dim)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Shifts every EE position by `offset`. Joint trajectories are returned unchanged.
    pub fn translated(&self, offset: [f64; 3]) -> Self {
        let offset = Vector3::from(offset);
        let frames = self
            .frames
            .iter()
            .map(|f| Frame {
                state: match &f.state {
                    State::Ee(s) => State::Ee(s.translated(&offset)),
                    other => other.clone(),
                },
                ..f.clone()
            })
            .collect();
        Trajectory {
            frames,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    use super::*;

    fn ee(p: [f64; 3], aa: [f64; 3]) -> State {
        State::Ee(EeState::from_axis_angle(p, aa, 0.0))
    }

    #[test]
    fn midpoint_of_positions() {
        let a = ee([0.0; 3], [0.0; 3]);
        let b = ee([2.0, 0.0, 0.0], [0.0; 3]);
        let m = interpolate(&a, &b, 0.5).unwrap();
        assert_eq!(m.as_ee().unwrap().position(), &Vector3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn endpoints_are_bit_identical() {
        let a = ee([0.1, 0.2, 0.3], [0.3, -0.2, 0.1]);
        let b = ee([1.0, 0.0, 0.5], [-1.0, 0.4, 2.0]);
        assert_eq!(interpolate(&a, &b, 0.0).unwrap(), a);
        assert_eq!(interpolate(&a, &b, 1.0).unwrap(), b);
    }

    #[test]
    fn slerp_half_of_quarter_turn() {
        let a = ee([0.0; 3], [0.0; 3]);
        let b = ee([0.0; 3], [0.0, 0.0, FRAC_PI_2]);
        let m = interpolate(&a, &b, 0.5).unwrap();
        let expected = axis_angle_to_quaternion([0.0, 0.0, FRAC_PI_4]);
        let angle = geodesic_angle(m.as_ee().unwrap().orientation(), &expected);
        assert!(angle < 1e-9, "{angle}");
    }

    #[test]
    fn slerp_takes_shorter_arc() {
        // 170 and -170 degrees about z are 20 degrees apart
        let a = axis_angle_to_quaternion([0.0, 0.0, 170f64.to_radians()]);
        let b = axis_angle_to_quaternion([0.0, 0.0, -170f64.to_radians()]);
        let m = slerp_shortest(&a, &b, 0.5);
        assert!((geodesic_angle(&a, &m) - 10f64.to_radians()).abs() < 1e-9);
    }

    #[test]
    fn interpolate_rejects_mixed_kinds() {
        let a = ee([0.0; 3], [0.0; 3]);
        let b = State::Joint(JointState::new(vec![0.0; 3]));
        assert!(matches!(
            interpolate(&a, &b, 0.5),
            Err(Error::KindMismatch { .. })
        ));
        assert!(matches!(
            state_distance(&a, &b, &MetricConfig::default()),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn interpolate_rejects_out_of_range_parameter() {
        let a = ee([0.0; 3], [0.0; 3]);
        assert!(interpolate(&a, &a, 1.5).is_err());
        assert!(interpolate(&a, &a, f64::NAN).is_err());
    }

    #[test]
    fn distance_examples() {
        let cfg = MetricConfig::default();
        let a = ee([0.0; 3], [0.0; 3]);
        assert_eq!(state_distance(&a, &a, &cfg).unwrap(), 0.0);

        let b = ee([0.3, 0.0, 0.4], [0.0; 3]);
        assert!((state_distance(&a, &b, &cfg).unwrap() - 0.5).abs() < 1e-15);

        let c = ee([0.0; 3], [FRAC_PI_2, 0.0, 0.0]);
        assert!((state_distance(&a, &c, &cfg).unwrap() - FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn gripper_excluded_unless_enabled() {
        let a = State::Ee(EeState::from_axis_angle([0.0; 3], [0.0; 3], 0.0));
        let b = State::Ee(EeState::from_axis_angle([0.0; 3], [0.0; 3], 0.08));
        assert_eq!(state_distance(&a, &b, &MetricConfig::default()).unwrap(), 0.0);
        let cfg = MetricConfig {
            include_gripper: true,
            gripper_weight: 2.0,
            ..MetricConfig::default()
        };
        assert!((state_distance(&a, &b, &cfg).unwrap() - 0.16).abs() < 1e-15);
    }

    #[test]
    fn joint_distance_with_mask() {
        let a = State::Joint(JointState::new(vec![0.0, 0.0, 0.0]));
        let b = State::Joint(JointState::new(vec![3.0, 4.0, 100.0]));
        let cfg = MetricConfig {
            joint_mask: Some(vec![1.0, 1.0, 0.0]),
            ..MetricConfig::default()
        };
        assert_eq!(state_distance(&a, &b, &cfg).unwrap(), 5.0);
        let short = MetricConfig {
            joint_mask: Some(vec![1.0]),
            ..MetricConfig::default()
        };
        assert!(matches!(
            state_distance(&a, &b, &short),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn axis_angle_examples() {
        assert_eq!(axis_angle_to_quaternion([0.0; 3]), UnitQuaternion::identity());
        let q = axis_angle_to_quaternion([PI, 0.0, 0.0]);
        assert!(q.w.abs() < 1e-9);
        assert!((q.i - 1.0).abs() < 1e-9);
        assert!(q.j.abs() < 1e-9 && q.k.abs() < 1e-9);
    }

    #[test]
    fn canonical_sign() {
        let q = UnitQuaternion::new_unchecked(Quaternion::new(-0.5, 0.5, 0.5, 0.5));
        let c = canonicalize(q);
        assert!(c.w > 0.0);
        let half = UnitQuaternion::new_unchecked(Quaternion::new(0.0, 0.0, -1.0, 0.0));
        assert_eq!(canonicalize(half).j, 1.0);
    }

    #[test]
    fn trajectory_validation() {
        let s = ee([0.0; 3], [0.0; 3]);
        assert!(Trajectory::from_states("one", 10.0, [s.clone()]).is_err());
        assert!(Trajectory::from_states("f", 0.0, [s.clone(), s.clone()]).is_err());
        let j = State::Joint(JointState::new(vec![0.0; 2]));
        assert!(Trajectory::from_states("mixed", 10.0, [s.clone(), j]).is_err());
        let bad_t = vec![Frame::new(0, s.clone()), Frame::new(0, s.clone())];
        assert!(Trajectory::new("t", 10.0, bad_t).is_err());
        let nan = ee([f64::NAN, 0.0, 0.0], [0.0; 3]);
        assert!(Trajectory::from_states("nan", 10.0, [s, nan]).is_err());
        let joints = [
            State::Joint(JointState::new(vec![0.0; 2])),
            State::Joint(JointState::new(vec![0.0; 3])),
        ];
        assert!(Trajectory::from_states("dims", 10.0, joints).is_err());
    }
}
