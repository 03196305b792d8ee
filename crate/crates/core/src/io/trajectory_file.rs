use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::state_space::{EeState, Frame, JointState, State, StateSpace, Trajectory};

pub const TRAJECTORY_SCHEMA: &str = "awe-traj-v1";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryFileIn {
    #[allow(dead_code)]
    schema_version: String,
    name: String,
    state_space: StateSpace,
    frequency_hz: f64,
    #[serde(default)]
    gripper_dims: Vec<usize>,
    frames: Vec<Value>,
}

#[derive(Debug, Serialize)]
struct TrajectoryFileOut<'a> {
    schema_version: &'static str,
    name: &'a str,
    state_space: StateSpace,
    frequency_hz: f64,
    #[serde(skip_serializing_if = "<[usize]>::is_empty")]
    gripper_dims: &'a [usize],
    frames: Vec<FrameRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EeFrameRecord {
    t: u64,
    pos: [f64; 3],
    axis_angle: [f64; 3],
    gripper: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    obs_ref: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointFrameRecord {
    t: u64,
    joints: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    obs_ref: Option<String>,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum FrameRecord {
    Ee(EeFrameRecord),
    Joint(JointFrameRecord),
}

/// State fields as they appear in files (no timestep).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateRecord {
    Ee {
        pos: [f64; 3],
        axis_angle: [f64; 3],
        gripper: f64,
    },
    Joint {
        joints: Vec<f64>,
    },
}

impl From<&State> for StateRecord {
    fn from(s: &State) -> Self {
        match s {
            State::Ee(e) => {
                let p = e.position();
                StateRecord::Ee {
                    pos: [p.x, p.y, p.z],
                    axis_angle: e.axis_angle(),
                    gripper: e.gripper(),
                }
            }
            State::Joint(j) => StateRecord::Joint {
                joints: j.joints().to_vec(),
            },
        }
    }
}

impl From<StateRecord> for State {
    fn from(r: StateRecord) -> Self {
        match r {
            StateRecord::Ee {
                pos,
                axis_angle,
                gripper,
            } => State::Ee(EeState::from_axis_angle(pos, axis_angle, gripper)),
            StateRecord::Joint { joints } => State::Joint(JointState::new(joints)),
        }
    }
}

/// Parses a trajectory document. `path` is only used for error context.
pub fn parse_trajectory(text: &str, path: &Path) -> Result<Trajectory> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let schema = |message: String| Error::Schema {
        path: path.to_path_buf(),
        message,
    };
    let validation = |message: String| Error::Validation {
        path: path.to_path_buf(),
        message,
    };

    match value.get("schema_version") {
        Some(Value::String(v)) if v == TRAJECTORY_SCHEMA => {}
        Some(other) => {
            return Err(schema(format!(
                "schema_version is {other}, expected \"{TRAJECTORY_SCHEMA}\""
            )))
        }
        None => return Err(schema("missing field `schema_version`".into())),
    }
    let file: TrajectoryFileIn =
        serde_json::from_value(value).map_err(|e| schema(e.to_string()))?;
    if file.frames.is_empty() {
        return Err(validation("frame array is empty".into()));
    }

    let mut frames = Vec::with_capacity(file.frames.len());
    for (i, raw) in file.frames.into_iter().enumerate() {
        let frame = match file.state_space {
            StateSpace::Ee => {
                let r: EeFrameRecord = serde_json::from_value(raw)
                    .map_err(|e| schema(format!("frame {i}: {e}")))?;
                Frame {
                    t: r.t,
                    state: State::Ee(EeState::from_axis_angle(r.pos, r.axis_angle, r.gripper)),
                    obs_ref: r.obs_ref,
                }
            }
            StateSpace::Joint => {
                let r: JointFrameRecord = serde_json::from_value(raw)
                    .map_err(|e| schema(format!("frame {i}: {e}")))?;
                Frame {
                    t: r.t,
                    state: State::Joint(JointState::new(r.joints)),
                    obs_ref: r.obs_ref,
                }
            }
        };
        frames.push(frame);
    }
    Trajectory::with_gripper_dims(file.name, file.frequency_hz, frames, file.gripper_dims).map_err(
        |e| match e {
            Error::InvalidInput(m) => validation(m),
            other => validation(other.to_string()),
        },
    )
}

pub fn load_trajectory(path: impl AsRef<Path>) -> Result<Trajectory> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trajectory(&text, path)
}

pub fn trajectory_to_string(traj: &Trajectory) -> String {
    let frames = traj
        .frames()
        .iter()
        .map(|f| match &f.state {
            State::Ee(e) => {
                let p = e.position();
                FrameRecord::Ee(EeFrameRecord {
                    t: f.t,
                    pos: [p.x, p.y, p.z],
                    axis_angle: e.axis_angle(),
                    gripper: e.gripper(),
                    obs_ref: f.obs_ref.clone(),
                })
            }
            State::Joint(j) => FrameRecord::Joint(JointFrameRecord {
                t: f.t,
                joints: j.joints().to_vec(),
                obs_ref: f.obs_ref.clone(),
            }),
        })
        .collect();
    let doc = TrajectoryFileOut {
        schema_version: TRAJECTORY_SCHEMA,
        name: traj.name(),
        state_space: traj.state_space(),
        frequency_hz: traj.frequency_hz(),
        gripper_dims: traj.gripper_dims(),
        frames,
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("trajectory serializes");
    out.push('\n');
    out
}

pub fn save_trajectory(path: impl AsRef<Path>, traj: &Trajectory) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, trajectory_to_string(traj)).map_err(|e| Error::io(path, e))
}
