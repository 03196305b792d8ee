//! Seeded synthetic demonstrations for tests, benchmarks, and demos.

use std::ops::RangeInclusive;

use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::state_space::{
    quaternion_to_axis_angle, slerp_shortest, EeState, Frame, JointState, State, StateSpace,
    Trajectory,
};

/// Piecewise-linear demonstrations: straight constant-speed segments between
/// random corners, with i.i.d. Gaussian noise on every position coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentCorpus {
    pub state_space: StateSpace,
    pub segments: RangeInclusive<usize>,
    pub frames_per_segment: RangeInclusive<usize>,
    /// Length of each segment (meters in EE mode, radians in joint mode).
    pub segment_length: (f64, f64),
    /// Largest rotation added per segment (EE mode).
    pub max_segment_rotation: f64,
    pub noise_sigma: f64,
    pub joint_dim: usize,
    pub frequency_hz: f64,
}

impl Default for SegmentCorpus {
    fn default() -> Self {
        SegmentCorpus {
            state_space: StateSpace::Ee,
            segments: 4..=8,
            frames_per_segment: 40..=80,
            segment_length: (0.08, 0.3),
            max_segment_rotation: 0.6,
            noise_sigma: 0.001,
            joint_dim: 7,
            frequency_hz: 20.0,
        }
    }
}

fn unit_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

impl SegmentCorpus {
    pub fn generate(&self, seed: u64, count: usize) -> Vec<Trajectory> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|i| self.trajectory(&mut rng, format!("synthetic_{i:03}")))
            .collect()
    }

    pub fn trajectory<R: Rng>(&self, rng: &mut R, name: String) -> Trajectory {
        let segments = rng.random_range(self.segments.clone());
        let lengths: Vec<usize> = (0..segments)
            .map(|_| rng.random_range(self.frames_per_segment.clone()))
            .collect();
        let noise = Normal::new(0.0, self.noise_sigma.max(0.0)).expect("finite sigma");
        let states = match self.state_space {
            StateSpace::Ee => self.ee_states(rng, &lengths, &noise),
            StateSpace::Joint => self.joint_states(rng, &lengths, &noise),
        };
        let frames = states
            .into_iter()
            .enumerate()
            .map(|(t, s)| Frame::new(t as u64, s))
            .collect();
        Trajectory::new(name, self.frequency_hz, frames).expect("generated trajectory is valid")
    }

    fn ee_states<R: Rng>(&self, rng: &mut R, lengths: &[usize], noise: &Normal<f64>) -> Vec<State> {
        let (lo, hi) = self.segment_length;
        let mut corner = Vector3::new(
            rng.random_range(-0.2..0.2),
            rng.random_range(-0.2..0.2),
            rng.random_range(0.0..0.3),
        );
        let mut rot = UnitQuaternion::from_scaled_axis(Vector3::from_vec(unit_vector(rng, 3)) * 0.3);
        // gripper closes at one corner and may reopen at a later one
        let close_at = rng.random_range(1..lengths.len());
        let open_at = rng.random_range(close_at..=lengths.len());
        let mut gripper = 0.08;
        let mut out = Vec::new();
        let push = |out: &mut Vec<State>, p: Vector3<f64>, q: &UnitQuaternion<f64>, g: f64, rng: &mut R| {
            let noisy = [
                p.x + noise.sample(rng),
                p.y + noise.sample(rng),
                p.z + noise.sample(rng),
            ];
            out.push(State::Ee(EeState::from_axis_angle(noisy, quaternion_to_axis_angle(q), g)));
        };
        push(&mut out, corner, &rot, gripper, rng);
        for (k, &n) in lengths.iter().enumerate() {
            let dir = Vector3::from_vec(unit_vector(rng, 3));
            let next = corner + dir * rng.random_range(lo..hi);
            let turn = Vector3::from_vec(unit_vector(rng, 3)) * rng.random_range(0.0..=self.max_segment_rotation);
            let next_rot = rot * UnitQuaternion::from_scaled_axis(turn);
            if k == close_at {
                gripper = 0.0;
            }
            if k == open_at {
                gripper = 0.08;
            }
            for s in 1..=n {
                let u = s as f64 / n as f64;
                let p = corner + (next - corner) * u;
                let q = slerp_shortest(&rot, &next_rot, u);
                push(&mut out, p, &q, gripper, rng);
            }
            corner = next;
            rot = next_rot;
        }
        out
    }

    fn joint_states<R: Rng>(&self, rng: &mut R, lengths: &[usize], noise: &Normal<f64>) -> Vec<State> {
        let (lo, hi) = self.segment_length;
        let d = self.joint_dim;
        let mut corner: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let noisy = |p: &[f64], rng: &mut R| {
            State::Joint(JointState::new(p.iter().map(|x| x + noise.sample(rng)).collect()))
        };
        let mut out = vec![noisy(&corner, rng)];
        for &n in lengths {
            let dir = unit_vector(rng, d);
            let len = rng.random_range(lo..hi);
            let next: Vec<f64> = corner.iter().zip(&dir).map(|(c, v)| c + v * len).collect();
            for s in 1..=n {
                let u = s as f64 / n as f64;
                let p: Vec<f64> = corner.iter().zip(&next).map(|(a, b)| a + (b - a) * u).collect();
                out.push(noisy(&p, rng));
            }
            corner = next;
        }
        out
    }
}

/// Random-walk trajectory with `len` frames: Gaussian position (or joint)
/// increments of scale `step`, and small random rotations in EE mode.
pub fn random_walk<R: Rng>(rng: &mut R, kind: StateSpace, len: usize, step: f64, joint_dim: usize) -> Trajectory {
    let inc = Normal::new(0.0, step).expect("finite step");
    let states: Vec<State> = match kind {
        StateSpace::Ee => {
            let mut p = Vector3::zeros();
            let mut q = UnitQuaternion::identity();
            (0..len)
                .map(|_| {
                    let s = State::Ee(EeState::from_axis_angle(
                        [p.x, p.y, p.z],
                        quaternion_to_axis_angle(&q),
                        rng.random_range(0.0..0.08),
                    ));
                    p += Vector3::new(inc.sample(rng), inc.sample(rng), inc.sample(rng));
                    let w = Vector3::new(inc.sample(rng), inc.sample(rng), inc.sample(rng));
                    q *= UnitQuaternion::from_scaled_axis(w);
                    s
                })
                .collect()
        }
        StateSpace::Joint => {
            let mut x = vec![0.0; joint_dim];
            (0..len)
                .map(|_| {
                    let s = State::Joint(JointState::new(x.clone()));
                    for v in x.iter_mut() {
                        *v += inc.sample(rng);
                    }
                    s
                })
                .collect()
        }
    };
    Trajectory::from_states("random_walk", 50.0, states).expect("generated trajectory is valid")
}
