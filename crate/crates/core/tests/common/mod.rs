//! Reference implementations written from the definitions, sharing no code
//! with the library beyond reading states out of a `Trajectory`.
#![allow(dead_code)]

use awe::synthetic::random_walk;
use awe::{EeState, State, StateSpace, Trajectory};
use rand::Rng;

type Quat = [f64; 4];

fn quat_from_rotvec(v: [f64; 3]) -> Quat {
    let theta = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if theta == 0.0 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let s = (theta / 2.0).sin() / theta;
    [(theta / 2.0).cos(), v[0] * s, v[1] * s, v[2] * s]
}

fn qdot(a: &Quat, b: &Quat) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn qmul(a: &Quat, b: &Quat) -> Quat {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

fn qconj(a: &Quat) -> Quat {
    [a[0], -a[1], -a[2], -a[3]]
}

fn qlog(q: &Quat) -> [f64; 3] {
    let q = if q[0] < 0.0 { [-q[0], -q[1], -q[2], -q[3]] } else { *q };
    let s = (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    if s == 0.0 {
        return [0.0; 3];
    }
    let angle = 2.0 * s.atan2(q[0]);
    [q[1] / s * angle, q[2] / s * angle, q[3] / s * angle]
}

/// Rotation angle of `a^-1 b`, from the half-angle sine and cosine.
pub fn geodesic(a: &Quat, b: &Quat) -> f64 {
    let r = qmul(&qconj(a), b);
    let s = (r[1] * r[1] + r[2] * r[2] + r[3] * r[3]).sqrt();
    2.0 * s.atan2(r[0].abs())
}

pub fn slerp(a: &Quat, b: &Quat, u: f64) -> Quat {
    let mut b = *b;
    let mut d = qdot(a, &b);
    if d < 0.0 {
        b = b.map(|x| -x);
        d = -d;
    }
    let (wa, wb) = if d > 1.0 - 1e-12 {
        (1.0 - u, u)
    } else {
        let theta = d.acos();
        let s = theta.sin();
        (((1.0 - u) * theta).sin() / s, (u * theta).sin() / s)
    };
    let q: Vec<f64> = (0..4).map(|k| wa * a[k] + wb * b[k]).collect();
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    [q[0] / n, q[1] / n, q[2] / n, q[3] / n]
}

/// Plain vectors pulled out of a library state.
#[derive(Clone, Debug)]
pub enum Raw {
    Ee { p: [f64; 3], q: Quat, g: f64 },
    Joint(Vec<f64>),
}

pub fn raw(s: &State) -> Raw {
    match s {
        State::Ee(e) => {
            let p = e.position();
            Raw::Ee {
                p: [p.x, p.y, p.z],
                q: quat_from_rotvec(e.axis_angle()),
                g: e.gripper(),
            }
        }
        State::Joint(j) => Raw::Joint(j.joints().to_vec()),
    }
}

fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Default metric: position L2 plus orientation geodesic (EE), joint L2 (joint).
pub fn distance(x: &Raw, y: &Raw) -> f64 {
    match (x, y) {
        (Raw::Ee { p: pa, q: qa, .. }, Raw::Ee { p: pb, q: qb, .. }) => {
            let d = sub3(pa, pb);
            dot(&d, &d).sqrt() + geodesic(qa, qb)
        }
        (Raw::Joint(a), Raw::Joint(b)) => {
            let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            dot(&d, &d).sqrt()
        }
        _ => panic!("mixed kinds"),
    }
}

/// Chord parameter by position (or joint vector), falling back to the
/// rotation tangent space when the positions coincide.
pub fn foot(x: &Raw, a: &Raw, b: &Raw) -> Raw {
    match (x, a, b) {
        (Raw::Ee { p, q, .. }, Raw::Ee { p: pa, q: qa, g: ga }, Raw::Ee { p: pb, q: qb, g: gb }) => {
            let d = sub3(pb, pa);
            let len2 = dot(&d, &d);
            let u = if len2 > 0.0 {
                (dot(&sub3(p, pa), &d) / len2).clamp(0.0, 1.0)
            } else {
                let w = qlog(&qmul(&qconj(qa), qb));
                let v = qlog(&qmul(&qconj(qa), q));
                let w2 = dot(&w, &w);
                if w2 > 0.0 { (dot(&v, &w) / w2).clamp(0.0, 1.0) } else { 0.0 }
            };
            Raw::Ee {
                p: [pa[0] + u * d[0], pa[1] + u * d[1], pa[2] + u * d[2]],
                q: slerp(qa, qb, u),
                g: ga + u * (gb - ga),
            }
        }
        (Raw::Joint(x), Raw::Joint(a), Raw::Joint(b)) => {
            let d: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
            let r: Vec<f64> = x.iter().zip(a).map(|(p, q)| p - q).collect();
            let len2 = dot(&d, &d);
            let u = if len2 > 0.0 { (dot(&r, &d) / len2).clamp(0.0, 1.0) } else { 0.0 };
            Raw::Joint(a.iter().zip(&d).map(|(p, q)| p + u * q).collect())
        }
        _ => panic!("mixed kinds"),
    }
}

pub fn chord_distance(x: &Raw, a: &Raw, b: &Raw) -> f64 {
    distance(x, &foot(x, a, b))
}

pub fn raws(traj: &Trajectory) -> Vec<Raw> {
    traj.states().map(raw).collect()
}

/// Max over frames i..=j of the distance to chord (i, j).
pub fn seg_loss(r: &[Raw], i: usize, j: usize) -> f64 {
    (i..=j).map(|t| chord_distance(&r[t], &r[i], &r[j])).fold(0.0, f64::max)
}

/// Max over frames of the distance to the nearest chord.
pub fn global_loss(r: &[Raw], wp: &[usize]) -> f64 {
    r.iter()
        .map(|x| {
            wp.windows(2)
                .map(|c| chord_distance(x, &r[c[0]], &r[c[1]]))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Smallest waypoint count whose every segment is within `eta`, by
/// enumerating all subsets of interior frames.
pub fn min_count(r: &[Raw], eta: f64) -> usize {
    let n = r.len();
    let interior = n - 2;
    let mut best = usize::MAX;
    for mask in 0u32..(1u32 << interior) {
        let count = mask.count_ones() as usize + 2;
        if count >= best {
            continue;
        }
        let mut wp = vec![0];
        wp.extend((0..interior).filter(|k| mask >> k & 1 == 1).map(|k| k + 1));
        wp.push(n - 1);
        if wp.windows(2).all(|c| seg_loss(r, c[0], c[1]) <= eta) {
            best = count;
        }
    }
    best
}

/// Next waypoint strictly after `t` by a linear scan.
pub fn scan_next(t: usize, wp: &[usize]) -> usize {
    for &w in wp {
        if w > t {
            return w;
        }
    }
    panic!("no waypoint after {t}")
}

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Random walk in either space with a random length in `len`.
pub fn random_traj<R: Rng>(rng: &mut R, kind: StateSpace, len: std::ops::RangeInclusive<usize>) -> Trajectory {
    let n = rng.random_range(len);
    let step = log_uniform(rng, 0.005, 0.2);
    let dim = rng.random_range(2..=7);
    random_walk(rng, kind, n, step, dim)
}

pub fn ee(p: [f64; 3]) -> State {
    State::Ee(EeState::from_axis_angle(p, [0.0; 3], 0.0))
}
