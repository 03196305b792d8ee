//! Minimum-cardinality waypoint selection.
//!
//! A segment `(i, j)` is feasible when every frame in `i..=j` lies within the
//! budget of the chord from frame `i` to frame `j`. The solver finds the
//! shortest chain of feasible segments from the first frame to the last. This
//! is the same objective as splitting a segment at every intermediate state
//! and memoizing the best split ("before" and "after" halves share the split
//! frame), computed bottom-up over segment end points: `fewest[i]` is the
//! smallest waypoint count for the suffix starting at frame `i`.
//!
//! Among equally short chains the lexicographically smallest index sequence
//! is returned.

use std::time::{Duration, Instant};

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::reconstruction::{reconstruction_loss, segment_loss, segment_within, MetricConfig};
use crate::state_space::Trajectory;

/// Longest trajectory the exhaustive oracle accepts.
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// The error threshold together with the metric it is measured in.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBudget {
    eta: f64,
    metric: MetricConfig,
}

impl ErrorBudget {
    pub fn new(eta: f64, metric: MetricConfig) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "error budget must be positive and finite, got {eta}"
            )));
        }
        metric.validate()?;
        Ok(ErrorBudget { eta, metric })
    }

    /// Budget with the default metric.
    pub fn with_eta(eta: f64) -> Result<Self> {
        Self::new(eta, MetricConfig::default())
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn metric(&self) -> &MetricConfig {
        &self.metric
    }
}

/// Strictly increasing frame indices that start at the first frame and end at the last.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WaypointSet {
    indices: Vec<usize>,
}

impl WaypointSet {
    pub fn new(indices: Vec<usize>, traj_len: usize) -> Result<Self> {
        if traj_len < 2 {
            return Err(Error::InvalidInput(format!(
                "trajectory length {traj_len} is below 2"
            )));
        }
        if indices.first() != Some(&0) || indices.last() != Some(&(traj_len - 1)) || indices.len() < 2 {
            return Err(Error::Contract(format!(
                "waypoints must start at 0 and end at {}, got {indices:?}",
                traj_len - 1
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Contract(format!(
                "waypoint indices must be strictly increasing, got {indices:?}"
            )));
        }
        Ok(WaypointSet { indices })
    }

    /// Every frame is a waypoint.
    pub fn all(traj_len: usize) -> Result<Self> {
        Self::new((0..traj_len).collect(), traj_len)
    }

    pub(crate) fn from_valid(indices: Vec<usize>) -> Self {
        debug_assert!(indices.len() >= 2 && indices[0] == 0);
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        WaypointSet { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Index of the final frame.
    pub fn last(&self) -> usize {
        *self.indices.last().expect("non-empty by construction")
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    /// Waypoint count over trajectory length.
    pub fn ratio(&self) -> f64 {
        self.len() as f64 / (self.last() + 1) as f64
    }

    pub fn into_indices(self) -> Vec<usize> {
        self.indices
    }
}

/// A waypoint set chosen under a budget, with the losses it achieves.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub waypoints: WaypointSet,
    pub eta: f64,
    /// Largest segment loss over consecutive waypoints; at most `eta`.
    pub segment_loss: f64,
    /// Global reconstruction loss; at most `segment_loss`.
    pub global_loss: f64,
}

impl Extraction {
    fn evaluate(traj: &Trajectory, waypoints: WaypointSet, budget: &ErrorBudget) -> Result<Self> {
        let metric = budget.metric();
        let mut worst = 0.0f64;
        for w in waypoints.indices().windows(2) {
            worst = worst.max(segment_loss(traj, w[0], w[1], metric)?);
        }
        let global_loss = reconstruction_loss(traj, waypoints.indices(), metric)?;
        Ok(Extraction {
            waypoints,
            eta: budget.eta(),
            segment_loss: worst,
            global_loss,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveStats {
    /// Suffix subproblems solved (one per frame).
    pub subproblems_evaluated: u64,
    /// Segment feasibility checks performed.
    pub segment_loss_evaluations: u64,
    /// Individual frame-to-chord projections.
    pub frame_projections: u64,
    pub wall_time: Duration,
}

fn check_input(traj: &Trajectory, budget: &ErrorBudget) -> Result<()> {
    if traj.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "trajectory needs at least 2 frames, got {}",
            traj.len()
        )));
    }
    if let Some(i) = traj.states().position(|s| !s.is_finite()) {
        return Err(Error::InvalidInput(format!("frame {i} has a non-finite value")));
    }
    budget.metric().check_for(traj)
}

/// Fewest waypoints such that every segment stays within `budget`.
pub fn extract_waypoints_dp(traj: &Trajectory, budget: &ErrorBudget) -> Result<(Extraction, SolveStats)> {
    check_input(traj, budget)?;
    let started = Instant::now();
    let n = traj.len();
    let eta = budget.eta();
    let metric = budget.metric();
    let mut stats = SolveStats::default();

    // fewest[i]: waypoints needed from frame i to the end, counting both.
    let mut fewest = vec![usize::MAX; n];
    let mut next = vec![usize::MAX; n];
    fewest[n - 1] = 1;
    for start in (0..n - 1).rev() {
        stats.subproblems_evaluated += 1;
        let mut best = usize::MAX;
        let mut hint = None;
        for end in start + 1..n {
            let candidate = fewest[end] + 1;
            if candidate >= best {
                continue;
            }
            stats.segment_loss_evaluations += 1;
            let feasible = end == start + 1
                || segment_within(
                    traj,
                    start,
                    end,
                    eta,
                    metric,
                    &mut hint,
                    &mut stats.frame_projections,
                );
            if feasible {
                best = candidate;
                next[start] = end;
            }
        }
        fewest[start] = best;
    }
    stats.subproblems_evaluated += 1;

    let mut indices = Vec::with_capacity(fewest[0]);
    let mut at = 0;
    indices.push(at);
    while at != n - 1 {
        at = next[at];
        indices.push(at);
    }
    let extraction = Extraction::evaluate(traj, WaypointSet::from_valid(indices), budget)?;
    stats.wall_time = started.elapsed();
    Ok((extraction, stats))
}

/// Exhaustive search over endpoint-containing subsequences, by size and then
/// lexicographically. Refuses trajectories longer than [`BRUTE_FORCE_LIMIT`].
pub fn extract_waypoints_bruteforce(traj: &Trajectory, budget: &ErrorBudget) -> Result<Extraction> {
    check_input(traj, budget)?;
    let n = traj.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLong {
            len: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let metric = budget.metric();
    let mut loss = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            loss[i][j] = segment_loss(traj, i, j, metric)?;
        }
    }
    for size in 0..=n - 2 {
        for interior in (1..n - 1).combinations(size) {
            let mut indices = Vec::with_capacity(size + 2);
            indices.push(0);
            indices.extend(interior);
            indices.push(n - 1);
            if indices.windows(2).all(|w| loss[w[0]][w[1]] <= budget.eta()) {
                return Extraction::evaluate(traj, WaypointSet::from_valid(indices), budget);
            }
        }
    }
    unreachable!("the all-frames set is always feasible")
}

/// One extraction per budget, ordered by descending budget.
pub fn sweep_eta(traj: &Trajectory, etas: &[f64], metric: &MetricConfig) -> Result<Vec<(f64, Extraction)>> {
    if etas.is_empty() {
        return Err(Error::InvalidInput("no error budgets given".into()));
    }
    let mut budgets = etas
        .iter()
        .map(|eta| ErrorBudget::new(*eta, metric.clone()))
        .collect::<Result<Vec<_>>>()?;
    budgets.sort_by(|a, b| b.eta().total_cmp(&a.eta()));
    budgets
        .iter()
        .map(|b| extract_waypoints_dp(traj, b).map(|(e, _)| (b.eta(), e)))
        .collect()
}

/// Mean waypoint-to-length ratio of a corpus at one budget.
pub fn mean_ratio(trajs: &[Trajectory], budget: &ErrorBudget) -> Result<f64> {
    if trajs.is_empty() {
        return Err(Error::InvalidInput("empty corpus".into()));
    }
    let mut sum = 0.0;
    for traj in trajs {
        sum += extract_waypoints_dp(traj, budget)?.0.waypoints.ratio();
    }
    Ok(sum / trajs.len() as f64)
}

/// Searches (log-scale bisection) for the budget whose mean waypoint ratio is
/// closest to `target_ratio`, e.g. `1.0 / 8.0`.
///
/// Waypoint counts never grow with the budget, so the mean ratio is monotone
/// and bisection applies.
pub fn eta_for_ratio(
    trajs: &[Trajectory],
    target_ratio: f64,
    metric: &MetricConfig,
    bounds: (f64, f64),
    iterations: usize,
) -> Result<f64> {
    let (mut lo, mut hi) = bounds;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidConfig(format!("bad budget bounds {bounds:?}")));
    }
    if !(target_ratio > 0.0 && target_ratio <= 1.0) {
        return Err(Error::InvalidConfig(format!("bad target ratio {target_ratio}")));
    }
    let ratio_at = |eta: f64| mean_ratio(trajs, &ErrorBudget::new(eta, metric.clone())?);
    let (mut r_lo, mut r_hi) = (ratio_at(lo)?, ratio_at(hi)?);
    for _ in 0..iterations {
        let mid = (lo * hi).sqrt();
        let r = ratio_at(mid)?;
        if r > target_ratio {
            lo = mid;
            r_lo = r;
        } else {
            hi = mid;
            r_hi = r;
        }
    }
    Ok(if (r_lo - target_ratio).abs() <= (r_hi - target_ratio).abs() {
        lo
    } else {
        hi
    })
}
