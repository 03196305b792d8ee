mod common;

use awe::io::{parse_trajectory, trajectory_to_string};
use awe::{
    extract_waypoints_bruteforce, extract_waypoints_dp, interpolate, next_waypoint_index,
    reconstruction_loss, relabel_trajectory, replay_waypoints, segment_loss, slerp_shortest,
    state_distance, axis_angle_to_quaternion, geodesic_angle, ErrorBudget, FollowerConfig,
    MetricConfig, State, StateSpace, Trajectory, WaypointSet,
};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rotvec() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-2.0f64..2.0)
}

fn kind() -> impl Strategy<Value = StateSpace> {
    prop_oneof![Just(StateSpace::Ee), Just(StateSpace::Joint)]
}

fn traj(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Trajectory> {
    (any::<u64>(), kind()).prop_map(move |(seed, k)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_traj(&mut rng, k, len.clone())
    })
}

fn waypoints_for(len: usize, picks: &[bool]) -> Vec<usize> {
    let mut wp = vec![0];
    wp.extend((1..len - 1).filter(|i| picks[i % picks.len()]));
    wp.push(len - 1);
    wp
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn slerp_hits_endpoints_and_moves_monotonically(a in rotvec(), b in rotvec(), u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let qa = axis_angle_to_quaternion(a);
        let qb = axis_angle_to_quaternion(b);
        prop_assert!(geodesic_angle(&slerp_shortest(&qa, &qb, 0.0), &qa) < 1e-7);
        prop_assert!(geodesic_angle(&slerp_shortest(&qa, &qb, 1.0), &qb) < 1e-7);
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        let d_lo = geodesic_angle(&qa, &slerp_shortest(&qa, &qb, lo));
        let d_hi = geodesic_angle(&qa, &slerp_shortest(&qa, &qb, hi));
        prop_assert!(d_lo <= d_hi + 1e-9);
        let total = geodesic_angle(&qa, &qb);
        prop_assert!((d_hi - hi * total).abs() < 1e-7);
    }

    #[test]
    fn distance_is_symmetric_and_matches_oracle(t in traj(2..=6), i in 0usize..6, j in 0usize..6) {
        let (i, j) = (i % t.len(), j % t.len());
        let cfg = MetricConfig::default();
        let d = state_distance(t.state(i), t.state(j), &cfg).unwrap();
        prop_assert_eq!(d, state_distance(t.state(j), t.state(i), &cfg).unwrap());
        prop_assert!((d - distance(&raw(t.state(i)), &raw(t.state(j)))).abs() < 1e-9);
    }

    #[test]
    fn interpolation_endpoints_are_exact(t in traj(2..=4)) {
        let (a, b) = (t.state(0), t.state(1));
        let cfg = MetricConfig::default();
        prop_assert_eq!(state_distance(&interpolate(a, b, 0.0).unwrap(), a, &cfg).unwrap(), 0.0);
        prop_assert_eq!(state_distance(&interpolate(a, b, 1.0).unwrap(), b, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn losses_match_oracle_and_bound_each_other(t in traj(3..=14), picks in prop::collection::vec(any::<bool>(), 1..6)) {
        let cfg = MetricConfig::default();
        let r = raws(&t);
        let wp = waypoints_for(t.len(), &picks);
        let global = reconstruction_loss(&t, &wp, &cfg).unwrap();
        let mut seg_max: f64 = 0.0;
        for c in wp.windows(2) {
            let s = segment_loss(&t, c[0], c[1], &cfg).unwrap();
            prop_assert!((s - seg_loss(&r, c[0], c[1])).abs() < 1e-9);
            seg_max = seg_max.max(s);
        }
        prop_assert!((global - global_loss(&r, &wp)).abs() < 1e-9);
        prop_assert!(global <= seg_max + 1e-15);
        for k in 0..t.len() - 1 {
            prop_assert_eq!(segment_loss(&t, k, k + 1, &cfg).unwrap(), 0.0);
        }
        let all: Vec<usize> = (0..t.len()).collect();
        prop_assert_eq!(reconstruction_loss(&t, &all, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn dp_is_minimal_and_lexicographically_first(t in traj(3..=12), eta in 1e-3f64..1.0) {
        let budget = ErrorBudget::with_eta(eta).unwrap();
        let (dp, stats) = extract_waypoints_dp(&t, &budget).unwrap();
        let bf = extract_waypoints_bruteforce(&t, &budget).unwrap();
        prop_assert_eq!(dp.waypoints.len(), min_count(&raws(&t), eta));
        prop_assert_eq!(dp.waypoints.indices(), bf.waypoints.indices());
        prop_assert!(dp.segment_loss <= eta);
        prop_assert!(dp.global_loss <= dp.segment_loss + 1e-15);
        prop_assert!(stats.subproblems_evaluated >= 1);
    }

    #[test]
    fn dp_is_deterministic_and_translation_invariant(t in (any::<u64>()).prop_map(|s| random_traj(&mut ChaCha8Rng::seed_from_u64(s), StateSpace::Ee, 3..=40)), eta in 1e-3f64..0.5, offset in prop::array::uniform3(-0.25f64..0.25)) {
        let budget = ErrorBudget::with_eta(eta).unwrap();
        let (a, _) = extract_waypoints_dp(&t, &budget).unwrap();
        let (b, _) = extract_waypoints_dp(&t, &budget).unwrap();
        prop_assert_eq!(&a, &b);
        let (c, _) = extract_waypoints_dp(&t.translated(offset), &budget).unwrap();
        prop_assert_eq!(a.waypoints.indices(), c.waypoints.indices());
    }

    #[test]
    fn smaller_budget_never_gives_fewer_waypoints(t in traj(5..=40), e1 in 1e-3f64..1.0, e2 in 1e-3f64..1.0) {
        let (hi, lo) = if e1 > e2 { (e1, e2) } else { (e2, e1) };
        let (a, _) = extract_waypoints_dp(&t, &ErrorBudget::with_eta(hi).unwrap()).unwrap();
        let (b, _) = extract_waypoints_dp(&t, &ErrorBudget::with_eta(lo).unwrap()).unwrap();
        prop_assert!(a.waypoints.len() <= b.waypoints.len());
    }

    #[test]
    fn extraction_of_the_reconstruction_is_a_fixed_point(t in traj(3..=30), eta in 1e-3f64..0.5) {
        // resample the reconstruction at the original frames: waypoints stay waypoints
        let budget = ErrorBudget::with_eta(eta).unwrap();
        let (e, _) = extract_waypoints_dp(&t, &budget).unwrap();
        let idx = e.waypoints.indices();
        let states: Vec<State> = (0..t.len())
            .map(|k| {
                let s = idx.partition_point(|w| *w <= k).min(idx.len() - 1);
                let (i, j) = (idx[s - 1], idx[s]);
                interpolate(t.state(i), t.state(j), (k - i) as f64 / (j - i) as f64).unwrap()
            })
            .collect();
        let rebuilt = Trajectory::from_states("rebuilt", t.frequency_hz(), states).unwrap();
        let (again, _) = extract_waypoints_dp(&rebuilt, &budget).unwrap();
        prop_assert!(again.waypoints.len() <= e.waypoints.len());
    }

    #[test]
    fn relabel_targets_match_scan(t in traj(2..=60), picks in prop::collection::vec(any::<bool>(), 1..6)) {
        let idx = waypoints_for(t.len(), &picks);
        let wp = WaypointSet::new(idx.clone(), t.len()).unwrap();
        let ds = relabel_trajectory(&t, &wp, 0.01).unwrap();
        prop_assert_eq!(ds.frames.len(), t.len() - 1);
        for (k, f) in ds.frames.iter().enumerate() {
            prop_assert_eq!(f.target_index, scan_next(k, &idx));
            prop_assert_eq!(next_waypoint_index(k, &wp).unwrap(), f.target_index);
        }
        prop_assert!(next_waypoint_index(t.len() - 1, &wp).is_err());
    }

    #[test]
    fn files_round_trip_exactly(t in traj(2..=30)) {
        let text = trajectory_to_string(&t);
        let back = parse_trajectory(&text, std::path::Path::new("mem.json")).unwrap();
        prop_assert_eq!(trajectory_to_string(&back), text);
        let cfg = MetricConfig::default();
        for k in 0..t.len() {
            prop_assert_eq!(state_distance(t.state(k), back.state(k), &cfg).unwrap(), 0.0);
        }
    }

    #[test]
    fn halving_the_step_at_double_multiplier_still_arrives(t in traj(3..=30), picks in prop::collection::vec(any::<bool>(), 1..6)) {
        let wp = WaypointSet::new(waypoints_for(t.len(), &picks), t.len()).unwrap();
        let base = FollowerConfig::for_trajectory(&t, MetricConfig::default(), 1);
        let fast = replay_waypoints(&t, &wp, &base).unwrap();
        let mut slow = FollowerConfig::for_trajectory(&t, MetricConfig::default(), 2);
        slow.max_step = base.max_step / 2.0;
        let slow = replay_waypoints(&t, &wp, &slow).unwrap();
        prop_assert_eq!(fast.reached_final, slow.reached_final);
        prop_assert!(slow.ticks_used >= fast.ticks_used);
    }
}

// A waypoint slightly off the chord tilts the new chords away from a frame on
// the other side, so refining a waypoint set can raise both losses.
#[test]
fn extra_waypoint_can_raise_loss() {
    let g = 0.1;
    let t = Trajectory::from_states("tilt", 10.0, [[0.0, 0.0, 0.0], [1.0, -g, 0.0], [2.0, g, 0.0], [4.0, 0.0, 0.0]].map(ee)).unwrap();
    let cfg = MetricConfig::default();
    let coarse = reconstruction_loss(&t, &[0, 3], &cfg).unwrap();
    let fine = reconstruction_loss(&t, &[0, 2, 3], &cfg).unwrap();
    assert!((coarse - g).abs() < 1e-12);
    let expected = 3.0 * g / (4.0 + g * g).sqrt();
    assert!((fine - expected).abs() < 1e-12, "{fine}");
    assert!(fine > coarse);
    assert_eq!(segment_loss(&t, 0, 2, &cfg).unwrap(), fine);
}
