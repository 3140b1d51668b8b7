use std::collections::BTreeMap;
use std::f64::consts::PI;

use proptest::prelude::*;
use swarmlink::dynamics::{step_state, UavParams, UavState};
use swarmlink::formation::*;
use swarmlink::{normalize_angle, Vec3};

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn pose() -> impl Strategy<Value = Pose> {
    (vec3(100.0), -PI..PI).prop_map(|(p, h)| Pose::new(p, h))
}

/// Rotation about the vertical axis through `pivot`.
fn rotate_about(p: Vec3, pivot: Vec3, gamma: f64) -> Vec3 {
    let (s, c) = gamma.sin_cos();
    let d = p - pivot;
    pivot + Vec3::new(c * d.x - s * d.y, s * d.x + c * d.y, d.z)
}

fn angle_gap(a: f64, b: f64) -> f64 {
    normalize_angle(a - b).abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn fgd_translation_equivariant(leader in pose(), off in vec3(10.0), t in vec3(50.0)) {
        let spec = FormationSpec::fgd(off);
        let a = fgd_target(&leader, &spec).unwrap();
        let moved = Pose::new(leader.position + t, leader.heading);
        let b = fgd_target(&moved, &spec).unwrap();
        prop_assert!((b.position - (a.position + t)).norm() < 1e-9);
        prop_assert_eq!(a.heading, b.heading);
    }

    #[test]
    fn df_rigid_motion_equivariant(
        leader in pose(), off in vec3(10.0), rel in -PI..PI, gamma in -PI..PI, t in vec3(50.0),
    ) {
        let spec = FormationSpec::df(off, rel);
        let a = df_target(&leader, &spec).unwrap();
        // Rotate about the vertical axis through the leader, then translate.
        let moved = Pose::new(leader.position + t, leader.heading + gamma);
        let b = df_target(&moved, &spec).unwrap();
        let expected = rotate_about(a.position, leader.position, gamma) + t;
        prop_assert!((b.position - expected).norm() < 1e-9);
        prop_assert!(angle_gap(b.heading, a.heading + gamma) < 1e-9);
    }

    #[test]
    fn df_at_zero_heading_is_fgd(p in vec3(100.0), off in vec3(10.0), rel in -PI..PI) {
        let leader = Pose::new(p, 0.0);
        let df = df_target(&leader, &FormationSpec::df(off, rel)).unwrap();
        let fgd = fgd_target(&leader, &FormationSpec::fgd(off)).unwrap();
        prop_assert_eq!(df.position, fgd.position);
        prop_assert!(angle_gap(df.heading, rel) < 1e-12);
    }
}

/// Random tree over ids `0..n` rooted at 0: node `i` follows some `j < i`.
fn tree() -> impl Strategy<Value = (Vec<RoleEdge>, Pose)> {
    let edge = (any::<prop::sample::Index>(), any::<bool>(), vec3(5.0), -PI..PI);
    (prop::collection::vec(edge, 4), pose()).prop_map(|(raw, root)| {
        let edges = raw
            .into_iter()
            .enumerate()
            .map(|(k, (idx, df, off, rel))| {
                let follower = k + 1;
                let spec = if df {
                    FormationSpec::df(off, rel)
                } else {
                    FormationSpec::fgd(off)
                };
                RoleEdge {
                    leader: idx.index(follower),
                    follower,
                    spec,
                }
            })
            .collect();
        (edges, root)
    })
}

/// Per-edge oracle: resolve each node by walking to the root recursively.
fn resolve(id: usize, edges: &[RoleEdge], root: &Pose) -> Pose {
    match edges.iter().find(|e| e.follower == id) {
        None => *root,
        Some(e) => {
            let leader = resolve(e.leader, edges, root);
            match e.spec.mode {
                FormationMode::FixedGlobalDifference => fgd_target(&leader, &e.spec).unwrap(),
                FormationMode::DoubleFixation => df_target(&leader, &e.spec).unwrap(),
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tree_targets_match_per_edge_recursion((edges, root) in tree(), shuffle_seed in any::<u64>()) {
        let roles = RoleGraph::new(0, edges.clone()).unwrap();
        let got = formation_targets(&BTreeMap::from([(0, root)]), &roles).unwrap();
        prop_assert_eq!(got.len(), edges.len());
        for e in &edges {
            let want = resolve(e.follower, &edges, &root);
            prop_assert!((got[&e.follower].position - want.position).norm() < 1e-9);
            prop_assert!(angle_gap(got[&e.follower].heading, want.heading) < 1e-9);
        }

        // Enumeration order of the edges must not matter.
        let mut shuffled = edges.clone();
        let n = shuffled.len();
        for i in 0..n {
            let j = (shuffle_seed.rotate_left(i as u32 * 7) as usize) % n;
            shuffled.swap(i, j);
        }
        let again = formation_targets(&BTreeMap::from([(0, root)]), &RoleGraph::new(0, shuffled).unwrap()).unwrap();
        prop_assert_eq!(got, again);
    }
}

#[test]
fn single_edge_tree_equals_direct_rule() {
    let leader = Pose::new(Vec3::new(3.0, -1.0, 2.0), 1.0);
    let spec = FormationSpec::df(Vec3::new(-2.0, 1.0, 0.0), 0.5);
    let roles = RoleGraph::star(4, [(9, spec)]).unwrap();
    let t = formation_targets(&BTreeMap::from([(4, leader)]), &roles).unwrap();
    assert_eq!(t[&9], df_target(&leader, &spec).unwrap());
}

#[test]
fn step_to_target_one_metre_ahead_converges() {
    let params = UavParams::default();
    let mut ctl = MovementController::new(MovementGains::default(), params).unwrap();
    let mut st = UavState::at_rest(Vec3::new(0.0, 0.0, 5.0));
    let target = Pose::new(Vec3::new(1.0, 0.0, 5.0), 0.0);
    let dt = 0.01;
    let mut settled_at = None;
    for k in 0..2000 {
        let u = ctl.step(&st, &target, dt).unwrap();
        st = step_state(&st, &u, &params, dt).unwrap();
        let err = (st.position - target.position).norm();
        if err < 0.01 && settled_at.is_none() {
            settled_at = Some(k);
        }
        if settled_at.is_some() {
            assert!(err < 0.01, "left the 1% band at step {k}: {err}");
        }
    }
    let k = settled_at.expect("never settled");
    assert!((k as f64) * dt < 10.0);
}

#[test]
fn three_followers_hold_fgd_offsets() {
    let offsets = [
        Vec3::new(-2.0, 2.0, 0.0),
        Vec3::new(-2.0, -2.0, 0.0),
        Vec3::new(-4.0, 0.0, 1.0),
    ];
    let roles = RoleGraph::star(
        0,
        offsets.iter().enumerate().map(|(i, o)| (i + 1, FormationSpec::fgd(*o))),
    )
    .unwrap();
    let mut initial = BTreeMap::new();
    for (i, o) in offsets.iter().enumerate() {
        // Start displaced from the slot so the transient is exercised.
        initial.insert(i + 1, UavState::at_rest(Vec3::new(0.0, 0.0, 10.0) + o * 0.5));
    }
    let scenario = FormationScenario {
        roles,
        leader_path: LeaderPath {
            waypoints: vec![Vec3::new(0.0, 0.0, 10.0), Vec3::new(1000.0, 0.0, 10.0)],
            speed: 2.0,
        },
        initial,
        params: UavParams::default(),
        gains: MovementGains::default(),
        dt: 0.01,
        duration: 40.0,
    };
    let samples = simulate_formation(&scenario).unwrap();
    for (i, o) in offsets.iter().enumerate() {
        let tail: Vec<f64> = samples
            .iter()
            .filter(|s| s.id == i + 1 && s.time >= 35.0)
            .map(FormationSample::offset_error)
            .collect();
        let worst = tail.iter().cloned().fold(0.0, f64::max);
        assert!(worst < 0.02 * o.norm(), "follower {} steady error {worst}", i + 1);
    }
}
