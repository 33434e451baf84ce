use lacnav_core::cell::safe_half_plane;
use lacnav_core::policy::{action_weights, select_index, PenaltyParams};
use lacnav_core::{build_cell, AgentSnapshot, LacParams, Vec2};
use proptest::prelude::*;

fn snapshot(id: u32, p: (f64, f64), v: (f64, f64)) -> AgentSnapshot {
    AgentSnapshot {
        id,
        position: Vec2::new(p.0, p.1),
        velocity: Vec2::new(v.0, v.1),
        radius: 10.0,
    }
}

fn neighbor() -> impl Strategy<Value = ((f64, f64), (f64, f64))> {
    (20.0f64..80.0, 0.0f64..std::f64::consts::TAU, -50.0f64..50.0, -50.0f64..50.0)
        .prop_map(|(d, a, vx, vy)| ((d * a.cos(), d * a.sin()), (vx, vy)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn actions_are_clipped_rays(
        target in (-300.0f64..300.0, -300.0f64..300.0),
        others in prop::collection::vec(neighbor(), 0..5),
        lambda in 0.0f64..=1.0,
    ) {
        let params = LacParams { lambda, ..LacParams::default() };
        let me = snapshot(0, (0.0, 0.0), (0.0, 0.0));
        let target = Vec2::new(target.0, target.1);
        prop_assume!(target.norm() > 1e-3);
        let neighbors: Vec<_> = others
            .iter()
            .enumerate()
            .map(|(i, &(p, v))| snapshot(i as u32 + 1, p, v))
            .collect();
        let cell = build_cell(&me, target, &neighbors, &params).unwrap();
        prop_assert_eq!(cell.actions.len(), params.n_actions);
        let goal = target.normalized().unwrap();
        for (k, a) in cell.actions.iter().enumerate() {
            prop_assert!(a.norm() <= cell.max_speed * (1.0 + 1e-12));
            if a.norm() > 1e-9 {
                // same direction as the k-th ray, counterclockwise from the goal
                let dir = goal.rotated(k as f64 * std::f64::consts::TAU / params.n_actions as f64);
                prop_assert!(a.cross(dir).abs() < 1e-9 * a.norm().max(1.0));
                prop_assert!(a.dot(dir) > 0.0);
            }
            for n in &neighbors {
                let plane = safe_half_plane(&me, n, &params).unwrap();
                prop_assert!(plane.slack(*a) >= -1e-9 * plane.bound.abs().max(1.0));
            }
        }
        let best = select_index(&cell, &PenaltyParams::default());
        let w = action_weights(&cell, &PenaltyParams::default());
        prop_assert!(w.iter().all(|&x| x <= w[best] * (1.0 + 1e-9) + 1e-12));
    }
}

#[test]
fn free_agent_heads_for_the_goal() {
    let params = LacParams::default();
    let me = snapshot(0, (0.0, 0.0), (0.0, 0.0));
    let cell = build_cell(&me, Vec2::new(0.0, 500.0), &[], &params).unwrap();
    assert_eq!(select_index(&cell, &PenaltyParams::default()), 0);
    assert!((cell.actions[0] - Vec2::new(0.0, 50.0)).norm() < 1e-12);
    // the quarter turn is counterclockwise: +y rotated by 90 degrees is -x
    assert!((cell.actions[2] - Vec2::new(-50.0, 0.0)).norm() < 1e-9);
}

#[test]
fn approaching_neighbor_depresses_the_cell() {
    let params = LacParams::default();
    let me = snapshot(0, (0.0, 0.0), (0.0, 0.0));
    let still = snapshot(1, (21.0, 0.0), (0.0, 0.0));
    let rushing = snapshot(1, (21.0, 0.0), (-50.0, 0.0));
    let target = Vec2::new(1000.0, 0.0);
    let calm = build_cell(&me, target, &[still], &params).unwrap();
    let tense = build_cell(&me, target, &[rushing], &params).unwrap();
    // c = 50: closing speed 50 gives theta = 0.4 (bound 0.7 c), 100 gives 0.2 (0.6 c)
    assert!((calm.actions[0].norm() - 35.0).abs() < 1e-9);
    assert!((tense.actions[0].norm() - 30.0).abs() < 1e-9);
}
