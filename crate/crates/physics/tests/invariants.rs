mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use slb_oracle::sat;
use slb_physics::*;

/// Drops the five proxies on 100 random planes and checks every final pose with the
/// separating-axis oracle, independent of the solver's own GJK/EPA.
#[test]
fn final_poses_valid_on_100_seeds() {
    let models = ycb_like();
    let mut unsettled = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plane = sample_support_plane(&mut rng, (0.5, 1.5), 0.5);
        let restitution = if seed % 2 == 0 { 0.0 } else { 0.1 };
        let params = ArrangementParams {
            restitution,
            ..Default::default()
        };
        let out = match drop_arrange(&models, &plane, &params, &mut rng) {
            Ok(out) => out,
            // A failure signal is legal; the caller falls back.
            Err(ArrangementError::NotSettled { .. }) => {
                unsettled += 1;
                continue;
            }
            Err(e) => panic!("seed {seed}: {e}"),
        };
        unsettled += usize::from(!out.settled);
        for i in 0..models.len() {
            let clearance = plane_clearance(&models[i], &out.poses[i], &plane);
            assert!(
                clearance >= -0.005,
                "seed {seed} body {i} below plane by {clearance}"
            );
            for j in i + 1..models.len() {
                let a = polytope(&models[i], &out.poses[i]);
                let b = polytope(&models[j], &out.poses[j]);
                let depth = sat::penetration_depth(&a, &b);
                assert!(
                    depth <= 0.005,
                    "seed {seed} pair {i},{j} penetrates {depth}"
                );
            }
        }
        if restitution == 0.0 && out.settled {
            assert!(
                out.kinetic_energy < 1e-6,
                "seed {seed} kinetic energy {}",
                out.kinetic_energy
            );
        }
    }
    assert!(unsettled <= 5, "{unsettled} of 100 runs did not settle");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn collision_free_never_intersects(seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plane = sample_support_plane(&mut rng, (0.5, 1.5), 0.5);
        let models = ycb_like();
        let out = sample_collision_free(&models, &plane, &ArrangementParams::default(), &mut rng, 50);
        prop_assert_eq!(out.placed.len() + out.omitted.len(), models.len());
        for (x, &(i, pi)) in out.placed.iter().enumerate() {
            prop_assert!(plane_clearance(&models[i], &pi, &plane) >= 0.0);
            for &(j, pj) in &out.placed[x + 1..] {
                prop_assert!(!sat::intersects(&polytope(&models[i], &pi), &polytope(&models[j], &pj), 0.0));
            }
        }
    }

    #[test]
    fn plane_normal_faces_camera(seed in any::<u64>(), tilt in 0.0f64..1.57) {
        let plane = sample_support_plane(&mut ChaCha8Rng::seed_from_u64(seed), (0.2, 3.0), tilt);
        prop_assert!(plane.normal.dot(&CAMERA_FORWARD) < 0.0);
        prop_assert!((plane.normal.norm() - 1.0).abs() <= 1e-9);
        prop_assert!(plane.normal.angle(&-CAMERA_FORWARD) <= tilt + 1e-9);
    }
}
