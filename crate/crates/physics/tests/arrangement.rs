mod common;

use common::*;
use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use slb_core::primitives;
use slb_oracle::sat;
use slb_physics::*;

fn unit_cube() -> std::sync::Arc<BodyModel> {
    model(&primitives::unit_cube::<f64>())
}

#[test]
fn free_fall_single_step() {
    let plane = SupportPlane::horizontal(100.0);
    let params = ArrangementParams {
        time_step: 0.01,
        attractor_force: 0.0,
        ..Default::default()
    };
    let mut states = vec![RigidBodyState::at_pose(unit_cube(), &Isometry3::identity())];
    step_simulation(&mut states, &plane, &params).unwrap();
    let dv = states[0].linear_velocity;
    assert_eq!(dv, -plane.normal.into_inner() * (9.81 * 0.01));
    assert!((dv.norm() - 0.0981).abs() < 1e-15);
}

#[test]
fn resting_body_stays_put() {
    let plane = SupportPlane::horizontal(1.0);
    let params = ArrangementParams {
        restitution: 0.0,
        attractor_force: 0.0,
        ..Default::default()
    };
    let cube = unit_cube();
    // Cube spans z in [0, 1]; the plane sits at z = 1 facing the camera.
    let pose = Isometry3::identity();
    let mut world = World::new(plane, params);
    world
        .bodies
        .push(RigidBodyState::at_pose(cube.clone(), &pose));
    for _ in 0..250 {
        world.step().unwrap();
    }
    let moved = (world.bodies[0].pose().translation.vector - pose.translation.vector).norm();
    assert!(moved <= 0.001, "moved {moved}");
    assert!(world.bodies[0].linear_velocity.norm() < 1e-6);
    assert!(plane_clearance(&cube, &world.bodies[0].pose(), &plane) >= -0.001);
}

#[test]
fn elastic_head_on_exchange() {
    let plane = SupportPlane::horizontal(1000.0);
    let params = ArrangementParams {
        gravity_magnitude: 0.0,
        attractor_force: 0.0,
        restitution: 1.0,
        friction: 0.0,
        ..Default::default()
    };
    let ball = model(&primitives::icosphere::<f64>(0.05, 2));
    let com = ball.inertial.center_of_mass.coords;
    let at = |x: f64| {
        Isometry3::from_parts(
            Translation3::from(Vector3::new(x, 0.0, 0.0) - com),
            UnitQuaternion::identity(),
        )
    };
    let mut a = RigidBodyState::at_pose(ball.clone(), &at(-0.0502));
    let mut b = RigidBodyState::at_pose(ball.clone(), &at(0.0502));
    a.linear_velocity = Vector3::new(1.0, 0.0, 0.0);
    b.linear_velocity = Vector3::new(-1.0, 0.0, 0.0);
    let before = a.momentum() + b.momentum();
    let mut states = vec![a, b];
    step_simulation(&mut states, &plane, &params).unwrap();
    let after = states[0].momentum() + states[1].momentum();
    assert!((after - before).norm() <= 1e-9);
    assert!(
        (states[0].linear_velocity - Vector3::new(-1.0, 0.0, 0.0)).norm() < 1e-6,
        "{:?}",
        states[0].linear_velocity
    );
    assert!((states[1].linear_velocity - Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-6);
}

#[test]
fn cube_settles_flush() {
    let plane = SupportPlane::horizontal(1.0);
    let cube = model(&primitives::textured_box::<f64>([0.1, 0.1, 0.1]));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let out = drop_arrange(
        std::slice::from_ref(&cube),
        &plane,
        &ArrangementParams::default(),
        &mut rng,
    )
    .unwrap();
    assert!(out.settled);
    let pose = out.poses[0];
    let dists: Vec<f64> = cube
        .hull
        .vertices()
        .iter()
        .map(|p| plane.signed_distance(&(pose * p)))
        .collect();
    let min = dists.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!((-0.005..=0.005).contains(&min), "min {min}");
    assert!(
        dists.iter().filter(|d| d.abs() <= 0.005).count() >= 4,
        "{dists:?}"
    );
}

#[test]
fn five_hulls_seed_7() {
    let plane = SupportPlane::horizontal(1.0);
    let models = ycb_like();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let out = drop_arrange(&models, &plane, &ArrangementParams::default(), &mut rng).unwrap();
    assert!(out.settled, "not settled after {} steps", out.steps);
    for i in 0..models.len() {
        assert!(plane_clearance(&models[i], &out.poses[i], &plane) >= -0.005);
        for j in i + 1..models.len() {
            let depth = sat::penetration_depth(
                &polytope(&models[i], &out.poses[i]),
                &polytope(&models[j], &out.poses[j]),
            );
            assert!(depth <= 0.005, "pair {i},{j} penetrates {depth}");
        }
    }
}

#[test]
fn tilted_plane_pile_is_valid_and_calm() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let plane = sample_support_plane(&mut rng, (0.5, 1.5), 0.5);
    let params = ArrangementParams {
        restitution: 0.0,
        ..Default::default()
    };
    let models = ycb_like();
    let out = drop_arrange(&models, &plane, &params, &mut rng).unwrap();
    assert!(out.settled);
    assert!(
        out.kinetic_energy < 1e-6,
        "kinetic energy {}",
        out.kinetic_energy
    );
}

#[test]
fn drop_is_deterministic() {
    let plane = SupportPlane::horizontal(1.0);
    let models = ycb_like();
    let run = || {
        drop_arrange(
            &models,
            &plane,
            &ArrangementParams::default(),
            &mut ChaCha8Rng::seed_from_u64(9),
        )
        .unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.steps, b.steps);
    for (p, q) in a.poses.iter().zip(&b.poses) {
        assert_eq!(p.to_homogeneous(), q.to_homogeneous());
    }
}

#[test]
fn empty_input() {
    let plane = SupportPlane::horizontal(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(
        drop_arrange(&[], &plane, &ArrangementParams::default(), &mut rng)
            .unwrap()
            .poses
            .is_empty()
    );
    let free = sample_collision_free(&[], &plane, &ArrangementParams::default(), &mut rng, 10);
    assert!(free.placed.is_empty() && free.omitted.is_empty());
}

#[test]
fn contact_conserves_momentum_between_free_bodies() {
    let plane = SupportPlane::horizontal(1000.0);
    let params = ArrangementParams {
        gravity_magnitude: 0.0,
        attractor_force: 0.0,
        ..Default::default()
    };
    let models = ycb_like();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut a = RigidBodyState::at_pose(
        models[0].clone(),
        &Isometry3::from_parts(
            Translation3::new(-0.12, 0.0, 0.0),
            arrange::random_rotation(&mut rng),
        ),
    );
    let mut b = RigidBodyState::at_pose(
        models[2].clone(),
        &Isometry3::from_parts(
            Translation3::new(0.05, 0.01, 0.0),
            arrange::random_rotation(&mut rng),
        ),
    );
    a.linear_velocity = Vector3::new(0.5, 0.1, 0.0);
    b.linear_velocity = Vector3::new(-0.7, 0.0, 0.2);
    b.angular_velocity = Vector3::new(0.0, 3.0, 1.0);
    let mut world = World::new(plane, params);
    world.bodies = vec![a, b];
    for _ in 0..200 {
        let before = world.bodies[0].momentum() + world.bodies[1].momentum();
        world.step().unwrap();
        let after = world.bodies[0].momentum() + world.bodies[1].momentum();
        assert!((after - before).norm() <= 1e-9);
    }
}

#[test]
fn collision_free_seed_3() {
    let plane = SupportPlane::horizontal(1.0);
    let models = ycb_like();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let out = sample_collision_free(
        &models,
        &plane,
        &ArrangementParams::default(),
        &mut rng,
        100,
    );
    assert!(out.omitted.is_empty());
    assert_eq!(out.placed.len(), 5);
    for (x, &(i, pi)) in out.placed.iter().enumerate() {
        assert!(plane_clearance(&models[i], &pi, &plane) >= 0.0);
        for &(j, pj) in &out.placed[x + 1..] {
            assert!(!sat::intersects(
                &polytope(&models[i], &pi),
                &polytope(&models[j], &pj),
                0.0
            ));
        }
    }
}

#[test]
fn collision_free_budget_edges() {
    let plane = SupportPlane::horizontal(1.0);
    let models = ycb_like();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let none = sample_collision_free(&models, &plane, &ArrangementParams::default(), &mut rng, 0);
    assert!(none.placed.is_empty());
    assert_eq!(none.omitted, vec![0, 1, 2, 3, 4]);
    let one = sample_collision_free(
        &models[..1],
        &plane,
        &ArrangementParams::default(),
        &mut rng,
        1,
    );
    assert_eq!(one.placed.len(), 1);
}

#[test]
fn rolling_resistance_stops_spin_only_in_contact() {
    let plane = SupportPlane::horizontal(1.0);
    let ball = model(&primitives::icosphere::<f64>(0.05, 3));
    let com = ball.inertial.center_of_mass.coords;
    // Resting on the plane at z = 1, rolling along x.
    let pose = Isometry3::from_parts(
        Translation3::from(Vector3::new(0.0, 0.0, 0.95) - com),
        UnitQuaternion::identity(),
    );
    let run = |rolling_resistance: f64, pose: &Isometry3<f64>, gravity_magnitude: f64| {
        let params = ArrangementParams {
            attractor_force: 0.0,
            rolling_resistance,
            gravity_magnitude,
            ..Default::default()
        };
        let mut world = World::new(plane, params);
        let mut body = RigidBodyState::at_pose(ball.clone(), pose);
        body.angular_velocity = Vector3::new(0.0, 4.0, 0.0);
        body.linear_velocity = Vector3::new(0.2, 0.0, 0.0);
        world.bodies.push(body);
        for _ in 0..1000 {
            world.step().unwrap();
        }
        world.bodies[0].angular_velocity.norm()
    };
    assert!(run(0.002, &pose, 9.81) < 1e-9);
    assert!(run(0.0, &pose, 9.81) > 1.0);
    // In free flight the spin is untouched.
    let high = Isometry3::from_parts(
        Translation3::new(0.0, 0.0, -5.0),
        UnitQuaternion::identity(),
    );
    assert!((run(0.002, &high, 0.0) - 4.0).abs() < 1e-9);
}
