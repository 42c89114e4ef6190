use crate::body::{BodyModel, RigidBodyState};
use crate::gjk::{proximity, Proximity};
use crate::params::ArrangementParams;
use crate::plane::SupportPlane;
use crate::shape::Placed;
use crate::world::World;
use crate::ArrangementError;
use nalgebra::{Isometry3, Point3, Quaternion, Translation3, UnitQuaternion, Vector3};
use rand::Rng;
use slb_core::Pose;
use std::f64::consts::TAU;
use std::sync::Arc;

/// Penetration and plane-crossing tolerance for accepted arrangements (m).
pub const POSE_TOLERANCE: f64 = 0.005;
/// Minimum spawn clearance from the plane and from other bodies (m).
const SPAWN_CLEARANCE: f64 = 0.01;
const SPAWN_ATTEMPTS: usize = 32;
/// Gap kept between fallback placements so that touching never counts as overlap (m).
const FREE_GAP: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct Arrangement {
    pub poses: Vec<Pose>,
    pub settled: bool,
    pub steps: usize,
    pub kinetic_energy: f64,
}

/// Uniformly distributed rotation.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> UnitQuaternion<f64> {
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let q = Quaternion::new(
        b * (TAU * u3).cos(),
        a * (TAU * u2).sin(),
        a * (TAU * u2).cos(),
        b * (TAU * u3).sin(),
    );
    UnitQuaternion::new_normalize(q)
}

fn disc_offset<R: Rng + ?Sized>(rng: &mut R, plane: &SupportPlane, radius: f64) -> Vector3<f64> {
    let (u, w) = plane.tangent_basis();
    let r = radius * rng.random::<f64>().sqrt();
    let t = rng.random::<f64>() * TAU;
    u * (r * t.cos()) + w * (r * t.sin())
}

/// Height of the lowest shape vertex below the centre of mass along `n` (non-positive).
fn lowest_offset(model: &BodyModel, rot: &UnitQuaternion<f64>, n: &Vector3<f64>) -> f64 {
    let local = rot.inverse_transform_vector(&-n);
    let v = model.shape.vertices()[model.shape.support_index(&local)];
    n.dot(&(rot * v.coords))
}

fn clear_of(model: &BodyModel, iso: &Isometry3<f64>, others: &[RigidBodyState], gap: f64) -> bool {
    let placed = Placed {
        shape: &model.shape,
        iso,
    };
    others.iter().all(|o| {
        let oiso = o.iso();
        let dist = (oiso.translation.vector - iso.translation.vector).norm();
        if dist > model.shape.radius() + o.model.shape.radius() + gap {
            return true;
        }
        proximity(
            &placed,
            &Placed {
                shape: &o.model.shape,
                iso: &oiso,
            },
        )
        .separation()
            > gap
    })
}

fn spawn<R: Rng + ?Sized>(model: &Arc<BodyModel>, world: &World, rng: &mut R) -> RigidBodyState {
    let plane = &world.plane;
    let params = &world.params;
    let n = plane.normal.into_inner();
    let (h_lo, h_hi) = params.spawn_height;
    for _ in 0..SPAWN_ATTEMPTS {
        let rot = random_rotation(rng);
        let offset = disc_offset(rng, plane, params.spawn_radius);
        let h = if h_hi > h_lo {
            rng.random_range(h_lo..h_hi)
        } else {
            h_lo
        };
        let h = h.max(SPAWN_CLEARANCE - lowest_offset(model, &rot, &n));
        let center = plane.support_point + offset + n * h;
        let iso = Isometry3::from_parts(Translation3::from(center.coords), rot);
        if clear_of(model, &iso, &world.bodies, SPAWN_CLEARANCE) {
            return body_at(model, iso);
        }
    }
    // Crowded: stack above everything present.
    let top = world
        .bodies
        .iter()
        .map(|b| plane.signed_distance(&b.position) + b.model.shape.radius())
        .fold(0.0, f64::max);
    let center = plane.support_point + n * (top + model.shape.radius() + SPAWN_CLEARANCE);
    body_at(
        model,
        Isometry3::from_parts(
            Translation3::from(center.coords),
            UnitQuaternion::identity(),
        ),
    )
}

fn body_at(model: &Arc<BodyModel>, iso: Isometry3<f64>) -> RigidBodyState {
    RigidBodyState {
        position: Point3::from(iso.translation.vector),
        orientation: iso.rotation,
        linear_velocity: Vector3::zeros(),
        angular_velocity: Vector3::zeros(),
        model: model.clone(),
    }
}

/// Drops the objects one after another above the plane and simulates until they rest.
///
/// Poses are returned in input order. A run that ends at `max_steps` with every body
/// below ten times the settle thresholds is accepted with `settled == false`.
pub fn drop_arrange<R: Rng + ?Sized>(
    models: &[Arc<BodyModel>],
    plane: &SupportPlane,
    params: &ArrangementParams,
    rng: &mut R,
) -> Result<Arrangement, ArrangementError> {
    params.validate().map_err(ArrangementError::InvalidParams)?;
    if models.is_empty() {
        return Ok(Arrangement {
            poses: Vec::new(),
            settled: true,
            steps: 0,
            kinetic_energy: 0.0,
        });
    }
    let dt = params.time_step;
    // Compress the schedule so every body enters during the first half of the budget.
    let stagger = params
        .spawn_stagger
        .min(0.5 * params.max_steps as f64 * dt / models.len() as f64);
    let spawn_step = |k: usize| (k as f64 * stagger / dt).round() as usize;

    let mut world = World::new(*plane, params.clone());
    let mut next = 0;
    let mut settled = false;
    while world.steps() < params.max_steps {
        while next < models.len() && spawn_step(next) <= world.steps() {
            let body = spawn(&models[next], &world, rng);
            world.bodies.push(body);
            next += 1;
        }
        world.step()?;
        if next == models.len() && world.all_asleep() {
            settled = true;
            break;
        }
    }
    if !settled {
        let (lin, ang) = world.max_speeds();
        if next < models.len()
            || lin > 10.0 * params.settle_linear_threshold
            || ang > 10.0 * params.settle_angular_threshold
        {
            return Err(ArrangementError::NotSettled {
                linear: lin,
                angular: ang,
            });
        }
    }
    let poses: Vec<Pose> = world.bodies.iter().map(|b| b.pose()).collect();
    let check = check_poses(models, &poses, plane);
    if check.max_penetration > POSE_TOLERANCE || check.min_plane_distance < -POSE_TOLERANCE {
        return Err(ArrangementError::Overlap {
            penetration: check.max_penetration,
            below_plane: -check.min_plane_distance,
        });
    }
    Ok(Arrangement {
        poses,
        settled,
        steps: world.steps(),
        kinetic_energy: world.kinetic_energy(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoseCheck {
    /// Largest pairwise hull penetration depth (m); zero when nothing overlaps.
    pub max_penetration: f64,
    /// Lowest hull vertex height above the plane over all objects (m).
    pub min_plane_distance: f64,
}

pub fn check_poses(models: &[Arc<BodyModel>], poses: &[Pose], plane: &SupportPlane) -> PoseCheck {
    let states: Vec<RigidBodyState> = models
        .iter()
        .zip(poses)
        .map(|(m, p)| RigidBodyState::at_pose(m.clone(), p))
        .collect();
    let isos: Vec<Isometry3<f64>> = states.iter().map(|s| s.iso()).collect();
    let mut max_penetration: f64 = 0.0;
    let mut min_plane_distance = f64::INFINITY;
    for (i, s) in states.iter().enumerate() {
        let placed = Placed {
            shape: &s.model.shape,
            iso: &isos[i],
        };
        min_plane_distance = min_plane_distance
            .min(plane.signed_distance(&placed.support(&-plane.normal.into_inner())));
        for j in i + 1..states.len() {
            let other = Placed {
                shape: &states[j].model.shape,
                iso: &isos[j],
            };
            if let Proximity::Penetrating { depth, .. } = proximity(&placed, &other) {
                max_penetration = max_penetration.max(depth);
            }
        }
    }
    PoseCheck {
        max_penetration,
        min_plane_distance,
    }
}

#[derive(Clone, Debug, Default)]
pub struct CollisionFree {
    /// `(input index, pose)` of every placed object.
    pub placed: Vec<(usize, Pose)>,
    pub omitted: Vec<usize>,
}

/// Places objects at random orientations without simulation, rejecting overlapping samples.
///
/// Positions are drawn in the spawn disc with the lowest vertex between 0 and the
/// spawn height range's lower bound above the plane.
pub fn sample_collision_free<R: Rng + ?Sized>(
    models: &[Arc<BodyModel>],
    plane: &SupportPlane,
    params: &ArrangementParams,
    rng: &mut R,
    max_attempts_per_object: usize,
) -> CollisionFree {
    let n = plane.normal.into_inner();
    let mut out = CollisionFree::default();
    let mut present: Vec<RigidBodyState> = Vec::new();
    for (k, model) in models.iter().enumerate() {
        let mut done = false;
        for _ in 0..max_attempts_per_object {
            let rot = random_rotation(rng);
            let offset = disc_offset(rng, plane, params.spawn_radius);
            let lift = rng.random::<f64>() * params.spawn_height.0;
            let h = FREE_GAP + lift - lowest_offset(model, &rot, &n);
            let center = plane.support_point + offset + n * h;
            let iso = Isometry3::from_parts(Translation3::from(center.coords), rot);
            if clear_of(model, &iso, &present, FREE_GAP) {
                let body = body_at(model, iso);
                out.placed.push((k, body.pose()));
                present.push(body);
                done = true;
                break;
            }
        }
        if !done {
            out.omitted.push(k);
        }
    }
    if !out.omitted.is_empty() {
        log::debug!("collision-free sampling omitted objects {:?}", out.omitted);
    }
    out
}
