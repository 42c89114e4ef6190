//! Time stepping: semi-implicit Euler with a sequential-impulse contact solver.

use crate::body::RigidBodyState;
use crate::contact::{body_manifold, plane_manifold, Manifold};
use crate::params::ArrangementParams;
use crate::plane::SupportPlane;
use crate::shape::Placed;
use crate::{tangent_basis, ArrangementError};
use nalgebra::{Isometry3, Matrix3, Point3, Quaternion, UnitQuaternion, Vector3};
use std::collections::BTreeMap;

/// Restitution is applied only above this approach speed (m/s).
const RESTITUTION_THRESHOLD: f64 = 0.1;
/// Cached impulses are reused for contacts within this distance (m) of last step's.
const WARM_START_RADIUS: f64 = 0.005;
const PLANE: usize = usize::MAX;

#[derive(Clone, Copy, Debug)]
struct Cached {
    local: Point3<f64>,
    normal: f64,
    friction: Vector3<f64>,
}

struct Constraint {
    a: usize,
    b: usize,
    ra: Vector3<f64>,
    rb: Vector3<f64>,
    local: Point3<f64>,
    n: Vector3<f64>,
    t: [Vector3<f64>; 2],
    mass_n: f64,
    mass_t: [f64; 2],
    target: f64,
    /// Separation-recovery velocity, solved on pseudo velocities only.
    push: f64,
    normal: f64,
    pseudo: f64,
    tangent: [f64; 2],
}

/// Per-body solver data; the plane is a body with zero inverse mass.
#[derive(Clone, Copy)]
struct Kin {
    inv_mass: f64,
    inv_inertia: Matrix3<f64>,
    center: Point3<f64>,
}

/// A set of bodies over a support plane with warm-started contacts.
///
/// A body that stays below both settle thresholds for `settle_hold_steps` steps falls
/// asleep: its velocity is zeroed and it acts as static until a moving body touches it.
pub struct World {
    pub bodies: Vec<RigidBodyState>,
    pub plane: SupportPlane,
    pub params: ArrangementParams,
    cache: BTreeMap<(usize, usize), Vec<Cached>>,
    calm: Vec<usize>,
    steps: usize,
}

impl World {
    pub fn new(plane: SupportPlane, params: ArrangementParams) -> Self {
        Self {
            bodies: Vec::new(),
            plane,
            params,
            cache: BTreeMap::new(),
            calm: Vec::new(),
            steps: 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_asleep(&self, i: usize) -> bool {
        self.calm
            .get(i)
            .is_some_and(|&c| c >= self.params.settle_hold_steps)
    }

    pub fn all_asleep(&self) -> bool {
        (0..self.bodies.len()).all(|i| self.is_asleep(i))
    }

    fn is_moving(&self, b: &RigidBodyState) -> bool {
        b.linear_velocity.norm() >= self.params.settle_linear_threshold
            || b.angular_velocity.norm() >= self.params.settle_angular_threshold
    }

    /// Wakes sleeping bodies whose bounding spheres come near a moving body.
    fn wake(&mut self) {
        let reach = self.params.contact_margin;
        let moving: Vec<usize> = (0..self.bodies.len())
            .filter(|&i| !self.is_asleep(i) && self.is_moving(&self.bodies[i]))
            .collect();
        for i in 0..self.bodies.len() {
            if !self.is_asleep(i) {
                continue;
            }
            let bi = &self.bodies[i];
            let near = moving.iter().any(|&j| {
                let bj = &self.bodies[j];
                (bi.position - bj.position).norm()
                    <= bi.model.shape.radius() + bj.model.shape.radius() + reach
            });
            if near {
                self.calm[i] = 0;
            }
        }
    }

    pub fn step(&mut self) -> Result<(), ArrangementError> {
        let dt = self.params.time_step;
        self.calm.resize(self.bodies.len(), 0);
        self.wake();
        let awake: Vec<bool> = (0..self.bodies.len()).map(|i| !self.is_asleep(i)).collect();
        let down = -self.plane.normal.into_inner();
        for (body, _) in self.bodies.iter_mut().zip(&awake).filter(|(_, &a)| a) {
            let mut accel = down * self.params.gravity_magnitude;
            let to_p = self.plane.support_point - body.position;
            let dist = to_p.norm();
            if self.params.attractor_force > 0.0 && dist > 1e-9 {
                accel += to_p * (self.params.attractor_force / (dist * body.model.inertial.mass));
            }
            body.linear_velocity += accel * dt;
        }

        let kin: Vec<Kin> = self
            .bodies
            .iter()
            .zip(&awake)
            .map(|(b, &a)| Kin {
                inv_mass: if a { b.model.inv_mass() } else { 0.0 },
                inv_inertia: if a {
                    b.inv_inertia_world()
                } else {
                    Matrix3::zeros()
                },
                center: b.position,
            })
            .collect();
        let isos: Vec<Isometry3<f64>> = self.bodies.iter().map(|b| b.iso()).collect();
        let mut constraints = self.build_constraints(&kin, &isos, &awake);

        for c in &constraints {
            self.apply(
                c,
                c.n * c.normal + c.t[0] * c.tangent[0] + c.t[1] * c.tangent[1],
                &kin,
            );
        }
        for _ in 0..self.params.solver_iterations {
            for c in constraints.iter_mut() {
                let mu = self.params.friction;
                let mut dv = self.relative_velocity(c);
                if mu > 0.0 {
                    let old = c.tangent;
                    let mut new = [0.0; 2];
                    for k in 0..2 {
                        new[k] = old[k] - c.mass_t[k] * dv.dot(&c.t[k]);
                    }
                    let limit = mu * c.normal;
                    let mag = (new[0] * new[0] + new[1] * new[1]).sqrt();
                    if mag > limit {
                        let s = if mag > 0.0 { limit / mag } else { 0.0 };
                        new = [new[0] * s, new[1] * s];
                    }
                    c.tangent = new;
                    let impulse = c.t[0] * (new[0] - old[0]) + c.t[1] * (new[1] - old[1]);
                    self.apply(c, impulse, &kin);
                    dv = self.relative_velocity(c);
                }
                let old = c.normal;
                c.normal = (old + c.mass_n * (c.target - dv.dot(&c.n))).max(0.0);
                let impulse = c.n * (c.normal - old);
                self.apply(c, impulse, &kin);
            }
        }

        // Split impulse: positional error is removed with velocities that are not kept.
        let mut pseudo = vec![(Vector3::zeros(), Vector3::zeros()); self.bodies.len()];
        if constraints.iter().any(|c| c.push > 0.0) {
            for _ in 0..self.params.solver_iterations {
                for c in constraints.iter_mut().filter(|c| c.push > 0.0) {
                    let vel = |i: usize, r: &Vector3<f64>| {
                        if i == PLANE {
                            Vector3::zeros()
                        } else {
                            pseudo[i].0 + pseudo[i].1.cross(r)
                        }
                    };
                    let vn = (vel(c.b, &c.rb) - vel(c.a, &c.ra)).dot(&c.n);
                    let old = c.pseudo;
                    c.pseudo = (old + c.mass_n * (c.push - vn)).max(0.0);
                    let impulse = c.n * (c.pseudo - old);
                    for (i, r, sign) in [(c.a, c.ra, -1.0), (c.b, c.rb, 1.0)] {
                        if i != PLANE {
                            pseudo[i].0 += impulse * (sign * kin[i].inv_mass);
                            pseudo[i].1 += kin[i].inv_inertia * r.cross(&impulse) * sign;
                        }
                    }
                }
            }
        }

        self.cache.clear();
        for c in &constraints {
            self.cache.entry((c.a, c.b)).or_default().push(Cached {
                local: c.local,
                normal: c.normal,
                friction: c.t[0] * c.tangent[0] + c.t[1] * c.tangent[1],
            });
        }

        // Rolling resistance: an angular impulse bounded by the support impulse, never reversing spin.
        if self.params.rolling_resistance > 0.0 {
            let mut support = vec![0.0; self.bodies.len()];
            for c in &constraints {
                for i in [c.a, c.b] {
                    if i != PLANE {
                        support[i] += c.normal;
                    }
                }
            }
            for (i, body) in self.bodies.iter_mut().enumerate() {
                let w = body.angular_velocity;
                let speed = w.norm();
                if !awake[i] || support[i] <= 0.0 || speed <= 0.0 {
                    continue;
                }
                let dir = w / speed;
                let change = dir.dot(&(kin[i].inv_inertia * dir))
                    * self.params.rolling_resistance
                    * support[i];
                body.angular_velocity -= dir * change.min(speed);
            }
        }

        let (lin_th, ang_th) = (
            self.params.settle_linear_threshold,
            self.params.settle_angular_threshold,
        );
        let hold = self.params.settle_hold_steps;
        for (i, body) in self.bodies.iter_mut().enumerate() {
            if !awake[i] {
                continue;
            }
            if body.linear_velocity.norm() < lin_th && body.angular_velocity.norm() < ang_th {
                self.calm[i] += 1;
                if self.calm[i] >= hold {
                    body.linear_velocity = Vector3::zeros();
                    body.angular_velocity = Vector3::zeros();
                }
            } else {
                self.calm[i] = 0;
            }
            body.position += (body.linear_velocity + pseudo[i].0) * dt;
            let w = body.angular_velocity + pseudo[i].1;
            let q = body.orientation.into_inner();
            let dq = Quaternion::new(0.0, w.x, w.y, w.z) * q * (0.5 * dt);
            body.orientation = UnitQuaternion::new_normalize(q + dq);
            if !body.is_finite() {
                return Err(ArrangementError::NonFinite {
                    body: i,
                    step: self.steps,
                });
            }
        }
        self.steps += 1;
        Ok(())
    }

    fn build_constraints(
        &self,
        kin: &[Kin],
        isos: &[Isometry3<f64>],
        awake: &[bool],
    ) -> Vec<Constraint> {
        let margin = self.params.contact_margin;
        let mut out = Vec::new();
        let n = self.bodies.len();
        for b in (0..n).filter(|&b| awake[b]) {
            let placed = Placed {
                shape: &self.bodies[b].model.shape,
                iso: &isos[b],
            };
            if let Some(m) = plane_manifold(&placed, &self.plane, margin) {
                self.push_manifold(&mut out, PLANE, b, &m, kin, isos);
            }
        }
        for a in 0..n {
            let pa = Placed {
                shape: &self.bodies[a].model.shape,
                iso: &isos[a],
            };
            for b in (a + 1..n).filter(|&b| awake[a] || awake[b]) {
                let pb = Placed {
                    shape: &self.bodies[b].model.shape,
                    iso: &isos[b],
                };
                if let Some(m) = body_manifold(&pa, &pb, margin) {
                    self.push_manifold(&mut out, a, b, &m, kin, isos);
                }
            }
        }
        out
    }

    fn kin(&self, i: usize, kin: &[Kin]) -> Kin {
        if i == PLANE {
            Kin {
                inv_mass: 0.0,
                inv_inertia: Matrix3::zeros(),
                center: self.plane.support_point,
            }
        } else {
            kin[i]
        }
    }

    fn velocity(&self, i: usize, r: &Vector3<f64>) -> Vector3<f64> {
        if i == PLANE {
            return Vector3::zeros();
        }
        let b = &self.bodies[i];
        b.linear_velocity + b.angular_velocity.cross(r)
    }

    fn relative_velocity(&self, c: &Constraint) -> Vector3<f64> {
        self.velocity(c.b, &c.rb) - self.velocity(c.a, &c.ra)
    }

    fn apply(&mut self, c: &Constraint, impulse: Vector3<f64>, kin: &[Kin]) {
        for (i, r, sign) in [(c.a, c.ra, -1.0), (c.b, c.rb, 1.0)] {
            if i == PLANE {
                continue;
            }
            let k = &kin[i];
            let body = &mut self.bodies[i];
            body.linear_velocity += impulse * (sign * k.inv_mass);
            body.angular_velocity += k.inv_inertia * r.cross(&impulse) * sign;
        }
    }

    fn push_manifold(
        &self,
        out: &mut Vec<Constraint>,
        a: usize,
        b: usize,
        m: &Manifold,
        kin: &[Kin],
        isos: &[Isometry3<f64>],
    ) {
        let dt = self.params.time_step;
        let ka = self.kin(a, kin);
        let kb = self.kin(b, kin);
        let n = m.normal.into_inner();
        let (t0, t1) = tangent_basis(&m.normal);
        let eff = |ra: &Vector3<f64>, rb: &Vector3<f64>, d: &Vector3<f64>| {
            let ca = ra.cross(d);
            let cb = rb.cross(d);
            let k = ka.inv_mass
                + kb.inv_mass
                + ca.dot(&(ka.inv_inertia * ca))
                + cb.dot(&(kb.inv_inertia * cb));
            if k > 0.0 {
                1.0 / k
            } else {
                0.0
            }
        };
        let cached = self.cache.get(&(a, b));
        let mut used = vec![false; cached.map_or(0, |c| c.len())];
        for p in &m.points {
            let ra = p.point - ka.center;
            let rb = p.point - kb.center;
            let local = isos[b].inverse_transform_point(&p.point);
            let mut c = Constraint {
                a,
                b,
                ra,
                rb,
                local,
                n,
                t: [t0, t1],
                mass_n: eff(&ra, &rb, &n),
                mass_t: [eff(&ra, &rb, &t0), eff(&ra, &rb, &t1)],
                target: 0.0,
                push: 0.0,
                normal: 0.0,
                pseudo: 0.0,
                tangent: [0.0; 2],
            };
            let vn = self.relative_velocity(&c).dot(&n);
            let s = p.separation;
            c.target = if s > 0.0 { -s / dt } else { 0.0 };
            c.push = self.params.baumgarte * (-s - self.params.slop).max(0.0) / dt;
            if self.params.restitution > 0.0 && vn < -RESTITUTION_THRESHOLD && s + vn * dt <= 0.0 {
                c.target = c.target.max(-self.params.restitution * vn);
            }
            if let Some(cached) = cached {
                let mut best: Option<(usize, f64)> = None;
                for (k, old) in cached.iter().enumerate() {
                    let d = (old.local - local).norm();
                    if !used[k] && d < WARM_START_RADIUS && best.is_none_or(|(_, bd)| d < bd) {
                        best = Some((k, d));
                    }
                }
                if let Some((k, _)) = best {
                    used[k] = true;
                    c.normal = cached[k].normal;
                    c.tangent = [
                        c.t[0].dot(&cached[k].friction),
                        c.t[1].dot(&cached[k].friction),
                    ];
                }
            }
            out.push(c);
        }
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.bodies.iter().map(|b| b.kinetic_energy()).sum()
    }

    pub fn max_speeds(&self) -> (f64, f64) {
        self.bodies.iter().fold((0.0, 0.0), |(l, a), b| {
            (
                f64::max(l, b.linear_velocity.norm()),
                f64::max(a, b.angular_velocity.norm()),
            )
        })
    }
}

/// Advances `states` by one time step without contact warm starting.
pub fn step_simulation(
    states: &mut Vec<RigidBodyState>,
    plane: &SupportPlane,
    params: &ArrangementParams,
) -> Result<(), ArrangementError> {
    let mut world = World::new(*plane, params.clone());
    world.bodies = std::mem::take(states);
    let result = world.step();
    *states = world.bodies;
    result
}
