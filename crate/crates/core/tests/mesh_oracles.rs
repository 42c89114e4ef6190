use nalgebra::{Point3, Rotation3, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slb_core::mesh::TriMesh;
use slb_core::{convex_hull, inertial_properties, load_mesh, primitives, simplify_quadric, Mesh};
use slb_oracle::{geometry, mass};

fn arrays(mesh: &Mesh) -> (Vec<[f64; 3]>, Vec<[u32; 3]>) {
    (
        mesh.vertices().iter().map(|p| [p.x, p.y, p.z]).collect(),
        mesh.faces().to_vec(),
    )
}

#[test]
fn ply_icosphere_fixture_loads_with_unit_normals() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ico.ply");
    std::fs::write(&path, geometry::icosphere_ply(0.5, 3)).unwrap();
    let mesh: Mesh = load_mesh(&path).unwrap();
    assert_eq!(mesh.faces().len(), 1280);
    for n in mesh.normals() {
        let len = (n.x * n.x + n.y * n.y + n.z * n.z).sqrt();
        assert!((len - 1.0).abs() <= 1e-4);
    }
}

#[test]
fn obj_texture_and_material_fallbacks() {
    let dir = tempfile::tempdir().unwrap();
    image::RgbImage::from_pixel(4, 4, image::Rgb([10, 20, 30]))
        .save(dir.path().join("tex.png"))
        .unwrap();
    std::fs::write(
        dir.path().join("m.mtl"),
        "newmtl a\nKd 1 0 0\nmap_Kd tex.png\nmap_Bump n.png\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("tri.obj"),
        "mtllib m.mtl\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nusemtl a\nf 1/1 2/2 3/3\n",
    )
    .unwrap();
    let mesh: Mesh = load_mesh(dir.path().join("tri.obj")).unwrap();
    assert!(mesh.has_texture());
    assert_eq!(mesh.uvs()[1], nalgebra::Point2::new(1.0, 0.0));

    let missing = load_mesh::<f64>(dir.path().join("nope.obj")).unwrap_err();
    assert!(matches!(missing, slb_core::MeshError::Io { .. }));
}

#[test]
fn icosphere_simplification_hausdorff() {
    let radius = 1.0;
    let sphere = primitives::icosphere::<f64>(radius, 4);
    assert_eq!(sphere.faces().len(), 5120);
    let simple = simplify_quadric(&sphere, 2000).unwrap();
    assert!(simple.faces().len() <= 2000);
    let (av, af) = arrays(&sphere);
    let (bv, bf) = arrays(&simple);
    let h = geometry::hausdorff(&av, &af, &bv, &bf, 4000, 11);
    assert!(h <= 0.02 * radius, "hausdorff {h}");
}

#[test]
fn hull_of_ball_points() {
    let pts = geometry::ball_points(1000, 5);
    let points: Vec<Point3<f64>> = pts.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect();
    let hull = convex_hull(&points).unwrap();
    let ball = 4.0 / 3.0 * std::f64::consts::PI;
    let v = hull.volume();
    assert!(v < ball && v > 0.8 * ball, "volume {v}");
    let hv: Vec<[f64; 3]> = hull.vertices().iter().map(|p| [p.x, p.y, p.z]).collect();
    for p in &pts {
        assert!(geometry::inside_all_face_planes(
            *p,
            &hv,
            hull.faces(),
            1e-9
        ));
    }
    // Convexity and outward winding.
    let centroid = hv.iter().fold([0.0; 3], |a, p| slb_oracle::add(a, *p));
    let centroid = slb_oracle::scale(centroid, 1.0 / hv.len() as f64);
    for v in &hv {
        assert!(geometry::inside_all_face_planes(
            *v,
            &hv,
            hull.faces(),
            1e-6
        ));
    }
    for f in hull.faces() {
        let [a, b, c] = f.map(|i| hv[i as usize]);
        let n = slb_oracle::cross(slb_oracle::sub(b, a), slb_oracle::sub(c, a));
        assert!(slb_oracle::dot(n, slb_oracle::sub(centroid, a)) < 0.0);
    }
}

/// Star-shaped (hence watertight, generally non-convex) blob with random anisotropy.
fn random_blob(seed: u64) -> Mesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = primitives::icosphere::<f64>(1.0, 2);
    let bumps: Vec<(Vector3<f64>, f64)> = (0..4)
        .map(|_| {
            let d = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            (d.normalize(), rng.random_range(-0.3..0.3))
        })
        .collect();
    let axes = Vector3::new(
        rng.random_range(0.03..0.12),
        rng.random_range(0.03..0.12),
        rng.random_range(0.03..0.12),
    );
    let rot = Rotation3::from_euler_angles(
        rng.random_range(0.0..3.0),
        rng.random_range(0.0..3.0),
        rng.random_range(0.0..3.0),
    );
    let shift = Vector3::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    );
    let verts = base
        .vertices()
        .iter()
        .map(|p| {
            let d = p.coords;
            let r = 1.0
                + bumps
                    .iter()
                    .map(|(b, a)| a * d.dot(b).max(0.0).powi(3))
                    .sum::<f64>();
            Point3::from(rot * (d * r).component_mul(&axes) + shift)
        })
        .collect();
    TriMesh::from_geometry(verts, base.faces().to_vec()).unwrap()
}

#[test]
fn exact_inertia_matches_quadrature_and_monte_carlo() {
    for seed in 0..3 {
        let mesh = random_blob(seed);
        let props = inertial_properties(&mesh, 500.0).unwrap();
        assert!(!props.hull_fallback);
        let (v, f) = arrays(&mesh);
        let quad = mass::divergence_mass(&v, &f, 500.0);
        let scale = props.inertia.amax();
        assert!((props.mass - quad.mass).abs() <= 1e-6 * props.mass);
        for i in 0..3 {
            for j in 0..3 {
                assert!((props.inertia[(i, j)] - quad.inertia[i][j]).abs() <= 1e-6 * scale);
            }
        }
        let mc = mass::monte_carlo_mass(&v, &f, 500.0, 96, seed);
        assert!((props.mass - mc.mass).abs() <= 0.005 * props.mass);
    }
}

#[test]
fn icosphere_inertia_vs_sphere_and_oracles() {
    let (r, density) = (0.1, 500.0);
    let mesh = primitives::icosphere::<f64>(r, 4);
    let props = inertial_properties(&mesh, density).unwrap();
    let m = density * 4.0 / 3.0 * std::f64::consts::PI * r.powi(3);
    assert!((props.mass - m).abs() <= 0.01 * m);
    for k in 0..3 {
        assert!((props.inertia[(k, k)] - 0.4 * m * r * r).abs() <= 0.01 * 0.4 * m * r * r);
    }
    let (v, f) = arrays(&mesh);
    let quad = mass::divergence_mass(&v, &f, density);
    assert!((props.mass - quad.mass).abs() <= 1e-6 * props.mass);
    for k in 0..3 {
        assert!((props.inertia[(k, k)] - quad.inertia[k][k]).abs() <= 1e-6 * props.inertia[(k, k)]);
    }
    let moments = props.principal_moments();
    assert!(moments[0] > 0.0 && moments[0] + moments[1] >= moments[2]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hull_is_idempotent(seed in 0u64..10_000, n in 5usize..200) {
        let pts = geometry::ball_points(n, seed);
        let points: Vec<Point3<f64>> = pts.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect();
        let hull = convex_hull(&points).unwrap();
        let again = convex_hull(hull.vertices()).unwrap();
        let key = |p: &Point3<f64>| [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
        let mut a: Vec<_> = hull.vertices().iter().map(key).collect();
        let mut b: Vec<_> = again.vertices().iter().map(key).collect();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn simplification_never_grows(sub in 1u32..4, target in 4usize..1500) {
        let mesh = primitives::icosphere::<f64>(1.0, sub);
        let out = simplify_quadric(&mesh, target).unwrap();
        prop_assert!(out.faces().len() <= mesh.faces().len());
        prop_assert!(out.faces().len() <= target.max(4) || out.faces().len() == mesh.faces().len() && mesh.faces().len() <= target);
        let n = out.vertices().len() as u32;
        prop_assert!(out.faces().iter().flatten().all(|&i| i < n));
    }

    #[test]
    fn mass_scales_linearly(seed in 0u64..50, density in 1.0f64..5000.0) {
        let mesh = random_blob(seed);
        let a = inertial_properties(&mesh, density).unwrap();
        let b = inertial_properties(&mesh, 2.0 * density).unwrap();
        prop_assert_eq!(b.mass, 2.0 * a.mass);
        prop_assert!((b.inertia - a.inertia * 2.0).amax() <= 1e-14 * b.inertia.amax());
    }
}
