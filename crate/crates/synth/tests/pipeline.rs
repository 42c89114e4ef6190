mod common;

use std::collections::BTreeSet;

use common::*;
use slb_core::pose::{from_row_major, is_valid_rotation, to_row_major};
use slb_oracle::sat::{penetration_depth, Polytope};
use slb_physics::SupportPlane;
use slb_synth::dataset::{encode_frame, FrameMeta};
use slb_synth::description::ArrangementMethod;
use slb_synth::{run_generator, AnnotatedFrame, Generator};

fn hull_polytope(g: &Generator, mesh: &str, pose: &[f64; 16]) -> Polytope {
    let model = &g.assets.meshes[g.assets.mesh(mesh).unwrap()].model;
    let pose = from_row_major(pose);
    let v = model
        .hull
        .vertices()
        .iter()
        .map(|p| (pose * p).coords.into())
        .collect();
    Polytope::new(v, model.hull.faces().to_vec())
}

/// Structural, coherence, reprojection and penetration checks for one frame.
fn frame_invariants(g: &Generator, f: &AnnotatedFrame) -> Vec<String> {
    let mut bad = Vec::new();
    let s = &f.scene;
    let ids: Vec<u16> = s.instances.iter().map(|i| i.instance_id).collect();
    if ids != (1..=ids.len() as u16).collect::<Vec<_>>() {
        bad.push(format!("instance ids {ids:?} not contiguous from 1"));
    }
    let classes: BTreeSet<u16> = g.config.class_table().into_iter().map(|c| c.0).collect();
    for i in &s.instances {
        if !classes.contains(&i.class_id) {
            bad.push(format!("class {} not configured", i.class_id));
        }
        if !is_valid_rotation(&from_row_major(&i.pose), 1e-6) {
            bad.push(format!("instance {} pose invalid", i.instance_id));
        }
    }
    let plane = s
        .plane
        .visible
        .then(|| FrameMeta::from_frame(f, &g.config).plane.geometry());
    for v in f
        .buffers
        .coherence_violations(&g.camera, plane.as_ref())
        .iter()
        .take(3)
    {
        bad.push(format!("coherence {v}"));
    }
    let all = (0..g.camera.height).flat_map(|y| (0..g.camera.width).map(move |x| (x, y)));
    for v in f
        .buffers
        .reprojection_violations(&g.camera, all)
        .iter()
        .take(3)
    {
        bad.push(format!("reprojection {v}"));
    }
    let support = SupportPlane {
        normal: nalgebra::Unit::new_normalize(s.plane.normal.into()),
        support_point: s.plane.point.into(),
    };
    let polys: Vec<Polytope> = s
        .instances
        .iter()
        .map(|i| hull_polytope(g, &i.mesh, &i.pose))
        .collect();
    for (a, pa) in polys.iter().enumerate() {
        let lowest = pa
            .vertices
            .iter()
            .map(|p| support.signed_distance(&(*p).into()))
            .fold(f64::INFINITY, f64::min);
        if lowest < -0.005 {
            bad.push(format!("instance {} is {lowest} m below the plane", a + 1));
        }
        for (b, pb) in polys.iter().enumerate().skip(a + 1) {
            let d = penetration_depth(pa, pb);
            if d > 0.005 {
                bad.push(format!("instances {} and {} penetrate {d} m", a + 1, b + 1));
            }
        }
    }
    bad
}

#[test]
fn same_index_gives_identical_frames() {
    let dir = tempfile::tempdir().unwrap();
    let g = generator(&demo_config(dir.path(), 160, 120));
    let a = g.generate_frame(3).unwrap();
    let b = g.generate_frame(3).unwrap();
    assert_eq!(a, b);
    assert_eq!(encode_frame(&a, &g.config), encode_frame(&b, &g.config));
    assert_ne!(g.generate_frame(4).unwrap().rgb8, a.rgb8);
}

#[test]
fn worker_count_does_not_change_frames() {
    let dir = tempfile::tempdir().unwrap();
    let g = generator(&demo_config(dir.path(), 160, 120));
    let run = |workers| {
        let mut out = Vec::new();
        let report = run_generator(&g, 10, workers, |f| {
            out.push((f.index, encode_frame(&f, &g.config)));
            Ok::<_, String>(())
        })
        .unwrap();
        assert_eq!(report.frames, 10);
        assert_eq!(report.workers, workers);
        assert!(report.stages.total() <= report.wall_seconds);
        out
    };
    let one = run(1);
    assert_eq!(
        one.iter().map(|f| f.0).collect::<Vec<_>>(),
        (0..10).collect::<Vec<_>>()
    );
    assert!(one == run(8));
    let direct = g.generate_frame(7).unwrap();
    assert!(one[7].1 == encode_frame(&direct, &g.config));
}

#[test]
fn empty_run() {
    let dir = tempfile::tempdir().unwrap();
    let g = generator(&demo_config(dir.path(), 64, 48));
    let mut calls = 0;
    let report = run_generator(&g, 0, 4, |_| {
        calls += 1;
        Ok::<_, String>(())
    })
    .unwrap();
    assert_eq!((report.frames, calls, report.fps), (0, 0, 0.0));
}

#[test]
fn sink_failure_stops_with_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let g = generator(&demo_config(dir.path(), 64, 48));
    let err = run_generator(&g, 20, 3, |f| {
        if f.index == 2 {
            Err("disk full")
        } else {
            Ok(())
        }
    })
    .unwrap_err();
    assert_eq!(err.report.frames, 2);
    assert!(
        err.message.contains("disk full") && err.message.contains("frame 2"),
        "{}",
        err.message
    );
}

#[test]
fn zero_objects_give_a_background_frame() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = demo_config(dir.path(), 96, 72);
    cfg.object_count = 0;
    cfg.scene.plane_probability = 0.0;
    let g = generator(&cfg);
    let f = g.generate_frame(0).unwrap();
    assert!(f.scene.instances.is_empty());
    assert!(f.buffers.instance_map.iter().all(|&i| i == 0));
    assert!(f.buffers.class_map.iter().all(|&c| c == 0));
    assert!(f.buffers.depth.iter().all(|&d| d == 0.0));
}

#[test]
fn class_distribution_is_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let base = generator(&demo_config(dir.path(), 32, 24));
    let n_mesh = base.assets.meshes.len();
    let frames = 10_000u64;
    for unique in [false, true] {
        let g = variant(&base, |c| c.unique_objects = unique);
        let mut counts = vec![0u64; n_mesh];
        for i in 0..frames {
            let sel = g.select_meshes(g.frame_seed(i));
            assert_eq!(sel.len(), 5);
            if unique {
                assert_eq!(sel.iter().collect::<BTreeSet<_>>().len(), 5);
            }
            for m in sel {
                counts[m] += 1;
            }
        }
        // Per-mesh count is binomial: draws per frame with p = 1/n, or one draw with p = 5/n.
        let (trials, p) = if unique {
            (frames as f64, 5.0 / n_mesh as f64)
        } else {
            (5.0 * frames as f64, 1.0 / n_mesh as f64)
        };
        let (mean, sd) = (trials * p, (trials * p * (1.0 - p)).sqrt());
        for (m, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - mean).abs() <= 5.0 * sd,
                "unique={unique} mesh {m}: {c} vs {mean} ± {sd}"
            );
        }
    }
}

#[test]
fn forced_fallback_uses_collision_free_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let base = generator(&demo_config(dir.path(), 96, 72));
    let g = variant(&base, |c| c.fallback_probability = 1.0);
    for i in 0..5 {
        let f = g.generate_frame(i).unwrap();
        assert_eq!(f.scene.arrangement.method, ArrangementMethod::CollisionFree);
        assert_eq!(
            f.scene.instances.len() + f.scene.arrangement.omitted.len(),
            5
        );
        assert!(
            frame_invariants(&g, &f).is_empty(),
            "{:?}",
            frame_invariants(&g, &f)
        );
    }
}

#[test]
fn injected_poses_replace_arrangement() {
    let dir = tempfile::tempdir().unwrap();
    let base = generator(&demo_config(dir.path(), 96, 72));
    let pose = nalgebra::Isometry3::translation(0.02, -0.01, 0.7);
    let table =
        serde_json::json!({"frames": {"1": [{"mesh": "melon", "pose": to_row_major(&pose)}]}});
    let path = dir.path().join("poses.json");
    std::fs::write(&path, table.to_string()).unwrap();
    let g = variant(&base, |c| c.scene.pose_file = Some(path.clone()));
    let f = g.generate_frame(1).unwrap();
    assert_eq!(f.scene.arrangement.method, ArrangementMethod::Injected);
    assert_eq!(f.scene.instances.len(), 1);
    assert_eq!(f.scene.instances[0].mesh, "melon");
    let back = from_row_major(&f.scene.instances[0].pose);
    assert!((back.translation.vector - pose.translation.vector).norm() < 1e-12);
    assert!(f.buffers.visible_instances() == vec![1]);
    // Other frames still arrange normally.
    assert_eq!(
        g.generate_frame(0).unwrap().scene.arrangement.method,
        ArrangementMethod::Drop
    );

    let bad = serde_json::json!({"frames": {"0": [{"mesh": "nope", "pose": to_row_major(&pose)}]}});
    std::fs::write(&path, bad.to_string()).unwrap();
    let mut cfg = base.config.clone();
    cfg.scene.pose_file = Some(path.clone());
    assert!(Generator::with_assets(cfg.clone(), shared_assets(&base))
        .unwrap_err()
        .to_string()
        .contains("nope"));
    let mut skew = to_row_major(&pose);
    skew[0] = 2.0;
    std::fs::write(
        &path,
        serde_json::json!({"frames": {"0": [{"mesh": "melon", "pose": skew}]}}).to_string(),
    )
    .unwrap();
    assert!(Generator::with_assets(cfg, shared_assets(&base)).is_err());
}

#[test]
fn hundred_default_frames_pass_the_invariant_suite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = demo_config(dir.path(), 640, 480);
    assert_eq!(cfg.camera, slb_synth::config::CameraConfig::default());
    let g = generator(&cfg);
    let mut failures = Vec::new();
    run_generator(&g, 100, g.config.workers, |f| {
        for b in frame_invariants(&g, &f) {
            failures.push(format!("frame {}: {b}", f.index));
        }
        Ok::<_, String>(())
    })
    .unwrap();
    assert!(failures.is_empty(), "{failures:#?}");
}
