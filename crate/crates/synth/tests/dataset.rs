mod common;

use std::collections::BTreeMap;
use std::path::Path;

use common::*;
use image::{ImageBuffer, Luma};
use slb_synth::dataset::*;
use slb_synth::{run_generator, Generator};

fn write_dataset(g: &Generator, dir: &Path, count: u64) -> Manifest {
    let mut w = DatasetWriter::create(dir, &g.config).unwrap();
    run_generator(g, count, 2, |f| w.write(&f).map(drop)).unwrap();
    w.manifest().clone()
}

fn setup(edit: impl FnOnce(&mut slb_synth::GeneratorConfig)) -> (tempfile::TempDir, Generator) {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = demo_config(&dir.path().join("assets"), 128, 96);
    edit(&mut cfg);
    (dir, generator(&cfg))
}

fn load16(path: &Path) -> ImageBuffer<Luma<u16>, Vec<u16>> {
    image::open(path).unwrap().into_luma16()
}

fn save16(path: &Path, img: &ImageBuffer<Luma<u16>, Vec<u16>>) {
    img.save(path).unwrap();
}

#[test]
fn write_then_read_reproduces_the_buffers() {
    let (dir, g) = setup(|_| {});
    let out = dir.path().join("ds");
    let mut w = DatasetWriter::create(&out, &g.config).unwrap();
    for index in 0..3 {
        let f = g.generate_frame(index).unwrap();
        let paths = w.write(&f).unwrap();
        assert_eq!(paths.len(), CHANNELS.len());
        assert!(paths.iter().all(|p| p.is_file()));
        let r = read_frame(&out, index).unwrap();
        let b = &f.buffers;
        assert_eq!(r.rgb, f.rgb8);
        assert_eq!(r.class_map, b.class_map);
        assert_eq!(r.instance_map, b.instance_map);
        for (&q, &d) in r.depth_raw.iter().zip(&b.depth) {
            let meters = q as f64 / 10_000.0;
            assert!((meters - d as f64).abs() <= 0.5e-4 + 1e-12, "{q} vs {d}");
            assert_eq!(q == 0, d == 0.0);
        }
        let bits = |v: &[[f32; 3]]| {
            v.iter()
                .flat_map(|p| p.map(f32::to_bits))
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&r.normals), bits(&b.normals));
        assert_eq!(bits(&r.obj_coords), bits(&b.obj_coords));
        assert_eq!(r.meta.index, index);
        assert_eq!(r.meta.seed, f.seed);
        let listed: Vec<u16> = r.meta.instances.iter().map(|i| i.instance_id).collect();
        assert_eq!(listed, b.visible_instances());
        assert_eq!(r.meta.scene, f.scene);
        assert_eq!(r.meta.flags, g.config.render);
    }
    assert!(!out.join(".staging-000000").exists());
    assert_eq!(w.manifest().frames, vec![0, 1, 2]);
    let report = validate_dataset(&out).unwrap();
    assert!(report.is_clean(), "{report:#?}");
    assert_eq!(report.frames_checked, 3);
}

#[test]
fn background_only_frame() {
    let (dir, g) = setup(|c| c.object_count = 0);
    let out = dir.path().join("ds");
    write_dataset(&g, &out, 2);
    let class = load16(&frame_path(&out, 1, "class.png"));
    assert!(class.pixels().all(|p| p.0[0] == 0));
    let meta = read_meta(&out, 1).unwrap();
    assert!(meta.instances.is_empty());
    assert!(validate_dataset(&out).unwrap().is_clean());
}

#[test]
fn manifest_counts_match_an_independent_recount() {
    let (dir, g) = setup(|_| {});
    let out = dir.path().join("ds");
    let manifest = write_dataset(&g, &out, 6);
    let mut counts: BTreeMap<u16, u64> = BTreeMap::new();
    for i in 0..6 {
        for p in load16(&frame_path(&out, i, "class.png")).pixels() {
            if p.0[0] > 0 {
                *counts.entry(p.0[0]).or_default() += 1;
            }
        }
    }
    assert!(!counts.is_empty());
    assert_eq!(manifest.class_pixels, counts);
    assert_eq!(Manifest::load(&out).unwrap(), manifest);
    assert_eq!(manifest.config_hash, g.config.content_hash());
    assert_eq!(manifest.frames, (0..6).collect::<Vec<_>>());

    // A tampered count is reported.
    let mut bad = manifest.clone();
    *bad.class_pixels.values_mut().next().unwrap() += 1;
    std::fs::write(out.join(MANIFEST), serde_json::to_vec(&bad).unwrap()).unwrap();
    let report = validate_dataset(&out).unwrap();
    assert_eq!(report.manifest.len(), 1, "{report:#?}");
    assert!(report.frames.is_empty());
}

#[test]
fn instance_value_absent_from_meta_is_reported() {
    let (dir, g) = setup(|_| {});
    let out = dir.path().join("ds");
    write_dataset(&g, &out, 3);
    let path = frame_path(&out, 1, "instance.png");
    let mut inst = load16(&path);
    let target = inst
        .pixels()
        .position(|p| p.0[0] > 0)
        .expect("a labelled pixel");
    let (x, y) = (target as u32 % inst.width(), target as u32 / inst.width());
    inst.put_pixel(x, y, Luma([77]));
    save16(&path, &inst);
    let report = validate_dataset(&out).unwrap();
    assert_eq!(report.frames.len(), 1);
    let frame = &report.frames[0];
    assert_eq!(frame.index, 1);
    assert!(
        frame
            .violations
            .contains(&Violation::InstanceNotInMeta { instance: 77 }),
        "{:#?}",
        frame.violations
    );
    assert!(frame
        .violations
        .iter()
        .any(|v| v.to_string().contains("77")));
}

#[test]
fn unlabeled_depth_is_a_coherence_violation() {
    let (dir, g) = setup(|c| c.scene.plane_probability = 0.0);
    let out = dir.path().join("ds");
    write_dataset(&g, &out, 2);
    let path = frame_path(&out, 0, "depth.png");
    let mut depth = load16(&path);
    let inst = load16(&frame_path(&out, 0, "instance.png"));
    let k = inst.pixels().position(|p| p.0[0] == 0).unwrap();
    let (x, y) = (k as u32 % inst.width(), k as u32 / inst.width());
    assert_eq!(depth.get_pixel(x, y).0[0], 0);
    depth.put_pixel(x, y, Luma([12345]));
    save16(&path, &depth);
    let report = validate_dataset(&out).unwrap();
    let frame = &report.frames[0];
    assert_eq!(frame.index, 0);
    assert!(
        frame
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Pixels { check, first, .. }
            if check == "coherence" && *first == (x, y))),
        "{:#?}",
        frame.violations
    );
}

#[test]
fn plane_pixels_are_accepted_as_unlabeled_geometry() {
    let (dir, g) = setup(|c| c.scene.plane_probability = 1.0);
    let out = dir.path().join("ds");
    write_dataset(&g, &out, 2);
    let meta = read_meta(&out, 0).unwrap();
    assert!(meta.plane.visible);
    let r = read_frame(&out, 0).unwrap();
    assert!(r
        .instance_map
        .iter()
        .zip(&r.depth_raw)
        .any(|(&i, &d)| i == 0 && d > 0));
    assert!(validate_dataset(&out).unwrap().is_clean());
}

#[test]
fn missing_and_truncated_files_are_listed() {
    let (dir, g) = setup(|_| {});
    let out = dir.path().join("ds");
    write_dataset(&g, &out, 3);
    std::fs::remove_file(frame_path(&out, 0, "normals.slb")).unwrap();
    let coords = frame_path(&out, 2, "coords.slb");
    let bytes = std::fs::read(&coords).unwrap();
    std::fs::write(&coords, &bytes[..bytes.len() - 5]).unwrap();
    let report = validate_dataset(&out).unwrap();
    assert_eq!(report.frames.len(), 2, "{report:#?}");
    assert!(
        matches!(&report.frames[0].violations[0], Violation::MissingFile { path } if path.ends_with("000000_normals.slb"))
    );
    assert!(
        matches!(&report.frames[1].violations[0], Violation::Decode { message } if message.contains("coords.slb"))
    );
    // Frame 1 is still fully checked, and counts are not compared with frames missing.
    assert!(report.manifest.is_empty());
    assert!(matches!(
        read_frame(&out, 2),
        Err(DatasetError::Decode { .. })
    ));
}

#[test]
fn slb_container_layout() {
    let data = vec![[1.0f32, -2.0, 0.5], [3.25, 0.0, -0.0]];
    let bytes = encode_slb(3, 2, 1, &data);
    assert_eq!(&bytes[..4], b"SLB1");
    assert_eq!(&bytes[4..16], &[3, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0]);
    assert_eq!(&bytes[16..20], &1.0f32.to_le_bytes());
    assert_eq!(bytes.len(), 16 + 24);
    let (w, h, back) = decode_slb(&bytes).unwrap();
    assert_eq!((w, h), (2, 1));
    assert_eq!(back[1][2].to_bits(), (-0.0f32).to_bits());
    assert!(decode_slb(&bytes[..30]).is_err());
    assert!(decode_slb(b"SLB2\0\0\0\0").is_err());
}

#[test]
fn depth_units_are_tenths_of_millimeters() {
    assert_eq!(quantize_depth(2.0), 20000);
    assert_eq!(quantize_depth(0.0), 0);
    assert_eq!(quantize_depth(1e-6), 1);
    assert_eq!(quantize_depth(7.0), u16::MAX);
    let (dir, g) = setup(|_| {});
    let out = dir.path().join("ds");
    write_dataset(&g, &out, 1);
    let path = frame_path(&out, 0, "depth.png");
    let mut depth = load16(&path);
    depth.put_pixel(0, 0, Luma([20000]));
    save16(&path, &depth);
    let r = read_frame(&out, 0).unwrap();
    assert_eq!(r.depth()[0], 2.0);
}

#[test]
fn rerunning_into_a_directory_restarts_the_manifest() {
    let (dir, g) = setup(|_| {});
    let out = dir.path().join("ds");
    write_dataset(&g, &out, 3);
    let m = write_dataset(&g, &out, 0);
    assert!(m.frames.is_empty());
    assert!(Manifest::load(&out).unwrap().frames.is_empty());
}
