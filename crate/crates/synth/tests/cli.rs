use std::path::Path;
use std::process::{Command, Output};

use slb_synth::dataset::{frame_path, Manifest};

fn slb(args: &[&str]) -> Output {
    slb_env(args, &[])
}

fn slb_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_slb"));
    cmd.args(args).env_remove("SLB_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn init(dir: &Path) -> String {
    let cfg = dir.join("assets");
    ok(&slb(&["init", cfg.to_str().unwrap()]));
    cfg.join("config.toml").to_str().unwrap().to_string()
}

fn gen(cfg: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "gen",
        "--config",
        cfg,
        "--out",
        out.to_str().unwrap(),
        "--width",
        "96",
        "--height",
        "72",
    ];
    args.extend_from_slice(extra);
    slb(&args)
}

#[test]
fn gen_zero_frames_writes_an_empty_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = init(dir.path());
    let out = dir.path().join("ds");
    ok(&gen(&cfg, &out, &["--count", "0"]));
    let m = Manifest::load(&out).unwrap();
    assert!(m.frames.is_empty() && m.class_pixels.is_empty());
    ok(&slb(&["validate", out.to_str().unwrap()]));
}

#[test]
fn gen_validate_and_preview() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = init(dir.path());
    let out = dir.path().join("ds");
    ok(&gen(&cfg, &out, &["--count", "3"]));
    let text = ok(&slb(&["validate", out.to_str().unwrap()]));
    assert!(text.contains("3 frames, no violations"), "{text}");
    let montage = dir.path().join("m.png");
    ok(&slb(&[
        "preview",
        out.to_str().unwrap(),
        "--frame",
        "1",
        "--out",
        montage.to_str().unwrap(),
    ]));
    let img = image::open(&montage).unwrap();
    assert_eq!((img.width(), img.height()), (3 * 96, 2 * 72));

    // Corruption turns validation into a one-line error.
    std::fs::remove_file(frame_path(&out, 2, "rgb.png")).unwrap();
    let bad = slb(&["validate", out.to_str().unwrap()]);
    assert!(!bad.status.success());
    let stderr = String::from_utf8(bad.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.starts_with("slb: error: validation"), "{stderr}");
    assert!(String::from_utf8(bad.stdout)
        .unwrap()
        .contains("000002_rgb.png"));
}

#[test]
fn ablation_flags_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = init(dir.path());
    let out = dir.path().join("ds");
    ok(&gen(
        &cfg,
        &out,
        &["--count", "1", "--no-ssao", "--no-cam-model"],
    ));
    let m = Manifest::load(&out).unwrap();
    assert!(!m.flags.ssao && !m.flags.cam_model && m.flags.stickers && m.flags.pbr_ibl);
    let meta = slb_synth::dataset::read_meta(&out, 0).unwrap();
    assert_eq!(meta.flags, m.flags);
    assert!(!meta.effects.applied);
    let out2 = dir.path().join("ds2");
    ok(&gen(
        &cfg,
        &out2,
        &["--count", "1", "--no-stickers", "--no-pbr-ibl"],
    ));
    let m2 = Manifest::load(&out2).unwrap();
    assert!(m2.flags.ssao && m2.flags.cam_model && !m2.flags.stickers && !m2.flags.pbr_ibl);
    assert_ne!(m.config_hash, m2.config_hash);
}

#[test]
fn seed_precedence_is_flag_then_env_then_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = init(dir.path());
    let run = |name: &str, extra: &[&str], env: &[(&str, &str)]| {
        let out = dir.path().join(name);
        let mut args = vec![
            "gen",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--count",
            "0",
        ];
        args.extend_from_slice(extra);
        ok(&slb_env(&args, env));
        Manifest::load(&out).unwrap().seed
    };
    assert_eq!(run("a", &[], &[]), 42);
    assert_eq!(run("b", &[], &[("SLB_SEED", "5")]), 5);
    assert_eq!(run("c", &["--seed", "6"], &[("SLB_SEED", "5")]), 6);
    let bad = slb_env(
        &[
            "gen",
            "--config",
            &cfg,
            "--out",
            "/nonexistent/x",
            "--count",
            "0",
        ],
        &[("SLB_SEED", "x")],
    );
    assert!(String::from_utf8(bad.stderr).unwrap().contains("SLB_SEED"));
}

#[test]
fn bench_reports_stages_and_repeatable_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = init(dir.path());
    let bench = || {
        ok(&slb(&[
            "bench",
            "--config",
            &cfg,
            "--count",
            "4",
            "--workers",
            "3",
            "--width",
            "96",
            "--height",
            "72",
        ]))
    };
    let a = bench();
    assert!(a.contains("fps"), "{a}");
    for stage in ["arrange_wait", "render", "sensor", "sink"] {
        assert!(a.contains(stage), "{a}");
    }
    let hashes = |s: &str| {
        s.lines()
            .filter(|l| l.starts_with("frame "))
            .map(str::to_string)
            .collect::<Vec<_>>()
    };
    assert_eq!(hashes(&a).len(), 4);
    assert_eq!(hashes(&a), hashes(&bench()));
}

#[test]
fn errors_are_single_lines_and_unknown_flags_show_usage() {
    let dir = tempfile::tempdir().unwrap();
    let bad_cfg = dir.path().join("bad.toml");
    std::fs::write(&bad_cfg, "seed = 1\nobject_count = -3\n").unwrap();
    let out = slb(&[
        "gen",
        "--config",
        bad_cfg.to_str().unwrap(),
        "--out",
        "x",
        "--count",
        "1",
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.contains("object_count"), "{stderr}");

    let out = slb(&[
        "gen",
        "--config",
        "c",
        "--out",
        "x",
        "--count",
        "1",
        "--frobnicate",
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(
        stderr.contains("--frobnicate") && stderr.contains("Usage"),
        "{stderr}"
    );

    let out = slb(&["validate", dir.path().join("missing").to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("manifest.json"));
}

#[test]
fn mesh_utilities() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("cube.obj");
    let mut cube = slb_core::io::write_obj(&slb_core::primitives::unit_cube::<f64>());
    cube.insert_str(0, "# cube\n");
    std::fs::write(&obj, cube).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&ok(&slb(&["mesh", "inertia", obj.to_str().unwrap()]))).unwrap();
    assert!((json["mass"].as_f64().unwrap() - 500.0).abs() < 1e-9);
    assert!((json["inertia"][0][0].as_f64().unwrap() - 500.0 / 6.0).abs() < 1e-9);

    let sphere = dir.path().join("sphere.obj");
    std::fs::write(
        &sphere,
        slb_core::io::write_obj(&slb_core::primitives::icosphere::<f64>(1.0, 4)),
    )
    .unwrap();
    let simple = dir.path().join("simple.obj");
    let text = ok(&slb(&[
        "mesh",
        "simplify",
        sphere.to_str().unwrap(),
        "--out",
        simple.to_str().unwrap(),
    ]));
    assert!(text.starts_with("5120 -> "), "{text}");
    let m: slb_core::Mesh = slb_core::load_mesh(&simple).unwrap();
    assert!(m.faces().len() <= 2000);
    let hull = dir.path().join("hull.obj");
    ok(&slb(&[
        "mesh",
        "hull",
        simple.to_str().unwrap(),
        "--out",
        hull.to_str().unwrap(),
    ]));
    assert!(slb_core::load_mesh::<f64>(&hull).is_ok());
}
