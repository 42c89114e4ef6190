use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};
use slb_core::{convex_hull, inertial_properties, load_mesh, simplify_quadric, Mesh};
use slb_synth::config::{load_config, seed_from_env, GeneratorConfig};
use slb_synth::dataset::{encode_frame, read_frame, validate_dataset, DatasetWriter};
use slb_synth::{demo, preview, run_generator, Generator};

#[derive(Parser)]
#[command(
    name = "slb",
    version,
    about = "Synthetic cluttered-scene dataset generator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset.
    Gen(GenArgs),
    /// Check a dataset against its manifest and ground-truth invariants.
    Validate { dir: PathBuf },
    /// Generate frames without writing them and report throughput.
    Bench(BenchArgs),
    /// Write a 3×2 channel montage of one frame.
    Preview {
        dir: PathBuf,
        #[arg(long)]
        frame: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mesh utilities.
    #[command(subcommand)]
    Mesh(MeshCommand),
    /// Write procedural demo assets and a config into a directory.
    Init { dir: PathBuf },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    count: u64,
    /// Master seed; takes precedence over SLB_SEED and the config file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, requires = "height")]
    width: Option<u32>,
    #[arg(long, requires = "width")]
    height: Option<u32>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    no_stickers: bool,
    #[arg(long)]
    no_ssao: bool,
    #[arg(long)]
    no_pbr_ibl: bool,
    #[arg(long)]
    no_cam_model: bool,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    common: Overrides,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Overrides,
}

#[derive(Subcommand)]
enum MeshCommand {
    /// Quadric-error simplification to a face budget.
    Simplify {
        input: PathBuf,
        #[arg(long, default_value_t = slb_core::PHYSICS_FACE_BUDGET)]
        faces: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convex hull as an OBJ file.
    Hull {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mass, center of mass and inertia tensor as JSON.
    Inertia {
        input: PathBuf,
        #[arg(long, default_value_t = slb_core::DEFAULT_DENSITY)]
        density: f64,
    },
}

fn configure(o: &Overrides) -> anyhow::Result<GeneratorConfig> {
    let mut cfg = load_config(&o.config)?;
    if let Some(seed) = o.seed.or(seed_from_env()?) {
        cfg.seed = seed;
    }
    if let (Some(w), Some(h)) = (o.width, o.height) {
        cfg.camera = cfg.camera.resized(w, h);
    }
    if let Some(w) = o.workers {
        cfg.workers = w;
    }
    let r = &mut cfg.render;
    r.stickers &= !o.no_stickers;
    r.ssao &= !o.no_ssao;
    r.pbr_ibl &= !o.no_pbr_ibl;
    r.cam_model &= !o.no_cam_model;
    cfg.validate()?;
    Ok(cfg)
}

fn gen(args: &GenArgs) -> anyhow::Result<()> {
    let cfg = configure(&args.common)?;
    let generator = Generator::new(cfg.clone())?;
    let mut writer = DatasetWriter::create(&args.out, &cfg)?;
    let report = run_generator(&generator, args.common.count, cfg.workers, |f| {
        writer.write(&f).map(drop)
    })?;
    println!(
        "wrote {} frames to {} in {:.2} s ({:.2} fps)",
        report.frames,
        args.out.display(),
        report.wall_seconds,
        report.fps
    );
    Ok(())
}

fn bench(args: &BenchArgs) -> anyhow::Result<()> {
    let cfg = configure(&args.common)?;
    let generator = Generator::new(cfg.clone())?;
    let mut hashes = Vec::new();
    let report = run_generator(&generator, args.common.count, cfg.workers, |f| {
        let mut h = Sha256::new();
        for (_, bytes) in encode_frame(&f, &cfg) {
            h.update(&bytes);
        }
        hashes.push((f.index, hex::encode(h.finalize())));
        Ok::<_, std::convert::Infallible>(())
    })?;
    let s = &report.stages;
    println!(
        "frames {} workers {} resolution {}x{} wall {:.3} s fps {:.3}",
        report.frames,
        report.workers,
        cfg.camera.width,
        cfg.camera.height,
        report.wall_seconds,
        report.fps
    );
    for (name, t) in [
        ("arrange_wait", s.arrange_wait),
        ("render", s.render),
        ("sensor", s.sensor),
        ("sink", s.sink),
    ] {
        let share = if report.wall_seconds > 0.0 {
            100.0 * t / report.wall_seconds
        } else {
            0.0
        };
        println!("stage {name:<12} {t:9.3} s {share:5.1} %");
    }
    println!("stage_total {:.3} s", s.total());
    println!("arrange_cpu {:.3} s", report.arrange_cpu_seconds);
    for (i, h) in hashes {
        println!("frame {i:06} {h}");
    }
    Ok(())
}

fn validate(dir: &Path) -> anyhow::Result<()> {
    let report = validate_dataset(dir)?;
    for line in &report.manifest {
        println!("manifest: {line}");
    }
    for f in &report.frames {
        for v in &f.violations {
            println!("frame {:06}: {v}", f.index);
        }
    }
    if !report.is_clean() {
        bail!(
            "validation: {} violations in {} of {} frames",
            report.violation_count(),
            report.frames.len(),
            report.frames_checked
        );
    }
    println!("{} frames, no violations", report.frames_checked);
    Ok(())
}

fn mesh_command(cmd: &MeshCommand) -> anyhow::Result<()> {
    let load = |p: &Path| load_mesh::<f64>(p).with_context(|| format!("loading {}", p.display()));
    let write = |mesh: &Mesh, out: &Path| {
        std::fs::write(out, slb_core::io::write_obj(mesh))
            .with_context(|| format!("writing {}", out.display()))
    };
    match cmd {
        MeshCommand::Simplify { input, faces, out } => {
            let mesh = load(input)?;
            let simple = simplify_quadric(&mesh, *faces)?;
            write(&simple, out)?;
            println!("{} -> {} faces", mesh.faces().len(), simple.faces().len());
        }
        MeshCommand::Hull { input, out } => {
            let hull = convex_hull(load(input)?.vertices())?;
            write(&hull.to_mesh(), out)?;
            println!(
                "hull with {} vertices, {} faces",
                hull.vertices().len(),
                hull.faces().len()
            );
        }
        MeshCommand::Inertia { input, density } => {
            let m = inertial_properties(&load(input)?, *density)?;
            let c = m.center_of_mass;
            let rows: Vec<[f64; 3]> = (0..3)
                .map(|r| [m.inertia[(r, 0)], m.inertia[(r, 1)], m.inertia[(r, 2)]])
                .collect();
            let json = serde_json::json!({
                "mass": m.mass,
                "center_of_mass": [c.x, c.y, c.z],
                "inertia": rows,
                "hull_fallback": m.hull_fallback,
            });
            println!("{}", serde_json::to_string_pretty(&json)?);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen(a) => gen(&a),
        Command::Validate { dir } => validate(&dir),
        Command::Bench(a) => bench(&a),
        Command::Preview { dir, frame, out } => {
            let record = read_frame(&dir, frame)?;
            preview::montage(&record)
                .save(&out)
                .with_context(|| format!("writing {}", out.display()))?;
            Ok(())
        }
        Command::Mesh(cmd) => mesh_command(&cmd),
        Command::Init { dir } => {
            let cfg = demo::write_demo_assets(&dir)
                .with_context(|| format!("writing demo assets to {}", dir.display()))?;
            println!("{}", cfg.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("slb: error: {msg}");
            ExitCode::FAILURE
        }
    }
}
