#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use slb_synth::config::load_config;
use slb_synth::demo::write_demo_assets;
use slb_synth::{AssetLibrary, Generator, GeneratorConfig};

/// Demo config written into `dir`, resized to `width × height`.
pub fn demo_config(dir: &Path, width: u32, height: u32) -> GeneratorConfig {
    let path = write_demo_assets(dir).unwrap();
    let mut cfg = load_config(&path).unwrap();
    cfg.camera = cfg.camera.resized(width, height);
    cfg
}

pub fn generator(cfg: &GeneratorConfig) -> Generator {
    Generator::new(cfg.clone()).unwrap()
}

/// Same assets under a modified config (the camera size must not change).
pub fn variant(base: &Generator, edit: impl FnOnce(&mut GeneratorConfig)) -> Generator {
    let mut cfg = base.config.clone();
    edit(&mut cfg);
    assert_eq!(cfg.camera, base.config.camera);
    Generator::with_assets(cfg, Arc::clone(&base.assets)).unwrap()
}

pub fn shared_assets(g: &Generator) -> Arc<AssetLibrary> {
    Arc::clone(&g.assets)
}
