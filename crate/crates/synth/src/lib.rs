//! Scene synthesis: samples and arranges object scenes, renders them with ground truth,
//! applies the sensor model, and stores the frames as a validated dataset.

pub mod assets;
pub mod config;
pub mod dataset;
pub mod demo;
pub mod description;
pub mod pipeline;
pub mod poses;
pub mod preview;
pub mod seed;

pub use assets::{AssetError, AssetLibrary, MeshAsset};
pub use config::{load_config, ConfigError, GeneratorConfig};
pub use dataset::{
    read_frame, validate_dataset, DatasetWriter, FrameRecord, Manifest, ValidationReport,
};
pub use description::SceneDescription;
pub use pipeline::{
    run_generator, AnnotatedFrame, Generator, RunError, RunReport, StageTimes, SynthError,
};
pub use seed::frame_seed;
