//! Configuration files, texture-map and trajectory CSV, JSON reports and SVG
//! figures.

pub mod config;
mod files;
pub mod svg;

pub use config::ExperimentConfig;
pub use files::{
    fmt_num, meta_path, read_json, read_map, read_trajectory_spin, write_json, write_map, write_trajectory, MapMeta,
};
