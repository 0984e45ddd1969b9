//! Synthetic 2D worlds, a ray-casting lidar with odometry noise, scripted
//! kidnaps and forced merges, and the scan-log format.

mod log;
pub mod scenarios;
mod script;
mod sensor;
mod world;

pub use log::{ingest_log, LogRecord, ScanRecord, SequenceLog};
pub use script::{run_scenario, Kidnap, ScriptedMerge, TrajectoryScript, DEFAULT_MERGE_INFORMATION};
pub use sensor::{cast_beams, noisy_beams, noisy_odometry, raycast, SensorModel};
pub use world::{Segment, World};
