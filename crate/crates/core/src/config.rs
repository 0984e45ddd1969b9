//! TOML configuration covering every tunable default.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detect::change::ChangeDetectorConfig;
use crate::detect::entropy::EntropyConfig;
use crate::detect::gridmap::GridmapDetectorConfig;
use crate::detect::histogram::HistogramConfig;
use crate::detect::DetectorKind;
use crate::error::{Error, Result};
use crate::graph::Information;
use crate::optimize::OptimizerConfig;
use crate::sim::SensorModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Detectors evaluated after every post-merge vertex.
    pub detectors: Vec<DetectorKind>,
    /// Diagonal of the odometry edge information matrix (1/m², 1/m², 1/rad²).
    pub odometry_information: [f64; 3],
    /// Every this many vertices of an epoch, a ground-truth loop closure to the
    /// epoch's first vertex is added when the log carries ground truth; 0 disables.
    pub gt_loop_closure_every: usize,
    /// Diagonal of the information matrix of those loop closures.
    pub loop_closure_information: [f64; 3],
    /// Backups of graphs with at least this many vertices go to `backup_dir`, if set.
    pub backup_spill_min_vertices: usize,
    pub backup_dir: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            detectors: DetectorKind::ALL.to_vec(),
            odometry_information: [2500.0, 2500.0, 10000.0],
            gt_loop_closure_every: 20,
            loop_closure_information: [400.0, 400.0, 1600.0],
            backup_spill_min_vertices: 0,
            backup_dir: None,
        }
    }
}

impl PipelineConfig {
    pub fn odometry_information(&self) -> Result<Information> {
        let [a, b, c] = self.odometry_information;
        Information::diagonal(a, b, c).map_err(|_| Error::Config("odometry_information must be positive".into()))
    }

    pub fn loop_closure_information(&self) -> Result<Information> {
        let [a, b, c] = self.loop_closure_information;
        Information::diagonal(a, b, c).map_err(|_| Error::Config("loop_closure_information must be positive".into()))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub pipeline: PipelineConfig,
    pub optimizer: OptimizerConfig,
    pub change: ChangeDetectorConfig,
    pub gridmap: GridmapDetectorConfig,
    pub entropy: EntropyConfig,
    pub histogram: HistogramConfig,
    pub sensor: SensorModel,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.change.validate()?;
        self.gridmap.validate()?;
        self.entropy.validate()?;
        self.histogram.validate()?;
        self.sensor.validate()?;
        self.pipeline.odometry_information()?;
        self.pipeline.loop_closure_information()?;
        Ok(())
    }
}
