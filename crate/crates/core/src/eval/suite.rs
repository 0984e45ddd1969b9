use rayon::prelude::*;

use super::run::{run_sequence, SequenceResult};
use crate::config::Config;
use crate::detect::DetectorKind;
use crate::error::Result;
use crate::merge::MergeLabel;
use crate::sim::scenarios::{four_way_crossing, random_flat, symmetric_room, twin_corridor, FlatParams, Scenario};

/// Size and seeding of a generated evaluation suite.
#[derive(Debug, Clone)]
pub struct SuiteSpec {
    /// Random flats per label.
    pub flats_per_label: usize,
    /// Simulation seeds per scripted scenario and label.
    pub scripted_seeds: usize,
    pub seed: u64,
    pub flat: FlatParams,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        Self {
            flats_per_label: 27,
            scripted_seeds: 1,
            seed: 0,
            flat: FlatParams::default(),
        }
    }
}

/// A scenario plus the simulation seed to run it with.
#[derive(Debug, Clone)]
pub struct SuiteItem {
    pub scenario: Scenario,
    pub seed: u64,
}

impl SuiteItem {
    pub fn id(&self) -> String {
        format!("{}_s{}", self.scenario.name, self.seed)
    }
}

pub fn build_suite(spec: &SuiteSpec) -> Vec<SuiteItem> {
    let mut items = Vec::new();
    for label in [MergeLabel::Correct, MergeLabel::Invalid] {
        for k in 0..spec.scripted_seeds as u64 {
            for scenario in [four_way_crossing(label), twin_corridor(label), symmetric_room(label)] {
                items.push(SuiteItem {
                    scenario,
                    seed: spec.seed.wrapping_add(k),
                });
            }
        }
        for k in 0..spec.flats_per_label as u64 {
            let s = spec.seed.wrapping_mul(1000).wrapping_add(k);
            items.push(SuiteItem {
                scenario: random_flat(s, label, &spec.flat),
                seed: s,
            });
        }
    }
    items
}

/// Simulates and evaluates every item, in parallel across sequences.
pub fn run_suite(items: &[SuiteItem], detectors: &[DetectorKind], cfg: &Config) -> Result<Vec<SequenceResult>> {
    items
        .par_iter()
        .map(|item| {
            let log = item.scenario.simulate(&cfg.sensor, item.seed)?;
            run_sequence(&item.id(), &log, None, detectors, cfg)
        })
        .collect()
}
