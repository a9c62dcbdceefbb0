//! Experiment runners: robot-count sweep (architectures A and B against
//! cloud regions), FRS-count sweep (architecture C against cloud regions)
//! and the rescue workload.
//!
//! Each runner first calibrates the unspecified service parameters against
//! the reference endpoint latencies, then sweeps its points in parallel.
//! Rows come back in sweep order, so tables are byte-identical per seed.

mod ab;
mod c;
mod rescue;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use ab::{
    calibrate_ab, cloud_scenario, d2d_requests, d2d_scenario, fr_scenario, run_experiment_ab,
    AbParams, ROBOT_COUNTS,
};
pub use c::{
    calibrate_c, cloud_line_scenario, cloud_sweep_workload, fr_line_scenario, run_experiment_c,
    CParams, CloudFit, FRS_COUNTS,
};
pub use rescue::{
    rescue_cloud_baseline, rescue_preset, run_experiment_rescue, warm_caches, VICTIM_DEADLINE_MS,
};

use crate::calibrate::CalibrationError;
use crate::engine::RunOutput;
use crate::error::SimError;
use crate::model::{LatencyModel, Position};
use crate::rng::PRNG_ALGORITHM;
use crate::stats::LatencyStats;

/// Round-trip latency triple measured against one cloud region.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub name: String,
    pub rtt_min_ms: f64,
    pub rtt_avg_ms: f64,
    pub rtt_max_ms: f64,
}

impl Region {
    pub fn new(name: &str, rtt_min_ms: f64, rtt_avg_ms: f64, rtt_max_ms: f64) -> Self {
        Region {
            name: name.to_owned(),
            rtt_min_ms,
            rtt_avg_ms,
            rtt_max_ms,
        }
    }

    /// One-way link model: half of the round trip.
    pub fn one_way(&self, stochastic: bool) -> LatencyModel {
        if stochastic {
            LatencyModel::Empirical {
                min_ms: self.rtt_min_ms / 2.0,
                avg_ms: self.rtt_avg_ms / 2.0,
                max_ms: self.rtt_max_ms / 2.0,
            }
        } else {
            LatencyModel::Constant(self.rtt_avg_ms / 2.0)
        }
    }
}

pub fn default_regions() -> Vec<Region> {
    vec![
        Region::new("sydney", 32.19, 95.83, 405.8),
        Region::new("seoul", 246.76, 261.85, 282.5),
        Region::new("sao_paulo", 390.16, 534.68, 1116.9),
    ]
}

/// Endpoint latencies a sweep is fitted to, at its lowest and highest point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoints {
    pub low_ms: f64,
    pub high_ms: f64,
}

pub const ROBOT_SWEEP_FR: Endpoints = Endpoints {
    low_ms: 8.58,
    high_ms: 19.51,
};
pub const ROBOT_SWEEP_D2D: Endpoints = Endpoints {
    low_ms: 3.82,
    high_ms: 6.75,
};
pub const FRS_SWEEP_FR_MS: f64 = 10.73;

/// Cloud endpoints of the robot-count sweep.
pub fn robot_sweep_cloud(region: &str) -> Option<Endpoints> {
    match region {
        "sydney" => Some(Endpoints {
            low_ms: 208.0,
            high_ms: 208.39,
        }),
        "seoul" => Some(Endpoints {
            low_ms: 540.04,
            high_ms: 540.43,
        }),
        "sao_paulo" => Some(Endpoints {
            low_ms: 1085.71,
            high_ms: 1086.09,
        }),
        _ => None,
    }
}

/// Cloud endpoints of the FRS-count sweep.
pub fn frs_sweep_cloud(region: &str) -> Option<Endpoints> {
    match region {
        "sydney" => Some(Endpoints {
            low_ms: 208.07,
            high_ms: 3609.32,
        }),
        "seoul" => Some(Endpoints {
            low_ms: 270.38,
            high_ms: 3884.3,
        }),
        "sao_paulo" => Some(Endpoints {
            low_ms: 1086.4,
            high_ms: 4336.18,
        }),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Sample cloud links from their empirical triples instead of using the
    /// average. Calibration always runs with constant links.
    pub stochastic: bool,
    pub regions: Vec<Region>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            stochastic: false,
            regions: default_regions(),
        }
    }
}

impl ExperimentConfig {
    /// First 16 hex digits of the SHA-256 of a canonical description.
    pub fn config_hash(&self, kind: &str) -> String {
        let mut text = format!(
            "kind={kind}\nseed={}\nstochastic={}\n",
            self.seed, self.stochastic
        );
        for r in &self.regions {
            let _ = writeln!(
                text,
                "region={},{},{},{}",
                r.name, r.rtt_min_ms, r.rtt_avg_ms, r.rtt_max_ms
            );
        }
        hex::encode(&Sha256::digest(text.as_bytes())[..8])
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("calibration of {stage} failed: {source}")]
    Calibration {
        stage: String,
        source: CalibrationError,
    },
    #[error("unknown region {0}")]
    UnknownRegion(String),
}

impl ExperimentError {
    fn calibration(stage: impl Into<String>) -> impl FnOnce(CalibrationError) -> ExperimentError {
        let stage = stage.into();
        move |source| ExperimentError::Calibration { stage, source }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub arch: String,
    pub frs_count: usize,
    pub robots: usize,
    /// Reference latency for this point, when there is one.
    pub target_ms: Option<f64>,
    pub resolution_mix: String,
    pub stats: LatencyStats,
    pub deadline_met_fraction: Option<f64>,
    pub seed: u64,
}

impl ResultRow {
    pub fn from_run(
        experiment: &str,
        arch: &str,
        frs_count: usize,
        robots: usize,
        target_ms: Option<f64>,
        out: &RunOutput,
        seed: u64,
    ) -> Self {
        let mix: Vec<String> = out
            .resolutions
            .iter()
            .map(|(r, n)| format!("{}={n}", r.as_str()))
            .collect();
        ResultRow {
            experiment: experiment.to_owned(),
            arch: arch.to_owned(),
            frs_count,
            robots,
            target_ms,
            resolution_mix: mix.join(";"),
            stats: out.stats["all"].clone(),
            deadline_met_fraction: out.deadline_met_fraction,
            seed,
        }
    }

    pub fn mean_ms(&self) -> Option<f64> {
        self.stats.mean_ms()
    }
}

pub const RESULT_COLUMNS: [&str; 14] = [
    "experiment",
    "arch",
    "frs_count",
    "robots",
    "target",
    "resolution_mix",
    "lat_min_ms",
    "lat_mean_ms",
    "lat_median_ms",
    "lat_p95_ms",
    "lat_max_ms",
    "deadline_met_fraction",
    "samples",
    "seed",
];

fn fmt_ms(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

/// Result table as CSV, preceded by `#` metadata lines.
pub fn write_results(rows: &[ResultRow], seed: u64, config_hash: &str) -> String {
    let mut out = format!("# seed={seed}\n# config_hash={config_hash}\n# prng={PRNG_ALGORITHM}\n");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RESULT_COLUMNS).expect("in-memory write");
    for r in rows {
        let s = r.stats.summary;
        w.write_record([
            r.experiment.clone(),
            r.arch.clone(),
            r.frs_count.to_string(),
            r.robots.to_string(),
            fmt_ms(r.target_ms),
            r.resolution_mix.clone(),
            fmt_ms(s.map(|s| s.min_ms)),
            fmt_ms(s.map(|s| s.mean_ms)),
            fmt_ms(s.map(|s| s.median_ms)),
            fmt_ms(s.map(|s| s.p95_ms)),
            fmt_ms(s.map(|s| s.max_ms)),
            r.deadline_met_fraction
                .map(|f| format!("{f:.4}"))
                .unwrap_or_default(),
            r.stats.count.to_string(),
            r.seed.to_string(),
        ])
        .expect("in-memory write");
    }
    let body = w.into_inner().expect("in-memory flush");
    out.push_str(&String::from_utf8(body).expect("CSV of UTF-8 fields"));
    out
}

pub(crate) fn mean_of(out: &RunOutput, target: &str) -> Result<f64, String> {
    out.mean_ms(target)
        .ok_or_else(|| format!("no completed requests for {target}"))
}

pub(crate) fn region<'a>(
    cfg: &'a ExperimentConfig,
    name: &str,
) -> Result<&'a Region, ExperimentError> {
    cfg.regions
        .iter()
        .find(|r| r.name == name)
        .ok_or_else(|| ExperimentError::UnknownRegion(name.to_owned()))
}

pub(crate) fn metrics(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| ((*k).to_owned(), *v)).collect()
}

/// Robots spaced one meter apart on a row above `origin`.
pub(crate) fn robot_row(origin: Position, count: usize) -> Vec<Position> {
    (0..count)
        .map(|i| Position::new(origin.x + i as f64 + 1.0, origin.y + 5.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::summarize;

    #[test]
    fn region_one_way_halves_round_trip() {
        let r = Region::new("sydney", 32.19, 95.83, 405.8);
        assert_eq!(r.one_way(false), LatencyModel::Constant(47.915));
        assert_eq!(
            r.one_way(true),
            LatencyModel::Empirical {
                min_ms: 16.095,
                avg_ms: 47.915,
                max_ms: 202.9
            }
        );
    }

    #[test]
    fn csv_header_and_metadata() {
        let row = ResultRow {
            experiment: "ab".into(),
            arch: "fr".into(),
            frs_count: 1,
            robots: 1,
            target_ms: Some(8.58),
            resolution_mix: "frs_cache_hit=10".into(),
            stats: summarize(&[8.58; 10], 0),
            deadline_met_fraction: None,
            seed: 1,
        };
        let text = write_results(&[row], 1, "abcd");
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# seed=1");
        assert_eq!(lines[2], "# prng=xoshiro256++");
        assert_eq!(lines[3], RESULT_COLUMNS.join(","));
        assert_eq!(
            lines[4],
            "ab,fr,1,1,8.5800,frs_cache_hit=10,8.5800,8.5800,8.5800,8.5800,8.5800,,10,1"
        );
    }

    #[test]
    fn config_hash_tracks_inputs() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig {
            seed: 2,
            ..a.clone()
        };
        assert_eq!(a.config_hash("ab"), a.config_hash("ab"));
        assert_ne!(a.config_hash("ab"), b.config_hash("ab"));
        assert_ne!(a.config_hash("ab"), a.config_hash("c"));
        assert_eq!(a.config_hash("ab").len(), 16);
    }
}
