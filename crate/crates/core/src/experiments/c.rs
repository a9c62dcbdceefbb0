//! FRS-count sweep: architecture C with 2 to 20 FRS of four robots each,
//! against every robot sending straight to one capacity-limited cloud
//! region.
//!
//! Each FRS has a server per robot, so the fog latency does not depend on
//! the FRS count. The cloud region's service time is fitted to the
//! two-FRS endpoint; its server count, and if that is not enough the
//! request interval, are fitted to the twenty-FRS endpoint.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{cloud_scenario, FRS_SWEEP_FR_MS};
use super::{
    frs_sweep_cloud, mean_of, metrics, robot_row, ExperimentConfig, ExperimentError, Region,
    ResultRow,
};
use crate::calibrate::{calibrate, CalibrationTarget, Knob, Params};
use crate::engine::run;
use crate::model::{LatencyModel, LinkSpec, NodeId, NodeSpec, Position};
use crate::routing::handover::HandoverConfig;
use crate::routing::RoutingPolicy;
use crate::scenario::Scenario;
use crate::workload::{Phase, WorkloadSpec};

pub const FRS_COUNTS: [usize; 5] = [2, 5, 10, 15, 20];
const ROBOTS_PER_FRS: usize = 4;
const FR_REQUESTS_PER_ROBOT: u32 = 10;
const CLOUD_REQUESTS_PER_ROBOT: u32 = 12;
const FRS_SPACING_M: f64 = 200.0;
const ADJACENT_FRS_MS: f64 = 2.0;
const TOLERANCE: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudFit {
    pub service_ms: f64,
    pub servers: u32,
    pub interval_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CParams {
    pub frs_service_ms: f64,
    pub cloud: BTreeMap<String, CloudFit>,
}

/// `frs_count` FRS in a line, each adjacent to its neighbours, with four
/// robots apiece and every request answered from the local cache.
pub fn fr_line_scenario(
    frs_count: usize,
    frs_service_ms: f64,
    upstream: &Region,
    seed: u64,
) -> Scenario {
    let mut nodes = vec![NodeSpec::cloud(upstream.name.as_str(), 100.0, 8)];
    let mut links = Vec::new();
    let mut adjacency = Vec::new();
    for j in 0..frs_count {
        let frs = format!("frs{j:02}");
        let origin = Position::new(j as f64 * FRS_SPACING_M, 0.0);
        nodes.push(
            NodeSpec::frs(
                &frs,
                origin,
                frs_service_ms,
                ROBOTS_PER_FRS as u32,
                16,
                50.0,
            )
            .with_preload(["key-0"]),
        );
        links.push(LinkSpec::new(
            &frs,
            upstream.name.as_str(),
            upstream.one_way(false),
        ));
        if j > 0 {
            let prev = format!("frs{:02}", j - 1);
            links.push(LinkSpec::new(
                &prev,
                &frs,
                LatencyModel::Constant(ADJACENT_FRS_MS),
            ));
            adjacency.push((NodeId::new(prev), NodeId::new(frs.as_str())));
        }
        for (k, pos) in robot_row(origin, ROBOTS_PER_FRS).into_iter().enumerate() {
            let id = format!("frs{j:02}-r{k}");
            nodes.push(NodeSpec::robot(&id, pos));
            links.push(LinkSpec::new(&id, &frs, LatencyModel::Constant(1.0)));
        }
    }
    Scenario {
        seed,
        duration_ms: 1e8,
        nodes,
        links,
        policy: RoutingPolicy::CaseC { adjacency },
        workloads: vec![WorkloadSpec {
            requests_per_robot: Some(FR_REQUESTS_PER_ROBOT),
            ..WorkloadSpec::fixed("c", 1000.0, 1e7)
        }],
        surge: None,
        handover: HandoverConfig::default(),
        mobility: Vec::new(),
    }
}

/// Requests from all robots spread evenly over one interval.
pub fn cloud_sweep_workload(interval_ms: f64) -> WorkloadSpec {
    WorkloadSpec {
        phase: Phase::Spread,
        requests_per_robot: Some(CLOUD_REQUESTS_PER_ROBOT),
        ..WorkloadSpec::fixed("c", interval_ms, 1e7)
    }
}

pub fn cloud_line_scenario(
    frs_count: usize,
    region: &Region,
    fit: &CloudFit,
    stochastic: bool,
    seed: u64,
) -> Scenario {
    cloud_scenario(
        frs_count * ROBOTS_PER_FRS,
        region,
        fit.service_ms,
        fit.servers,
        cloud_sweep_workload(fit.interval_ms),
        stochastic,
        seed,
    )
}

pub fn calibrate_c(cfg: &ExperimentConfig) -> Result<CParams, ExperimentError> {
    let upstream = cfg
        .regions
        .first()
        .ok_or_else(|| ExperimentError::UnknownRegion("(none)".into()))?
        .clone();
    let seed = cfg.seed;
    let fr = calibrate(
        &[CalibrationTarget::new("fr", FRS_SWEEP_FR_MS, TOLERANCE)],
        &[Knob::new("frs.service_time_ms", 0.0, 20.0, "fr")],
        Params::new(),
        |p: &Params| {
            let out = run(&fr_line_scenario(
                FRS_COUNTS[0],
                p["frs.service_time_ms"],
                &upstream,
                seed,
            ))
            .map_err(|e| e.to_string())?;
            Ok(metrics(&[("fr", mean_of(&out, "all")?)]))
        },
    )
    .map_err(ExperimentError::calibration("FR"))?;

    let mut cloud = BTreeMap::new();
    for r in &cfg.regions {
        let e = frs_sweep_cloud(&r.name)
            .ok_or_else(|| ExperimentError::UnknownRegion(r.name.clone()))?;
        let initial = Params::from([
            (
                "cloud.service_time_ms".to_owned(),
                (e.low_ms - r.rtt_avg_ms).max(0.0),
            ),
            ("cloud.parallel_servers".to_owned(), 64.0),
            ("workload.interval_ms".to_owned(), 100.0),
        ]);
        let fit_of = |p: &Params| CloudFit {
            service_ms: p["cloud.service_time_ms"],
            servers: p["cloud.parallel_servers"].round() as u32,
            interval_ms: p["workload.interval_ms"],
        };
        let fit = calibrate(
            &[
                CalibrationTarget::new("low", e.low_ms, TOLERANCE),
                CalibrationTarget::new("high", e.high_ms, TOLERANCE),
            ],
            &[
                Knob::new("cloud.service_time_ms", 0.0, 2000.0, "low"),
                Knob::new("cloud.parallel_servers", 1.0, 128.0, "high"),
                Knob::new("workload.interval_ms", 40.0, 400.0, "high"),
            ],
            initial,
            |p: &Params| {
                let fit = fit_of(p);
                let mut m = Vec::new();
                for (label, f) in [
                    ("low", FRS_COUNTS[0]),
                    ("high", FRS_COUNTS[FRS_COUNTS.len() - 1]),
                ] {
                    let out = run(&cloud_line_scenario(f, r, &fit, false, seed))
                        .map_err(|e| e.to_string())?;
                    m.push((label, mean_of(&out, "all")?));
                }
                Ok(metrics(&m))
            },
        )
        .map_err(ExperimentError::calibration(format!("cloud {}", r.name)))?;
        cloud.insert(r.name.clone(), fit_of(&fit.params));
    }
    Ok(CParams {
        frs_service_ms: fr.params["frs.service_time_ms"],
        cloud,
    })
}

pub fn run_experiment_c(
    cfg: &ExperimentConfig,
    params: &CParams,
) -> Result<Vec<ResultRow>, ExperimentError> {
    let upstream = cfg
        .regions
        .first()
        .ok_or_else(|| ExperimentError::UnknownRegion("(none)".into()))?;
    let mut archs: Vec<Option<&Region>> = vec![None];
    archs.extend(cfg.regions.iter().map(Some));
    let points: Vec<(Option<&Region>, usize)> = archs
        .iter()
        .flat_map(|a| FRS_COUNTS.iter().map(move |&f| (*a, f)))
        .collect();
    let last = FRS_COUNTS[FRS_COUNTS.len() - 1];
    points
        .par_iter()
        .map(|&(arch, f)| {
            let seed = cfg.seed;
            let robots = f * ROBOTS_PER_FRS;
            match arch {
                None => {
                    let out = run(&fr_line_scenario(f, params.frs_service_ms, upstream, seed))?;
                    Ok(ResultRow::from_run(
                        "c",
                        "fr",
                        f,
                        robots,
                        Some(FRS_SWEEP_FR_MS),
                        &out,
                        seed,
                    ))
                }
                Some(r) => {
                    let fit = params
                        .cloud
                        .get(&r.name)
                        .ok_or_else(|| ExperimentError::UnknownRegion(r.name.clone()))?;
                    let out = run(&cloud_line_scenario(f, r, fit, cfg.stochastic, seed))?;
                    let target = frs_sweep_cloud(&r.name).and_then(|e| match f {
                        x if x == FRS_COUNTS[0] => Some(e.low_ms),
                        x if x == last => Some(e.high_ms),
                        _ => None,
                    });
                    Ok(ResultRow::from_run(
                        "c",
                        &format!("cloud:{}", r.name),
                        f,
                        robots,
                        target,
                        &out,
                        seed,
                    ))
                }
            }
        })
        .collect()
}
