//! Robot-count sweep: a single FRS (architecture A), D2D between robots
//! (architecture B) and direct cloud access, for one to five robots.
//!
//! Every robot sends ten requests, one per second. The FRS has a single
//! server and answers from its cache, so the mean grows with the number of
//! robots through queueing; `stagger_ms` offsets each robot's first request
//! and sets how much of the service time overlaps. D2D requests are answered
//! by one peer robot whose internal lag is its service time. Cloud regions
//! have enough servers that five robots never queue.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{
    mean_of, metrics, region, robot_row, ExperimentConfig, ExperimentError, Region, ResultRow,
};
use super::{robot_sweep_cloud, Endpoints, ROBOT_SWEEP_D2D, ROBOT_SWEEP_FR};
use crate::calibrate::{calibrate, CalibrationTarget, Knob, Params};
use crate::engine::{run, run_requests};
use crate::model::{LatencyModel, LinkSpec, NodeId, NodeSpec, Position, Request};
use crate::routing::handover::HandoverConfig;
use crate::routing::RoutingPolicy;
use crate::scenario::Scenario;
use crate::workload::{generate_all, Phase, WorkloadSpec};

pub const ROBOT_COUNTS: [usize; 5] = [1, 2, 3, 4, 5];
const REQUESTS_PER_ROBOT: u32 = 10;
const INTERVAL_MS: f64 = 1000.0;
const ROBOT_FRS_MS: f64 = 1.0;
const D2D_LAG_MS: f64 = 2.0;
const D2D_RANGE_M: f64 = 10.0;
const CLOUD_SERVERS: u32 = 8;
const TOLERANCE: f64 = 0.001;

#[derive(Debug, Clone, PartialEq)]
pub struct AbParams {
    pub frs_service_ms: f64,
    pub fr_stagger_ms: f64,
    pub d2d_link_ms: f64,
    pub d2d_stagger_ms: f64,
    /// Cloud service time per region.
    pub cloud_service_ms: BTreeMap<String, f64>,
}

fn workload(stagger_ms: f64) -> WorkloadSpec {
    WorkloadSpec {
        phase: Phase::Stagger(stagger_ms),
        requests_per_robot: Some(REQUESTS_PER_ROBOT),
        ..WorkloadSpec::fixed("ab", INTERVAL_MS, 1e7)
    }
}

fn base(seed: u64, policy: RoutingPolicy, workloads: Vec<WorkloadSpec>) -> Scenario {
    Scenario {
        seed,
        duration_ms: 1e8,
        nodes: Vec::new(),
        links: Vec::new(),
        policy,
        workloads,
        surge: None,
        handover: HandoverConfig::default(),
        mobility: Vec::new(),
    }
}

/// One FRS with its upstream cloud region and `robots` robots in range.
fn fog_cell(
    s: &mut Scenario,
    robots: usize,
    frs_service_ms: f64,
    upstream: &Region,
    stochastic: bool,
) {
    s.nodes.push(
        NodeSpec::frs("frs", Position::new(0.0, 0.0), frs_service_ms, 1, 16, 50.0)
            .with_preload(["key-0"]),
    );
    s.nodes.push(NodeSpec::cloud(
        upstream.name.as_str(),
        100.0,
        CLOUD_SERVERS,
    ));
    s.links.push(LinkSpec::new(
        "frs",
        upstream.name.as_str(),
        upstream.one_way(stochastic),
    ));
    for (i, pos) in robot_row(Position::new(0.0, 0.0), robots)
        .into_iter()
        .enumerate()
    {
        let id = format!("r{i}");
        s.nodes.push(NodeSpec::robot(&id, pos));
        s.links.push(LinkSpec::new(
            &id,
            "frs",
            LatencyModel::Constant(ROBOT_FRS_MS),
        ));
    }
}

/// Architecture A: `robots` robots hitting one single-server FRS cache.
pub fn fr_scenario(
    robots: usize,
    frs_service_ms: f64,
    stagger_ms: f64,
    upstream: &Region,
    seed: u64,
) -> Scenario {
    let mut s = base(seed, RoutingPolicy::CaseA, vec![workload(stagger_ms)]);
    fog_cell(&mut s, robots, frs_service_ms, upstream, false);
    s
}

/// Architecture B: `robots` requesters plus the peer `holder` that already
/// holds the data.
pub fn d2d_scenario(
    robots: usize,
    frs_service_ms: f64,
    link_ms: f64,
    stagger_ms: f64,
    upstream: &Region,
    seed: u64,
) -> Scenario {
    let policy = RoutingPolicy::CaseB {
        d2d_range_m: D2D_RANGE_M,
        d2d_internal_lag_ms: D2D_LAG_MS,
    };
    let mut s = base(seed, policy, vec![workload(stagger_ms)]);
    fog_cell(&mut s, robots, frs_service_ms, upstream, false);
    s.nodes
        .push(NodeSpec::robot("holder", Position::new(0.0, 3.0)).with_preload(["key-0"]));
    s.links.push(LinkSpec::new(
        "holder",
        "frs",
        LatencyModel::Constant(ROBOT_FRS_MS),
    ));
    for i in 0..robots {
        s.links.push(LinkSpec::new(
            format!("r{i}"),
            "holder",
            LatencyModel::Constant(link_ms),
        ));
    }
    s
}

/// Requests of the D2D scenario: the holder itself issues none.
pub fn d2d_requests(s: &Scenario) -> Vec<Request> {
    let requesters: Vec<NodeId> = s
        .robots()
        .into_iter()
        .filter(|r| r.as_str() != "holder")
        .collect();
    generate_all(&s.workloads, &requesters, s.seed)
}

/// Cloud robotics baseline: every robot talks straight to `region`.
pub fn cloud_scenario(
    robots: usize,
    region: &Region,
    service_ms: f64,
    servers: u32,
    workload: WorkloadSpec,
    stochastic: bool,
    seed: u64,
) -> Scenario {
    let policy = RoutingPolicy::CloudDirect {
        region: NodeId::new(region.name.as_str()),
    };
    let mut s = base(seed, policy, vec![workload]);
    s.nodes
        .push(NodeSpec::cloud(region.name.as_str(), service_ms, servers));
    for i in 0..robots {
        let id = format!("r{i:03}");
        s.nodes
            .push(NodeSpec::robot(&id, Position::new(i as f64, 0.0)));
        s.links.push(LinkSpec::new(
            &id,
            region.name.as_str(),
            region.one_way(stochastic),
        ));
    }
    s
}

fn robot_sweep_cloud_workload() -> WorkloadSpec {
    WorkloadSpec {
        requests_per_robot: Some(REQUESTS_PER_ROBOT),
        ..WorkloadSpec::fixed("ab", INTERVAL_MS, 1e7)
    }
}

fn endpoint_targets(e: Endpoints) -> [CalibrationTarget; 2] {
    [
        CalibrationTarget::new("one", e.low_ms, TOLERANCE),
        CalibrationTarget::new("five", e.high_ms, TOLERANCE),
    ]
}

/// Fits FRS service time and stagger, the D2D link and stagger, and each
/// region's service time to the sweep endpoints.
pub fn calibrate_ab(cfg: &ExperimentConfig) -> Result<AbParams, ExperimentError> {
    let upstream = cfg
        .regions
        .first()
        .ok_or_else(|| ExperimentError::UnknownRegion("(none)".into()))?
        .clone();
    let seed = cfg.seed;

    let fr = calibrate(
        &endpoint_targets(ROBOT_SWEEP_FR),
        &[
            Knob::new("frs.service_time_ms", 0.0, 20.0, "one"),
            Knob::new("workload.stagger_ms", 0.0, 20.0, "five"),
        ],
        Params::new(),
        |p: &Params| {
            let one = run(&fr_scenario(
                1,
                p["frs.service_time_ms"],
                p["workload.stagger_ms"],
                &upstream,
                seed,
            ))
            .map_err(|e| e.to_string())?;
            let five = run(&fr_scenario(
                5,
                p["frs.service_time_ms"],
                p["workload.stagger_ms"],
                &upstream,
                seed,
            ))
            .map_err(|e| e.to_string())?;
            Ok(metrics(&[
                ("one", mean_of(&one, "all")?),
                ("five", mean_of(&five, "all")?),
            ]))
        },
    )
    .map_err(ExperimentError::calibration("FR"))?;
    let frs_service_ms = fr.params["frs.service_time_ms"];

    let d2d = calibrate(
        &endpoint_targets(ROBOT_SWEEP_D2D),
        &[
            Knob::new("d2d.link_ms", 0.0, 5.0, "one"),
            Knob::new("workload.stagger_ms", 0.0, 20.0, "five"),
        ],
        Params::new(),
        |p: &Params| {
            let mut m = Vec::new();
            for (label, n) in [("one", 1), ("five", 5)] {
                let s = d2d_scenario(
                    n,
                    frs_service_ms,
                    p["d2d.link_ms"],
                    p["workload.stagger_ms"],
                    &upstream,
                    seed,
                );
                let out = run_requests(&s, d2d_requests(&s)).map_err(|e| e.to_string())?;
                m.push((label, mean_of(&out, "d2d")?));
            }
            Ok(metrics(&m))
        },
    )
    .map_err(ExperimentError::calibration("D2D"))?;

    let mut cloud_service_ms = BTreeMap::new();
    for r in &cfg.regions {
        let e = robot_sweep_cloud(&r.name)
            .ok_or_else(|| ExperimentError::UnknownRegion(r.name.clone()))?;
        let fit = calibrate(
            &[CalibrationTarget::new("one", e.low_ms, TOLERANCE)],
            &[Knob::new("cloud.service_time_ms", 0.0, 2000.0, "one")],
            Params::new(),
            |p: &Params| {
                let s = cloud_scenario(
                    1,
                    r,
                    p["cloud.service_time_ms"],
                    CLOUD_SERVERS,
                    robot_sweep_cloud_workload(),
                    false,
                    seed,
                );
                let out = run(&s).map_err(|e| e.to_string())?;
                Ok(metrics(&[("one", mean_of(&out, "all")?)]))
            },
        )
        .map_err(ExperimentError::calibration(format!("cloud {}", r.name)))?;
        cloud_service_ms.insert(r.name.clone(), fit.params["cloud.service_time_ms"]);
    }

    Ok(AbParams {
        frs_service_ms,
        fr_stagger_ms: fr.params["workload.stagger_ms"],
        d2d_link_ms: d2d.params["d2d.link_ms"],
        d2d_stagger_ms: d2d.params["workload.stagger_ms"],
        cloud_service_ms,
    })
}

#[derive(Debug, Clone)]
enum Arch {
    Fr,
    D2d,
    Cloud(Region),
}

/// Runs the sweep for every robot count and architecture.
pub fn run_experiment_ab(
    cfg: &ExperimentConfig,
    params: &AbParams,
) -> Result<Vec<ResultRow>, ExperimentError> {
    let upstream = cfg
        .regions
        .first()
        .ok_or_else(|| ExperimentError::UnknownRegion("(none)".into()))?;
    let mut archs = vec![Arch::Fr, Arch::D2d];
    for r in &cfg.regions {
        archs.push(Arch::Cloud(region(cfg, &r.name)?.clone()));
    }
    let points: Vec<(Arch, usize)> = archs
        .iter()
        .flat_map(|a| ROBOT_COUNTS.iter().map(move |&n| (a.clone(), n)))
        .collect();
    let endpoint = |e: Endpoints, n: usize| match n {
        1 => Some(e.low_ms),
        5 => Some(e.high_ms),
        _ => None,
    };
    points
        .par_iter()
        .map(|(arch, n)| {
            let seed = cfg.seed;
            let row = match arch {
                Arch::Fr => {
                    let s = fr_scenario(
                        *n,
                        params.frs_service_ms,
                        params.fr_stagger_ms,
                        upstream,
                        seed,
                    );
                    ResultRow::from_run(
                        "ab",
                        "fr",
                        1,
                        *n,
                        endpoint(ROBOT_SWEEP_FR, *n),
                        &run(&s)?,
                        seed,
                    )
                }
                Arch::D2d => {
                    let s = d2d_scenario(
                        *n,
                        params.frs_service_ms,
                        params.d2d_link_ms,
                        params.d2d_stagger_ms,
                        upstream,
                        seed,
                    );
                    let out = run_requests(&s, d2d_requests(&s))?;
                    ResultRow::from_run(
                        "ab",
                        "d2d",
                        1,
                        *n,
                        endpoint(ROBOT_SWEEP_D2D, *n),
                        &out,
                        seed,
                    )
                }
                Arch::Cloud(r) => {
                    let service = params
                        .cloud_service_ms
                        .get(&r.name)
                        .copied()
                        .unwrap_or_default();
                    let s = cloud_scenario(
                        *n,
                        r,
                        service,
                        CLOUD_SERVERS,
                        robot_sweep_cloud_workload(),
                        cfg.stochastic,
                        seed,
                    );
                    let target = robot_sweep_cloud(&r.name).and_then(|e| endpoint(e, *n));
                    ResultRow::from_run(
                        "ab",
                        &format!("cloud:{}", r.name),
                        0,
                        *n,
                        target,
                        &run(&s)?,
                        seed,
                    )
                }
            };
            Ok(row)
        })
        .collect()
}
