//! Rescue robots in a burning building: three FRS along a corridor with
//! four robots each, sharing a map, looking for victims and streaming video.
//!
//! * `map`: map tiles with a large response, drawn mostly from a few hot
//!   keys because the robots build one map together.
//! * `victim`: small detection queries that are useless after 100 ms.
//! * `stream`: periodic video frames uploaded for analysis.

use super::{default_regions, ExperimentConfig, ExperimentError, Region, ResultRow};
use crate::engine::run;
use crate::model::{LatencyModel, LinkSpec, NodeId, NodeSpec, Position, Role};
use crate::routing::handover::HandoverConfig;
use crate::routing::RoutingPolicy;
use crate::scenario::Scenario;
use crate::workload::{Arrival, KeyDistribution, Phase, WorkloadSpec};

const FRS_COUNT: usize = 3;
const ROBOTS_PER_FRS: usize = 4;
const WIRELESS_BYTES_PER_S: f64 = 12.5e6;
const BACKHAUL_BYTES_PER_S: f64 = 2.5e6;
pub const VICTIM_DEADLINE_MS: f64 = 100.0;

fn workloads() -> Vec<WorkloadSpec> {
    let duration_ms = 60_000.0;
    vec![
        WorkloadSpec {
            label: "map".into(),
            arrival: Arrival::Poisson { rate_rps: 0.5 },
            phase: Phase::Aligned,
            duration_ms,
            requests_per_robot: None,
            key_universe: 20,
            key_prefix: "map-".into(),
            key_distribution: KeyDistribution::Hot {
                fraction_hot: 0.2,
                hot_weight: 0.8,
            },
            request_bytes: 256,
            response_bytes: 200_000,
            deadline_ms: None,
        },
        WorkloadSpec {
            label: "victim".into(),
            arrival: Arrival::Poisson { rate_rps: 2.0 },
            phase: Phase::Aligned,
            duration_ms,
            requests_per_robot: None,
            key_universe: 8,
            key_prefix: "victim-model-".into(),
            key_distribution: KeyDistribution::Uniform,
            request_bytes: 2_000,
            response_bytes: 128,
            deadline_ms: Some(VICTIM_DEADLINE_MS),
        },
        WorkloadSpec {
            label: "stream".into(),
            phase: Phase::Spread,
            key_universe: 1,
            key_prefix: "stream-".into(),
            request_bytes: 20_000,
            response_bytes: 64,
            ..WorkloadSpec::fixed("stream", 200.0, duration_ms)
        },
    ]
}

fn frs_id(j: usize) -> String {
    format!("frs{j}")
}

fn robot_positions() -> Vec<(String, usize, Position)> {
    let mut out = Vec::new();
    for j in 0..FRS_COUNT {
        for k in 0..ROBOTS_PER_FRS {
            let x = j as f64 * 100.0 + (k as f64 - 1.5) * 8.0;
            let y = if k % 2 == 0 { 6.0 } else { -6.0 };
            out.push((format!("robot{j}{k}"), j, Position::new(x, y)));
        }
    }
    out
}

/// Rescue workload under architecture C with a Sydney-class cloud behind
/// the FRS.
pub fn rescue_preset() -> Scenario {
    let cloud = default_regions()
        .into_iter()
        .next()
        .expect("default regions");
    let mut nodes = vec![NodeSpec::cloud(cloud.name.as_str(), 112.17, 8)];
    let mut links = Vec::new();
    let mut adjacency = Vec::new();
    for j in 0..FRS_COUNT {
        let id = frs_id(j);
        nodes.push(NodeSpec::frs(
            &id,
            Position::new(j as f64 * 100.0, 0.0),
            5.0,
            4,
            64,
            60.0,
        ));
        links.push(
            LinkSpec::new(&id, cloud.name.as_str(), cloud.one_way(false))
                .with_bandwidth(BACKHAUL_BYTES_PER_S),
        );
        if j > 0 {
            links.push(
                LinkSpec::new(frs_id(j - 1), &id, LatencyModel::Constant(2.0))
                    .with_bandwidth(125e6),
            );
            adjacency.push((NodeId::new(frs_id(j - 1)), NodeId::new(id.as_str())));
        }
    }
    for (id, j, pos) in robot_positions() {
        nodes.push(NodeSpec::robot(&id, pos));
        links.push(
            LinkSpec::new(&id, frs_id(j), LatencyModel::Constant(1.0))
                .with_bandwidth(WIRELESS_BYTES_PER_S),
        );
    }
    Scenario {
        seed: 2019,
        duration_ms: 70_000.0,
        nodes,
        links,
        policy: RoutingPolicy::CaseC { adjacency },
        workloads: workloads(),
        surge: None,
        handover: HandoverConfig::default(),
        mobility: Vec::new(),
    }
}

/// The same robots and workload sent straight to `region`.
pub fn rescue_cloud_baseline(region: &Region, service_ms: f64, servers: u32) -> Scenario {
    let preset = rescue_preset();
    let mut nodes = vec![NodeSpec::cloud(region.name.as_str(), service_ms, servers)];
    let mut links = Vec::new();
    for (id, _, pos) in robot_positions() {
        nodes.push(NodeSpec::robot(&id, pos));
        links.push(
            LinkSpec::new(&id, region.name.as_str(), region.one_way(false))
                .with_bandwidth(BACKHAUL_BYTES_PER_S),
        );
    }
    Scenario {
        nodes,
        links,
        policy: RoutingPolicy::CloudDirect {
            region: NodeId::new(region.name.as_str()),
        },
        ..preset
    }
}

/// Preloads every workload key into every FRS cache.
pub fn warm_caches(scenario: &mut Scenario) {
    let keys: Vec<String> = scenario
        .workloads
        .iter()
        .flat_map(|w| w.keys().collect::<Vec<_>>())
        .collect();
    for n in scenario
        .nodes
        .iter_mut()
        .filter(|n| n.role == Role::Frs || n.role == Role::SubFrs)
    {
        n.cache_capacity = n.cache_capacity.max(keys.len());
        n.preload = keys.clone();
    }
}

/// Runs the preset under fog routing and against the Sao Paulo-class cloud.
pub fn run_experiment_rescue(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, ExperimentError> {
    let mut fog = rescue_preset();
    fog.seed = cfg.seed;
    let far = cfg
        .regions
        .iter()
        .find(|r| r.name == "sao_paulo")
        .or(cfg.regions.last())
        .ok_or_else(|| ExperimentError::UnknownRegion("sao_paulo".into()))?;
    let mut cloud = rescue_cloud_baseline(far, 112.17, 8);
    cloud.seed = cfg.seed;
    let robots = FRS_COUNT * ROBOTS_PER_FRS;
    let fog_out = run(&fog)?;
    let cloud_out = run(&cloud)?;
    Ok(vec![
        ResultRow::from_run("rescue", "fr", FRS_COUNT, robots, None, &fog_out, cfg.seed),
        ResultRow::from_run(
            "rescue",
            &format!("cloud:{}", far.name),
            0,
            robots,
            None,
            &cloud_out,
            cfg.seed,
        ),
    ])
}
