//! TOML scenario files.
//!
//! The schema is documented in `docs/config.md`. Parsing is two-phase: TOML
//! syntax first (first error, with its line), then a field-by-field pass
//! that collects every missing or invalid value before semantic validation.

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, ConfigIssue};
use crate::model::{Bandwidth, LatencyModel, LinkSpec, NodeId, NodeSpec, Position, Role};
use crate::routing::handover::HandoverConfig;
use crate::routing::surge::SurgeMonitor;
use crate::routing::RoutingPolicy;
use crate::scenario::{Mobility, Scenario, Waypoint};
use crate::workload::{Arrival, KeyDistribution, Phase, WorkloadSpec};

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    seed: Option<i64>,
    duration_ms: Option<f64>,
    policy: Option<RawPolicy>,
    handover: Option<RawHandover>,
    surge: Option<RawSurge>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    nodes: Vec<RawNode>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    links: Vec<RawLink>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    workloads: Vec<RawWorkload>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    mobility: Vec<RawMobility>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d2d_range_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d2d_internal_lag_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    adjacency: Option<Vec<[String; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    region: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHandover {
    hysteresis_m: Option<f64>,
    delay_ms: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSurge {
    window_ms: Option<f64>,
    threshold_rps: Option<f64>,
    reassignment_fraction: Option<f64>,
    parent_link_ms: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: Option<String>,
    role: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    position: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    service_time_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parallel_servers: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cache_capacity: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coverage_radius_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    preload: Vec<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    a: Option<String>,
    b: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    one_way_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    one_way_empirical_ms: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bandwidth_bytes_per_s: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWorkload {
    label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    interval_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate_rps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phase: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stagger_ms: Option<f64>,
    duration_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    requests_per_robot: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    key_universe: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    key_prefix: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hot_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hot_weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    request_bytes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    response_bytes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    deadline_ms: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMobility {
    robot: Option<String>,
    #[serde(default)]
    waypoints: Vec<RawWaypoint>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWaypoint {
    time_ms: f64,
    position: [f64; 2],
}

struct Collector {
    issues: Vec<ConfigIssue>,
}

impl Collector {
    fn missing(&mut self, field: String) {
        self.issues
            .push(ConfigIssue::validation(field, "missing required value"));
    }

    fn invalid(&mut self, field: String, reason: impl Into<String>) {
        self.issues.push(ConfigIssue::validation(field, reason));
    }

    fn req<T>(&mut self, v: Option<T>, field: impl FnOnce() -> String) -> Option<T> {
        if v.is_none() {
            self.missing(field());
        }
        v
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

/// Parses and validates a scenario file.
pub fn parse_config(text: &str) -> Result<Scenario, ConfigError> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(1, |s| line_of(text, s.start));
        ConfigError::single(ConfigIssue::Syntax {
            line,
            message: e.message().to_owned(),
        })
    })?;
    let mut c = Collector { issues: Vec::new() };
    let scenario = convert(raw, &mut c);
    match scenario {
        Some(s) if c.issues.is_empty() => {
            s.check()?;
            Ok(s)
        }
        _ => {
            if c.issues.is_empty() {
                c.invalid("config".into(), "incomplete scenario");
            }
            Err(ConfigError { issues: c.issues })
        }
    }
}

fn convert(raw: RawScenario, c: &mut Collector) -> Option<Scenario> {
    let seed = c.req(raw.seed, || "seed".into()).and_then(|s| {
        if s < 0 {
            c.invalid("seed".into(), "must be >= 0");
            None
        } else {
            Some(s as u64)
        }
    });
    let duration_ms = c.req(raw.duration_ms, || "duration_ms".into());
    let policy = match raw.policy {
        None => {
            c.missing("policy".into());
            None
        }
        Some(p) => convert_policy(p, c),
    };
    let nodes: Vec<Option<NodeSpec>> = raw
        .nodes
        .into_iter()
        .enumerate()
        .map(|(i, n)| convert_node(i, n, c))
        .collect();
    let links: Vec<Option<LinkSpec>> = raw
        .links
        .into_iter()
        .enumerate()
        .map(|(i, l)| convert_link(i, l, c))
        .collect();
    let workloads: Vec<Option<WorkloadSpec>> = raw
        .workloads
        .into_iter()
        .enumerate()
        .map(|(i, w)| convert_workload(i, w, c))
        .collect();
    let surge = raw.surge.map(|s| {
        Some(SurgeMonitor {
            window_ms: c.req(s.window_ms, || "surge.window_ms".into())?,
            threshold_rps: c.req(s.threshold_rps, || "surge.threshold_rps".into())?,
            reassignment_fraction: c.req(s.reassignment_fraction, || {
                "surge.reassignment_fraction".into()
            })?,
            parent_link: LatencyModel::Constant(s.parent_link_ms.unwrap_or(1.0)),
        })
    });
    let handover = raw.handover.map_or_else(HandoverConfig::default, |h| {
        let d = HandoverConfig::default();
        HandoverConfig {
            hysteresis_m: h.hysteresis_m.unwrap_or(d.hysteresis_m),
            delay_ms: h.delay_ms.unwrap_or(d.delay_ms),
        }
    });
    let mobility: Vec<Option<Mobility>> = raw
        .mobility
        .into_iter()
        .enumerate()
        .map(|(i, m)| {
            let robot = c.req(m.robot, || format!("mobility[{i}].robot"))?;
            Some(Mobility {
                robot: NodeId::new(robot),
                waypoints: m
                    .waypoints
                    .into_iter()
                    .map(|w| Waypoint {
                        time_ms: w.time_ms,
                        position: Position::new(w.position[0], w.position[1]),
                    })
                    .collect(),
            })
        })
        .collect();

    Some(Scenario {
        seed: seed?,
        duration_ms: duration_ms?,
        nodes: nodes.into_iter().collect::<Option<_>>()?,
        links: links.into_iter().collect::<Option<_>>()?,
        policy: policy?,
        workloads: workloads.into_iter().collect::<Option<_>>()?,
        surge: surge.map_or(Some(None), |s| s.map(Some))?,
        handover,
        mobility: mobility.into_iter().collect::<Option<_>>()?,
    })
}

fn convert_policy(p: RawPolicy, c: &mut Collector) -> Option<RoutingPolicy> {
    let kind = c.req(p.kind, || "policy.kind".into())?;
    match kind.as_str() {
        "case_a" => Some(RoutingPolicy::CaseA),
        "case_b" => {
            let range = c.req(p.d2d_range_m, || "policy.d2d_range_m".into());
            let lag = c.req(p.d2d_internal_lag_ms, || {
                "policy.d2d_internal_lag_ms".into()
            });
            Some(RoutingPolicy::CaseB {
                d2d_range_m: range?,
                d2d_internal_lag_ms: lag?,
            })
        }
        "case_c" => Some(RoutingPolicy::CaseC {
            adjacency: p
                .adjacency
                .unwrap_or_default()
                .into_iter()
                .map(|[a, b]| (NodeId::new(a), NodeId::new(b)))
                .collect(),
        }),
        "cloud_direct" => {
            let region = c.req(p.region, || "policy.region".into())?;
            Some(RoutingPolicy::CloudDirect {
                region: NodeId::new(region),
            })
        }
        other => {
            c.invalid("policy.kind".into(), format!("unknown policy {other:?}"));
            None
        }
    }
}

fn convert_node(i: usize, n: RawNode, c: &mut Collector) -> Option<NodeSpec> {
    let id = c.req(n.id, || format!("nodes[{i}].id"));
    let label = id.clone().unwrap_or_else(|| format!("[{i}]"));
    let role_s = c.req(n.role, || format!("nodes.{label}.role"))?;
    let Some(role) = Role::parse(&role_s) else {
        c.invalid(
            format!("nodes.{label}.role"),
            format!("unknown role {role_s:?}"),
        );
        return None;
    };
    let position = n.position.map(|[x, y]| Position::new(x, y));
    let (service_time_ms, parallel_servers) = if role.is_serving() {
        (
            c.req(n.service_time_ms, || {
                format!("nodes.{label}.service_time_ms")
            }),
            c.req(n.parallel_servers, || {
                format!("nodes.{label}.parallel_servers")
            }),
        )
    } else {
        if n.service_time_ms.is_some() || n.parallel_servers.is_some() {
            c.invalid(format!("nodes.{label}"), "robots have no service queue");
        }
        (Some(0.0), Some(0))
    };
    let (cache_capacity, coverage) = if role.is_fog() {
        (
            c.req(n.cache_capacity, || format!("nodes.{label}.cache_capacity")),
            c.req(n.coverage_radius_m, || {
                format!("nodes.{label}.coverage_radius_m")
            }),
        )
    } else {
        if n.cache_capacity.is_some() || n.coverage_radius_m.is_some() {
            c.invalid(
                format!("nodes.{label}"),
                "cache and coverage apply only to FRS nodes",
            );
        }
        (Some(0), Some(0.0))
    };
    Some(NodeSpec {
        id: NodeId::new(id?),
        role,
        position,
        service_time_ms: service_time_ms?,
        parallel_servers: parallel_servers?,
        cache_capacity: cache_capacity? as usize,
        coverage_radius_m: coverage?,
        preload: n.preload,
    })
}

fn convert_link(i: usize, l: RawLink, c: &mut Collector) -> Option<LinkSpec> {
    let a = c.req(l.a, || format!("links[{i}].a"));
    let b = c.req(l.b, || format!("links[{i}].b"));
    let one_way = match (l.one_way_ms, l.one_way_empirical_ms) {
        (Some(ms), None) => Some(LatencyModel::Constant(ms)),
        (None, Some([min_ms, avg_ms, max_ms])) => Some(LatencyModel::Empirical {
            min_ms,
            avg_ms,
            max_ms,
        }),
        (None, None) => {
            c.missing(format!("links[{i}].one_way_ms"));
            None
        }
        (Some(_), Some(_)) => {
            c.invalid(
                format!("links[{i}]"),
                "give one_way_ms or one_way_empirical_ms, not both",
            );
            None
        }
    };
    Some(LinkSpec {
        a: NodeId::new(a?),
        b: NodeId::new(b?),
        one_way: one_way?,
        bandwidth: l
            .bandwidth_bytes_per_s
            .map_or(Bandwidth::Unlimited, Bandwidth::BytesPerSec),
    })
}

fn convert_workload(i: usize, w: RawWorkload, c: &mut Collector) -> Option<WorkloadSpec> {
    let f = |name: &str| format!("workloads[{i}].{name}");
    let arrival = match (w.interval_ms, w.rate_rps) {
        (Some(interval_ms), None) => Some(Arrival::FixedInterval { interval_ms }),
        (None, Some(rate_rps)) => Some(Arrival::Poisson { rate_rps }),
        (None, None) => {
            c.missing(f("interval_ms"));
            None
        }
        (Some(_), Some(_)) => {
            c.invalid(f("arrival"), "give interval_ms or rate_rps, not both");
            None
        }
    };
    let phase = match (w.phase.as_deref(), w.stagger_ms) {
        (None | Some("aligned"), None) => Some(Phase::Aligned),
        (None | Some("stagger"), Some(ms)) => Some(Phase::Stagger(ms)),
        (Some("spread"), None) => Some(Phase::Spread),
        (Some(p), _) => {
            c.invalid(f("phase"), format!("unknown or conflicting phase {p:?}"));
            None
        }
    };
    let key_distribution = match (w.hot_fraction, w.hot_weight) {
        (None, None) => Some(KeyDistribution::Uniform),
        (Some(fraction_hot), Some(hot_weight)) => Some(KeyDistribution::Hot {
            fraction_hot,
            hot_weight,
        }),
        _ => {
            c.invalid(f("hot_fraction"), "hot_fraction and hot_weight go together");
            None
        }
    };
    let label = c.req(w.label, || f("label"));
    let duration_ms = c.req(w.duration_ms, || f("duration_ms"));
    Some(WorkloadSpec {
        label: label?,
        arrival: arrival?,
        phase: phase?,
        duration_ms: duration_ms?,
        requests_per_robot: w.requests_per_robot,
        key_universe: w.key_universe.unwrap_or(1),
        key_prefix: w.key_prefix.unwrap_or_else(|| "key-".into()),
        key_distribution: key_distribution?,
        request_bytes: w.request_bytes.unwrap_or(64),
        response_bytes: w.response_bytes.unwrap_or(64),
        deadline_ms: w.deadline_ms,
    })
}

/// Canonical TOML text for a scenario; `parse_config` of the result yields
/// an equal scenario.
pub fn serialize_config(s: &Scenario) -> String {
    let policy = match &s.policy {
        RoutingPolicy::CaseA => RawPolicy {
            kind: Some("case_a".into()),
            ..Default::default()
        },
        RoutingPolicy::CaseB {
            d2d_range_m,
            d2d_internal_lag_ms,
        } => RawPolicy {
            kind: Some("case_b".into()),
            d2d_range_m: Some(*d2d_range_m),
            d2d_internal_lag_ms: Some(*d2d_internal_lag_ms),
            ..Default::default()
        },
        RoutingPolicy::CaseC { adjacency } => RawPolicy {
            kind: Some("case_c".into()),
            adjacency: Some(
                adjacency
                    .iter()
                    .map(|(a, b)| [a.0.clone(), b.0.clone()])
                    .collect(),
            ),
            ..Default::default()
        },
        RoutingPolicy::CloudDirect { region } => RawPolicy {
            kind: Some("cloud_direct".into()),
            region: Some(region.0.clone()),
            ..Default::default()
        },
    };
    let raw = RawScenario {
        seed: Some(s.seed as i64),
        duration_ms: Some(s.duration_ms),
        policy: Some(policy),
        handover: Some(RawHandover {
            hysteresis_m: Some(s.handover.hysteresis_m),
            delay_ms: Some(s.handover.delay_ms),
        }),
        surge: s.surge.as_ref().map(|m| RawSurge {
            window_ms: Some(m.window_ms),
            threshold_rps: Some(m.threshold_rps),
            reassignment_fraction: Some(m.reassignment_fraction),
            parent_link_ms: Some(m.parent_link.min_ms()),
        }),
        nodes: s
            .nodes
            .iter()
            .map(|n| RawNode {
                id: Some(n.id.0.clone()),
                role: Some(n.role.as_str().into()),
                position: n.position.map(|p| [p.x, p.y]),
                service_time_ms: n.role.is_serving().then_some(n.service_time_ms),
                parallel_servers: n.role.is_serving().then_some(n.parallel_servers),
                cache_capacity: n.role.is_fog().then_some(n.cache_capacity as u32),
                coverage_radius_m: n.role.is_fog().then_some(n.coverage_radius_m),
                preload: n.preload.clone(),
            })
            .collect(),
        links: s
            .links
            .iter()
            .map(|l| {
                let (one_way_ms, one_way_empirical_ms) = match l.one_way {
                    LatencyModel::Constant(ms) => (Some(ms), None),
                    LatencyModel::Empirical {
                        min_ms,
                        avg_ms,
                        max_ms,
                    } => (None, Some([min_ms, avg_ms, max_ms])),
                };
                RawLink {
                    a: Some(l.a.0.clone()),
                    b: Some(l.b.0.clone()),
                    one_way_ms,
                    one_way_empirical_ms,
                    bandwidth_bytes_per_s: match l.bandwidth {
                        Bandwidth::Unlimited => None,
                        Bandwidth::BytesPerSec(b) => Some(b),
                    },
                }
            })
            .collect(),
        workloads: s
            .workloads
            .iter()
            .map(|w| {
                let (interval_ms, rate_rps) = match w.arrival {
                    Arrival::FixedInterval { interval_ms } => (Some(interval_ms), None),
                    Arrival::Poisson { rate_rps } => (None, Some(rate_rps)),
                };
                let (phase, stagger_ms) = match w.phase {
                    Phase::Aligned => (None, None),
                    Phase::Stagger(ms) => (None, Some(ms)),
                    Phase::Spread => (Some("spread".to_owned()), None),
                };
                let (hot_fraction, hot_weight) = match w.key_distribution {
                    KeyDistribution::Uniform => (None, None),
                    KeyDistribution::Hot {
                        fraction_hot,
                        hot_weight,
                    } => (Some(fraction_hot), Some(hot_weight)),
                };
                RawWorkload {
                    label: Some(w.label.clone()),
                    interval_ms,
                    rate_rps,
                    phase,
                    stagger_ms,
                    duration_ms: Some(w.duration_ms),
                    requests_per_robot: w.requests_per_robot,
                    key_universe: Some(w.key_universe),
                    key_prefix: Some(w.key_prefix.clone()),
                    hot_fraction,
                    hot_weight,
                    request_bytes: Some(w.request_bytes),
                    response_bytes: Some(w.response_bytes),
                    deadline_ms: w.deadline_ms,
                }
            })
            .collect(),
        mobility: s
            .mobility
            .iter()
            .map(|m| RawMobility {
                robot: Some(m.robot.0.clone()),
                waypoints: m
                    .waypoints
                    .iter()
                    .map(|w| RawWaypoint {
                        time_ms: w.time_ms,
                        position: [w.position.x, w.position.y],
                    })
                    .collect(),
            })
            .collect(),
    };
    toml::to_string(&raw).expect("scenario is always representable as TOML")
}
