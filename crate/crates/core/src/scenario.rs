//! A complete simulation input and its semantic validation.

use std::collections::BTreeSet;

use sha2::{Digest, Sha256};

use crate::error::{ConfigError, ConfigIssue};
use crate::model::{Bandwidth, LinkSpec, NodeId, NodeSpec, Position, Role};
use crate::routing::handover::HandoverConfig;
use crate::routing::surge::SurgeMonitor;
use crate::routing::RoutingPolicy;
use crate::topology::Topology;
use crate::workload::WorkloadSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub time_ms: f64,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mobility {
    pub robot: NodeId,
    pub waypoints: Vec<Waypoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub seed: u64,
    /// Simulation horizon; events after it are not executed.
    pub duration_ms: f64,
    pub nodes: Vec<NodeSpec>,
    pub links: Vec<LinkSpec>,
    pub policy: RoutingPolicy,
    pub workloads: Vec<WorkloadSpec>,
    pub surge: Option<SurgeMonitor>,
    pub handover: HandoverConfig,
    pub mobility: Vec<Mobility>,
}

impl Scenario {
    pub fn robots(&self) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|n| n.role == Role::Robot)
            .map(|n| n.id.clone())
            .collect()
    }

    pub fn node(&self, id: &str) -> Option<&NodeSpec> {
        self.nodes.iter().find(|n| n.id.as_str() == id)
    }

    pub fn node_mut(&mut self, id: &str) -> Option<&mut NodeSpec> {
        self.nodes.iter_mut().find(|n| n.id.as_str() == id)
    }

    /// First 16 hex digits of the SHA-256 of the canonical config text.
    pub fn config_hash(&self) -> String {
        let text = crate::config::serialize_config(self);
        let digest = Sha256::digest(text.as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        let issues = self.validate();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { issues })
        }
    }

    /// Collects every problem with the scenario.
    pub fn validate(&self) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        let mut push =
            |field: String, reason: String| issues.push(ConfigIssue::Validation { field, reason });

        if !(self.duration_ms.is_finite() && self.duration_ms >= 0.0) {
            push("duration_ms".into(), "must be finite and >= 0".into());
        }

        let mut seen = BTreeSet::new();
        for n in &self.nodes {
            let f = format!("nodes.{}", n.id);
            if !seen.insert(n.id.clone()) {
                push(f.clone(), "duplicate node id".into());
            }
            if n.id.as_str().is_empty() || n.id.as_str().contains(['/', ',', ';']) {
                push(
                    f.clone(),
                    "id must be non-empty and free of '/', ',' and ';'".into(),
                );
            }
            match n.position {
                Some(p) if !p.is_finite() => push(format!("{f}.position"), "must be finite".into()),
                None if n.role != Role::CloudRegion => {
                    push(format!("{f}.position"), "required for this role".into())
                }
                _ => {}
            }
            if n.role.is_serving() {
                if !(n.service_time_ms.is_finite() && n.service_time_ms >= 0.0) {
                    push(
                        format!("{f}.service_time_ms"),
                        "must be finite and >= 0".into(),
                    );
                }
                if n.parallel_servers < 1 {
                    push(format!("{f}.parallel_servers"), "must be >= 1".into());
                }
            }
            if n.role.is_fog() && !(n.coverage_radius_m.is_finite() && n.coverage_radius_m >= 0.0) {
                push(
                    format!("{f}.coverage_radius_m"),
                    "must be finite and >= 0".into(),
                );
            }
            if n.role == Role::CloudRegion && !n.preload.is_empty() {
                push(
                    format!("{f}.preload"),
                    "cloud regions hold every key implicitly".into(),
                );
            }
        }

        let role_of = |id: &NodeId| self.nodes.iter().find(|n| &n.id == id).map(|n| n.role);
        let mut link_pairs = BTreeSet::new();
        for (i, l) in self.links.iter().enumerate() {
            let f = format!("links[{i}]");
            for end in [&l.a, &l.b] {
                if role_of(end).is_none() {
                    push(f.clone(), format!("unknown node {end}"));
                }
            }
            if l.a == l.b {
                push(f.clone(), format!("self-loop on {}", l.a));
            }
            let key = if l.a <= l.b {
                (l.a.clone(), l.b.clone())
            } else {
                (l.b.clone(), l.a.clone())
            };
            if !link_pairs.insert(key) {
                push(f.clone(), format!("duplicate link {} - {}", l.a, l.b));
            }
            if let Err(e) = l.one_way.validate() {
                push(format!("{f}.one_way"), e);
            }
            if let Bandwidth::BytesPerSec(b) = l.bandwidth {
                if !(b.is_finite() && b > 0.0) {
                    push(format!("{f}.bandwidth_bytes_per_s"), "must be > 0".into());
                }
            }
        }

        match &self.policy {
            RoutingPolicy::CaseA => {}
            RoutingPolicy::CaseB {
                d2d_range_m,
                d2d_internal_lag_ms,
            } => {
                if !(d2d_range_m.is_finite() && *d2d_range_m >= 0.0) {
                    push(
                        "policy.d2d_range_m".into(),
                        "must be finite and >= 0".into(),
                    );
                }
                if !(d2d_internal_lag_ms.is_finite() && *d2d_internal_lag_ms >= 0.0) {
                    push(
                        "policy.d2d_internal_lag_ms".into(),
                        "must be finite and >= 0".into(),
                    );
                }
            }
            RoutingPolicy::CaseC { adjacency } => {
                for (a, b) in adjacency {
                    if a == b {
                        push("policy.adjacency".into(), format!("self-loop on {a}"));
                    }
                    for end in [a, b] {
                        match role_of(end) {
                            None => push("policy.adjacency".into(), format!("unknown node {end}")),
                            Some(r) if !r.is_fog() => {
                                push("policy.adjacency".into(), format!("{end} is not an FRS"))
                            }
                            _ => {}
                        }
                    }
                    if a != b && !self.links.iter().any(|l| l.connects(a, b)) {
                        push(
                            "policy.adjacency".into(),
                            format!("no link between adjacent {a} and {b}"),
                        );
                    }
                }
            }
            RoutingPolicy::CloudDirect { region } => match role_of(region) {
                None => push("policy.region".into(), format!("unknown node {region}")),
                Some(Role::CloudRegion) => {}
                Some(_) => push(
                    "policy.region".into(),
                    format!("{region} is not a cloud region"),
                ),
            },
        }

        for (i, w) in self.workloads.iter().enumerate() {
            for (field, reason) in w.validate(&format!("workloads[{i}]")) {
                push(field, reason);
            }
        }
        if let Some(s) = &self.surge {
            for (field, reason) in s.validate() {
                push(field.into(), reason);
            }
        }
        if !(self.handover.hysteresis_m.is_finite() && self.handover.hysteresis_m >= 0.0) {
            push(
                "handover.hysteresis_m".into(),
                "must be finite and >= 0".into(),
            );
        }
        if !(self.handover.delay_ms.is_finite() && self.handover.delay_ms >= 0.0) {
            push("handover.delay_ms".into(), "must be finite and >= 0".into());
        }
        for m in &self.mobility {
            let f = format!("mobility.{}", m.robot);
            if role_of(&m.robot) != Some(Role::Robot) {
                push(f.clone(), "not a robot".into());
            }
            let mut last = 0.0;
            for w in &m.waypoints {
                if !(w.time_ms.is_finite() && w.time_ms >= last) || !w.position.is_finite() {
                    push(
                        f.clone(),
                        "waypoints need finite positions and non-decreasing times >= 0".into(),
                    );
                    break;
                }
                last = w.time_ms;
            }
        }

        // Structural checks below need a consistent node table.
        if !issues.is_empty() {
            return issues;
        }
        self.check_reachability(&mut issues);
        issues
    }

    fn check_reachability(&self, issues: &mut Vec<ConfigIssue>) {
        let topo = Topology::new(&self.nodes, &self.links);
        let mut push =
            |field: String, reason: String| issues.push(ConfigIssue::Validation { field, reason });
        if let RoutingPolicy::CloudDirect { region } = &self.policy {
            let c = topo.idx(region).expect("validated");
            for r in topo.robots() {
                if topo.link(r, c).is_none() {
                    push(
                        "links".into(),
                        format!(
                            "robot {} has no link to cloud region {region}",
                            topo.node(r).id
                        ),
                    );
                }
            }
            return;
        }
        for f in topo.fog_nodes() {
            if topo.upstream_cloud(f).is_none() {
                push(
                    "links".into(),
                    format!("FRS {} has no link to a cloud region", topo.node(f).id),
                );
            }
        }
        for r in topo.robots() {
            let id = &topo.node(r).id;
            let pos = topo.node(r).position.expect("validated");
            match topo.nearest_covering(&pos) {
                None => push(
                    format!("nodes.{id}"),
                    format!("robot {id} is not covered by any FRS"),
                ),
                Some((f, _)) if topo.link(r, f).is_none() => push(
                    "links".into(),
                    format!("robot {id} has no link to its FRS {}", topo.node(f).id),
                ),
                _ => {}
            }
        }
        for m in &self.mobility {
            let r = topo.idx(&m.robot).expect("validated");
            for w in &m.waypoints {
                if let Some((f, _)) = topo.nearest_covering(&w.position) {
                    if topo.link(r, f).is_none() {
                        push(
                            "links".into(),
                            format!(
                                "robot {} moves into coverage of {} but has no link to it",
                                m.robot,
                                topo.node(f).id
                            ),
                        );
                    }
                }
            }
        }
    }
}
