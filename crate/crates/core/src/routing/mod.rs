//! Route planning for the three fog-robotics architectures.
//!
//! * Case A: a single FRS answers from its cache, or fetches from the cloud.
//! * Case B: as Case A, but a nearby peer robot that already holds the data
//!   answers directly over a D2D link.
//! * Case C: several FRS; on a local miss the FRS asks its one-hop adjacent
//!   FRS before going to the cloud.
//!
//! `CloudDirect` is the cloud-robotics baseline: robots talk to one cloud
//! region with no fog tier.
//!
//! Planning is pure over [`SystemState`]; [`commit_plan`] applies the
//! read-through cache side effects afterwards.

pub mod cache;
pub mod handover;
pub mod surge;

use std::collections::{BTreeMap, BTreeSet};

use crate::error::RoutingError;
use crate::model::{NodeId, Request, Role};
use crate::topology::Topology;

pub use cache::LruCache;

#[derive(Debug, Clone, PartialEq)]
pub enum RoutingPolicy {
    CaseA,
    CaseB {
        d2d_range_m: f64,
        d2d_internal_lag_ms: f64,
    },
    CaseC {
        adjacency: Vec<(NodeId, NodeId)>,
    },
    CloudDirect {
        region: NodeId,
    },
}

impl RoutingPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            RoutingPolicy::CaseA => "case_a",
            RoutingPolicy::CaseB { .. } => "case_b",
            RoutingPolicy::CaseC { .. } => "case_c",
            RoutingPolicy::CloudDirect { .. } => "cloud_direct",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Resolution {
    FrsCacheHit,
    AdjacentFrsHit,
    CloudFetch,
    D2D,
}

impl Resolution {
    pub const ALL: [Resolution; 4] = [
        Resolution::FrsCacheHit,
        Resolution::AdjacentFrsHit,
        Resolution::CloudFetch,
        Resolution::D2D,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Resolution::FrsCacheHit => "frs_cache_hit",
            Resolution::AdjacentFrsHit => "adjacent_frs_hit",
            Resolution::CloudFetch => "cloud_fetch",
            Resolution::D2D => "d2d",
        }
    }

    pub fn parse(s: &str) -> Option<Resolution> {
        Resolution::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Hop {
        from: NodeId,
        to: NodeId,
        bytes: u64,
    },
    Serve(NodeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutePlan {
    pub steps: Vec<Step>,
    pub resolution: Resolution,
}

impl RoutePlan {
    pub fn hops(&self) -> impl Iterator<Item = (&NodeId, &NodeId, u64)> {
        self.steps.iter().filter_map(|s| match s {
            Step::Hop { from, to, bytes } => Some((from, to, *bytes)),
            Step::Serve(_) => None,
        })
    }

    pub fn serving_nodes(&self) -> Vec<&NodeId> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                Step::Serve(n) => Some(n),
                Step::Hop { .. } => None,
            })
            .collect()
    }

    /// Node sequence visited: origin, then the head of every hop.
    pub fn walk(&self) -> Vec<&NodeId> {
        let mut out = Vec::new();
        for (from, to, _) in self.hops() {
            if out.is_empty() {
                out.push(from);
            }
            out.push(to);
        }
        out
    }
}

/// Mutable routing view: current topology, robot attachments, caches.
#[derive(Debug, Clone)]
pub struct SystemState {
    pub topology: Topology,
    /// Fog node each robot currently sends to, indexed by node.
    pub assignment: Vec<Option<usize>>,
    pub caches: Vec<Option<LruCache>>,
    /// Keys each robot already holds (D2D sources).
    pub holdings: Vec<BTreeSet<String>>,
    /// Undirected FRS adjacency, stored with the smaller index first.
    pub adjacency: BTreeSet<(usize, usize)>,
    /// Parent fog node to spawned Sub-FRS.
    pub spawned: BTreeMap<usize, usize>,
}

fn pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl SystemState {
    /// Preloads caches and robot holdings and attaches every robot to its
    /// nearest covering fog node.
    pub fn new(topology: Topology, policy: &RoutingPolicy) -> Result<Self, RoutingError> {
        let n = topology.len();
        let mut caches = vec![None; n];
        let mut holdings = vec![BTreeSet::new(); n];
        for (i, node) in topology.nodes().iter().enumerate() {
            match node.role {
                Role::Frs | Role::SubFrs => {
                    let mut c = LruCache::new(node.cache_capacity);
                    for k in &node.preload {
                        c.put(k);
                    }
                    caches[i] = Some(c);
                }
                Role::Robot => holdings[i] = node.preload.iter().cloned().collect(),
                Role::CloudRegion => {}
            }
        }
        let mut adjacency = BTreeSet::new();
        if let RoutingPolicy::CaseC { adjacency: pairs } = policy {
            for (a, b) in pairs {
                let ia = topology
                    .idx(a)
                    .ok_or_else(|| RoutingError::UnknownNode(a.clone()))?;
                let ib = topology
                    .idx(b)
                    .ok_or_else(|| RoutingError::UnknownNode(b.clone()))?;
                adjacency.insert(pair(ia, ib));
            }
        }
        let mut state = SystemState {
            assignment: vec![None; n],
            caches,
            holdings,
            adjacency,
            spawned: BTreeMap::new(),
            topology,
        };
        let robots: Vec<usize> = state.topology.robots().collect();
        for r in robots {
            let pos = state.topology.node(r).position;
            let f = pos.and_then(|p| state.topology.nearest_covering(&p));
            match f {
                Some((f, _)) => state.assignment[r] = Some(f),
                None if matches!(policy, RoutingPolicy::CloudDirect { .. }) => {}
                None => return Err(RoutingError::Uncovered(state.topology.node(r).id.clone())),
            }
        }
        Ok(state)
    }

    pub fn id(&self, i: usize) -> &NodeId {
        &self.topology.node(i).id
    }

    pub fn adjacent(&self, fog: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .adjacency
            .iter()
            .filter_map(|&(a, b)| {
                if a == fog {
                    Some(b)
                } else if b == fog {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_by(|&x, &y| self.id(x).cmp(self.id(y)));
        out
    }

    fn cache_holds(&self, fog: usize, key: &str) -> bool {
        self.caches[fog].as_ref().is_some_and(|c| c.contains(key))
    }

    fn require_link(&self, a: usize, b: usize) -> Result<(), RoutingError> {
        if self.topology.link(a, b).is_some() {
            Ok(())
        } else {
            Err(RoutingError::MissingLink(
                self.id(a).clone(),
                self.id(b).clone(),
            ))
        }
    }
}

fn hop(state: &SystemState, from: usize, to: usize, bytes: u64) -> Step {
    Step::Hop {
        from: state.id(from).clone(),
        to: state.id(to).clone(),
        bytes,
    }
}

/// Nearest linked peer strictly inside `range` that already holds `key`.
fn d2d_peer(state: &SystemState, robot: usize, key: &str, range: f64) -> Option<usize> {
    let pos = state.topology.node(robot).position?;
    state
        .topology
        .robots()
        .filter(|&p| p != robot && state.holdings[p].contains(key))
        .filter(|&p| state.topology.link(robot, p).is_some())
        .filter_map(|p| {
            let d = state.topology.node(p).position?.distance(&pos);
            (d < range).then_some((p, d))
        })
        .min_by(|a, b| {
            a.1.total_cmp(&b.1)
                .then_with(|| state.id(a.0).cmp(state.id(b.0)))
        })
        .map(|(p, _)| p)
}

/// Plans the closed walk that answers `request` under `policy`.
pub fn plan_route(
    request: &Request,
    state: &SystemState,
    policy: &RoutingPolicy,
) -> Result<RoutePlan, RoutingError> {
    let robot = state
        .topology
        .idx(&request.origin)
        .ok_or_else(|| RoutingError::UnknownNode(request.origin.clone()))?;
    let (up, down) = (request.request_bytes, request.response_bytes);
    let key = request.data_key.as_str();

    if let RoutingPolicy::CloudDirect { region } = policy {
        let c = state
            .topology
            .idx(region)
            .ok_or_else(|| RoutingError::UnknownNode(region.clone()))?;
        state.require_link(robot, c)?;
        return Ok(RoutePlan {
            steps: vec![
                hop(state, robot, c, up),
                Step::Serve(region.clone()),
                hop(state, c, robot, down),
            ],
            resolution: Resolution::CloudFetch,
        });
    }

    if let RoutingPolicy::CaseB { d2d_range_m, .. } = policy {
        if let Some(peer) = d2d_peer(state, robot, key, *d2d_range_m) {
            return Ok(RoutePlan {
                steps: vec![
                    hop(state, robot, peer, up),
                    Step::Serve(state.id(peer).clone()),
                    hop(state, peer, robot, down),
                ],
                resolution: Resolution::D2D,
            });
        }
    }

    let frs =
        state.assignment[robot].ok_or_else(|| RoutingError::Uncovered(request.origin.clone()))?;
    state.require_link(robot, frs)?;
    let frs_id = state.id(frs).clone();

    if state.cache_holds(frs, key) {
        return Ok(RoutePlan {
            steps: vec![
                hop(state, robot, frs, up),
                Step::Serve(frs_id),
                hop(state, frs, robot, down),
            ],
            resolution: Resolution::FrsCacheHit,
        });
    }

    if matches!(policy, RoutingPolicy::CaseC { .. }) {
        let neighbor = state
            .adjacent(frs)
            .into_iter()
            .find(|&a| state.cache_holds(a, key) && state.topology.link(frs, a).is_some());
        if let Some(adj) = neighbor {
            return Ok(RoutePlan {
                steps: vec![
                    hop(state, robot, frs, up),
                    Step::Serve(frs_id),
                    hop(state, frs, adj, up),
                    Step::Serve(state.id(adj).clone()),
                    hop(state, adj, frs, down),
                    hop(state, frs, robot, down),
                ],
                resolution: Resolution::AdjacentFrsHit,
            });
        }
    }

    let cloud = state
        .topology
        .upstream_cloud(frs)
        .ok_or_else(|| RoutingError::NoUpstreamCloud(frs_id.clone()))?;
    Ok(RoutePlan {
        steps: vec![
            hop(state, robot, frs, up),
            Step::Serve(frs_id),
            hop(state, frs, cloud, up),
            Step::Serve(state.id(cloud).clone()),
            hop(state, cloud, frs, down),
            hop(state, frs, robot, down),
        ],
        resolution: Resolution::CloudFetch,
    })
}

/// Applies cache effects of a planned route: hits refresh recency, and
/// adjacent or cloud fetches populate the local FRS cache.
pub fn commit_plan(state: &mut SystemState, plan: &RoutePlan, key: &str) {
    let serving: Vec<usize> = plan
        .serving_nodes()
        .into_iter()
        .filter_map(|id| state.topology.idx(id))
        .collect();
    let Some(&first) = serving.first() else {
        return;
    };
    match plan.resolution {
        Resolution::FrsCacheHit => {
            if let Some(c) = state.caches[first].as_mut() {
                c.get(key);
            }
        }
        Resolution::AdjacentFrsHit => {
            if let Some(&adj) = serving.get(1) {
                if let Some(c) = state.caches[adj].as_mut() {
                    c.get(key);
                }
            }
            if let Some(c) = state.caches[first].as_mut() {
                c.put(key);
            }
        }
        Resolution::CloudFetch => {
            if let Some(c) = state.caches[first].as_mut() {
                c.put(key);
            }
        }
        Resolution::D2D => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LatencyModel, LinkSpec, NodeSpec, Position};

    fn request(origin: &str, key: &str) -> Request {
        Request {
            id: 0,
            origin: origin.into(),
            data_key: key.into(),
            request_bytes: 64,
            response_bytes: 128,
            issue_time_ms: 0.0,
            deadline_ms: None,
            class: "t".into(),
        }
    }

    fn c(ms: f64) -> LatencyModel {
        LatencyModel::Constant(ms)
    }

    /// Two FRS, three robots near frs1 and one near frs2.
    fn state(
        policy: &RoutingPolicy,
        frs1_keys: &[&str],
        frs2_keys: &[&str],
        peer_keys: &[&str],
    ) -> SystemState {
        let nodes = vec![
            NodeSpec::robot("r1", Position::new(0.0, 0.0)),
            NodeSpec::robot("r2", Position::new(3.0, 0.0)).with_preload(peer_keys.iter().copied()),
            NodeSpec::robot("r3", Position::new(200.0, 0.0)),
            NodeSpec::frs("frs1", Position::new(0.0, 10.0), 1.0, 1, 8, 50.0)
                .with_preload(frs1_keys.iter().copied()),
            NodeSpec::frs("frs2", Position::new(200.0, 10.0), 1.0, 1, 8, 50.0)
                .with_preload(frs2_keys.iter().copied()),
            NodeSpec::cloud("cloud", 5.0, 4),
        ];
        let links = vec![
            LinkSpec::new("r1", "frs1", c(1.0)),
            LinkSpec::new("r2", "frs1", c(1.0)),
            LinkSpec::new("r3", "frs2", c(1.0)),
            LinkSpec::new("r1", "r2", c(0.5)),
            LinkSpec::new("frs1", "frs2", c(2.0)),
            LinkSpec::new("frs1", "cloud", c(50.0)),
            LinkSpec::new("frs2", "cloud", c(50.0)),
            LinkSpec::new("r1", "cloud", c(60.0)),
        ];
        SystemState::new(Topology::new(&nodes, &links), policy).unwrap()
    }

    fn case_c() -> RoutingPolicy {
        RoutingPolicy::CaseC {
            adjacency: vec![("frs1".into(), "frs2".into())],
        }
    }

    #[test]
    fn case_a_hit_stays_local() {
        let s = state(&RoutingPolicy::CaseA, &["map"], &[], &[]);
        let p = plan_route(&request("r1", "map"), &s, &RoutingPolicy::CaseA).unwrap();
        assert_eq!(p.resolution, Resolution::FrsCacheHit);
        let walk: Vec<&str> = p.walk().iter().map(|n| n.as_str()).collect();
        assert_eq!(walk, ["r1", "frs1", "r1"]);
        assert_eq!(p.serving_nodes(), vec![&NodeId::from("frs1")]);
    }

    #[test]
    fn case_a_miss_goes_to_cloud_and_reads_through() {
        let mut s = state(&RoutingPolicy::CaseA, &[], &[], &[]);
        let req = request("r1", "map");
        let p = plan_route(&req, &s, &RoutingPolicy::CaseA).unwrap();
        assert_eq!(p.resolution, Resolution::CloudFetch);
        let walk: Vec<&str> = p.walk().iter().map(|n| n.as_str()).collect();
        assert_eq!(walk, ["r1", "frs1", "cloud", "frs1", "r1"]);
        commit_plan(&mut s, &p, "map");
        let again = plan_route(&req, &s, &RoutingPolicy::CaseA).unwrap();
        assert_eq!(again.resolution, Resolution::FrsCacheHit);
    }

    #[test]
    fn case_b_uses_nearby_peer() {
        let policy = RoutingPolicy::CaseB {
            d2d_range_m: 5.0,
            d2d_internal_lag_ms: 2.0,
        };
        let s = state(&policy, &["map"], &[], &["map"]);
        let p = plan_route(&request("r1", "map"), &s, &policy).unwrap();
        assert_eq!(p.resolution, Resolution::D2D);
        let walk: Vec<&str> = p.walk().iter().map(|n| n.as_str()).collect();
        assert_eq!(walk, ["r1", "r2", "r1"]);
    }

    #[test]
    fn case_b_out_of_range_falls_back() {
        let policy = RoutingPolicy::CaseB {
            d2d_range_m: 2.0,
            d2d_internal_lag_ms: 2.0,
        };
        let s = state(&policy, &["map"], &[], &["map"]);
        let p = plan_route(&request("r1", "map"), &s, &policy).unwrap();
        assert_eq!(p.resolution, Resolution::FrsCacheHit);
    }

    #[test]
    fn case_b_peer_must_already_hold_key() {
        let policy = RoutingPolicy::CaseB {
            d2d_range_m: 5.0,
            d2d_internal_lag_ms: 2.0,
        };
        let s = state(&policy, &[], &[], &["other"]);
        let p = plan_route(&request("r1", "map"), &s, &policy).unwrap();
        assert_eq!(p.resolution, Resolution::CloudFetch);
    }

    #[test]
    fn case_c_adjacent_hit_skips_cloud() {
        let policy = case_c();
        let mut s = state(&policy, &[], &["map"], &[]);
        let req = request("r1", "map");
        let p = plan_route(&req, &s, &policy).unwrap();
        assert_eq!(p.resolution, Resolution::AdjacentFrsHit);
        assert!(p.walk().iter().all(|n| n.as_str() != "cloud"));
        let walk: Vec<&str> = p.walk().iter().map(|n| n.as_str()).collect();
        assert_eq!(walk, ["r1", "frs1", "frs2", "frs1", "r1"]);
        commit_plan(&mut s, &p, "map");
        assert_eq!(
            plan_route(&req, &s, &policy).unwrap().resolution,
            Resolution::FrsCacheHit
        );
    }

    #[test]
    fn case_c_miss_everywhere_goes_to_cloud() {
        let policy = case_c();
        let s = state(&policy, &[], &[], &[]);
        assert_eq!(
            plan_route(&request("r3", "x"), &s, &policy)
                .unwrap()
                .resolution,
            Resolution::CloudFetch
        );
    }

    #[test]
    fn cloud_direct_bypasses_fog() {
        let policy = RoutingPolicy::CloudDirect {
            region: "cloud".into(),
        };
        let s = state(&policy, &["map"], &[], &[]);
        let p = plan_route(&request("r1", "map"), &s, &policy).unwrap();
        let walk: Vec<&str> = p.walk().iter().map(|n| n.as_str()).collect();
        assert_eq!(walk, ["r1", "cloud", "r1"]);
    }

    #[test]
    fn cloud_direct_without_link_errors() {
        let policy = RoutingPolicy::CloudDirect {
            region: "cloud".into(),
        };
        let s = state(&policy, &[], &[], &[]);
        assert!(matches!(
            plan_route(&request("r2", "map"), &s, &policy),
            Err(RoutingError::MissingLink(..))
        ));
    }
}
