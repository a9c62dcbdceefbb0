//! Random scenario layouts and independent oracles shared by the property
//! tests and the acceptance suite.
//!
//! The timeline oracle does not use the event queue: it routes every request
//! up front in issue order, then repeatedly advances whichever unfinished
//! request has the smallest ready time by one route step.

#![allow(dead_code)]

use fogsim_core::engine::{Outcome, RunOutput};
use fogsim_core::model::{LatencyModel, LinkSpec, NodeId, NodeSpec, Position, Request};
use fogsim_core::routing::handover::HandoverConfig;
use fogsim_core::routing::RoutingPolicy;
use fogsim_core::scenario::Scenario;
use rand::Rng;

pub const FRS_SPACING_M: f64 = 1000.0;
pub const COVERAGE_M: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub ms: f64,
    pub bytes_per_s: Option<f64>,
}

impl Link {
    fn delay(&self, bytes: u64) -> f64 {
        self.ms
            + self
                .bytes_per_s
                .map_or(0.0, |bps| 1000.0 * bytes as f64 / bps)
    }

    fn spec(&self, a: &str, b: &str) -> LinkSpec {
        let l = LinkSpec::new(a, b, LatencyModel::Constant(self.ms));
        match self.bytes_per_s {
            Some(bps) => l.with_bandwidth(bps),
            None => l,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    A,
    B { range_m: f64, lag_ms: f64 },
    C,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frs {
    pub service_ms: f64,
    pub servers: u32,
    pub cache_capacity: usize,
    pub preload: Vec<String>,
    pub cloud_link: Link,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Robot {
    pub frs: usize,
    pub position: Position,
    pub link: Link,
    pub holdings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Req {
    pub robot: usize,
    pub key: String,
    pub up: u64,
    pub down: u64,
    pub issue_ms: f64,
    pub deadline_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub policy: PolicyKind,
    pub cloud_service_ms: f64,
    pub cloud_servers: u32,
    pub frs: Vec<Frs>,
    /// Link between FRS j and j + 1; adjacency under policy C.
    pub chain: Vec<Link>,
    pub robots: Vec<Robot>,
    /// D2D links between robots, by robot index.
    pub d2d: Vec<(usize, usize, Link)>,
    pub requests: Vec<Req>,
}

#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub max_frs: usize,
    pub max_robots: usize,
    pub max_requests: usize,
    pub keys: usize,
    pub deadlines: bool,
    pub bandwidth: bool,
}

impl Limits {
    pub const SMALL: Limits = Limits {
        max_frs: 2,
        max_robots: 3,
        max_requests: 5,
        keys: 3,
        deadlines: true,
        bandwidth: false,
    };
    pub const MEDIUM: Limits = Limits {
        max_frs: 3,
        max_robots: 8,
        max_requests: 40,
        keys: 5,
        deadlines: true,
        bandwidth: true,
    };
}

fn key_list<R: Rng>(rng: &mut R, keys: usize) -> Vec<String> {
    (0..keys)
        .filter(|_| rng.random_bool(0.4))
        .map(key)
        .collect()
}

fn key(i: usize) -> String {
    format!("k{i}")
}

fn link<R: Rng>(rng: &mut R, lo: f64, hi: f64, bandwidth: bool) -> Link {
    let bytes_per_s = (bandwidth && rng.random_bool(0.5)).then(|| rng.random_range(1e5..1e7));
    Link {
        ms: rng.random_range(lo..hi),
        bytes_per_s,
    }
}

pub fn frs_id(j: usize) -> String {
    format!("frs{j}")
}

pub fn robot_id(i: usize) -> String {
    format!("r{i}")
}

pub const CLOUD_ID: &str = "cloud";

impl Layout {
    pub fn random<R: Rng>(rng: &mut R, lim: &Limits) -> Layout {
        let policy = match rng.random_range(0..3) {
            0 => PolicyKind::A,
            1 => PolicyKind::B {
                range_m: rng.random_range(5.0..80.0),
                lag_ms: rng.random_range(0.1..3.0),
            },
            _ => PolicyKind::C,
        };
        let frs_count = rng.random_range(1..=lim.max_frs);
        let frs = (0..frs_count)
            .map(|_| Frs {
                service_ms: rng.random_range(0.5..10.0),
                servers: rng.random_range(1..=3),
                cache_capacity: rng.random_range(1..=3),
                preload: key_list(rng, lim.keys),
                cloud_link: link(rng, 10.0, 60.0, lim.bandwidth),
            })
            .collect();
        let chain = (1..frs_count)
            .map(|_| link(rng, 1.0, 5.0, lim.bandwidth))
            .collect();
        let robot_count = rng.random_range(1..=lim.max_robots);
        let robots: Vec<Robot> = (0..robot_count)
            .map(|_| {
                let j = rng.random_range(0..frs_count);
                let position = Position::new(
                    j as f64 * FRS_SPACING_M + rng.random_range(-30.0..30.0),
                    rng.random_range(-30.0..30.0),
                );
                Robot {
                    frs: j,
                    position,
                    link: link(rng, 0.2, 3.0, lim.bandwidth),
                    holdings: key_list(rng, lim.keys),
                }
            })
            .collect();
        let mut d2d = Vec::new();
        for a in 0..robot_count {
            for b in a + 1..robot_count {
                if rng.random_bool(0.7) {
                    d2d.push((a, b, link(rng, 0.1, 1.0, lim.bandwidth)));
                }
            }
        }
        let request_count = rng.random_range(1..=lim.max_requests);
        let requests = (0..request_count)
            .map(|_| Req {
                robot: rng.random_range(0..robot_count),
                key: key(rng.random_range(0..lim.keys)),
                up: rng.random_range(16..4096),
                down: rng.random_range(16..4096),
                issue_ms: rng.random_range(0.0..200.0),
                deadline_ms: (lim.deadlines && rng.random_bool(0.3))
                    .then(|| rng.random_range(5.0..150.0)),
            })
            .collect();
        Layout {
            policy,
            cloud_service_ms: rng.random_range(5.0..50.0),
            cloud_servers: rng.random_range(1..=3),
            frs,
            chain,
            robots,
            d2d,
            requests,
        }
    }

    pub fn routing_policy(&self) -> RoutingPolicy {
        match self.policy {
            PolicyKind::A => RoutingPolicy::CaseA,
            PolicyKind::B { range_m, lag_ms } => RoutingPolicy::CaseB {
                d2d_range_m: range_m,
                d2d_internal_lag_ms: lag_ms,
            },
            PolicyKind::C => RoutingPolicy::CaseC {
                adjacency: (1..self.frs.len())
                    .map(|j| (NodeId::new(frs_id(j - 1)), NodeId::new(frs_id(j))))
                    .collect(),
            },
        }
    }

    pub fn scenario(&self) -> Scenario {
        let mut nodes = vec![NodeSpec::cloud(
            CLOUD_ID,
            self.cloud_service_ms,
            self.cloud_servers,
        )];
        let mut links = Vec::new();
        for (j, f) in self.frs.iter().enumerate() {
            let pos = Position::new(j as f64 * FRS_SPACING_M, 0.0);
            nodes.push(
                NodeSpec::frs(
                    frs_id(j),
                    pos,
                    f.service_ms,
                    f.servers,
                    f.cache_capacity,
                    COVERAGE_M,
                )
                .with_preload(f.preload.iter().cloned()),
            );
            links.push(f.cloud_link.spec(&frs_id(j), CLOUD_ID));
        }
        for (j, l) in self.chain.iter().enumerate() {
            links.push(l.spec(&frs_id(j), &frs_id(j + 1)));
        }
        for (i, r) in self.robots.iter().enumerate() {
            nodes.push(
                NodeSpec::robot(robot_id(i), r.position).with_preload(r.holdings.iter().cloned()),
            );
            links.push(r.link.spec(&robot_id(i), &frs_id(r.frs)));
        }
        for (a, b, l) in &self.d2d {
            links.push(l.spec(&robot_id(*a), &robot_id(*b)));
        }
        Scenario {
            seed: 1,
            duration_ms: 1e9,
            nodes,
            links,
            policy: self.routing_policy(),
            workloads: Vec::new(),
            surge: None,
            handover: HandoverConfig::default(),
            mobility: Vec::new(),
        }
    }

    pub fn requests(&self) -> Vec<Request> {
        self.requests
            .iter()
            .enumerate()
            .map(|(i, r)| Request {
                id: i as u64,
                origin: NodeId::new(robot_id(r.robot)),
                data_key: r.key.clone(),
                request_bytes: r.up,
                response_bytes: r.down,
                issue_time_ms: r.issue_ms,
                deadline_ms: r.deadline_ms,
                class: "random".into(),
            })
            .collect()
    }

    /// Same layout with every link latency and issue time multiplied by `k`,
    /// zero service times and unlimited bandwidth.
    pub fn scaled_without_service(&self, k: f64) -> Layout {
        let scale = |l: &Link| Link {
            ms: l.ms * k,
            bytes_per_s: None,
        };
        let mut out = self.clone();
        out.policy = match self.policy {
            PolicyKind::B { range_m, .. } => PolicyKind::B {
                range_m,
                lag_ms: 0.0,
            },
            p => p,
        };
        out.cloud_service_ms = 0.0;
        for f in &mut out.frs {
            f.service_ms = 0.0;
            f.cloud_link = scale(&f.cloud_link);
        }
        out.chain = self.chain.iter().map(scale).collect();
        for r in &mut out.robots {
            r.link = scale(&r.link);
        }
        out.d2d = self
            .d2d
            .iter()
            .map(|(a, b, l)| (*a, *b, scale(l)))
            .collect();
        for r in &mut out.requests {
            r.issue_ms *= k;
            r.deadline_ms = None;
        }
        out
    }
}

/// Brute-force LRU: a list ordered from least to most recently used.
#[derive(Debug, Clone, Default)]
pub struct RecencyList {
    pub capacity: usize,
    pub keys: Vec<String>,
}

impl RecencyList {
    pub fn new(capacity: usize) -> Self {
        RecencyList {
            capacity,
            keys: Vec::new(),
        }
    }

    pub fn get(&mut self, key: &str) -> bool {
        match self.keys.iter().position(|k| k == key) {
            Some(i) => {
                let k = self.keys.remove(i);
                self.keys.push(k);
                true
            }
            None => false,
        }
    }

    pub fn put(&mut self, key: &str) -> Option<String> {
        if self.capacity == 0 || self.get(key) {
            return None;
        }
        let evicted = (self.keys.len() == self.capacity).then(|| self.keys.remove(0));
        self.keys.push(key.to_owned());
        evicted
    }

    pub fn contains(&self, key: &str) -> bool {
        self.keys.iter().any(|k| k == key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Node {
    Cloud,
    Frs(usize),
    Robot(usize),
}

impl Node {
    fn id(self) -> String {
        match self {
            Node::Cloud => CLOUD_ID.to_owned(),
            Node::Frs(j) => frs_id(j),
            Node::Robot(i) => robot_id(i),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum OStep {
    Hop(f64),
    Serve(Node),
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome {
    Completed(f64),
    Dropped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRecord {
    pub route: Vec<String>,
    pub resolution: &'static str,
    pub outcome: OracleOutcome,
}

fn d2d_link(layout: &Layout, a: usize, b: usize) -> Option<Link> {
    layout
        .d2d
        .iter()
        .find(|(x, y, _)| (*x, *y) == (a.min(b), a.max(b)))
        .map(|t| t.2)
}

fn chain_link(layout: &Layout, a: usize, b: usize) -> Link {
    layout.chain[a.min(b)]
}

/// Routes and times every request of `layout` without the event queue.
pub fn oracle(layout: &Layout) -> Vec<OracleRecord> {
    let mut caches: Vec<RecencyList> = layout
        .frs
        .iter()
        .map(|f| {
            let mut c = RecencyList::new(f.cache_capacity);
            for k in &f.preload {
                c.put(k);
            }
            c
        })
        .collect();
    let mut order: Vec<usize> = (0..layout.requests.len()).collect();
    order.sort_by(|&a, &b| {
        layout.requests[a]
            .issue_ms
            .total_cmp(&layout.requests[b].issue_ms)
            .then(a.cmp(&b))
    });

    let mut plans: Vec<(Vec<Node>, &'static str, Vec<OStep>)> =
        vec![(Vec::new(), "", Vec::new()); order.len()];
    for &i in &order {
        let q = &layout.requests[i];
        let robot = &layout.robots[q.robot];
        let me = Node::Robot(q.robot);
        if let PolicyKind::B { range_m, .. } = layout.policy {
            let peer = (0..layout.robots.len())
                .filter(|&p| p != q.robot && layout.robots[p].holdings.contains(&q.key))
                .filter_map(|p| {
                    let l = d2d_link(layout, q.robot, p)?;
                    let d = layout.robots[p].position.distance(&robot.position);
                    (d < range_m).then_some((p, d, l))
                })
                .min_by(|a, b| {
                    a.1.total_cmp(&b.1)
                        .then_with(|| robot_id(a.0).cmp(&robot_id(b.0)))
                });
            if let Some((p, _, l)) = peer {
                plans[i] = (
                    vec![me, Node::Robot(p), me],
                    "d2d",
                    vec![
                        OStep::Hop(l.delay(q.up)),
                        OStep::Serve(Node::Robot(p)),
                        OStep::Hop(l.delay(q.down)),
                    ],
                );
                continue;
            }
        }
        let f = robot.frs;
        let up = robot.link.delay(q.up);
        let down = robot.link.delay(q.down);
        if caches[f].contains(&q.key) {
            caches[f].get(&q.key);
            plans[i] = (
                vec![me, Node::Frs(f), me],
                "frs_cache_hit",
                vec![OStep::Hop(up), OStep::Serve(Node::Frs(f)), OStep::Hop(down)],
            );
            continue;
        }
        if layout.policy == PolicyKind::C {
            let mut neighbours: Vec<usize> = [
                f.checked_sub(1),
                (f + 1 < layout.frs.len()).then_some(f + 1),
            ]
            .into_iter()
            .flatten()
            .collect();
            neighbours.sort_by_key(|&a| frs_id(a));
            if let Some(a) = neighbours.into_iter().find(|&a| caches[a].contains(&q.key)) {
                caches[a].get(&q.key);
                caches[f].put(&q.key);
                let l = chain_link(layout, f, a);
                plans[i] = (
                    vec![me, Node::Frs(f), Node::Frs(a), Node::Frs(f), me],
                    "adjacent_frs_hit",
                    vec![
                        OStep::Hop(up),
                        OStep::Serve(Node::Frs(f)),
                        OStep::Hop(l.delay(q.up)),
                        OStep::Serve(Node::Frs(a)),
                        OStep::Hop(l.delay(q.down)),
                        OStep::Hop(down),
                    ],
                );
                continue;
            }
        }
        caches[f].put(&q.key);
        let l = layout.frs[f].cloud_link;
        plans[i] = (
            vec![me, Node::Frs(f), Node::Cloud, Node::Frs(f), me],
            "cloud_fetch",
            vec![
                OStep::Hop(up),
                OStep::Serve(Node::Frs(f)),
                OStep::Hop(l.delay(q.up)),
                OStep::Serve(Node::Cloud),
                OStep::Hop(l.delay(q.down)),
                OStep::Hop(down),
            ],
        );
    }

    let service = |n: Node| match (n, layout.policy) {
        (Node::Cloud, _) => (layout.cloud_service_ms, layout.cloud_servers),
        (Node::Frs(j), _) => (layout.frs[j].service_ms, layout.frs[j].servers),
        (Node::Robot(_), PolicyKind::B { lag_ms, .. }) => (lag_ms, 1),
        (Node::Robot(_), _) => unreachable!("robots serve only under D2D"),
    };
    let mut free_at: Vec<(Node, Vec<f64>)> = Vec::new();
    let mut ready: Vec<f64> = layout.requests.iter().map(|q| q.issue_ms).collect();
    let mut next = vec![0usize; ready.len()];
    let mut outcome: Vec<Option<OracleOutcome>> = vec![None; ready.len()];
    // Earlier issue order wins ties, like the scheduling sequence.
    let rank: Vec<usize> = {
        let mut r = vec![0; order.len()];
        for (pos, &i) in order.iter().enumerate() {
            r[i] = pos;
        }
        r
    };
    while let Some(i) = (0..ready.len())
        .filter(|&i| outcome[i].is_none())
        .min_by(|&a, &b| ready[a].total_cmp(&ready[b]).then(rank[a].cmp(&rank[b])))
    {
        let q = &layout.requests[i];
        let now = ready[i];
        if q.deadline_ms.is_some_and(|d| now - q.issue_ms > d) {
            outcome[i] = Some(OracleOutcome::Dropped);
            continue;
        }
        match plans[i].2.get(next[i]).copied() {
            None => outcome[i] = Some(OracleOutcome::Completed(now)),
            Some(OStep::Hop(d)) => {
                ready[i] = now + d;
                next[i] += 1;
            }
            Some(OStep::Serve(n)) => {
                let (svc, servers) = service(n);
                let slot = match free_at.iter().position(|(m, _)| *m == n) {
                    Some(p) => p,
                    None => {
                        free_at.push((n, vec![f64::NEG_INFINITY; servers as usize]));
                        free_at.len() - 1
                    }
                };
                let frees = &mut free_at[slot].1;
                let (s, earliest) = frees
                    .iter()
                    .copied()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("at least one server");
                let start = now.max(earliest);
                frees[s] = start + svc;
                ready[i] = start + svc;
                next[i] += 1;
            }
        }
    }
    plans
        .into_iter()
        .zip(outcome)
        .map(|((route, resolution, _), o)| OracleRecord {
            route: route.into_iter().map(Node::id).collect(),
            resolution,
            outcome: o.expect("every request finishes"),
        })
        .collect()
}

/// First mismatch between the engine's trace and the oracle, if any.
/// Completion times must agree bit for bit.
pub fn compare_with_oracle(out: &RunOutput, expected: &[OracleRecord]) -> Result<(), String> {
    if out.trace.records.len() != expected.len() {
        return Err(format!(
            "{} records, oracle has {}",
            out.trace.records.len(),
            expected.len()
        ));
    }
    for (r, e) in out.trace.records.iter().zip(expected) {
        let route: Vec<&str> = r.route.iter().map(NodeId::as_str).collect();
        if route != e.route {
            return Err(format!(
                "request {}: route {route:?}, oracle {:?}",
                r.request_id, e.route
            ));
        }
        if r.resolution.map(|x| x.as_str()) != Some(e.resolution) {
            return Err(format!(
                "request {}: resolution {:?}, oracle {}",
                r.request_id, r.resolution, e.resolution
            ));
        }
        let same = match (&r.outcome, &e.outcome) {
            (Outcome::Completed { complete_ms }, OracleOutcome::Completed(t)) => {
                complete_ms.to_bits() == t.to_bits()
            }
            (Outcome::Dropped { reason }, OracleOutcome::Dropped) => reason == "deadline",
            _ => false,
        };
        if !same {
            return Err(format!(
                "request {}: outcome {:?}, oracle {:?}",
                r.request_id, r.outcome, e.outcome
            ));
        }
    }
    Ok(())
}

/// Every issued request has exactly one outcome.
pub fn check_conservation(out: &RunOutput, issued: usize) -> Result<(), String> {
    let t = &out.trace;
    let (c, d, f) = (t.completed(), t.dropped(), t.in_flight());
    if c + d + f != issued || t.records.len() != issued {
        return Err(format!(
            "issued {issued} != completed {c} + dropped {d} + in flight {f}"
        ));
    }
    Ok(())
}

/// At every node, service starts follow arrival order, and a request only
/// waits while all servers are busy. `service_of` gives a node's server
/// count and service time.
pub fn check_fifo(
    out: &RunOutput,
    service_of: impl Fn(&str) -> (usize, f64),
) -> Result<(), String> {
    let mut nodes: Vec<&NodeId> = out.server_log.iter().map(|r| &r.node).collect();
    nodes.sort();
    nodes.dedup();
    for node in nodes {
        let mut visits: Vec<_> = out.server_log.iter().filter(|r| &r.node == node).collect();
        visits.sort_by_key(|r| r.arrival_seq);
        let mut last: Option<(u64, f64)> = None;
        let mut waiting = false;
        for v in &visits {
            match (v.start_seq, v.started_ms) {
                (Some(seq), Some(start)) => {
                    if waiting {
                        return Err(format!(
                            "{node}: request {} started before an earlier arrival",
                            v.request_id
                        ));
                    }
                    if last.is_some_and(|(s, t)| s >= seq || t > start) {
                        return Err(format!(
                            "{node}: request {} started out of arrival order",
                            v.request_id
                        ));
                    }
                    last = Some((seq, start));
                }
                _ => waiting = true,
            }
        }
        let (servers, service_ms) = service_of(node.as_str());
        for v in &visits {
            let Some(start) = v.started_ms else { continue };
            if start > v.arrived_ms {
                let busy = visits
                    .iter()
                    .filter(|o| o.request_id != v.request_id)
                    .filter_map(|o| o.started_ms)
                    .filter(|&s| s <= v.arrived_ms && s + service_ms > v.arrived_ms)
                    .count();
                if busy < servers {
                    return Err(format!(
                        "{node}: request {} waited with a free server",
                        v.request_id
                    ));
                }
            }
        }
    }
    Ok(())
}

impl Layout {
    /// Server count and service time of a node in the built scenario.
    pub fn service_of(&self, node: &str) -> (usize, f64) {
        if node == CLOUD_ID {
            return (self.cloud_servers as usize, self.cloud_service_ms);
        }
        if let Some(j) = (0..self.frs.len()).find(|&j| frs_id(j) == node) {
            return (self.frs[j].servers as usize, self.frs[j].service_ms);
        }
        match self.policy {
            PolicyKind::B { lag_ms, .. } => (1, lag_ms),
            _ => panic!("{node} does not serve"),
        }
    }
}
