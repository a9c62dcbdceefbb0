//! Deterministic discrete-event execution of a [`Scenario`].
//!
//! Events are processed in `(time_ms, seq)` order where `seq` is a global
//! insertion counter. Each serving node owns a FIFO [`ServerState`]; a
//! request's end-to-end latency is the sum of its hop delays, queue waits and
//! service times along the planned route. Routes are planned and cache
//! effects committed when the request is issued.

mod server;
mod trace;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

pub use server::{enqueue_for_service, ServerState, ServiceStart};
pub use trace::{Outcome, Trace, TraceRecord};

use crate::error::{ConfigError, ConfigIssue, RoutingError, SimError};
use crate::model::{hop_delay, NodeId, Position, Request, Role};
use crate::rng::{self, SimRng, PRNG_ALGORITHM};
use crate::routing::handover::{handover, HandoverDecision};
use crate::routing::surge::{check_surge, spawn_sfrs};
use crate::routing::{commit_plan, plan_route, Resolution, RoutingPolicy, Step, SystemState};
use crate::scenario::Scenario;
use crate::stats::{summarize, LatencyStats};
use crate::topology::Topology;
use crate::workload::generate_all;

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    RequestIssued,
    HopArrived(usize),
    ServiceStarted(usize),
    ServiceFinished(usize),
    RobotMoved {
        robot: usize,
        position: Position,
    },
    HandoverCompleted {
        robot: usize,
        target: usize,
        generation: u64,
    },
    SfrsSpawned(usize),
    SimulationEnd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time_ms: f64,
    pub seq: u64,
    pub kind: EventKind,
    pub request: Option<usize>,
}

impl Eq for Event {}

impl Ord for Event {
    // Reversed so that `BinaryHeap` pops the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time_ms
            .total_cmp(&self.time_ms)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One visit of a request to a serving node.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceRecord {
    pub node: NodeId,
    pub request_id: u64,
    pub arrived_ms: f64,
    /// Position in the node's arrival sequence.
    pub arrival_seq: u64,
    pub started_ms: Option<f64>,
    /// Position in the node's service-start sequence.
    pub start_seq: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpawnRecord {
    pub parent: NodeId,
    pub sub: NodeId,
    pub time_ms: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Trace,
    /// Keyed by `all`, by resolution name and by `class:<label>`.
    pub stats: BTreeMap<String, LatencyStats>,
    pub resolutions: BTreeMap<Resolution, usize>,
    /// Share of deadline-bearing requests completed within their deadline.
    pub deadline_met_fraction: Option<f64>,
    pub server_log: Vec<ServiceRecord>,
    pub spawns: Vec<SpawnRecord>,
    pub handovers: usize,
}

impl RunOutput {
    pub fn mean_ms(&self, target: &str) -> Option<f64> {
        self.stats.get(target).and_then(LatencyStats::mean_ms)
    }
}

#[derive(Debug, Clone, Copy)]
enum PlanStep {
    Hop { from: usize, to: usize, bytes: u64 },
    Serve(usize),
}

struct Flight {
    request: Request,
    steps: Vec<PlanStep>,
    next: usize,
    route: Vec<NodeId>,
    resolution: Option<Resolution>,
    hop_delays: Vec<f64>,
    queue_wait: f64,
    enqueued_at: f64,
    log_entry: usize,
    outcome: Option<Outcome>,
}

struct Engine<'a> {
    scenario: &'a Scenario,
    state: SystemState,
    servers: Vec<Option<ServerState>>,
    arrival_counts: Vec<u64>,
    start_counts: Vec<u64>,
    surge_windows: Vec<VecDeque<f64>>,
    spawn_pending: Vec<bool>,
    handover_generation: Vec<u64>,
    queue: BinaryHeap<Event>,
    seq: u64,
    rng: SimRng,
    flights: Vec<Flight>,
    server_log: Vec<ServiceRecord>,
    spawns: Vec<SpawnRecord>,
    handovers: usize,
}

/// Runs the scenario's own workload.
pub fn run(scenario: &Scenario) -> Result<RunOutput, SimError> {
    let robots = scenario.robots();
    let requests = generate_all(&scenario.workloads, &robots, scenario.seed);
    run_requests(scenario, requests)
}

/// Runs an explicit request list instead of the scenario's workload.
///
/// Configuration problems are reported before any event executes.
pub fn run_requests(scenario: &Scenario, requests: Vec<Request>) -> Result<RunOutput, SimError> {
    scenario.check()?;
    let topology = Topology::new(&scenario.nodes, &scenario.links);
    let mut issues = Vec::new();
    for r in &requests {
        match topology.idx(&r.origin).map(|i| topology.node(i).role) {
            Some(Role::Robot) => {}
            _ => issues.push(ConfigIssue::validation(
                format!("request {}", r.id),
                format!("origin {} is not a robot", r.origin),
            )),
        }
    }
    if !issues.is_empty() {
        return Err(ConfigError { issues }.into());
    }
    let state = SystemState::new(topology, &scenario.policy)?;
    let mut engine = Engine::new(scenario, state, requests);
    engine.execute()?;
    Ok(engine.finish())
}

fn server_for(state: &SystemState, policy: &RoutingPolicy, i: usize) -> Option<ServerState> {
    let node = state.topology.node(i);
    match (node.role, policy) {
        (
            Role::Robot,
            RoutingPolicy::CaseB {
                d2d_internal_lag_ms,
                ..
            },
        ) => Some(ServerState::new(node.id.clone(), 1, *d2d_internal_lag_ms)),
        (Role::Robot, _) => None,
        _ => Some(ServerState::new(
            node.id.clone(),
            node.parallel_servers,
            node.service_time_ms,
        )),
    }
}

impl<'a> Engine<'a> {
    fn new(scenario: &'a Scenario, state: SystemState, requests: Vec<Request>) -> Self {
        let n = state.topology.len();
        let servers = (0..n)
            .map(|i| server_for(&state, &scenario.policy, i))
            .collect();
        let mut engine = Engine {
            scenario,
            servers,
            arrival_counts: vec![0; n],
            start_counts: vec![0; n],
            surge_windows: vec![VecDeque::new(); n],
            spawn_pending: vec![false; n],
            handover_generation: vec![0; n],
            queue: BinaryHeap::new(),
            seq: 0,
            rng: rng::stream(scenario.seed, rng::LINK_STREAM),
            flights: Vec::with_capacity(requests.len()),
            server_log: Vec::new(),
            spawns: Vec::new(),
            handovers: 0,
            state,
        };
        engine.schedule(scenario.duration_ms, EventKind::SimulationEnd, None);
        let mut requests = requests;
        requests.sort_by(|a, b| {
            a.issue_time_ms
                .total_cmp(&b.issue_time_ms)
                .then(a.id.cmp(&b.id))
        });
        for (i, r) in requests.into_iter().enumerate() {
            engine.schedule(r.issue_time_ms, EventKind::RequestIssued, Some(i));
            engine.flights.push(Flight {
                request: r,
                steps: Vec::new(),
                next: 0,
                route: Vec::new(),
                resolution: None,
                hop_delays: Vec::new(),
                queue_wait: 0.0,
                enqueued_at: 0.0,
                log_entry: usize::MAX,
                outcome: None,
            });
        }
        for m in &scenario.mobility {
            let robot = engine
                .state
                .topology
                .idx(&m.robot)
                .expect("validated robot");
            for w in &m.waypoints {
                engine.schedule(
                    w.time_ms,
                    EventKind::RobotMoved {
                        robot,
                        position: w.position,
                    },
                    None,
                );
            }
        }
        engine
    }

    fn schedule(&mut self, time_ms: f64, kind: EventKind, request: Option<usize>) {
        self.queue.push(Event {
            time_ms,
            seq: self.seq,
            kind,
            request,
        });
        self.seq += 1;
    }

    fn execute(&mut self) -> Result<(), SimError> {
        while let Some(ev) = self.queue.pop() {
            let now = ev.time_ms;
            match ev.kind {
                EventKind::SimulationEnd => break,
                EventKind::RequestIssued => self.issue(ev.request.expect("request event"), now),
                EventKind::HopArrived(node) => {
                    let rid = ev.request.expect("request event");
                    self.note_arrival(rid, node, now);
                    self.advance(rid, now);
                }
                EventKind::ServiceStarted(node) => {
                    self.start_service(ev.request.expect("request event"), node, now)
                }
                EventKind::ServiceFinished(node) => {
                    let rid = ev.request.expect("request event");
                    let server = self.servers[node].as_mut().expect("serving node");
                    if let Some(next) = server.finish(now) {
                        self.schedule(
                            next.time_ms,
                            EventKind::ServiceStarted(node),
                            Some(next.request),
                        );
                    }
                    self.flights[rid].next += 1;
                    self.advance(rid, now);
                }
                EventKind::RobotMoved { robot, position } => self.move_robot(robot, position, now),
                EventKind::HandoverCompleted {
                    robot,
                    target,
                    generation,
                } => {
                    if self.handover_generation[robot] == generation {
                        self.state.assignment[robot] = Some(target);
                        self.handovers += 1;
                    }
                }
                EventKind::SfrsSpawned(parent) => self.spawn(parent, now)?,
            }
        }
        Ok(())
    }

    fn issue(&mut self, rid: usize, now: f64) {
        let plan = match plan_route(
            &self.flights[rid].request,
            &self.state,
            &self.scenario.policy,
        ) {
            Ok(plan) => plan,
            Err(e) => {
                let reason = match e {
                    RoutingError::Uncovered(_) => "uncovered",
                    _ => "no_route",
                };
                self.flights[rid].outcome = Some(Outcome::Dropped {
                    reason: reason.to_owned(),
                });
                return;
            }
        };
        commit_plan(&mut self.state, &plan, &self.flights[rid].request.data_key);
        let topo = &self.state.topology;
        let idx = |id: &NodeId| topo.idx(id).expect("planned node exists");
        let steps = plan
            .steps
            .iter()
            .map(|s| match s {
                Step::Hop { from, to, bytes } => PlanStep::Hop {
                    from: idx(from),
                    to: idx(to),
                    bytes: *bytes,
                },
                Step::Serve(n) => PlanStep::Serve(idx(n)),
            })
            .collect();
        let flight = &mut self.flights[rid];
        flight.route = plan.walk().into_iter().cloned().collect();
        flight.resolution = Some(plan.resolution);
        flight.steps = steps;
        self.advance(rid, now);
    }

    /// Moves `rid` through its plan from the current step until it must wait
    /// for a hop or a server.
    fn advance(&mut self, rid: usize, now: f64) {
        let flight = &mut self.flights[rid];
        if let Some(d) = flight.request.deadline_ms {
            if now - flight.request.issue_time_ms > d {
                flight.outcome = Some(Outcome::Dropped {
                    reason: "deadline".to_owned(),
                });
                return;
            }
        }
        let Some(&step) = flight.steps.get(flight.next) else {
            flight.outcome = Some(Outcome::Completed { complete_ms: now });
            return;
        };
        match step {
            PlanStep::Hop { from, to, bytes } => {
                let link = self
                    .state
                    .topology
                    .link(from, to)
                    .expect("planned hop has a link");
                let delay = hop_delay(link, bytes, &mut self.rng);
                flight.hop_delays.push(delay);
                flight.next += 1;
                self.schedule(now + delay, EventKind::HopArrived(to), Some(rid));
            }
            PlanStep::Serve(node) => {
                flight.enqueued_at = now;
                flight.log_entry = self.server_log.len();
                self.server_log.push(ServiceRecord {
                    node: self.state.id(node).clone(),
                    request_id: flight.request.id,
                    arrived_ms: now,
                    arrival_seq: self.arrival_counts[node],
                    started_ms: None,
                    start_seq: None,
                });
                self.arrival_counts[node] += 1;
                let server = self.servers[node].as_mut().expect("serving node");
                if let Some(start) = enqueue_for_service(server, rid, now) {
                    self.schedule(start.time_ms, EventKind::ServiceStarted(node), Some(rid));
                }
            }
        }
    }

    fn start_service(&mut self, rid: usize, node: usize, now: f64) {
        let flight = &mut self.flights[rid];
        flight.queue_wait += now - flight.enqueued_at;
        let entry = &mut self.server_log[flight.log_entry];
        entry.started_ms = Some(now);
        entry.start_seq = Some(self.start_counts[node]);
        self.start_counts[node] += 1;
        let service = self.servers[node]
            .as_ref()
            .expect("serving node")
            .service_time_ms;
        self.schedule(now + service, EventKind::ServiceFinished(node), Some(rid));
    }

    /// Surge bookkeeping for requests reaching an original FRS from a robot.
    fn note_arrival(&mut self, rid: usize, node: usize, now: f64) {
        let Some(monitor) = &self.scenario.surge else {
            return;
        };
        if self.state.topology.node(node).role != Role::Frs {
            return;
        }
        let flight = &self.flights[rid];
        let from_robot = match flight.steps.get(flight.next.wrapping_sub(1)) {
            Some(PlanStep::Hop { from, .. }) => self.state.topology.node(*from).role == Role::Robot,
            _ => false,
        };
        if !from_robot || self.state.spawned.contains_key(&node) || self.spawn_pending[node] {
            return;
        }
        let window = &mut self.surge_windows[node];
        window.push_back(now);
        while window
            .front()
            .is_some_and(|&t| t <= now - monitor.window_ms)
        {
            window.pop_front();
        }
        if check_surge(monitor, window.make_contiguous(), now) {
            self.spawn_pending[node] = true;
            self.schedule(now, EventKind::SfrsSpawned(node), None);
        }
    }

    fn spawn(&mut self, parent: usize, now: f64) -> Result<(), SimError> {
        let monitor = self.scenario.surge.as_ref().expect("surge configured");
        let sub = spawn_sfrs(&mut self.state, parent, monitor)?;
        self.servers
            .push(server_for(&self.state, &self.scenario.policy, sub));
        self.arrival_counts.push(0);
        self.start_counts.push(0);
        self.surge_windows.push(VecDeque::new());
        self.spawn_pending.push(false);
        self.handover_generation.push(0);
        self.spawns.push(SpawnRecord {
            parent: self.state.id(parent).clone(),
            sub: self.state.id(sub).clone(),
            time_ms: now,
        });
        Ok(())
    }

    fn move_robot(&mut self, robot: usize, position: Position, now: f64) {
        self.state.topology.set_position(robot, position);
        self.handover_generation[robot] += 1;
        match handover(&self.state, robot, &self.scenario.handover) {
            Ok(HandoverDecision::Stay) => {}
            Ok(HandoverDecision::MoveTo(target)) => {
                let generation = self.handover_generation[robot];
                let at = now + self.scenario.handover.delay_ms;
                self.schedule(
                    at,
                    EventKind::HandoverCompleted {
                        robot,
                        target,
                        generation,
                    },
                    None,
                );
            }
            Err(_) => self.state.assignment[robot] = None,
        }
    }

    fn finish(self) -> RunOutput {
        let mut records: Vec<TraceRecord> = self
            .flights
            .into_iter()
            .map(|f| TraceRecord {
                request_id: f.request.id,
                origin: f.request.origin,
                class: f.request.class,
                issue_ms: f.request.issue_time_ms,
                deadline_ms: f.request.deadline_ms,
                route: f.route,
                resolution: f.resolution,
                outcome: f.outcome.unwrap_or(Outcome::InFlight),
                queue_wait_ms: f.queue_wait,
                hop_delays_ms: f.hop_delays,
            })
            .collect();
        records.sort_by_key(|r| r.request_id);

        let mut samples: BTreeMap<String, (Vec<f64>, usize)> = BTreeMap::new();
        let mut resolutions = BTreeMap::new();
        for r in &records {
            let mut keys = vec!["all".to_owned(), format!("class:{}", r.class)];
            if let Some(res) = r.resolution {
                keys.push(res.as_str().to_owned());
                *resolutions.entry(res).or_insert(0) += 1;
            }
            for k in keys {
                let entry = samples.entry(k).or_default();
                match r.latency_ms() {
                    Some(l) => entry.0.push(l),
                    None => entry.1 += 1,
                }
            }
        }
        let mut stats: BTreeMap<String, LatencyStats> = samples
            .into_iter()
            .map(|(k, (s, lost))| (k, summarize(&s, lost)))
            .collect();
        stats
            .entry("all".to_owned())
            .or_insert_with(|| summarize(&[], 0));

        let with_deadline: Vec<&TraceRecord> =
            records.iter().filter(|r| r.deadline_ms.is_some()).collect();
        let deadline_met_fraction = (!with_deadline.is_empty()).then(|| {
            with_deadline.iter().filter(|r| r.met_deadline()).count() as f64
                / with_deadline.len() as f64
        });

        RunOutput {
            trace: Trace {
                seed: self.scenario.seed,
                config_hash: self.scenario.config_hash(),
                prng: PRNG_ALGORITHM.to_owned(),
                records,
            },
            stats,
            resolutions,
            deadline_met_fraction,
            server_log: self.server_log,
            spawns: self.spawns,
            handovers: self.handovers,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LatencyModel, LinkSpec, NodeSpec};
    use crate::routing::handover::HandoverConfig;
    use crate::routing::surge::SurgeMonitor;
    use crate::scenario::{Mobility, Waypoint};
    use crate::workload::WorkloadSpec;

    fn c(ms: f64) -> LatencyModel {
        LatencyModel::Constant(ms)
    }

    fn base(robots: usize, service: f64, servers: u32) -> Scenario {
        let mut nodes = vec![
            NodeSpec::frs("frs", Position::new(0.0, 0.0), service, servers, 8, 100.0)
                .with_preload(["key-0"]),
            NodeSpec::cloud("cloud", 10.0, 1),
        ];
        let mut links = vec![LinkSpec::new("frs", "cloud", c(20.0))];
        for i in 0..robots {
            let id = format!("r{i}");
            nodes.push(NodeSpec::robot(&id, Position::new(i as f64, 1.0)));
            links.push(LinkSpec::new(&id, "frs", c(1.0)));
        }
        Scenario {
            seed: 1,
            duration_ms: 100_000.0,
            nodes,
            links,
            policy: RoutingPolicy::CaseA,
            workloads: Vec::new(),
            surge: None,
            handover: HandoverConfig::default(),
            mobility: Vec::new(),
        }
    }

    fn req(id: u64, origin: &str, key: &str, t: f64) -> Request {
        Request {
            id,
            origin: origin.into(),
            data_key: key.into(),
            request_bytes: 64,
            response_bytes: 64,
            issue_time_ms: t,
            deadline_ms: None,
            class: "t".into(),
        }
    }

    fn completions(out: &RunOutput) -> Vec<f64> {
        out.trace
            .records
            .iter()
            .map(|r| match r.outcome {
                Outcome::Completed { complete_ms } => complete_ms,
                _ => f64::NAN,
            })
            .collect()
    }

    #[test]
    fn simultaneous_requests_queue_fifo() {
        let s = base(2, 5.0, 1);
        let out = run_requests(
            &s,
            vec![req(0, "r0", "key-0", 0.0), req(1, "r1", "key-0", 0.0)],
        )
        .unwrap();
        assert_eq!(completions(&out), [7.0, 12.0]);
        assert_eq!(out.trace.records[1].queue_wait_ms, 5.0);
    }

    #[test]
    fn empty_workload() {
        let out = run(&base(1, 5.0, 1)).unwrap();
        assert!(out.trace.records.is_empty());
        assert_eq!(out.stats["all"].count, 0);
    }

    #[test]
    fn cloud_fetch_then_hit() {
        let s = base(1, 5.0, 1);
        let out = run_requests(
            &s,
            vec![req(0, "r0", "map", 0.0), req(1, "r0", "map", 1000.0)],
        )
        .unwrap();
        // 1 + 5 + 20 + 10 + 20 + 1, then 1 + 5 + 1.
        assert_eq!(completions(&out), [57.0, 1007.0]);
        assert_eq!(
            out.trace.records[0].resolution,
            Some(Resolution::CloudFetch)
        );
        assert_eq!(
            out.trace.records[1].resolution,
            Some(Resolution::FrsCacheHit)
        );
    }

    #[test]
    fn deadline_drop_is_recorded() {
        let s = base(2, 5.0, 1);
        let mut late = req(1, "r1", "key-0", 0.0);
        late.deadline_ms = Some(10.0);
        let out = run_requests(&s, vec![req(0, "r0", "key-0", 0.0), late]).unwrap();
        assert_eq!(
            out.trace.records[1].outcome,
            Outcome::Dropped {
                reason: "deadline".into()
            }
        );
        assert_eq!(out.deadline_met_fraction, Some(0.0));
        assert_eq!(out.stats["all"].lost, 1);
    }

    #[test]
    fn horizon_leaves_requests_in_flight() {
        let mut s = base(1, 5.0, 1);
        s.duration_ms = 3.0;
        let out = run_requests(&s, vec![req(0, "r0", "key-0", 0.0)]).unwrap();
        assert_eq!(out.trace.records[0].outcome, Outcome::InFlight);
        assert!(out.trace.serialize().contains("INFLIGHT"));
    }

    #[test]
    fn unknown_origin_is_config_error() {
        let s = base(1, 5.0, 1);
        let err = run_requests(&s, vec![req(0, "ghost", "key-0", 0.0)]).unwrap_err();
        assert!(matches!(err, SimError::Config(e) if e.mentions("ghost")));
    }

    #[test]
    fn d2d_adds_lag_once() {
        let mut s = base(2, 5.0, 1);
        s.policy = RoutingPolicy::CaseB {
            d2d_range_m: 5.0,
            d2d_internal_lag_ms: 2.0,
        };
        s.node_mut("r1").unwrap().preload = vec!["key-0".into()];
        s.links.push(LinkSpec::new("r0", "r1", c(0.5)));
        let out = run_requests(&s, vec![req(0, "r0", "key-0", 0.0)]).unwrap();
        assert_eq!(out.trace.records[0].resolution, Some(Resolution::D2D));
        assert_eq!(completions(&out), [3.0]);
    }

    #[test]
    fn surge_spawns_once() {
        let mut s = base(4, 1.0, 4);
        s.surge = Some(SurgeMonitor {
            window_ms: 1000.0,
            threshold_rps: 5.0,
            reassignment_fraction: 0.5,
            parent_link: c(1.0),
        });
        s.workloads = vec![WorkloadSpec::fixed("w", 100.0, 3000.0)];
        let out = run(&s).unwrap();
        assert_eq!(out.spawns.len(), 1);
        assert_eq!(out.spawns[0].sub.as_str(), "frs.sub");
        let via_sub = out
            .trace
            .records
            .iter()
            .filter(|r| r.route.iter().any(|n| n.as_str() == "frs.sub"))
            .count();
        assert!(via_sub > 0);
    }

    #[test]
    fn mobility_hands_over_after_delay() {
        let mut s = base(1, 1.0, 1);
        s.nodes.push(
            NodeSpec::frs("east", Position::new(150.0, 0.0), 1.0, 1, 8, 100.0)
                .with_preload(["key-0"]),
        );
        s.links.push(LinkSpec::new("east", "cloud", c(20.0)));
        s.links.push(LinkSpec::new("r0", "east", c(1.0)));
        s.mobility = vec![Mobility {
            robot: "r0".into(),
            waypoints: vec![Waypoint {
                time_ms: 100.0,
                position: Position::new(140.0, 0.0),
            }],
        }];
        let out = run_requests(
            &s,
            vec![req(0, "r0", "key-0", 120.0), req(1, "r0", "key-0", 200.0)],
        )
        .unwrap();
        assert_eq!(out.trace.records[0].route[1].as_str(), "frs");
        assert_eq!(out.trace.records[1].route[1].as_str(), "east");
        assert_eq!(out.handovers, 1);
    }

    #[test]
    fn moving_out_of_coverage_drops_requests() {
        let mut s = base(1, 1.0, 1);
        s.mobility = vec![Mobility {
            robot: "r0".into(),
            waypoints: vec![Waypoint {
                time_ms: 10.0,
                position: Position::new(500.0, 0.0),
            }],
        }];
        let out = run_requests(&s, vec![req(0, "r0", "key-0", 20.0)]).unwrap();
        assert_eq!(
            out.trace.records[0].outcome,
            Outcome::Dropped {
                reason: "uncovered".into()
            }
        );
    }
}
