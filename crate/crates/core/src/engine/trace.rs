//! Per-request trace records and their line format.
//!
//! ```text
//! # seed=<u64>
//! # config_hash=<16 hex>
//! # prng=xoshiro256++
//! request_id,issue_ms,route,complete_ms|DROPPED:<reason>|INFLIGHT,queue_wait_ms,hops
//! ```
//!
//! `route` joins node ids with `/`; `hops` joins per-hop delays with `;`.

use std::fmt::Write as _;

use crate::model::NodeId;
use crate::routing::Resolution;

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Completed {
        complete_ms: f64,
    },
    Dropped {
        reason: String,
    },
    /// Still travelling when the simulation horizon was reached.
    InFlight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub request_id: u64,
    pub origin: NodeId,
    pub class: String,
    pub issue_ms: f64,
    pub deadline_ms: Option<f64>,
    pub route: Vec<NodeId>,
    pub resolution: Option<Resolution>,
    pub outcome: Outcome,
    pub queue_wait_ms: f64,
    pub hop_delays_ms: Vec<f64>,
}

impl TraceRecord {
    pub fn latency_ms(&self) -> Option<f64> {
        match self.outcome {
            Outcome::Completed { complete_ms } => Some(complete_ms - self.issue_ms),
            _ => None,
        }
    }

    pub fn met_deadline(&self) -> bool {
        match (self.latency_ms(), self.deadline_ms) {
            (Some(l), Some(d)) => l <= d,
            (Some(_), None) => true,
            (None, _) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub seed: u64,
    pub config_hash: String,
    pub prng: String,
    /// Sorted by request id.
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# seed={}", self.seed);
        let _ = writeln!(out, "# config_hash={}", self.config_hash);
        let _ = writeln!(out, "# prng={}", self.prng);
        out.push_str("request_id,issue_ms,route,complete_ms,queue_wait_ms,hops\n");
        for r in &self.records {
            let route: Vec<&str> = r.route.iter().map(NodeId::as_str).collect();
            let outcome = match &r.outcome {
                Outcome::Completed { complete_ms } => complete_ms.to_string(),
                Outcome::Dropped { reason } => format!("DROPPED:{reason}"),
                Outcome::InFlight => "INFLIGHT".to_owned(),
            };
            let hops: Vec<String> = r.hop_delays_ms.iter().map(f64::to_string).collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.request_id,
                r.issue_ms,
                route.join("/"),
                outcome,
                r.queue_wait_ms,
                hops.join(";")
            );
        }
        out
    }

    pub fn completed(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r.outcome, Outcome::Completed { .. }))
            .count()
    }

    pub fn dropped(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r.outcome, Outcome::Dropped { .. }))
            .count()
    }

    pub fn in_flight(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.outcome == Outcome::InFlight)
            .count()
    }
}
