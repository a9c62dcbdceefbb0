//! Domain types shared by the engine, the planners and the experiment runners.
//!
//! Units are fixed: milliseconds for time, bytes for payloads, meters for
//! distance.

use std::fmt;

use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

/// Point in a flat plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Robot,
    Frs,
    SubFrs,
    CloudRegion,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Robot => "robot",
            Role::Frs => "frs",
            Role::SubFrs => "sub_frs",
            Role::CloudRegion => "cloud",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        match s {
            "robot" => Some(Role::Robot),
            "frs" => Some(Role::Frs),
            "sub_frs" => Some(Role::SubFrs),
            "cloud" => Some(Role::CloudRegion),
            _ => None,
        }
    }

    /// FRS and Sub-FRS both answer robots directly.
    pub fn is_fog(self) -> bool {
        matches!(self, Role::Frs | Role::SubFrs)
    }

    pub fn is_serving(self) -> bool {
        !matches!(self, Role::Robot)
    }
}

/// A robot, fog server or cloud region.
///
/// Fields that do not apply to a role are left at their neutral values:
/// cloud regions carry no position, robots have no service queue or cache.
/// Robots may list keys they already hold, which makes them D2D candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub id: NodeId,
    pub role: Role,
    pub position: Option<Position>,
    pub service_time_ms: f64,
    pub parallel_servers: u32,
    pub cache_capacity: usize,
    pub coverage_radius_m: f64,
    /// Keys loaded into the node before the run: FRS cache contents or
    /// robot-held data.
    pub preload: Vec<String>,
}

impl NodeSpec {
    pub fn robot(id: impl Into<String>, position: Position) -> Self {
        NodeSpec {
            id: NodeId::new(id),
            role: Role::Robot,
            position: Some(position),
            service_time_ms: 0.0,
            parallel_servers: 0,
            cache_capacity: 0,
            coverage_radius_m: 0.0,
            preload: Vec::new(),
        }
    }

    pub fn frs(
        id: impl Into<String>,
        position: Position,
        service_time_ms: f64,
        parallel_servers: u32,
        cache_capacity: usize,
        coverage_radius_m: f64,
    ) -> Self {
        NodeSpec {
            id: NodeId::new(id),
            role: Role::Frs,
            position: Some(position),
            service_time_ms,
            parallel_servers,
            cache_capacity,
            coverage_radius_m,
            preload: Vec::new(),
        }
    }

    pub fn cloud(id: impl Into<String>, service_time_ms: f64, parallel_servers: u32) -> Self {
        NodeSpec {
            id: NodeId::new(id),
            role: Role::CloudRegion,
            position: None,
            service_time_ms,
            parallel_servers,
            cache_capacity: 0,
            coverage_radius_m: 0.0,
            preload: Vec::new(),
        }
    }

    pub fn with_preload<I, S>(mut self, keys: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.preload = keys.into_iter().map(Into::into).collect();
        self
    }
}

/// One-way propagation delay distribution, milliseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LatencyModel {
    Constant(f64),
    Empirical {
        min_ms: f64,
        avg_ms: f64,
        max_ms: f64,
    },
}

impl LatencyModel {
    pub fn validate(&self) -> Result<(), String> {
        match *self {
            LatencyModel::Constant(ms) if !(ms.is_finite() && ms >= 0.0) => Err(format!(
                "constant latency must be finite and >= 0, got {ms}"
            )),
            LatencyModel::Empirical {
                min_ms,
                avg_ms,
                max_ms,
            } => {
                if !(min_ms.is_finite() && avg_ms.is_finite() && max_ms.is_finite()) {
                    Err("empirical latency bounds must be finite".into())
                } else if min_ms < 0.0 {
                    Err(format!("empirical min must be >= 0, got {min_ms}"))
                } else if !(min_ms <= avg_ms && avg_ms <= max_ms) {
                    Err(format!(
                        "empirical latency needs min <= avg <= max, got {min_ms}/{avg_ms}/{max_ms}"
                    ))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn min_ms(&self) -> f64 {
        match *self {
            LatencyModel::Constant(ms) => ms,
            LatencyModel::Empirical { min_ms, .. } => min_ms,
        }
    }

    pub fn scaled(&self, k: f64) -> LatencyModel {
        match *self {
            LatencyModel::Constant(ms) => LatencyModel::Constant(ms * k),
            LatencyModel::Empirical {
                min_ms,
                avg_ms,
                max_ms,
            } => LatencyModel::Empirical {
                min_ms: min_ms * k,
                avg_ms: avg_ms * k,
                max_ms: max_ms * k,
            },
        }
    }
}

/// Draws one propagation delay.
///
/// Empirical models are a shifted exponential with mean `avg - min`,
/// resampled until the draw lands at or below `max`. Acceptance probability
/// is at least `1 - 1/e` because `max - min >= avg - min`.
pub fn sample_latency(model: &LatencyModel, rng: &mut SimRng) -> f64 {
    match *model {
        LatencyModel::Constant(ms) => ms,
        LatencyModel::Empirical {
            min_ms,
            avg_ms,
            max_ms,
        } => {
            let spread = avg_ms - min_ms;
            if spread <= 0.0 || max_ms <= min_ms {
                return min_ms;
            }
            let exp = Exp::new(1.0 / spread).expect("positive rate");
            loop {
                let v = min_ms + exp.sample(rng);
                if v <= max_ms {
                    return v;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Unlimited,
    BytesPerSec(f64),
}

impl Bandwidth {
    /// Serialization time for `bytes`, milliseconds.
    pub fn transfer_ms(&self, bytes: u64) -> f64 {
        match *self {
            Bandwidth::Unlimited => 0.0,
            Bandwidth::BytesPerSec(bps) => 1000.0 * bytes as f64 / bps,
        }
    }
}

/// Symmetric link between two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub a: NodeId,
    pub b: NodeId,
    pub one_way: LatencyModel,
    pub bandwidth: Bandwidth,
}

impl LinkSpec {
    pub fn new(a: impl Into<String>, b: impl Into<String>, one_way: LatencyModel) -> Self {
        LinkSpec {
            a: NodeId::new(a),
            b: NodeId::new(b),
            one_way,
            bandwidth: Bandwidth::Unlimited,
        }
    }

    pub fn with_bandwidth(mut self, bytes_per_s: f64) -> Self {
        self.bandwidth = Bandwidth::BytesPerSec(bytes_per_s);
        self
    }

    pub fn connects(&self, x: &NodeId, y: &NodeId) -> bool {
        (&self.a == x && &self.b == y) || (&self.a == y && &self.b == x)
    }
}

/// Propagation sample plus serialization of `payload_bytes`.
pub fn hop_delay(link: &LinkSpec, payload_bytes: u64, rng: &mut SimRng) -> f64 {
    sample_latency(&link.one_way, rng) + link.bandwidth.transfer_ms(payload_bytes)
}

/// An offloaded task issued by a robot.
#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub id: u64,
    pub origin: NodeId,
    pub data_key: String,
    pub request_bytes: u64,
    pub response_bytes: u64,
    pub issue_time_ms: f64,
    pub deadline_ms: Option<f64>,
    /// Workload class that produced the request.
    pub class: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    fn rng(seed: u64) -> SimRng {
        rng::stream(seed, rng::LINK_STREAM)
    }

    #[test]
    fn constant_model_returns_value() {
        assert_eq!(
            sample_latency(&LatencyModel::Constant(10.0), &mut rng(1)),
            10.0
        );
    }

    #[test]
    fn degenerate_empirical_returns_point() {
        let m = LatencyModel::Empirical {
            min_ms: 5.0,
            avg_ms: 5.0,
            max_ms: 5.0,
        };
        assert_eq!(sample_latency(&m, &mut rng(3)), 5.0);
    }

    #[test]
    fn sydney_triple_stays_in_range() {
        let m = LatencyModel::Empirical {
            min_ms: 32.19,
            avg_ms: 95.83,
            max_ms: 405.8,
        };
        let mut r = rng(9);
        for _ in 0..10_000 {
            let v = sample_latency(&m, &mut r);
            assert!((32.19..=405.8).contains(&v), "{v}");
        }
    }

    #[test]
    fn hop_delay_examples() {
        let mut r = rng(0);
        let unlimited = LinkSpec::new("a", "b", LatencyModel::Constant(10.0));
        assert_eq!(hop_delay(&unlimited, 1_000_000, &mut r), 10.0);
        let slow = unlimited.clone().with_bandwidth(1e6);
        assert_eq!(hop_delay(&slow, 500_000, &mut r), 510.0);
        let zero = LinkSpec::new("a", "b", LatencyModel::Constant(0.0)).with_bandwidth(1e6);
        assert_eq!(hop_delay(&zero, 0, &mut r), 0.0);
    }

    #[test]
    fn empirical_validation() {
        let bad = LatencyModel::Empirical {
            min_ms: 3.0,
            avg_ms: 2.0,
            max_ms: 4.0,
        };
        assert!(bad.validate().is_err());
        assert!(LatencyModel::Constant(-1.0).validate().is_err());
    }

    proptest! {
        #[test]
        fn samples_within_bounds(min in 0.0f64..500.0, a in 0.0f64..500.0, b in 0.0f64..1000.0, seed: u64) {
            let avg = min + a;
            let max = avg + b;
            let m = LatencyModel::Empirical { min_ms: min, avg_ms: avg, max_ms: max };
            let v = sample_latency(&m, &mut rng(seed));
            prop_assert!(v >= min && v <= max);
        }

        #[test]
        fn hop_delay_monotone_in_payload(lat in 0.0f64..100.0, bw in 1.0f64..1e9, p in 0u64..1_000_000, extra in 0u64..1_000_000, seed: u64) {
            let link = LinkSpec::new("a", "b", LatencyModel::Empirical { min_ms: lat, avg_ms: lat * 2.0, max_ms: lat * 4.0 })
                .with_bandwidth(bw);
            let small = hop_delay(&link, p, &mut rng(seed));
            let large = hop_delay(&link, p + extra, &mut rng(seed));
            prop_assert!(small <= large);
        }

        #[test]
        fn constant_latency_scales_exactly(lat in 0.0f64..1000.0, k in 1u32..20) {
            let k = k as f64;
            let base = LinkSpec::new("a", "b", LatencyModel::Constant(lat));
            let scaled = LinkSpec::new("a", "b", base.one_way.scaled(k));
            let d0 = hop_delay(&base, 12345, &mut rng(0));
            let d1 = hop_delay(&scaled, 12345, &mut rng(0));
            prop_assert_eq!(d1, d0 * k);
        }
    }
}
