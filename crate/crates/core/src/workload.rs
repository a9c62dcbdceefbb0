//! Request stream generation.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::model::{NodeId, Request};
use crate::rng::{self, SimRng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Arrival {
    FixedInterval { interval_ms: f64 },
    Poisson { rate_rps: f64 },
}

/// Offset of each robot's first fixed-interval request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase {
    /// Every robot issues at the same instants.
    Aligned,
    /// Robot `i` is shifted by `i * ms`.
    Stagger(f64),
    /// Robot `i` of `n` is shifted by `i * interval / n`.
    Spread,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KeyDistribution {
    Uniform,
    /// `fraction_hot` of the keys receive `hot_weight` of the draws.
    Hot {
        fraction_hot: f64,
        hot_weight: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSpec {
    pub label: String,
    pub arrival: Arrival,
    /// Ignored for Poisson arrivals.
    pub phase: Phase,
    pub duration_ms: f64,
    pub requests_per_robot: Option<u32>,
    pub key_universe: u32,
    pub key_prefix: String,
    pub key_distribution: KeyDistribution,
    pub request_bytes: u64,
    pub response_bytes: u64,
    pub deadline_ms: Option<f64>,
}

impl WorkloadSpec {
    pub fn fixed(label: &str, interval_ms: f64, duration_ms: f64) -> Self {
        WorkloadSpec {
            label: label.to_owned(),
            arrival: Arrival::FixedInterval { interval_ms },
            phase: Phase::Aligned,
            duration_ms,
            requests_per_robot: None,
            key_universe: 1,
            key_prefix: "key-".to_owned(),
            key_distribution: KeyDistribution::Uniform,
            request_bytes: 64,
            response_bytes: 64,
            deadline_ms: None,
        }
    }

    pub fn key(&self, index: u32) -> String {
        format!("{}{}", self.key_prefix, index)
    }

    pub fn keys(&self) -> impl Iterator<Item = String> + '_ {
        (0..self.key_universe).map(|i| self.key(i))
    }

    pub fn validate(&self, field: &str) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut bad = |f: &str, r: &str| out.push((format!("{field}.{f}"), r.to_owned()));
        match self.arrival {
            Arrival::FixedInterval { interval_ms }
                if !(interval_ms.is_finite() && interval_ms > 0.0) =>
            {
                bad("arrival", "interval must be > 0")
            }
            Arrival::Poisson { rate_rps } if !(rate_rps.is_finite() && rate_rps > 0.0) => {
                bad("arrival", "rate must be > 0")
            }
            _ => {}
        }
        if let Phase::Stagger(ms) = self.phase {
            if !(ms.is_finite() && ms >= 0.0) {
                bad("phase", "stagger must be >= 0");
            }
        }
        if !(self.duration_ms.is_finite() && self.duration_ms >= 0.0) {
            bad("duration_ms", "must be >= 0");
        }
        if self.key_universe == 0 {
            bad("key_universe", "must be >= 1");
        }
        if let KeyDistribution::Hot {
            fraction_hot,
            hot_weight,
        } = self.key_distribution
        {
            if !(fraction_hot > 0.0 && fraction_hot <= 1.0) {
                bad("key_distribution", "hot fraction must lie in (0, 1]");
            }
            if !(0.0..=1.0).contains(&hot_weight) {
                bad("key_distribution", "hot weight must lie in [0, 1]");
            }
        }
        if let Some(d) = self.deadline_ms {
            if !(d.is_finite() && d > 0.0) {
                bad("deadline_ms", "must be > 0");
            }
        }
        out
    }

    fn pick_key(&self, rng: &mut SimRng) -> String {
        let n = self.key_universe.max(1);
        if n == 1 {
            return self.key(0);
        }
        let idx = match self.key_distribution {
            KeyDistribution::Uniform => rng.random_range(0..n),
            KeyDistribution::Hot {
                fraction_hot,
                hot_weight,
            } => {
                let hot = ((fraction_hot * n as f64).round() as u32).clamp(1, n);
                if hot == n || rng.random::<f64>() < hot_weight {
                    rng.random_range(0..hot)
                } else {
                    rng.random_range(hot..n)
                }
            }
        };
        self.key(idx)
    }

    fn issue_times(&self, robot_index: usize, robots: usize, rng: &mut SimRng) -> Vec<f64> {
        let cap = self.requests_per_robot.map_or(usize::MAX, |c| c as usize);
        let mut out = Vec::new();
        match self.arrival {
            Arrival::FixedInterval { interval_ms } => {
                let offset = match self.phase {
                    Phase::Aligned => 0.0,
                    Phase::Stagger(ms) => robot_index as f64 * ms,
                    Phase::Spread => robot_index as f64 * interval_ms / robots as f64,
                };
                let mut k = 1u64;
                loop {
                    let t = k as f64 * interval_ms + offset;
                    if t > self.duration_ms || out.len() >= cap {
                        break;
                    }
                    out.push(t);
                    k += 1;
                }
            }
            Arrival::Poisson { rate_rps } => {
                let gap = Exp::new(rate_rps / 1000.0).expect("positive rate");
                let mut t = 0.0;
                loop {
                    t += gap.sample(rng);
                    if t > self.duration_ms || out.len() >= cap {
                        break;
                    }
                    out.push(t);
                }
            }
        }
        out
    }
}

/// Generates the merged request stream of several workload classes.
///
/// Requests are ordered by issue time, then class order, then robot order,
/// and numbered from 0 in that order.
pub fn generate_all(specs: &[WorkloadSpec], robots: &[NodeId], seed: u64) -> Vec<Request> {
    let mut rng = rng::stream(seed, rng::WORKLOAD_STREAM);
    let mut tagged = Vec::new();
    for (ci, spec) in specs.iter().enumerate() {
        for (ri, robot) in robots.iter().enumerate() {
            for t in spec.issue_times(ri, robots.len(), &mut rng) {
                let key = spec.pick_key(&mut rng);
                tagged.push((
                    (t, ci, ri),
                    Request {
                        id: 0,
                        origin: robot.clone(),
                        data_key: key,
                        request_bytes: spec.request_bytes,
                        response_bytes: spec.response_bytes,
                        issue_time_ms: t,
                        deadline_ms: spec.deadline_ms,
                        class: spec.label.clone(),
                    },
                ));
            }
        }
    }
    tagged.sort_by(|a, b| {
        a.0 .0
            .total_cmp(&b.0 .0)
            .then(a.0 .1.cmp(&b.0 .1))
            .then(a.0 .2.cmp(&b.0 .2))
    });
    tagged
        .into_iter()
        .enumerate()
        .map(|(i, (_, mut r))| {
            r.id = i as u64;
            r
        })
        .collect()
}

pub fn generate_workload(spec: &WorkloadSpec, robots: &[NodeId], seed: u64) -> Vec<Request> {
    generate_all(std::slice::from_ref(spec), robots, seed)
}
