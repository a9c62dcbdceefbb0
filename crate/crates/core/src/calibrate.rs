//! Fitting scenario parameters to target mean latencies.
//!
//! Every knob drives one target. Knobs that share a target form a chain: the
//! first knob is bisected; if it cannot reach the target on its own it is
//! pinned at its best endpoint and the next knob in the chain takes over.
//! Targets are revisited in Gauss-Seidel passes because one knob can move
//! several metrics, and the result is verified against every tolerance.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::error::{ConfigError, ConfigIssue};
use crate::model::Role;
use crate::scenario::Scenario;
use crate::workload::{Arrival, Phase};

const MAX_BISECTIONS: usize = 60;
const MAX_PASSES: usize = 4;

pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTarget {
    pub label: String,
    pub target_ms: f64,
    pub tolerance_fraction: f64,
}

impl CalibrationTarget {
    pub fn new(label: impl Into<String>, target_ms: f64, tolerance_fraction: f64) -> Self {
        CalibrationTarget {
            label: label.into(),
            target_ms,
            tolerance_fraction,
        }
    }

    pub fn accepts(&self, metric: f64) -> bool {
        (metric - self.target_ms).abs() <= self.tolerance_fraction * self.target_ms
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Knob {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    /// Restricts the knob to whole numbers.
    pub integer: bool,
    /// Label of the target this knob is tuned against.
    pub target: String,
}

impl Knob {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64, target: impl Into<String>) -> Self {
        let name = name.into();
        let integer = is_integer_knob(&name);
        Knob {
            name,
            lo,
            hi,
            integer,
            target: target.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub params: Params,
    /// Achieved metric per target label.
    pub achieved: BTreeMap<String, f64>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("knob {knob} cannot reach {target} ms: its range gives {lo_metric} to {hi_metric} ms")]
    Unbracketable {
        knob: String,
        target: f64,
        lo_metric: f64,
        hi_metric: f64,
    },
    #[error("knob {knob} is not monotone over its range (lo {lo_metric}, mid {mid_metric}, hi {hi_metric} ms)")]
    NonMonotone {
        knob: String,
        lo_metric: f64,
        mid_metric: f64,
        hi_metric: f64,
    },
    #[error("target {label}: achieved {achieved} ms, wanted {target} ms within {tolerance}")]
    Failed {
        label: String,
        achieved: f64,
        target: f64,
        tolerance: f64,
    },
    #[error("invalid calibration setup: {0}")]
    Setup(String),
    #[error("evaluation failed: {0}")]
    Evaluation(String),
}

struct Evaluator<F> {
    eval: F,
    count: usize,
}

impl<F> Evaluator<F>
where
    F: FnMut(&Params) -> Result<BTreeMap<String, f64>, String>,
{
    fn metric(&mut self, params: &Params, label: &str) -> Result<f64, CalibrationError> {
        self.all(params)?
            .get(label)
            .copied()
            .ok_or_else(|| CalibrationError::Evaluation(format!("no metric for target {label}")))
    }

    fn all(&mut self, params: &Params) -> Result<BTreeMap<String, f64>, CalibrationError> {
        self.count += 1;
        let out = (self.eval)(params).map_err(CalibrationError::Evaluation)?;
        if let Some((label, v)) = out.iter().find(|(_, v)| !v.is_finite()) {
            return Err(CalibrationError::Evaluation(format!(
                "metric {label} is {v}"
            )));
        }
        Ok(out)
    }
}

/// Fits `knobs` so that every target's metric lies within its tolerance.
///
/// `eval` runs the model for a parameter set and returns the metric for
/// each target label. Returns immediately when `initial` already satisfies
/// every target.
pub fn calibrate<F>(
    targets: &[CalibrationTarget],
    knobs: &[Knob],
    initial: Params,
    eval: F,
) -> Result<Calibration, CalibrationError>
where
    F: FnMut(&Params) -> Result<BTreeMap<String, f64>, String>,
{
    for k in knobs {
        if !targets.iter().any(|t| t.label == k.target) {
            return Err(CalibrationError::Setup(format!(
                "knob {} drives unknown target {}",
                k.name, k.target
            )));
        }
        if !(k.lo.is_finite() && k.hi.is_finite() && k.lo < k.hi) {
            return Err(CalibrationError::Setup(format!(
                "knob {} needs a finite range with lo < hi",
                k.name
            )));
        }
    }
    for t in targets {
        if !(t.target_ms > 0.0 && t.tolerance_fraction > 0.0 && t.tolerance_fraction <= 1.0) {
            return Err(CalibrationError::Setup(format!(
                "target {} needs target > 0 and tolerance in (0, 1]",
                t.label
            )));
        }
    }

    let mut ev = Evaluator { eval, count: 0 };
    let mut params = initial;
    for k in knobs {
        params.entry(k.name.clone()).or_insert(k.lo);
    }

    for _ in 0..MAX_PASSES {
        let metrics = ev.all(&params)?;
        if all_accepted(targets, &metrics) {
            return Ok(Calibration {
                params,
                achieved: metrics,
                evaluations: ev.count,
            });
        }
        for target in targets {
            let chain: Vec<&Knob> = knobs.iter().filter(|k| k.target == target.label).collect();
            if chain.is_empty() || target.accepts(ev.metric(&params, &target.label)?) {
                continue;
            }
            for (pos, knob) in chain.iter().enumerate() {
                let last = pos + 1 == chain.len();
                if fit_knob(&mut ev, &mut params, knob, target, last)? {
                    break;
                }
            }
        }
    }

    let metrics = ev.all(&params)?;
    for t in targets {
        let achieved = metrics.get(&t.label).copied().ok_or_else(|| {
            CalibrationError::Evaluation(format!("no metric for target {}", t.label))
        })?;
        if !t.accepts(achieved) {
            return Err(CalibrationError::Failed {
                label: t.label.clone(),
                achieved,
                target: t.target_ms,
                tolerance: t.tolerance_fraction,
            });
        }
    }
    Ok(Calibration {
        params,
        achieved: metrics,
        evaluations: ev.count,
    })
}

fn all_accepted(targets: &[CalibrationTarget], metrics: &BTreeMap<String, f64>) -> bool {
    targets
        .iter()
        .all(|t| metrics.get(&t.label).is_some_and(|&m| t.accepts(m)))
}

/// Bisects one knob toward `target`. Returns whether the target is met.
fn fit_knob<F>(
    ev: &mut Evaluator<F>,
    params: &mut Params,
    knob: &Knob,
    target: &CalibrationTarget,
    last_in_chain: bool,
) -> Result<bool, CalibrationError>
where
    F: FnMut(&Params) -> Result<BTreeMap<String, f64>, String>,
{
    let at = |ev: &mut Evaluator<F>, v: f64| {
        let mut p = params.clone();
        p.insert(knob.name.clone(), v);
        ev.metric(&p, &target.label)
    };
    let (lo, hi) = if knob.integer {
        (knob.lo.ceil(), knob.hi.floor())
    } else {
        (knob.lo, knob.hi)
    };
    let mid = if knob.integer {
        ((lo + hi) / 2.0).floor()
    } else {
        (lo + hi) / 2.0
    };
    let m_lo = at(ev, lo)?;
    let m_hi = at(ev, hi)?;
    let m_mid = at(ev, mid)?;
    if m_mid < m_lo.min(m_hi) || m_mid > m_lo.max(m_hi) {
        return Err(CalibrationError::NonMonotone {
            knob: knob.name.clone(),
            lo_metric: m_lo,
            mid_metric: m_mid,
            hi_metric: m_hi,
        });
    }
    let t = target.target_ms;
    if t < m_lo.min(m_hi) || t > m_lo.max(m_hi) {
        if last_in_chain {
            return Err(CalibrationError::Unbracketable {
                knob: knob.name.clone(),
                target: t,
                lo_metric: m_lo,
                hi_metric: m_hi,
            });
        }
        let pin = if (m_lo - t).abs() <= (m_hi - t).abs() {
            lo
        } else {
            hi
        };
        params.insert(knob.name.clone(), pin);
        return Ok(false);
    }

    let increasing = m_hi >= m_lo;
    let (mut a, mut b) = (lo, hi);
    let mut best = if (m_lo - t).abs() <= (m_hi - t).abs() {
        (lo, m_lo)
    } else {
        (hi, m_hi)
    };
    if !target.accepts(best.1) {
        for _ in 0..MAX_BISECTIONS {
            if knob.integer && b - a <= 1.0 {
                break;
            }
            let x = if knob.integer {
                ((a + b) / 2.0).floor()
            } else {
                (a + b) / 2.0
            };
            let m = at(ev, x)?;
            if (m - t).abs() < (best.1 - t).abs() {
                best = (x, m);
            }
            if target.accepts(m) {
                break;
            }
            if (m < t) == increasing {
                a = x;
            } else {
                b = x;
            }
        }
    }
    params.insert(knob.name.clone(), best.0);
    Ok(target.accepts(best.1))
}

/// Knobs whose values must be whole numbers.
pub fn is_integer_knob(name: &str) -> bool {
    name.ends_with("parallel_servers")
}

/// Sets a named scenario parameter.
///
/// Names: `frs.<field>` and `cloud.<field>` address every FRS or cloud
/// region, `nodes.<id>.<field>` a single node, with `<field>` one of
/// `service_time_ms` and `parallel_servers`; `workload.interval_ms`,
/// `workload.stagger_ms`, `policy.d2d_internal_lag_ms` and
/// `policy.d2d_range_m` cover the rest.
pub fn apply_knob(scenario: &mut Scenario, name: &str, value: f64) -> Result<(), ConfigError> {
    let bad =
        |reason: &str| ConfigError::single(ConfigIssue::validation(format!("knob {name}"), reason));
    let set_node = |n: &mut crate::model::NodeSpec, field: &str| -> Result<(), ConfigError> {
        match field {
            "service_time_ms" => n.service_time_ms = value,
            "parallel_servers" => n.parallel_servers = value.round().max(0.0) as u32,
            _ => return Err(bad("unknown node field")),
        }
        Ok(())
    };
    let parts: Vec<&str> = name.split('.').collect();
    match parts.as_slice() {
        ["frs" | "cloud", field] => {
            let want_cloud = parts[0] == "cloud";
            let mut touched = false;
            for n in scenario.nodes.iter_mut() {
                let matches = if want_cloud {
                    n.role == Role::CloudRegion
                } else {
                    n.role.is_fog()
                };
                if matches {
                    set_node(n, field)?;
                    touched = true;
                }
            }
            if touched {
                Ok(())
            } else {
                Err(bad("no node of that role"))
            }
        }
        ["nodes", id @ .., field] if !id.is_empty() => {
            let id = id.join(".");
            let n = scenario.node_mut(&id).ok_or_else(|| bad("unknown node"))?;
            set_node(n, field)
        }
        ["workload", "interval_ms"] => {
            for w in scenario.workloads.iter_mut() {
                if let Arrival::FixedInterval { interval_ms } = &mut w.arrival {
                    *interval_ms = value;
                }
            }
            Ok(())
        }
        ["workload", "stagger_ms"] => {
            for w in scenario.workloads.iter_mut() {
                w.phase = Phase::Stagger(value);
            }
            Ok(())
        }
        ["policy", field] => match (&mut scenario.policy, *field) {
            (
                crate::routing::RoutingPolicy::CaseB {
                    d2d_internal_lag_ms,
                    ..
                },
                "d2d_internal_lag_ms",
            ) => {
                *d2d_internal_lag_ms = value;
                Ok(())
            }
            (crate::routing::RoutingPolicy::CaseB { d2d_range_m, .. }, "d2d_range_m") => {
                *d2d_range_m = value;
                Ok(())
            }
            _ => Err(bad("policy has no such field")),
        },
        _ => Err(bad("unknown knob")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(params: &Params) -> Result<BTreeMap<String, f64>, String> {
        let s = params["s"];
        Ok(BTreeMap::from([("mean".to_owned(), 2.0 + s)]))
    }

    #[test]
    fn fits_linear_service_time() {
        let cal = calibrate(
            &[CalibrationTarget::new("mean", 8.58, 0.01)],
            &[Knob::new("s", 0.0, 20.0, "mean")],
            Params::new(),
            linear,
        )
        .unwrap();
        assert!((cal.params["s"] - 6.58).abs() <= 0.0858, "{:?}", cal.params);
        assert!(CalibrationTarget::new("mean", 8.58, 0.01).accepts(cal.achieved["mean"]));
    }

    #[test]
    fn fixed_point_needs_one_evaluation() {
        let initial = Params::from([("s".to_owned(), 6.58)]);
        let cal = calibrate(
            &[CalibrationTarget::new("mean", 8.58, 0.01)],
            &[Knob::new("s", 0.0, 20.0, "mean")],
            initial.clone(),
            linear,
        )
        .unwrap();
        assert_eq!(cal.params, initial);
        assert_eq!(cal.evaluations, 1);
    }

    #[test]
    fn unbracketable_target() {
        let err = calibrate(
            &[CalibrationTarget::new("mean", 100.0, 0.01)],
            &[Knob::new("s", 0.0, 20.0, "mean")],
            Params::new(),
            linear,
        )
        .unwrap_err();
        assert!(matches!(err, CalibrationError::Unbracketable { ref knob, .. } if knob == "s"));
    }

    #[test]
    fn non_monotone_knob() {
        let err = calibrate(
            &[CalibrationTarget::new("mean", 5.0, 0.01)],
            &[Knob::new("s", 0.0, 20.0, "mean")],
            Params::new(),
            |p: &Params| {
                Ok(BTreeMap::from([(
                    "mean".to_owned(),
                    20.0 - (p["s"] - 10.0).abs(),
                )]))
            },
        )
        .unwrap_err();
        assert!(matches!(err, CalibrationError::NonMonotone { .. }));
    }

    #[test]
    fn chain_pins_first_knob_and_uses_second() {
        // Capacity c alone cannot go below 50; the interval knob must finish.
        let eval = |p: &Params| {
            let c = p["c"];
            let i = p["i"];
            Ok(BTreeMap::from([(
                "big".to_owned(),
                50.0 + 1000.0 / c + 10.0 * i,
            )]))
        };
        let cal = calibrate(
            &[CalibrationTarget::new("big", 80.0, 0.01)],
            &[
                Knob::new("c.parallel_servers", 1.0, 100.0, "big"),
                Knob::new("i", 0.0, 10.0, "big"),
            ],
            Params::from([("i".to_owned(), 0.0)]),
            |p: &Params| {
                let mut q = p.clone();
                q.insert("c".into(), p["c.parallel_servers"]);
                eval(&q)
            },
        )
        .unwrap();
        assert!(CalibrationTarget::new("big", 80.0, 0.01).accepts(cal.achieved["big"]));
        assert_eq!(cal.params["c.parallel_servers"].fract(), 0.0);
    }

    #[test]
    fn integer_knob_keeps_closer_neighbor() {
        let cal = calibrate(
            &[CalibrationTarget::new("m", 1000.0 / 12.7, 0.03)],
            &[Knob::new("parallel_servers", 1.0, 64.0, "m")],
            Params::new(),
            |p: &Params| {
                Ok(BTreeMap::from([(
                    "m".to_owned(),
                    1000.0 / p["parallel_servers"],
                )]))
            },
        )
        .unwrap();
        assert_eq!(cal.params["parallel_servers"], 13.0);
    }

    #[test]
    fn two_targets_gauss_seidel() {
        // a moves both metrics; b only the second.
        let eval = |p: &Params| {
            Ok(BTreeMap::from([
                ("one".to_owned(), 2.0 + p["a"]),
                (
                    "five".to_owned(),
                    2.0 + p["a"] + 4.0 * (p["a"] - p["b"]).max(0.0) / 2.0,
                ),
            ]))
        };
        let cal = calibrate(
            &[
                CalibrationTarget::new("one", 8.58, 0.01),
                CalibrationTarget::new("five", 19.51, 0.01),
            ],
            &[
                Knob::new("a", 0.0, 20.0, "one"),
                Knob::new("b", 0.0, 20.0, "five"),
            ],
            Params::new(),
            eval,
        )
        .unwrap();
        assert!((cal.achieved["five"] - 19.51).abs() <= 0.1951);
    }

    #[test]
    fn failure_is_reported_not_silent() {
        // Integer knob can only reach 10 or 5; 7 within 1% is impossible.
        let err = calibrate(
            &[CalibrationTarget::new("m", 7.0, 0.01)],
            &[Knob::new("parallel_servers", 1.0, 2.0, "m")],
            Params::new(),
            |p: &Params| {
                Ok(BTreeMap::from([(
                    "m".to_owned(),
                    10.0 / p["parallel_servers"],
                )]))
            },
        )
        .unwrap_err();
        assert!(matches!(err, CalibrationError::Failed { .. }));
    }

    #[test]
    fn apply_knob_addresses_roles() {
        let mut s =
            crate::config::parse_config(include_str!("../../../configs/arch_a.example")).unwrap();
        apply_knob(&mut s, "frs.service_time_ms", 3.0).unwrap();
        assert!(s
            .nodes
            .iter()
            .filter(|n| n.role.is_fog())
            .all(|n| n.service_time_ms == 3.0));
        apply_knob(&mut s, "cloud.parallel_servers", 7.4).unwrap();
        assert!(s
            .nodes
            .iter()
            .filter(|n| n.role == Role::CloudRegion)
            .all(|n| n.parallel_servers == 7));
        assert!(apply_knob(&mut s, "frs.color", 1.0).is_err());
        assert!(apply_knob(&mut s, "nodes.ghost.service_time_ms", 1.0).is_err());
    }
}
