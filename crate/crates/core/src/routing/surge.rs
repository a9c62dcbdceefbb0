//! Sub-FRS spawning when an FRS sees a traffic surge.

use crate::error::RoutingError;
use crate::model::{LatencyModel, LinkSpec, NodeId, NodeSpec, Position, Role};

use super::{LruCache, SystemState};

#[derive(Debug, Clone, PartialEq)]
pub struct SurgeMonitor {
    pub window_ms: f64,
    pub threshold_rps: f64,
    /// Share of the parent's robots handed to the Sub-FRS, in (0, 1).
    pub reassignment_fraction: f64,
    /// Link between a spawned Sub-FRS and its parent.
    pub parent_link: LatencyModel,
}

impl SurgeMonitor {
    pub fn validate(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if !(self.window_ms.is_finite() && self.window_ms > 0.0) {
            out.push(("surge.window_ms", "must be > 0".to_owned()));
        }
        if !(self.threshold_rps.is_finite() && self.threshold_rps > 0.0) {
            out.push(("surge.threshold_rps", "must be > 0".to_owned()));
        }
        if !(self.reassignment_fraction > 0.0 && self.reassignment_fraction < 1.0) {
            out.push((
                "surge.reassignment_fraction",
                "must lie strictly between 0 and 1".to_owned(),
            ));
        }
        if let Err(e) = self.parent_link.validate() {
            out.push(("surge.parent_link", e));
        }
        out
    }
}

/// True iff the arrival rate over `(now - window, now]` strictly exceeds the
/// threshold.
pub fn check_surge(monitor: &SurgeMonitor, arrivals: &[f64], now: f64) -> bool {
    let start = now - monitor.window_ms;
    let count = arrivals.iter().filter(|&&t| t > start && t <= now).count();
    let rate = count as f64 * 1000.0 / monitor.window_ms;
    rate > monitor.threshold_rps
}

pub fn sub_frs_id(parent: &NodeId) -> NodeId {
    NodeId::new(format!("{parent}.sub"))
}

/// Spawns a Sub-FRS under `frs` and moves the farthest robots onto it.
///
/// The new node clones the parent's spec, sits at the centroid of the robots
/// it takes over, duplicates every parent link and is joined to the parent
/// by `monitor.parent_link`. It is adjacent to the parent for Case C lookups.
pub fn spawn_sfrs(
    state: &mut SystemState,
    frs: usize,
    monitor: &SurgeMonitor,
) -> Result<usize, RoutingError> {
    if state.spawned.contains_key(&frs) {
        return Err(RoutingError::AlreadySpawned(state.id(frs).clone()));
    }
    let parent = state.topology.node(frs).clone();
    let parent_pos = parent.position.unwrap_or_default();

    let mut attached: Vec<(usize, f64)> = state
        .topology
        .robots()
        .filter(|&r| state.assignment[r] == Some(frs))
        .map(|r| {
            let d = state
                .topology
                .node(r)
                .position
                .map_or(0.0, |p| p.distance(&parent_pos));
            (r, d)
        })
        .collect();
    attached.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| state.id(a.0).cmp(state.id(b.0)))
    });
    let take = (monitor.reassignment_fraction * attached.len() as f64).ceil() as usize;
    let moved: Vec<usize> = attached.iter().take(take).map(|&(r, _)| r).collect();

    let centroid = if moved.is_empty() {
        parent_pos
    } else {
        let (sx, sy) = moved.iter().fold((0.0, 0.0), |(sx, sy), &r| {
            let p = state.topology.node(r).position.unwrap_or_default();
            (sx + p.x, sy + p.y)
        });
        Position::new(sx / moved.len() as f64, sy / moved.len() as f64)
    };

    let sub_id = sub_frs_id(&parent.id);
    let sub_spec = NodeSpec {
        id: sub_id.clone(),
        role: Role::SubFrs,
        position: Some(centroid),
        preload: Vec::new(),
        ..parent.clone()
    };
    let sub = state.topology.add_node(sub_spec);

    let dup: Vec<LinkSpec> = state
        .topology
        .neighbors(frs)
        .into_iter()
        .filter_map(|n| {
            let l = state.topology.link(frs, n)?;
            Some(LinkSpec {
                a: sub_id.clone(),
                b: state.id(n).clone(),
                ..l.clone()
            })
        })
        .collect();
    for l in dup {
        state.topology.add_link(l);
    }
    state.topology.add_link(LinkSpec {
        a: sub_id.clone(),
        b: parent.id.clone(),
        one_way: monitor.parent_link,
        bandwidth: crate::model::Bandwidth::Unlimited,
    });

    state.assignment.push(None);
    state
        .caches
        .push(Some(LruCache::new(parent.cache_capacity)));
    state.holdings.push(Default::default());
    state.adjacency.insert((frs.min(sub), frs.max(sub)));
    for r in moved {
        state.assignment[r] = Some(sub);
    }
    state.spawned.insert(frs, sub);
    Ok(sub)
}
