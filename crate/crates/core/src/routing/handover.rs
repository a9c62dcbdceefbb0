//! Handover of mobile robots between fog servers.

use crate::error::RoutingError;

use super::SystemState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandoverConfig {
    /// A covering FRS must be nearer than the current one by more than this.
    pub hysteresis_m: f64,
    pub delay_ms: f64,
}

impl Default for HandoverConfig {
    fn default() -> Self {
        HandoverConfig {
            hysteresis_m: 5.0,
            delay_ms: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HandoverDecision {
    Stay,
    MoveTo(usize),
}

/// Decides whether `robot` should leave its current fog server given its
/// current position.
pub fn handover(
    state: &SystemState,
    robot: usize,
    config: &HandoverConfig,
) -> Result<HandoverDecision, RoutingError> {
    let id = state.id(robot).clone();
    let pos = state
        .topology
        .node(robot)
        .position
        .ok_or_else(|| RoutingError::Uncovered(id.clone()))?;
    let (best, best_d) = state
        .topology
        .nearest_covering(&pos)
        .ok_or(RoutingError::Uncovered(id))?;
    let Some(current) = state.assignment[robot] else {
        return Ok(HandoverDecision::MoveTo(best));
    };
    if best == current {
        return Ok(HandoverDecision::Stay);
    }
    let cur = state.topology.node(current);
    let cur_d = cur.position.map_or(f64::INFINITY, |p| p.distance(&pos));
    if cur_d > cur.coverage_radius_m || best_d + config.hysteresis_m < cur_d {
        Ok(HandoverDecision::MoveTo(best))
    } else {
        Ok(HandoverDecision::Stay)
    }
}
