//! Per-node FIFO service queue with a fixed number of parallel servers.

use std::collections::VecDeque;

use crate::model::NodeId;

#[derive(Debug, Clone, PartialEq)]
pub struct ServerState {
    pub node: NodeId,
    pub parallel_servers: u32,
    pub service_time_ms: f64,
    /// Requests holding a server, including those whose start is scheduled.
    pub busy: u32,
    pub fifo_queue: VecDeque<usize>,
}

/// A request that may begin service at `time_ms`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceStart {
    pub request: usize,
    pub time_ms: f64,
}

impl ServerState {
    pub fn new(node: NodeId, parallel_servers: u32, service_time_ms: f64) -> Self {
        ServerState {
            node,
            parallel_servers,
            service_time_ms,
            busy: 0,
            fifo_queue: VecDeque::new(),
        }
    }

    /// Releases one server; the head of the queue, if any, takes it at `now`.
    pub fn finish(&mut self, now: f64) -> Option<ServiceStart> {
        match self.fifo_queue.pop_front() {
            Some(request) => Some(ServiceStart {
                request,
                time_ms: now,
            }),
            None => {
                self.busy = self.busy.saturating_sub(1);
                None
            }
        }
    }
}

/// Admits `request` to `state`. Service starts at `now` iff a server is
/// free; otherwise the request waits at the back of the queue.
pub fn enqueue_for_service(
    state: &mut ServerState,
    request: usize,
    now: f64,
) -> Option<ServiceStart> {
    if state.busy < state.parallel_servers {
        state.busy += 1;
        Some(ServiceStart {
            request,
            time_ms: now,
        })
    } else {
        state.fifo_queue.push_back(request);
        None
    }
}
