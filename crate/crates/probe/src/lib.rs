//! Real-network round-trip latency probe and the echo responder it is tested
//! against.

pub mod echo;
pub mod frame;
pub mod probe;

use thiserror::Error;

pub use echo::EchoServer;
pub use frame::{Frame, FrameError};
pub use probe::{probe, ProbeConfig, ProbeResult, Transport};

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("cannot resolve {host}: {reason}")]
    Resolve { host: String, reason: String },
    #[error("cannot bind local socket: {0}")]
    Bind(#[source] std::io::Error),
    #[error("invalid probe configuration: {0}")]
    InvalidConfig(String),
}
