//! Round-trip probe: sends `count` timestamped frames at a fixed interval and
//! matches echoes by sequence number on a monotonic clock.

use std::io::{ErrorKind, Read, Write};
use std::net::{SocketAddr, TcpStream, ToSocketAddrs, UdpSocket};
use std::time::{Duration, Instant};

use fogsim_core::stats::{summarize, LatencyStats};

use crate::frame::{take_prefixed, Frame, MIN_PAYLOAD_BYTES};
use crate::ProbeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transport {
    Datagram,
    Stream,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub host: String,
    pub port: u16,
    pub transport: Transport,
    pub count: u32,
    pub payload_bytes: usize,
    pub interval_ms: u64,
    pub timeout_ms: u64,
}

impl ProbeConfig {
    pub const DEFAULT_COUNT: u32 = 20;
    pub const DEFAULT_PAYLOAD_BYTES: usize = 64;
    pub const DEFAULT_INTERVAL_MS: u64 = 200;
    pub const DEFAULT_TIMEOUT_MS: u64 = 1000;

    pub fn new(host: impl Into<String>, port: u16) -> Self {
        ProbeConfig {
            host: host.into(),
            port,
            transport: Transport::Datagram,
            count: Self::DEFAULT_COUNT,
            payload_bytes: Self::DEFAULT_PAYLOAD_BYTES,
            interval_ms: Self::DEFAULT_INTERVAL_MS,
            timeout_ms: Self::DEFAULT_TIMEOUT_MS,
        }
    }

    pub fn validate(&self) -> Result<(), ProbeError> {
        if self.count == 0 {
            return Err(ProbeError::InvalidConfig("count must be at least 1".into()));
        }
        if self.payload_bytes < MIN_PAYLOAD_BYTES {
            return Err(ProbeError::InvalidConfig(format!(
                "payload of {} bytes is below the {MIN_PAYLOAD_BYTES}-byte minimum",
                self.payload_bytes
            )));
        }
        if self.timeout_ms == 0 {
            return Err(ProbeError::InvalidConfig("timeout must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    /// `summarize(raw_rtts_ms, lost)`.
    pub stats: LatencyStats,
    pub lost: usize,
    /// Answered round trips in sequence order, milliseconds.
    pub raw_rtts_ms: Vec<f64>,
}

fn resolve(host: &str, port: u16) -> Result<SocketAddr, ProbeError> {
    let resolve_error = |reason: String| ProbeError::Resolve {
        host: host.to_owned(),
        reason,
    };
    (host, port)
        .to_socket_addrs()
        .map_err(|e| resolve_error(e.to_string()))?
        .next()
        .ok_or_else(|| resolve_error("no addresses".into()))
}

/// One probe session's socket.
enum Channel {
    Datagram(UdpSocket),
    Stream {
        stream: TcpStream,
        pending: Vec<u8>,
    },
    /// Stream endpoint refused or timed out the connection: every frame is lost.
    Unreachable,
}

impl Channel {
    fn open(cfg: &ProbeConfig, target: SocketAddr) -> Result<Channel, ProbeError> {
        match cfg.transport {
            Transport::Datagram => {
                let local: SocketAddr = if target.is_ipv4() {
                    ([0, 0, 0, 0], 0).into()
                } else {
                    ([0u16; 8], 0).into()
                };
                let socket = UdpSocket::bind(local).map_err(ProbeError::Bind)?;
                socket.connect(target).map_err(ProbeError::Bind)?;
                Ok(Channel::Datagram(socket))
            }
            Transport::Stream => {
                match TcpStream::connect_timeout(&target, Duration::from_millis(cfg.timeout_ms)) {
                    Ok(stream) => {
                        stream.set_nodelay(true).map_err(ProbeError::Bind)?;
                        Ok(Channel::Stream {
                            stream,
                            pending: Vec::new(),
                        })
                    }
                    Err(_) => Ok(Channel::Unreachable),
                }
            }
        }
    }

    /// Send failures are not fatal: the frame simply goes unanswered.
    fn send(&mut self, frame: &Frame, payload_bytes: usize) {
        match self {
            Channel::Datagram(s) => {
                let _ = s.send(&frame.encode(payload_bytes));
            }
            Channel::Stream { stream, .. } => {
                let _ = stream.write_all(&frame.encode_prefixed(payload_bytes));
            }
            Channel::Unreachable => {}
        }
    }

    /// Frames received before `wait` elapses; empty on timeout.
    fn receive(&mut self, wait: Duration) -> Vec<Vec<u8>> {
        let wait = wait.max(Duration::from_millis(1));
        match self {
            Channel::Datagram(s) => {
                let mut buf = [0u8; 65_536];
                if s.set_read_timeout(Some(wait)).is_err() {
                    return Vec::new();
                }
                match s.recv(&mut buf) {
                    Ok(n) => vec![buf[..n].to_vec()],
                    // Refusals arrive as errors on connected sockets; keep waiting.
                    Err(e) if e.kind() == ErrorKind::ConnectionRefused => {
                        std::thread::sleep(wait);
                        Vec::new()
                    }
                    Err(_) => Vec::new(),
                }
            }
            Channel::Stream { stream, pending } => {
                let mut buf = [0u8; 65_536];
                if stream.set_read_timeout(Some(wait)).is_err() {
                    return Vec::new();
                }
                match stream.read(&mut buf) {
                    Ok(0) => {
                        std::thread::sleep(wait);
                        Vec::new()
                    }
                    Ok(n) => {
                        pending.extend_from_slice(&buf[..n]);
                        take_prefixed(pending)
                    }
                    Err(_) => Vec::new(),
                }
            }
            Channel::Unreachable => {
                std::thread::sleep(wait);
                Vec::new()
            }
        }
    }
}

pub fn probe(cfg: &ProbeConfig) -> Result<ProbeResult, ProbeError> {
    cfg.validate()?;
    let target = resolve(&cfg.host, cfg.port)?;
    let mut channel = Channel::open(cfg, target)?;
    let count = cfg.count as usize;
    let interval = Duration::from_millis(cfg.interval_ms);
    let timeout = Duration::from_millis(cfg.timeout_ms);
    let epoch = Instant::now();
    let mut sent: Vec<Option<Instant>> = vec![None; count];
    let mut sent_ns: Vec<u64> = vec![0; count];
    let mut rtts: Vec<Option<f64>> = vec![None; count];
    let mut next = 0usize;
    loop {
        let now = Instant::now();
        if next < count && now >= epoch + interval * next as u32 {
            sent_ns[next] = now.duration_since(epoch).as_nanos() as u64;
            channel.send(
                &Frame {
                    seq: next as u32,
                    timestamp_ns: sent_ns[next],
                },
                cfg.payload_bytes,
            );
            sent[next] = Some(now);
            next += 1;
            continue;
        }
        let all_sent = next == count;
        let last_deadline = sent[count - 1].map(|t| t + timeout);
        if all_sent && (rtts.iter().all(Option::is_some) || last_deadline.is_some_and(|d| now >= d))
        {
            break;
        }
        let wake = if all_sent {
            last_deadline.expect("all frames sent")
        } else {
            epoch + interval * next as u32
        };
        for bytes in channel.receive(wake.saturating_duration_since(now)) {
            let arrived = Instant::now();
            let Ok(frame) = Frame::decode(&bytes) else {
                continue;
            };
            let seq = frame.seq as usize;
            // Late, duplicate, or unknown echoes are discarded.
            let Some(at) = sent.get(seq).copied().flatten() else {
                continue;
            };
            if rtts[seq].is_some() || frame.timestamp_ns != sent_ns[seq] {
                continue;
            }
            let rtt = arrived.duration_since(at);
            if rtt <= timeout {
                rtts[seq] = Some(rtt.as_secs_f64() * 1000.0);
            }
        }
    }
    let raw_rtts_ms: Vec<f64> = rtts.iter().flatten().copied().collect();
    let lost = count - raw_rtts_ms.len();
    Ok(ProbeResult {
        stats: summarize(&raw_rtts_ms, lost),
        lost,
        raw_rtts_ms,
    })
}
