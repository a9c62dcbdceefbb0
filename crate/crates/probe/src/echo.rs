//! Echo responder: returns every payload verbatim to its sender, optionally
//! after a fixed delay. Runs on background threads until stopped.

use std::io::{ErrorKind, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, UdpSocket};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use crate::probe::Transport;
use crate::ProbeError;

/// How often idle loops look at the stop flag.
const POLL: Duration = Duration::from_millis(20);

pub struct EchoServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    worker: Option<JoinHandle<()>>,
}

impl EchoServer {
    /// Binds `addr` (port 0 picks a free port) and starts answering.
    pub fn start(
        addr: SocketAddr,
        transport: Transport,
        delay: Duration,
    ) -> Result<EchoServer, ProbeError> {
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let (addr, worker) = match transport {
            Transport::Datagram => {
                let socket = UdpSocket::bind(addr).map_err(ProbeError::Bind)?;
                socket
                    .set_read_timeout(Some(POLL))
                    .map_err(ProbeError::Bind)?;
                let local = socket.local_addr().map_err(ProbeError::Bind)?;
                (
                    local,
                    std::thread::spawn(move || serve_datagrams(socket, delay, flag)),
                )
            }
            Transport::Stream => {
                let listener = TcpListener::bind(addr).map_err(ProbeError::Bind)?;
                listener.set_nonblocking(true).map_err(ProbeError::Bind)?;
                let local = listener.local_addr().map_err(ProbeError::Bind)?;
                (
                    local,
                    std::thread::spawn(move || serve_streams(listener, delay, flag)),
                )
            }
        };
        Ok(EchoServer {
            addr,
            stop,
            worker: Some(worker),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Blocks until the responder has stopped.
    pub fn wait(mut self) {
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }

    pub fn stop(self) {
        drop(self);
    }
}

impl Drop for EchoServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

fn serve_datagrams(socket: UdpSocket, delay: Duration, stop: Arc<AtomicBool>) {
    let Ok(sender) = socket.try_clone() else {
        return;
    };
    let (tx, rx) = mpsc::channel::<(Instant, SocketAddr, Vec<u8>)>();
    // Echoes leave from their own thread so each waits out its delay with a
    // single sleep.
    let echo = std::thread::spawn(move || {
        for (at, to, bytes) in rx {
            std::thread::sleep(at.saturating_duration_since(Instant::now()));
            let _ = sender.send_to(&bytes, to);
        }
    });
    let mut buf = [0u8; 65_536];
    while !stop.load(Ordering::SeqCst) {
        match socket.recv_from(&mut buf) {
            Ok((n, from)) => {
                if tx
                    .send((Instant::now() + delay, from, buf[..n].to_vec()))
                    .is_err()
                {
                    break;
                }
            }
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
            Err(_) => {}
        }
    }
    drop(tx);
    let _ = echo.join();
}

fn serve_streams(listener: TcpListener, delay: Duration, stop: Arc<AtomicBool>) {
    let mut clients = Vec::new();
    while !stop.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, _)) => {
                let flag = Arc::clone(&stop);
                clients.push(std::thread::spawn(move || {
                    serve_stream(stream, delay, flag)
                }));
            }
            Err(e) if e.kind() == ErrorKind::WouldBlock => std::thread::sleep(POLL),
            Err(_) => std::thread::sleep(POLL),
        }
    }
    for c in clients {
        let _ = c.join();
    }
}

/// Reads chunks as they arrive and hands them to a writer that sends each
/// one back once its delay has passed.
fn serve_stream(stream: TcpStream, delay: Duration, stop: Arc<AtomicBool>) {
    let Ok(mut writer) = stream.try_clone() else {
        return;
    };
    let mut reader = stream;
    let _ = reader.set_nonblocking(false);
    let _ = reader.set_read_timeout(Some(POLL));
    let _ = writer.set_nodelay(true);
    let (tx, rx) = mpsc::channel::<(Instant, Vec<u8>)>();
    let echo = std::thread::spawn(move || {
        for (at, bytes) in rx {
            std::thread::sleep(at.saturating_duration_since(Instant::now()));
            if writer.write_all(&bytes).is_err() {
                return;
            }
        }
    });
    let mut buf = [0u8; 65_536];
    while !stop.load(Ordering::SeqCst) {
        match reader.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => {
                if tx
                    .send((Instant::now() + delay, buf[..n].to_vec()))
                    .is_err()
                {
                    break;
                }
            }
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
            Err(_) => break,
        }
    }
    drop(tx);
    let _ = echo.join();
}
