//! Live session: newline-delimited JSON commands over TCP, plus HTTP GET
//! for frames and state on the same port.
//!
//! One engine thread owns the [`Engine`]; connection threads only parse
//! lines and enqueue messages, so commands from all clients form one total
//! order. See `docs/protocol.md` for the wire format.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::pnm;
use crate::runtime::{format_command_log, Command, Engine, TickFrames};

pub const DEFAULT_PORT: u16 = 7470;
/// Longest accepted request line.
pub const MAX_LINE_BYTES: usize = 1 << 20;

#[derive(Clone, Debug)]
pub struct ServeConfig {
    pub profile: PathBuf,
    pub host: String,
    pub port: u16,
    pub rate_hz: f64,
    pub log: Option<PathBuf>,
    pub start_paused: bool,
}

impl ServeConfig {
    pub fn new(profile: impl Into<PathBuf>) -> Self {
        ServeConfig {
            profile: profile.into(),
            host: "127.0.0.1".into(),
            port: DEFAULT_PORT,
            rate_hz: crate::runtime::TICK_RATE_HZ as f64,
            log: None,
            start_paused: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameKind {
    Composite,
    Front,
    Back,
}

enum Msg {
    Request { id: Value, body: Value, reply: Sender<String> },
    Subscribe(Sender<String>),
    Frame(Sender<Arc<TickFrames>>),
    State(Sender<Value>),
    Shutdown,
}

/// Handle to a running server; dropping it does not stop the server.
pub struct ServerHandle {
    addr: SocketAddr,
    inbox: Sender<Msg>,
    stop: Arc<AtomicBool>,
    engine: Option<JoinHandle<()>>,
    acceptor: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops the clock and the listener and waits for both threads.
    pub fn shutdown(mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = self.inbox.send(Msg::Shutdown);
        // Wake the blocking accept.
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.acceptor.take() {
            let _ = h.join();
        }
        if let Some(h) = self.engine.take() {
            let _ = h.join();
        }
    }

    /// Blocks until the server stops.
    pub fn wait(mut self) {
        if let Some(h) = self.engine.take() {
            let _ = h.join();
        }
    }
}

/// Binds and starts serving in background threads. Port 0 picks a free
/// port; see [`ServerHandle::addr`].
pub fn spawn(cfg: ServeConfig) -> Result<ServerHandle> {
    if !(cfg.rate_hz > 0.0 && cfg.rate_hz.is_finite()) {
        return Err(Error::domain(format!("--rate must be > 0, got {}", cfg.rate_hz)));
    }
    let mut engine = Engine::open(&cfg.profile)?;
    let listener = TcpListener::bind((cfg.host.as_str(), cfg.port))
        .map_err(|e| Error::io(&PathBuf::from(format!("{}:{}", cfg.host, cfg.port)), e))?;
    let addr = listener.local_addr().map_err(|e| Error::io(&PathBuf::from("listener"), e))?;
    let log_file = match &cfg.log {
        Some(p) => Some(
            OpenOptions::new()
                .create(true)
                .write(true)
                .truncate(true)
                .open(p)
                .map_err(|e| Error::io(p, e))?,
        ),
        None => None,
    };
    if let Some(dir) = cfg.profile.parent() {
        engine.set_base_dir(dir);
    }
    let (tx, rx) = mpsc::channel();
    let stop = Arc::new(AtomicBool::new(false));
    let period = Duration::from_secs_f64(1.0 / cfg.rate_hz);
    let paused = cfg.start_paused;
    let engine_thread = thread::Builder::new()
        .name("engine".into())
        .spawn(move || EngineLoop { engine, paused, period, subscribers: Vec::new(), frame: None, log_file, logged: 0 }.run(rx))
        .map_err(|e| Error::io(&PathBuf::from("engine thread"), e))?;
    let acceptor = {
        let tx = tx.clone();
        let stop = stop.clone();
        thread::Builder::new()
            .name("accept".into())
            .spawn(move || accept_loop(listener, tx, stop))
            .map_err(|e| Error::io(&PathBuf::from("accept thread"), e))?
    };
    log::info!("serving {} on {addr}", cfg.profile.display());
    Ok(ServerHandle { addr, inbox: tx, stop, engine: Some(engine_thread), acceptor: Some(acceptor) })
}

/// Serves until the process is killed.
pub fn serve(cfg: ServeConfig) -> Result<()> {
    let h = spawn(cfg)?;
    eprintln!("listening on {}", h.addr());
    h.wait();
    Ok(())
}

enum Failure {
    /// The request did not decode into a command.
    Parse(String),
    Rejected(String),
}

struct EngineLoop {
    engine: Engine,
    paused: bool,
    period: Duration,
    subscribers: Vec<Sender<String>>,
    /// Rendered frames of the current state; cleared by any change.
    frame: Option<Arc<TickFrames>>,
    log_file: Option<std::fs::File>,
    logged: usize,
}

impl EngineLoop {
    fn run(mut self, rx: Receiver<Msg>) {
        let mut next_tick = Instant::now() + self.period;
        loop {
            let msg = if self.paused {
                rx.recv().map_err(|_| RecvTimeoutError::Disconnected)
            } else {
                rx.recv_timeout(next_tick.saturating_duration_since(Instant::now()))
            };
            match msg {
                Ok(Msg::Shutdown) | Err(RecvTimeoutError::Disconnected) => return,
                Ok(m) => {
                    let was_paused = self.paused;
                    self.on_message(m);
                    if was_paused && !self.paused {
                        next_tick = Instant::now() + self.period;
                    }
                }
                Err(RecvTimeoutError::Timeout) => {}
            }
            if !self.paused && Instant::now() >= next_tick {
                self.advance(1);
                next_tick += self.period;
                // After a stall, resume the cadence instead of bursting.
                if next_tick < Instant::now() {
                    next_tick = Instant::now() + self.period;
                }
            }
        }
    }

    fn advance(&mut self, n: u64) {
        for _ in 0..n {
            self.engine.step_idle();
            self.frame = None;
            let ev = format!("{{\"event\":\"tick\",\"tick\":{}}}", self.engine.tick());
            self.subscribers.retain(|s| s.send(ev.clone()).is_ok());
        }
    }

    fn on_message(&mut self, m: Msg) {
        match m {
            Msg::Request { id, body, reply } => {
                let line = match self.execute(body) {
                    Ok(Value::Null) => format!("{{\"id\":{id},\"ok\":true}}"),
                    Ok(data) => format!("{{\"id\":{id},\"ok\":true,\"data\":{data}}}"),
                    Err(Failure::Parse(detail)) => parse_error(&id, &detail),
                    Err(Failure::Rejected(e)) => format!("{{\"id\":{id},\"ok\":false,\"error\":{}}}", Value::String(e)),
                };
                let _ = reply.send(line);
            }
            Msg::Subscribe(s) => self.subscribers.push(s),
            Msg::Frame(reply) => {
                let f = match &self.frame {
                    Some(f) => f.clone(),
                    None => match self.engine.render() {
                        Ok(f) => {
                            let f = Arc::new(f);
                            self.frame = Some(f.clone());
                            f
                        }
                        Err(e) => {
                            log::error!("render failed: {e}");
                            return;
                        }
                    },
                };
                let _ = reply.send(f);
            }
            Msg::State(reply) => {
                let _ = reply.send(self.state());
            }
            Msg::Shutdown => {}
        }
    }

    fn state(&self) -> Value {
        let mut v = self.engine.query("state").expect("state topic exists");
        v["paused"] = Value::Bool(self.paused);
        v
    }

    fn execute(&mut self, body: Value) -> std::result::Result<Value, Failure> {
        match body.get("cmd").and_then(Value::as_str) {
            Some("pause") => {
                self.paused = true;
                return Ok(json!({ "tick": self.engine.tick() }));
            }
            Some("resume") => {
                self.paused = false;
                return Ok(json!({ "tick": self.engine.tick() }));
            }
            Some("query") if body.get("topic").and_then(Value::as_str).unwrap_or("state") == "state" => {
                return Ok(self.state());
            }
            _ => {}
        }
        let cmd: Command = serde_json::from_value(body).map_err(|e| Failure::Parse(e.to_string()))?;
        let steps = match &cmd {
            Command::Step { n } if !self.paused => {
                return Err(Failure::Rejected(format!("step is only allowed while paused (requested {n})")));
            }
            Command::Step { n } => *n,
            _ => 0,
        };
        let mutates = cmd.mutates();
        let before = self.engine.tick();
        let out = if steps > 0 {
            // Run the ticks here so every one is broadcast.
            self.advance(steps);
            self.engine.record(before, cmd);
            Ok(json!({ "tick": self.engine.tick() }))
        } else {
            self.engine.handle(cmd).map_err(|e| Failure::Rejected(e.to_string()))
        };
        if out.is_ok() && mutates {
            self.frame = None;
        }
        self.flush_log();
        out
    }

    fn flush_log(&mut self) {
        let Some(f) = self.log_file.as_mut() else { return };
        let log = self.engine.command_log();
        if self.logged < log.len() {
            let text = format_command_log(&log[self.logged..]);
            if let Err(e) = f.write_all(text.as_bytes()).and_then(|_| f.flush()) {
                log::error!("command log write failed: {e}");
            }
            self.logged = log.len();
        }
    }
}

fn accept_loop(listener: TcpListener, tx: Sender<Msg>, stop: Arc<AtomicBool>) {
    for conn in listener.incoming() {
        if stop.load(Ordering::SeqCst) {
            return;
        }
        let Ok(stream) = conn else { continue };
        let tx = tx.clone();
        let _ = thread::Builder::new().name("conn".into()).spawn(move || {
            if let Err(e) = handle_connection(stream, tx) {
                log::debug!("connection closed: {e}");
            }
        });
    }
}

/// Reads one line, capped at [`MAX_LINE_BYTES`]. `None` at end of stream.
fn read_line_capped<R: BufRead>(r: &mut R) -> std::io::Result<Option<Vec<u8>>> {
    let mut buf = Vec::new();
    let n = std::io::Read::take(&mut *r, MAX_LINE_BYTES as u64 + 1).read_until(b'\n', &mut buf)?;
    if n == 0 {
        return Ok(None);
    }
    if buf.len() > MAX_LINE_BYTES && !buf.ends_with(b"\n") {
        // Drain the rest of the oversized line.
        loop {
            let mut rest = Vec::new();
            let m = std::io::Read::take(&mut *r, MAX_LINE_BYTES as u64).read_until(b'\n', &mut rest)?;
            if m == 0 || rest.ends_with(b"\n") {
                break;
            }
        }
        return Ok(Some(b"\xff".to_vec()));
    }
    Ok(Some(buf))
}

fn handle_connection(stream: TcpStream, tx: Sender<Msg>) -> std::io::Result<()> {
    // Replies are small and latency-bound.
    stream.set_nodelay(true)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let Some(first) = read_line_capped(&mut reader)? else { return Ok(()) };
    if first.starts_with(b"GET ") || first.starts_with(b"HEAD ") || first.starts_with(b"POST ") {
        return handle_http(&first, reader, stream, &tx);
    }

    let (out_tx, out_rx) = mpsc::channel::<String>();
    let mut writer = stream.try_clone()?;
    let writer_thread = thread::spawn(move || {
        for mut line in out_rx {
            line.push('\n');
            if writer.write_all(line.as_bytes()).is_err() {
                break;
            }
        }
        let _ = writer.flush();
    });
    if tx.send(Msg::Subscribe(out_tx.clone())).is_err() {
        return Ok(());
    }
    let mut line = Some(first);
    while let Some(bytes) = line {
        dispatch_line(&bytes, &tx, &out_tx);
        line = read_line_capped(&mut reader)?;
    }
    drop(out_tx);
    let _ = stream.shutdown(Shutdown::Read);
    let _ = writer_thread.join();
    Ok(())
}

/// Parses one request line and queues it. Malformed lines are answered
/// here without touching the engine.
fn dispatch_line(bytes: &[u8], tx: &Sender<Msg>, out: &Sender<String>) {
    let text = match std::str::from_utf8(bytes) {
        Ok(t) => t.trim(),
        Err(_) => {
            let _ = out.send(parse_error(&Value::Null, "request is not valid UTF-8 or is too long"));
            return;
        }
    };
    if text.is_empty() {
        return;
    }
    let body: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            let _ = out.send(parse_error(&Value::Null, &e.to_string()));
            return;
        }
    };
    let id = body.get("id").cloned().unwrap_or(Value::Null);
    if !body.is_object() {
        let _ = out.send(parse_error(&Value::Null, "request must be a JSON object"));
        return;
    }
    if !(id.is_i64() || id.is_u64()) {
        let _ = out.send(parse_error(&id, "request needs an integer `id`"));
        return;
    }
    if body.get("cmd").and_then(Value::as_str).is_none() {
        let _ = out.send(parse_error(&id, "request needs a string `cmd`"));
        return;
    }
    let _ = tx.send(Msg::Request { id, body, reply: out.clone() });
}

fn parse_error(id: &Value, detail: &str) -> String {
    format!("{{\"id\":{id},\"ok\":false,\"error\":\"parse\",\"detail\":{}}}", Value::String(detail.to_string()))
}

fn handle_http(
    request_line: &[u8],
    mut reader: BufReader<TcpStream>,
    mut stream: TcpStream,
    tx: &Sender<Msg>,
) -> std::io::Result<()> {
    let line = String::from_utf8_lossy(request_line);
    let mut parts = line.split_whitespace();
    let method = parts.next().unwrap_or("");
    let target = parts.next().unwrap_or("/");
    let path = target.split('?').next().unwrap_or("/");
    let mut accept = String::new();
    while let Some(h) = read_line_capped(&mut reader)? {
        let h = String::from_utf8_lossy(&h);
        let h = h.trim_end();
        if h.is_empty() {
            break;
        }
        if let Some((k, v)) = h.split_once(':') {
            if k.eq_ignore_ascii_case("accept") {
                accept = v.trim().to_ascii_lowercase();
            }
        }
    }
    let head_only = method == "HEAD";
    if method != "GET" && !head_only {
        return respond(&mut stream, "405 Method Not Allowed", "text/plain", &[], b"only GET is supported\n", false);
    }
    let kind = match path {
        "/frame/composite" => Some(FrameKind::Composite),
        "/frame/front" => Some(FrameKind::Front),
        "/frame/back" => Some(FrameKind::Back),
        _ => None,
    };
    if let Some(kind) = kind {
        let (rtx, rrx) = mpsc::channel();
        if tx.send(Msg::Frame(rtx)).is_err() {
            return respond(&mut stream, "503 Service Unavailable", "text/plain", &[], b"session ended\n", head_only);
        }
        let Ok(frames) = rrx.recv() else {
            return respond(&mut stream, "500 Internal Server Error", "text/plain", &[], b"render failed\n", head_only);
        };
        let (ctype, body) = encode_frame(&frames, kind, accept.contains("image/png"));
        let tick = frames.tick.to_string();
        return respond(&mut stream, "200 OK", ctype, &[("X-Tick", &tick)], &body, head_only);
    }
    if path == "/state" {
        let (rtx, rrx) = mpsc::channel();
        if tx.send(Msg::State(rtx)).is_err() {
            return respond(&mut stream, "503 Service Unavailable", "text/plain", &[], b"session ended\n", head_only);
        }
        let Ok(state) = rrx.recv() else { return Ok(()) };
        let tick = state["tick"].to_string();
        let body = state.to_string();
        return respond(&mut stream, "200 OK", "application/json", &[("X-Tick", &tick)], body.as_bytes(), head_only);
    }
    respond(&mut stream, "404 Not Found", "text/plain", &[], b"not found\n", head_only)
}

/// PNG when asked for; otherwise PPM for the composite and PAM (with
/// alpha) for a panel.
pub fn encode_frame(f: &TickFrames, kind: FrameKind, png: bool) -> (&'static str, Vec<u8>) {
    let (buf, alpha) = match kind {
        FrameKind::Composite => (&f.composite.buffer, false),
        FrameKind::Front => (&f.front, true),
        FrameKind::Back => (&f.back, true),
    };
    if png {
        match pnm::encode_png(buf, alpha) {
            Ok(b) => return ("image/png", b),
            Err(e) => log::error!("png encode failed: {e}"),
        }
    }
    if alpha {
        ("image/x-portable-arbitrarymap", pnm::encode_pam(buf))
    } else {
        ("image/x-portable-pixmap", pnm::encode_ppm(buf))
    }
}

fn respond(
    s: &mut TcpStream,
    status: &str,
    ctype: &str,
    extra: &[(&str, &str)],
    body: &[u8],
    head_only: bool,
) -> std::io::Result<()> {
    let mut head = format!(
        "HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\nContent-Length: {}\r\nAccess-Control-Allow-Origin: *\r\nAccess-Control-Expose-Headers: X-Tick\r\nCache-Control: no-store\r\nConnection: close\r\n",
        body.len()
    );
    for (k, v) in extra {
        head.push_str(&format!("{k}: {v}\r\n"));
    }
    head.push_str("\r\n");
    s.write_all(head.as_bytes())?;
    if !head_only {
        s.write_all(body)?;
    }
    s.flush()?;
    let _ = s.shutdown(Shutdown::Write);
    Ok(())
}
