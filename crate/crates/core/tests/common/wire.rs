//! Minimal clients for the session server's two protocols.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::path::Path;
use std::time::Duration;

use duolayer::server::{self, ServeConfig, ServerHandle};
use serde_json::Value;

pub fn start(profile: &Path, paused: bool, rate_hz: f64, log: Option<&Path>) -> ServerHandle {
    let mut cfg = ServeConfig::new(profile);
    cfg.port = 0;
    cfg.start_paused = paused;
    cfg.rate_hz = rate_hz;
    cfg.log = log.map(Path::to_path_buf);
    server::spawn(cfg).unwrap()
}

pub struct Client {
    conn: TcpStream,
    reader: BufReader<TcpStream>,
    /// Tick events seen while waiting for replies, in arrival order.
    pub events: Vec<u64>,
}

impl Client {
    pub fn connect(addr: SocketAddr) -> Client {
        let conn = TcpStream::connect(addr).unwrap();
        conn.set_nodelay(true).unwrap();
        conn.set_read_timeout(Some(Duration::from_secs(20))).unwrap();
        let reader = BufReader::new(conn.try_clone().unwrap());
        Client { conn, reader, events: Vec::new() }
    }

    pub fn write_raw(&mut self, bytes: &[u8]) {
        self.conn.write_all(bytes).unwrap();
    }

    /// Next non-event line, verbatim.
    pub fn next_reply(&mut self) -> String {
        loop {
            let mut line = String::new();
            let n = self.reader.read_line(&mut line).unwrap();
            assert!(n > 0, "server closed the connection");
            let line = line.trim_end().to_string();
            if line.starts_with("{\"event\"") {
                let v: Value = serde_json::from_str(&line).unwrap();
                self.events.push(v["tick"].as_u64().unwrap());
            } else {
                return line;
            }
        }
    }

    pub fn send(&mut self, line: &str) -> String {
        self.write_raw(format!("{line}\n").as_bytes());
        self.next_reply()
    }

    pub fn request(&mut self, line: &str) -> Value {
        serde_json::from_str(&self.send(line)).unwrap()
    }
}

pub struct HttpReply {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl HttpReply {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers.iter().find(|(k, _)| k.eq_ignore_ascii_case(name)).map(|(_, v)| v.as_str())
    }
}

pub fn http(addr: SocketAddr, method: &str, path: &str, accept: Option<&str>) -> HttpReply {
    let mut s = TcpStream::connect(addr).unwrap();
    let mut req = format!("{method} {path} HTTP/1.1\r\nHost: test\r\n");
    if let Some(a) = accept {
        req.push_str(&format!("Accept: {a}\r\n"));
    }
    req.push_str("\r\n");
    s.write_all(req.as_bytes()).unwrap();
    let mut raw = Vec::new();
    s.read_to_end(&mut raw).unwrap();
    let end = raw.windows(4).position(|w| w == b"\r\n\r\n").expect("header terminator");
    let head = String::from_utf8(raw[..end].to_vec()).unwrap();
    let mut lines = head.split("\r\n");
    let status = lines.next().unwrap().split(' ').nth(1).unwrap().parse().unwrap();
    let headers = lines
        .map(|l| {
            let (k, v) = l.split_once(':').unwrap();
            (k.to_string(), v.trim().to_string())
        })
        .collect();
    HttpReply { status, headers, body: raw[end + 4..].to_vec() }
}
