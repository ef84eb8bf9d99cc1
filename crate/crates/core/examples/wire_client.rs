//! Starts a server on an ephemeral port, drives it over the line protocol
//! the way an operator console does, then fetches a frame over HTTP.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::PathBuf;

use duolayer::server::{self, ServeConfig};

fn send(conn: &mut TcpStream, reader: &mut impl BufRead, line: &str) -> std::io::Result<String> {
    writeln!(conn, "{line}")?;
    // Tick events interleave with replies; skip them.
    loop {
        let mut reply = String::new();
        reader.read_line(&mut reply)?;
        if !reply.starts_with("{\"event\"") {
            return Ok(reply.trim_end().to_string());
        }
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ServeConfig::new(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/e1_hand.prof"));
    cfg.port = 0;
    cfg.start_paused = true;
    let handle = server::spawn(cfg)?;
    let addr = handle.addr();
    println!("serving on {addr}");

    let mut conn = TcpStream::connect(addr)?;
    let mut reader = BufReader::new(conn.try_clone()?);
    for line in [
        r#"{"id":1,"cmd":"trigger","cue":"raise"}"#,
        r#"{"id":2,"cmd":"step","n":15}"#,
        r#"{"id":3,"cmd":"query","topic":"entities"}"#,
        r#"{"id":4,"cmd":"trigger","cue":"nope"}"#,
        r#"{"id":5,"cmd":"set_separation","separation_m":0}"#,
        "this is not json",
    ] {
        println!("> {line}\n< {}", send(&mut conn, &mut reader, line)?);
    }

    let mut http = TcpStream::connect(addr)?;
    write!(http, "GET /frame/composite HTTP/1.1\r\nHost: localhost\r\nAccept: image/png\r\n\r\n")?;
    let mut resp = Vec::new();
    http.read_to_end(&mut resp)?;
    let head_end = resp.windows(4).position(|w| w == b"\r\n\r\n").unwrap_or(resp.len());
    println!("{}", String::from_utf8_lossy(&resp[..head_end]));
    println!("({} body bytes)", resp.len().saturating_sub(head_end + 4));

    handle.shutdown();
    Ok(())
}
