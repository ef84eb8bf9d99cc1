//! Command-line front end. `run` takes the argument list and output streams
//! so tests can drive it in-process.
//!
//! Exit codes: 0 success, 1 lint diagnostics, 2 bad user input, 3 I/O or
//! environment failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::calibration::{estimate_similarity, parse_correspondences, rmse};
use crate::compositor::Viewpoint;
use crate::error::{Error, Result};
use crate::pnm;
use crate::profile::{parse_profile, validate};
use crate::runtime::{parse_command_log, parse_sensor_log, Engine, LoggedCommand, Replay, SensorLog, TICK_RATE_HZ};
use crate::server::{self, ServeConfig};

#[derive(Parser, Debug)]
#[command(name = "duolayer", version, about = "Dual-layer transparent display simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Render front, back and composite frames for N ticks.
    Render(RenderArgs),
    /// Parse a profile and print lints.
    Validate {
        #[arg(long)]
        profile: PathBuf,
    },
    /// Fit a similarity transform to point pairs.
    Calibrate {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fit rotation and translation only.
        #[arg(long)]
        no_scale: bool,
    },
    /// Run a live session over TCP (commands) and HTTP (frames).
    Serve(ServeArgs),
    /// Render one composite per eye position along a path.
    SimulateView(SimulateArgs),
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    #[arg(long)]
    pub profile: PathBuf,
    /// Command log, one JSON object per line with a `tick` field.
    #[arg(long)]
    pub commands: Option<PathBuf>,
    /// Sensor replay file.
    #[arg(long)]
    pub sensors: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Eye position in meters, `X,Y,Z`.
    #[arg(long, default_value = "0,0,1.5", allow_hyphen_values = true)]
    pub eye: String,
    #[arg(long)]
    pub frames: u64,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long, default_value_t = server::DEFAULT_PORT)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Ticks per second of the session clock.
    #[arg(long, default_value_t = TICK_RATE_HZ as f64)]
    pub rate: f64,
    /// Append every accepted command to this file as it happens.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Start with the clock stopped.
    #[arg(long)]
    pub paused: bool,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub profile: PathBuf,
    /// Lines of `t x y z` (seconds, meters).
    #[arg(long)]
    pub eye_path: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub commands: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Cmd, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Cmd::Render(a) => render(&a, out).map(|_| 0),
        Cmd::Validate { profile } => validate_cmd(&profile, out),
        Cmd::Calibrate { pairs, out: dest, no_scale } => calibrate(&pairs, &dest, no_scale, out).map(|_| 0),
        Cmd::Serve(a) => {
            let cfg = ServeConfig {
                profile: a.profile,
                host: a.host,
                port: a.port,
                rate_hz: a.rate,
                log: a.log,
                start_paused: a.paused,
            };
            server::serve(cfg).map(|_| 0)
        }
        Cmd::SimulateView(a) => simulate_view(&a, out).map(|_| 0),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn parse_eye(s: &str) -> Result<Viewpoint> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::domain(format!("--eye expects X,Y,Z in meters, got `{s}`")))?;
    match v.as_slice() {
        [x, y, z] => Viewpoint::new(*x, *y, *z),
        _ => Err(Error::domain(format!("--eye expects three numbers, got `{s}`"))),
    }
}

fn load_logs(commands: Option<&Path>, sensors: Option<&Path>) -> Result<(Vec<LoggedCommand>, SensorLog)> {
    let c = match commands {
        Some(p) => parse_command_log(&read_text(p)?)?,
        None => Vec::new(),
    };
    let s = match sensors {
        Some(p) => parse_sensor_log(&read_text(p)?)?,
        None => Vec::new(),
    };
    Ok((c, s))
}

/// Writes `name` into `dir` and records its hash for the manifest.
struct FrameWriter {
    dir: PathBuf,
    manifest: String,
}

impl FrameWriter {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(FrameWriter { dir: dir.to_path_buf(), manifest: String::new() })
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_file(&self.dir.join(name), bytes)?;
        let digest = Sha256::digest(bytes);
        self.manifest.push_str(&format!("{digest:x}  {name}\n"));
        Ok(())
    }

    fn finish(self) -> Result<()> {
        write_file(&self.dir.join("manifest.txt"), self.manifest.as_bytes())
    }
}

/// Batch render: for each tick `k < frames`, apply the commands logged at
/// `k`, write the frames, then step.
pub fn render(a: &RenderArgs, out: &mut dyn Write) -> Result<()> {
    if a.frames == 0 {
        return Err(Error::domain("--frames must be at least 1"));
    }
    let eye = parse_eye(&a.eye)?;
    let mut eng = Engine::open(&a.profile)?;
    eng.set_viewpoint(eye);
    let (cmds, sensors) = load_logs(a.commands.as_deref(), a.sensors.as_deref())?;
    let mut w = FrameWriter::new(&a.out)?;
    Replay::new(&cmds, &sensors).advance_to(&mut eng, a.frames - 1, |e| {
        let f = e.render()?;
        let k = f.tick;
        w.put(&format!("front_{k:05}.pam"), &pnm::encode_pam(&f.front))?;
        w.put(&format!("back_{k:05}.pam"), &pnm::encode_pam(&f.back))?;
        w.put(&format!("composite_{k:05}.ppm"), &pnm::encode_ppm(&f.composite.buffer))?;
        w.put(&format!("composite_{k:05}.meta"), f.composite.sidecar().as_bytes())
    })?;
    w.finish()?;
    for a in eng.anomalies() {
        log::warn!("{a}");
    }
    let _ = writeln!(out, "wrote {} frames to {}", a.frames, a.out.display());
    Ok(())
}

fn validate_cmd(path: &Path, out: &mut dyn Write) -> Result<i32> {
    let p = parse_profile(&read_text(path)?)?;
    let diags = validate(&p);
    for d in &diags {
        let _ = writeln!(out, "{}: {d}", path.display());
    }
    Ok(if diags.is_empty() { 0 } else { 1 })
}

fn calibrate(pairs: &Path, dest: &Path, no_scale: bool, out: &mut dyn Write) -> Result<()> {
    let (src, dst) = parse_correspondences(&read_text(pairs)?)?;
    let t = estimate_similarity(&src, &dst, !no_scale)?;
    let report = rmse(&t, &src, &dst)?;
    write_file(dest, t.to_file_string().as_bytes())?;
    let _ = writeln!(out, "rmse {:.3} mm over {} pairs", report.rmse_m * 1000.0, src.len());
    Ok(())
}

/// `(tick, eye)` samples from `t x y z` lines; `tick = round(t · rate)`.
pub fn parse_eye_path(text: &str) -> Result<Vec<(u64, Viewpoint)>> {
    let mut out: Vec<(u64, Viewpoint)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |m: String| Error::Input(format!("eye path line {}: {m}", i + 1));
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| at(format!("expected `t x y z`, got `{line}`")))?;
        let [t, x, y, z] = v[..] else {
            return Err(at(format!("expected 4 numbers, got {}", v.len())));
        };
        if t < 0.0 {
            return Err(at(format!("time must be >= 0, got {t}")));
        }
        let tick = (t * TICK_RATE_HZ as f64).round() as u64;
        if out.last().is_some_and(|(prev, _)| tick < *prev) {
            return Err(at("times must not decrease".into()));
        }
        out.push((tick, Viewpoint::new(x, y, z).map_err(|e| at(e.to_string()))?));
    }
    if out.is_empty() {
        return Err(Error::Input("eye path is empty".into()));
    }
    Ok(out)
}

fn simulate_view(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let path = parse_eye_path(&read_text(&a.eye_path)?)?;
    let mut eng = Engine::open(&a.profile)?;
    let (cmds, _) = load_logs(a.commands.as_deref(), None)?;
    let mut replay = Replay::new(&cmds, &[]);
    let mut w = FrameWriter::new(&a.out)?;
    for (i, (tick, eye)) in path.iter().enumerate() {
        replay.advance_to(&mut eng, *tick, |_| Ok(()))?;
        eng.set_viewpoint(*eye);
        let f = eng.render()?;
        w.put(&format!("view_{i:05}.ppm"), &pnm::encode_ppm(&f.composite.buffer))?;
        w.put(&format!("view_{i:05}.meta"), f.composite.sidecar().as_bytes())?;
    }
    w.finish()?;
    let _ = writeln!(out, "wrote {} views to {}", path.len(), a.out.display());
    Ok(())
}
