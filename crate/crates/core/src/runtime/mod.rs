//! Fixed-timestep engine: active cues, sensor bindings, operator commands
//! and replay.

mod commands;
mod engine;
pub mod proximity;
mod render;
mod replay;
pub mod sensors;

pub use commands::{format_command_log, parse_command_log, Command, LoggedCommand, Origin};
pub use engine::{ActiveCue, AssetLibrary, Engine, EngineState, EntityStatus};
pub use proximity::{classify_proximity, Zone, ZoneConfig};
pub use render::TickFrames;
pub use replay::Replay;
pub use sensors::{
    depth_segment, format_sensor_log, ingest_hand, parse_sensor_log, DepthFrame, HandFrame, HandIngest, SensorLog,
    SensorSample,
};

pub const TICK_RATE_HZ: u64 = 30;

/// Simulation time of `tick`, derived afresh each time so it never drifts.
pub fn time_of_tick(tick: u64) -> f64 {
    tick as f64 / TICK_RATE_HZ as f64
}
