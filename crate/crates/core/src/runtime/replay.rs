use std::collections::BTreeMap;

use super::commands::{LoggedCommand, Origin};
use super::engine::Engine;
use super::sensors::SensorSample;
use crate::error::{Error, Result};

/// Cursor over a command log and a sensor log. Binding-fired commands are
/// skipped (the sensor log regenerates them), as are steps and queries,
/// whose effect is carried by the tick numbers.
pub struct Replay<'a> {
    commands: &'a [LoggedCommand],
    next: usize,
    sensors: BTreeMap<u64, Vec<SensorSample>>,
}

impl<'a> Replay<'a> {
    pub fn new(commands: &'a [LoggedCommand], sensors: &[(u64, SensorSample)]) -> Self {
        let mut by_tick: BTreeMap<u64, Vec<SensorSample>> = BTreeMap::new();
        for (t, s) in sensors {
            by_tick.entry(*t).or_default().push(s.clone());
        }
        Replay { commands, next: 0, sensors: by_tick }
    }

    /// Applies the commands logged for the engine's current tick, then
    /// steps until `tick`, applying each tick's commands on arrival.
    /// `each_tick` sees the engine once per tick after its commands.
    pub fn advance_to(
        &mut self,
        eng: &mut Engine,
        tick: u64,
        mut each_tick: impl FnMut(&Engine) -> Result<()>,
    ) -> Result<()> {
        loop {
            let now = eng.tick();
            while let Some(c) = self.commands.get(self.next).filter(|c| c.tick <= now) {
                self.next += 1;
                if c.tick < now || c.origin == Origin::Binding || !c.command.mutates() {
                    continue;
                }
                eng.handle(c.command.clone())
                    .map_err(|e| Error::Input(format!("replayed command at tick {now} failed: {e}")))?;
            }
            each_tick(eng)?;
            if now >= tick {
                return Ok(());
            }
            let samples = self.sensors.remove(&(now + 1)).unwrap_or_default();
            eng.step(&samples);
        }
    }
}
