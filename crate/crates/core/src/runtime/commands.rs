use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Operator commands. The JSON form is the wire protocol's request body
/// minus `id`: `{"cmd": "trigger", "cue": "raise"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum Command {
    Trigger {
        cue: String,
    },
    SetEye {
        eye: [f64; 3],
    },
    SetSeparation {
        separation_m: f64,
    },
    SetParam {
        path: String,
        value: serde_json::Value,
    },
    LoadProfile {
        text: String,
    },
    Step {
        #[serde(default = "one")]
        n: u64,
    },
    Query {
        #[serde(default = "state_topic")]
        topic: String,
    },
}

fn one() -> u64 {
    1
}

fn state_topic() -> String {
    "state".into()
}

impl Command {
    /// Whether replaying the command changes engine state. Steps are implied
    /// by the log's tick numbers and queries are read-only.
    pub fn mutates(&self) -> bool {
        !matches!(self, Command::Step { .. } | Command::Query { .. })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    #[default]
    Operator,
    /// Appended by a sensor binding; regenerated on replay.
    Binding,
}

fn is_operator(o: &Origin) -> bool {
    *o == Origin::Operator
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoggedCommand {
    pub tick: u64,
    #[serde(default, skip_serializing_if = "is_operator")]
    pub origin: Origin,
    #[serde(flatten)]
    pub command: Command,
}

/// One JSON object per line; blank lines and `#` comments are skipped.
pub fn parse_command_log(text: &str) -> Result<Vec<LoggedCommand>> {
    let mut out: Vec<LoggedCommand> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let c: LoggedCommand =
            serde_json::from_str(line).map_err(|e| Error::Input(format!("command log line {}: {e}", i + 1)))?;
        if let Some(prev) = out.last() {
            if c.tick < prev.tick {
                return Err(Error::Input(format!(
                    "command log line {}: tick {} goes backwards (previous {})",
                    i + 1,
                    c.tick,
                    prev.tick
                )));
            }
        }
        out.push(c);
    }
    Ok(out)
}

pub fn format_command_log(log: &[LoggedCommand]) -> String {
    let mut s = String::new();
    for c in log {
        s.push_str(&serde_json::to_string(c).expect("commands serialize"));
        s.push('\n');
    }
    s
}
