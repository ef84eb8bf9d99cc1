//! A scripted Wizard-of-Oz session against the engine directly: trigger
//! the hand cue, step the clock, and read back both panels' alpha.

use std::path::PathBuf;

use duolayer::runtime::{Command, Engine};
use serde_json::json;

fn main() -> duolayer::error::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/e1_hand.prof");
    let mut eng = Engine::open(&path)?;

    eng.handle(Command::Trigger { cue: "raise".into() })?;
    for _ in 0..=6 {
        let e = &eng.query("entities")?["hand"];
        let alpha = |layer: &str| e[layer]["alpha"].as_f64().unwrap_or(f64::NAN);
        let (front, back) = (alpha("front"), alpha("back"));
        println!("tick {:>2}  t={:.3}s  front {front:.4}  back {back:.4}", eng.tick(), eng.state().time_s());
        eng.handle(Command::Step { n: 5 })?;
    }

    // Operator tweaks, as a live console would send them.
    eng.handle(Command::SetEye { eye: [0.25, 0.0, 1.2] })?;
    eng.handle(Command::SetParam { path: "entity.speaker.alpha".into(), value: json!(0.6) })?;
    let frames = eng.render()?;
    println!("rendered tick {} ({}x{})", frames.tick, frames.composite.buffer.width(), frames.composite.buffer.height());

    print!("{}", duolayer::runtime::format_command_log(eng.command_log()));
    Ok(())
}
