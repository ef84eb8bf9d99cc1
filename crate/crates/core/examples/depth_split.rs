//! Splits a remote participant's frame by depth: pixels nearer than the
//! threshold go to the front panel, the rest to the back.

use std::path::PathBuf;

use duolayer::pnm;
use duolayer::runtime::{depth_segment, parse_sensor_log, SensorSample};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let rgb = pnm::read_image(&dir.join("assets/remote.pam"))?;
    let log = parse_sensor_log(&std::fs::read_to_string(dir.join("e14_depth.sensors"))?)?;

    for (tick, sample) in &log {
        let SensorSample::DepthFrame(depth) = sample else { continue };
        for threshold in [1.0, 1.5] {
            let (front, back) = depth_segment(depth, &rgb, threshold)?;
            println!(
                "tick {tick:>2}  threshold {threshold:.1} m  front {:>4} px  back {:>4} px  invalid {:>2} px",
                front.count(),
                back.count(),
                rgb.width() * rgb.height() - front.count() - back.count()
            );
        }
    }
    Ok(())
}
