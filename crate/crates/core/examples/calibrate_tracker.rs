//! Fits the tracker-to-display transform from the shipped 12-point pairs
//! and checks it against the transform the pairs were generated from.

use std::path::PathBuf;

use duolayer::calibration::{estimate_similarity, parse_correspondences, rmse, SimilarityTransform};
use duolayer::linalg::Vec3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let (tracker, display) = parse_correspondences(&std::fs::read_to_string(dir.join("calib_12pt.pairs"))?)?;
    let known = SimilarityTransform::parse_file(&std::fs::read_to_string(dir.join("calib_12pt.known"))?)?;

    let fit = estimate_similarity(&tracker, &display, true)?;
    let report = rmse(&fit, &tracker, &display)?;
    println!("fitted over {} pairs, rmse {:.3e} m", tracker.len(), report.rmse_m);
    let worst = fit.to_numbers().iter().zip(known.to_numbers()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("largest parameter error vs known transform: {worst:.3e}");

    // A fingertip seen by the tracker, expressed on the display.
    let tip = Vec3::new(0.1, 0.5, -0.8);
    let on_display = fit.apply(tip);
    println!("tracker {:?} -> display {:?} ({:.3} m in front of the glass)", tip.0, on_display.0, on_display.z());
    print!("{}", fit.to_file_string());
    Ok(())
}
