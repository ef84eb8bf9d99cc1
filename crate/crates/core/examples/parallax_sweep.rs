//! How far a back-panel point appears to slide across the front panel as
//! the viewer moves sideways, for a few panel gaps.

use duolayer::compositor::{project_back_to_front, Viewpoint};

fn main() -> duolayer::error::Result<()> {
    let target = [0.2, 0.0];
    println!("back point at x = {} m; eye 1.5 m away", target[0]);
    println!("{:>8} {:>10} {:>10} {:>10}", "eye_x", "d=0.10", "d=0.36", "d=0.72");
    for step in -4..=4 {
        let ex = step as f64 * 0.1;
        let v = Viewpoint::new(ex, 0.0, 1.5)?;
        let xs: Vec<f64> = [0.10, 0.36, 0.72].iter().map(|&d| project_back_to_front(target, &v, d)[0]).collect();
        println!("{ex:>8.2} {:>10.4} {:>10.4} {:>10.4}", xs[0], xs[1], xs[2]);
    }
    // Lateral shift per meter of eye motion is d / (z + d).
    for d in [0.10, 0.36, 0.72] {
        println!("gap {d:.2} m: apparent shift {:.3} m per m of head motion", d / (1.5 + d));
    }
    Ok(())
}
