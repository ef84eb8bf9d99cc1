//! Transparent panels show black as see-through, so a pixel's opacity is
//! its brightness. Prints the alpha of a few colors and what a viewer sees
//! when each is drawn over a white back-panel pixel.

use duolayer::model::{luminance_alpha, Color};

fn main() {
    let swatches = [
        ("black", Color::BLACK),
        ("white", Color::WHITE),
        ("red", Color::new(1.0, 0.0, 0.0)),
        ("green", Color::new(0.0, 1.0, 0.0)),
        ("blue", Color::new(0.0, 0.0, 1.0)),
        ("skin", Color::new(0.92, 0.72, 0.58)),
    ];
    println!("{:<6} {:>8}  seen over white", "color", "alpha");
    for (name, c) in swatches {
        let a = luminance_alpha(c);
        let seen = c.add(Color::WHITE.scale(1.0 - a)).clamp_unit();
        let [r, g, b] = seen.channels();
        println!("{name:<6} {a:>8.4}  ({r:.3}, {g:.3}, {b:.3})");
    }
}
