//! Samples the presence curves of a back-to-front move: the default
//! s-curve, a linear ramp, and the s-curve with a 0.3 s lag. Pass `--csv`
//! for machine-readable output.

use duolayer::transition::{Direction, Envelope, ParamSet, TransitionSpec};

fn main() -> duolayer::error::Result<()> {
    let csv = std::env::args().any(|a| a == "--csv");
    let curved = TransitionSpec::directional(
        Direction::BackToFront,
        ParamSet::ALPHA_ONLY,
        1.0,
        0.0,
        Envelope::s_curve(1.0, 0.0, 1.0)?,
        Envelope::s_curve(0.0, 1.0, 1.0)?,
    )?;
    let linear = TransitionSpec::linear(Direction::BackToFront, 1.0, 0.0)?;
    let mut lagged = curved.clone();
    lagged.lag_s = 0.3;
    lagged.validate()?;

    let specs = [("s_curve", &curved), ("linear", &linear), ("lagged", &lagged)];
    if csv {
        println!("curve,t_s,front,back");
    }
    for (name, spec) in specs {
        if !csv {
            println!("{name} ({:.2} s)", spec.total_s());
        }
        for k in 0..=13 {
            let t = spec.total_s() * k as f64 / 13.0;
            let p = spec.presence_at(t);
            let (f, b) = (p.front.unwrap_or(0.0), p.back.unwrap_or(0.0));
            if csv {
                println!("{name},{t},{f},{b}");
            } else {
                let bar = |v: f64| "#".repeat((v * 20.0).round() as usize);
                println!("  t={t:.3}  front {f:.3} {:<20}  back {b:.3} {}", bar(f), bar(b));
            }
        }
    }
    Ok(())
}
