//! Draws one front-panel tool with each linking style and writes what the
//! back panel shows behind it, plus a composite, into the directory given
//! as the first argument (default: a temp dir).

use std::path::PathBuf;

use duolayer::compositor::{composite, render_layers, EntityRender, OpticalModel, RenderOptions, Viewpoint};
use duolayer::linking::{LinkingParams, LinkingStyle};
use duolayer::model::{Color, DisplayGeometry, LayerId, Pixel, PixelBuffer};
use duolayer::pnm;
use duolayer::transition::LayerRenderState;

fn disc(size: usize) -> PixelBuffer {
    let mut b = PixelBuffer::new(size, size);
    let c = (size as f64 - 1.0) / 2.0;
    for y in 0..size {
        for x in 0..size {
            if (x as f64 - c).hypot(y as f64 - c) <= c * 0.9 {
                b.set(x, y, Pixel::opaque(Color::new(0.95, 0.6, 0.2)));
            }
        }
    }
    b
}

fn main() -> duolayer::error::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("duolayer-linking"));
    std::fs::create_dir_all(&out).map_err(|e| duolayer::error::Error::io(&out, e))?;
    let g = DisplayGeometry::new(160, 90, 1.218, 0.685, 0.72)?;
    let tool = disc(24);
    let eye = Viewpoint::default();

    for style in LinkingStyle::ALL {
        let e = EntityRender {
            image: &tool,
            size_m: [0.18, 0.18],
            center_m: [0.0, 0.0],
            scale: 1.0,
            alpha: 1.0,
            state: LayerRenderState::resting(LayerId::Front),
            linking: style,
            linking_params: LinkingParams::default(),
        };
        let (front, back) = render_layers(&g, &[e], &RenderOptions::default())?;
        let lit = back.pixels().iter().filter(|p| p.alpha > 0.0).count();
        println!("{:<9} back-panel pixels lit: {lit}", style.name());
        let comp = composite(&front, &back, &g, &eye, &OpticalModel::default())?;
        pnm::write_bytes(&out.join(format!("{}_back.pam", style.name())), &pnm::encode_pam(&back))?;
        pnm::write_bytes(&out.join(format!("{}_seen.ppm", style.name())), &pnm::encode_ppm(&comp.buffer))?;
    }
    println!("frames in {}", out.display());
    Ok(())
}
