//! What a viewer sees through the two stacked panels.
//!
//! The front panel lies in the plane `z = 0`, the back panel in `z = -d`
//! where `d` is the separation, and the eye sits at `z = z_e > 0`. Lateral
//! coordinates are panel meters (center origin, `+y` up).
//!
//! Each panel pixel emits its color and transmits `1 - α` of the light
//! behind it, where `α` is the BT.709 luminance of the emitted color. The
//! back panel is lit from behind by a uniform ambient color.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::linking::{mask_of, render_linking, LinkingParams, LinkingStyle};
use crate::model::{luminance_alpha, Color, DisplayGeometry, LayerId, Pixel, PixelBuffer};
use crate::transition::{LayerRenderState, RenderParams};

/// Drop shadow displacement in display pixels (right, down).
pub const SHADOW_OFFSET_PX: [i64; 2] = [8, 8];
/// Peak opacity of a drop shadow at shadow intensity 1.
pub const SHADOW_STRENGTH: f64 = 0.5;
/// Alpha threshold for deriving an entity's linking mask.
pub const LINK_MASK_THRESHOLD: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Viewpoint {
    /// Eye position relative to the front panel's center; `z` is the
    /// distance in front of the panel.
    pub eye: Vec3,
}

impl Default for Viewpoint {
    /// Seated viewer 1.5 m in front of the panel center.
    fn default() -> Self {
        Viewpoint { eye: Vec3::new(0.0, 0.0, 1.5) }
    }
}

impl Viewpoint {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Viewpoint { eye: Vec3::new(x, y, z) };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.eye.is_finite() {
            return Err(Error::domain("eye position must be finite"));
        }
        if self.eye.z() <= 0.0 {
            return Err(Error::domain(format!("eye must be in front of the panel (z > 0), got z={}", self.eye.z())));
        }
        Ok(())
    }

    fn lateral(&self) -> [f64; 2] {
        [self.eye.x(), self.eye.y()]
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OpticalModel {
    /// Light arriving from behind the back panel.
    pub ambient: Color,
}

/// Where the ray from the eye to back-plane point `b` crosses the front
/// plane.
pub fn project_back_to_front(b: [f64; 2], v: &Viewpoint, separation_m: f64) -> [f64; 2] {
    let e = v.lateral();
    let k = v.eye.z() / (v.eye.z() + separation_m);
    [e[0] + (b[0] - e[0]) * k, e[1] + (b[1] - e[1]) * k]
}

/// Back-plane point seen through front-plane point `p`.
pub fn project_front_to_back(p: [f64; 2], v: &Viewpoint, separation_m: f64) -> [f64; 2] {
    let e = v.lateral();
    let k = (v.eye.z() + separation_m) / v.eye.z();
    [e[0] + (p[0] - e[0]) * k, e[1] + (p[1] - e[1]) * k]
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompositeFrame {
    pub buffer: PixelBuffer,
    pub tick: u64,
    pub eye: Vec3,
    pub separation_m: f64,
}

impl CompositeFrame {
    /// `key=value` metadata sidecar.
    pub fn sidecar(&self) -> String {
        format!(
            "tick={}\neye_x_m={}\neye_y_m={}\neye_z_m={}\nseparation_m={}\nwidth_px={}\nheight_px={}\n",
            self.tick,
            self.eye.x(),
            self.eye.y(),
            self.eye.z(),
            self.separation_m,
            self.buffer.width(),
            self.buffer.height()
        )
    }
}

fn check_dims(buf: &PixelBuffer, g: &DisplayGeometry, what: &str) -> Result<()> {
    if buf.dims() != (g.width_px, g.height_px) {
        return Err(Error::domain(format!(
            "{what} buffer is {}x{}, display is {}x{}",
            buf.width(),
            buf.height(),
            g.width_px,
            g.height_px
        )));
    }
    Ok(())
}

#[inline]
fn composite_pixel(
    x: usize,
    y: usize,
    front: &PixelBuffer,
    back: &PixelBuffer,
    g: &DisplayGeometry,
    v: &Viewpoint,
    ambient: Color,
) -> Pixel {
    let f = front.get(x, y).emitted();
    let a_f = luminance_alpha(f);
    let p = g.px_to_m_unchecked([x as f64 + 0.5, y as f64 + 0.5]);
    let b_m = project_front_to_back(p, v, g.separation_m);
    let b_px = g.m_to_px(b_m);
    let behind_front = if (0.0..=g.width_px as f64).contains(&b_px[0]) && (0.0..=g.height_px as f64).contains(&b_px[1]) {
        let b = back.sample_emitted_bilinear(b_px[0], b_px[1]);
        let a_b = luminance_alpha(b);
        b.add(ambient.scale(1.0 - a_b))
    } else {
        ambient
    };
    Pixel::opaque(f.add(behind_front.scale(1.0 - a_f)).clamp_unit())
}

/// Observed image through both panels from viewpoint `v`.
pub fn composite(
    front: &PixelBuffer,
    back: &PixelBuffer,
    g: &DisplayGeometry,
    v: &Viewpoint,
    m: &OpticalModel,
) -> Result<CompositeFrame> {
    check_dims(front, g, "front")?;
    check_dims(back, g, "back")?;
    v.validate()?;
    let w = g.width_px;
    let mut pixels = vec![Pixel::TRANSPARENT; w * g.height_px];
    pixels.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            *out = composite_pixel(x, y, front, back, g, v, m.ambient);
        }
    });
    Ok(CompositeFrame {
        buffer: PixelBuffer::from_pixels(w, g.height_px, pixels)?,
        tick: 0,
        eye: v.eye,
        separation_m: g.separation_m,
    })
}

/// Single-threaded twin of [`composite`].
pub fn composite_serial(
    front: &PixelBuffer,
    back: &PixelBuffer,
    g: &DisplayGeometry,
    v: &Viewpoint,
    m: &OpticalModel,
) -> Result<CompositeFrame> {
    check_dims(front, g, "front")?;
    check_dims(back, g, "back")?;
    v.validate()?;
    let mut out = PixelBuffer::new(g.width_px, g.height_px);
    for y in 0..g.height_px {
        for x in 0..g.width_px {
            out.set(x, y, composite_pixel(x, y, front, back, g, v, m.ambient));
        }
    }
    Ok(CompositeFrame { buffer: out, tick: 0, eye: v.eye, separation_m: g.separation_m })
}

/// Where linking overlays land on the back panel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkPlacement {
    /// Straight behind the entity, as seen by an on-axis viewer at infinity.
    #[default]
    OnAxis,
    /// Re-projected so it lines up with the entity from the current eye.
    ViewerCorrected,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RenderOptions {
    pub link_placement: LinkPlacement,
    pub viewpoint: Viewpoint,
}

/// One entity ready to draw: its current image and resolved pose.
#[derive(Clone, Debug)]
pub struct EntityRender<'a> {
    pub image: &'a PixelBuffer,
    /// Physical size of the image at scale 1.
    pub size_m: [f64; 2],
    pub center_m: [f64; 2],
    pub scale: f64,
    pub alpha: f64,
    pub state: LayerRenderState,
    pub linking: LinkingStyle,
    pub linking_params: LinkingParams,
}

/// Draws `image` into a display-sized transparent buffer, centered at
/// `center_m` with physical size `size_m · scale`. Samples outside the image
/// rectangle are transparent; inside, bilinear with edge clamping.
pub fn place_image(
    g: &DisplayGeometry,
    image: &PixelBuffer,
    size_m: [f64; 2],
    center_m: [f64; 2],
    scale: f64,
    alpha: f64,
) -> PixelBuffer {
    let mut out = PixelBuffer::new(g.width_px, g.height_px);
    if alpha <= 0.0 || scale <= 0.0 {
        return out;
    }
    let c = g.m_to_px(center_m);
    let dw = size_m[0] / g.m_per_px_x() * scale;
    let dh = size_m[1] / g.m_per_px_y() * scale;
    if !(dw > 0.0 && dh > 0.0 && c[0].is_finite() && c[1].is_finite()) {
        return out;
    }
    let x0 = ((c[0] - dw / 2.0).floor().max(0.0)) as usize;
    let x1 = ((c[0] + dw / 2.0).ceil().min(g.width_px as f64)).max(0.0) as usize;
    let y0 = ((c[1] - dh / 2.0).floor().max(0.0)) as usize;
    let y1 = ((c[1] + dh / 2.0).ceil().min(g.height_px as f64)).max(0.0) as usize;
    let (iw, ih) = (image.width() as f64, image.height() as f64);
    for y in y0..y1 {
        let v = (y as f64 + 0.5 - c[1]) / dh + 0.5;
        let sy = v * ih;
        if !(0.0..ih).contains(&sy) {
            continue;
        }
        for x in x0..x1 {
            let u = (x as f64 + 0.5 - c[0]) / dw + 0.5;
            let sx = u * iw;
            if !(0.0..iw).contains(&sx) {
                continue;
            }
            let px = image.sample_bilinear(sx, sy);
            if px.alpha > 0.0 {
                out.set(x, y, Pixel::new(px.color, px.alpha * alpha));
            }
        }
    }
    out
}

fn shadow_of(placed: &PixelBuffer, intensity: f64) -> PixelBuffer {
    let (w, h) = placed.dims();
    let mut out = PixelBuffer::new(w, h);
    let [dx, dy] = SHADOW_OFFSET_PX;
    for y in 0..h {
        for x in 0..w {
            let a = placed.get(x, y).alpha;
            if a <= 0.0 {
                continue;
            }
            let (sx, sy) = (x as i64 + dx, y as i64 + dy);
            if sx >= 0 && sy >= 0 && (sx as usize) < w && (sy as usize) < h {
                out.set(sx as usize, sy as usize, Pixel::new(Color::BLACK, intensity * SHADOW_STRENGTH * a));
            }
        }
    }
    out
}

/// Resamples a front-aligned overlay onto the back panel so it lines up
/// with its entity from viewpoint `v`.
pub fn reproject_to_back(overlay: &PixelBuffer, g: &DisplayGeometry, v: &Viewpoint) -> PixelBuffer {
    let mut out = PixelBuffer::new(g.width_px, g.height_px);
    for y in 0..g.height_px {
        for x in 0..g.width_px {
            let b = g.px_to_m_unchecked([x as f64 + 0.5, y as f64 + 0.5]);
            let p = g.m_to_px(project_back_to_front(b, v, g.separation_m));
            if (0.0..g.width_px as f64).contains(&p[0]) && (0.0..g.height_px as f64).contains(&p[1]) {
                out.set(x, y, overlay.sample_bilinear(p[0], p[1]));
            }
        }
    }
    out
}

fn layer_params<'s>(state: &'s LayerRenderState, layer: LayerId) -> &'s RenderParams {
    state.get(layer)
}

fn placed_for(g: &DisplayGeometry, e: &EntityRender<'_>, rp: &RenderParams, alpha: f64) -> PixelBuffer {
    let center = [e.center_m[0] + rp.offset_m[0], e.center_m[1] + rp.offset_m[1]];
    place_image(g, e.image, e.size_m, center, e.scale * rp.scale, alpha)
}

/// Renders every entity onto the front and back panel buffers. Entities draw
/// in slice order; shadows go beneath their entity; linking overlays of
/// front-layer entities go on top of the back panel.
pub fn render_layers(
    g: &DisplayGeometry,
    entities: &[EntityRender<'_>],
    opts: &RenderOptions,
) -> Result<(PixelBuffer, PixelBuffer)> {
    let mut front = PixelBuffer::new(g.width_px, g.height_px);
    let mut back = PixelBuffer::new(g.width_px, g.height_px);
    let mut overlays = Vec::new();
    for e in entities {
        for layer in LayerId::ALL {
            let rp = layer_params(&e.state, layer);
            let alpha = rp.alpha * e.alpha;
            if alpha <= 0.0 {
                continue;
            }
            let placed = placed_for(g, e, rp, alpha);
            let target = match layer {
                LayerId::Front => &mut front,
                LayerId::Back => &mut back,
            };
            if rp.shadow > 0.0 {
                target.draw_over(&shadow_of(&placed, rp.shadow))?;
            }
            target.draw_over(&placed)?;
        }
        let front_alpha = e.state.front.alpha * e.alpha;
        if e.linking != LinkingStyle::None && front_alpha > 0.0 {
            let full = placed_for(g, e, &e.state.front, 1.0);
            let mask = mask_of(&full, LINK_MASK_THRESHOLD);
            let mut overlay = render_linking(e.linking, &full, &mask, &e.linking_params)?;
            for px in overlay.pixels_mut() {
                px.alpha *= front_alpha;
            }
            if opts.link_placement == LinkPlacement::ViewerCorrected {
                overlay = reproject_to_back(&overlay, g, &opts.viewpoint);
            }
            overlays.push(overlay);
        }
    }
    for o in &overlays {
        back.draw_over(o)?;
    }
    Ok((front, back))
}
