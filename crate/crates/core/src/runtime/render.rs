use std::borrow::Cow;

use super::engine::Engine;
use super::sensors::apply_mask;
use crate::compositor::{composite, render_layers, CompositeFrame, EntityRender, OpticalModel, RenderOptions};
use crate::error::Result;
use crate::model::PixelBuffer;

/// Everything the two panels and the viewer see at one tick.
#[derive(Clone, Debug, PartialEq)]
pub struct TickFrames {
    pub tick: u64,
    pub front: PixelBuffer,
    pub back: PixelBuffer,
    pub composite: CompositeFrame,
}

impl Engine {
    /// Image each entity draws this tick. Entities fed by a depth split show
    /// their masked share of the segment's asset, and nothing before the
    /// first depth frame.
    fn entity_images(&self) -> Vec<Option<Cow<'_, PixelBuffer>>> {
        let s = self.state();
        s.profile
            .entities
            .iter()
            .map(|e| {
                let split = s.profile.segments.iter().find_map(|(name, seg)| {
                    if seg.front_entity == e.name {
                        Some((name, seg, 0))
                    } else if seg.back_entity == e.name {
                        Some((name, seg, 1))
                    } else {
                        None
                    }
                });
                match split {
                    Some((name, seg, side)) => {
                        let masks = s.masks.get(name)?;
                        let rgb = self.assets().frame(&seg.asset, s.tick)?;
                        let mask = if side == 0 { &masks.0 } else { &masks.1 };
                        Some(Cow::Owned(apply_mask(rgb, mask)))
                    }
                    None => self.assets().frame(&e.asset, s.tick).map(Cow::Borrowed),
                }
            })
            .collect()
    }

    /// Renders both panels and the composite from the current viewpoint.
    pub fn render(&self) -> Result<TickFrames> {
        let s = self.state();
        let images = self.entity_images();
        let renders: Vec<EntityRender<'_>> = s
            .profile
            .entities
            .iter()
            .zip(&images)
            .filter_map(|(e, img)| {
                let img = img.as_ref()?;
                Some(EntityRender {
                    image: img.as_ref(),
                    size_m: s.profile.assets[&e.asset].size_m,
                    center_m: e.center_m,
                    scale: e.scale,
                    alpha: e.alpha,
                    state: s.entities[&e.name].state,
                    linking: e.linking,
                    linking_params: e.linking_params,
                })
            })
            .collect();
        let g = &s.profile.geometry;
        let opts = RenderOptions { link_placement: s.link_placement, viewpoint: s.viewpoint };
        let (front, back) = render_layers(g, &renders, &opts)?;
        let mut comp = composite(&front, &back, g, &s.viewpoint, &OpticalModel { ambient: s.ambient })?;
        comp.tick = s.tick;
        Ok(TickFrames { tick: s.tick, front, back, composite: comp })
    }
}
