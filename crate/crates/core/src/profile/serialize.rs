use std::fmt::Write;

use super::{AssetKind, Condition, ExperienceProfile};
use crate::linking::LinkingParams;
use crate::transition::{Direction, Envelope, Look, TransitionSpec};

struct Out {
    s: String,
    depth: usize,
}

impl Out {
    fn line(&mut self, text: impl AsRef<str>) {
        for _ in 0..self.depth {
            self.s.push_str("  ");
        }
        self.s.push_str(text.as_ref());
        self.s.push('\n');
    }

    fn open(&mut self, head: impl AsRef<str>) {
        self.line(format!("{} {{", head.as_ref()));
        self.depth += 1;
    }

    fn close(&mut self) {
        self.depth -= 1;
        self.line("}");
    }
}

fn nums(vs: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in vs.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{v}").unwrap();
    }
    s
}

fn quote(s: &str) -> String {
    let mut q = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            '\t' => q.push_str("\\t"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

fn envelope(o: &mut Out, name: &str, e: &Envelope) {
    o.open(name);
    o.line(format!("delay_s {};", e.delay_s()));
    o.line(format!("duration_s {};", e.duration_s()));
    for p in e.phases() {
        o.line(format!("phase {} {};", p.style.name(), nums(&[p.fraction, p.start_value, p.end_value])));
    }
    o.close();
}

fn look(o: &mut Out, name: &str, l: &Look) {
    o.open(name);
    o.line(format!("scale {};", l.scale));
    o.line(format!("shadow {};", l.shadow));
    o.line(format!("offset_m {};", nums(&l.offset_m)));
    o.close();
}

fn direction(d: Direction) -> String {
    match d {
        Direction::FrontToBack => "front_to_back".into(),
        Direction::BackToFront => "back_to_front".into(),
        Direction::FadeIn(l) => format!("fade_in {}", l.as_str()),
        Direction::FadeOut(l) => format!("fade_out {}", l.as_str()),
    }
}

fn transition(o: &mut Out, t: &TransitionSpec) {
    o.open("transition");
    o.line(format!("direction {};", direction(t.direction)));
    o.line(format!("params {};", t.parameters.names().join(" ")));
    o.line(format!("duration_s {};", t.duration_s));
    o.line(format!("lag_s {};", t.lag_s));
    if let Some(sep) = t.separation_m {
        o.line(format!("separation_m {sep};"));
    }
    envelope(o, "source", &t.source_envelope);
    envelope(o, "dest", &t.dest_envelope);
    look(o, "absent", &t.absent_look);
    look(o, "present", &t.present_look);
    o.close();
}

fn link(o: &mut Out, style: &str, p: &LinkingParams) {
    o.open(format!("link {style}"));
    o.line(format!("halo_radius_px {};", p.halo_radius_px));
    o.line(format!("halo_blur_px {};", p.halo_blur_px));
    o.line(format!("outline_thickness_px {};", p.outline_thickness_px));
    o.line(format!("clone_alpha {};", p.clone_alpha));
    o.line(format!("landmark_size_px {};", p.landmark_size_px));
    if let Some(c) = p.tint {
        o.line(format!("tint {};", nums(&c.channels())));
    }
    o.close();
}

/// Canonical text form. Every key is written out, so
/// `parse(serialize(p)) == p` and serializing twice gives the same bytes.
pub fn serialize_profile(p: &ExperienceProfile) -> String {
    let mut o = Out { s: String::new(), depth: 0 };
    let g = &p.geometry;
    o.open("display");
    o.line(format!("resolution_px {} {};", g.width_px, g.height_px));
    o.line(format!("size_m {};", nums(&[g.physical_width_m, g.physical_height_m])));
    o.line(format!("separation_m {};", g.separation_m));
    o.close();

    o.open("zones");
    o.line(format!("personal_max_m {};", p.zone_config.personal_max_m));
    o.line(format!("social_max_m {};", p.zone_config.social_max_m));
    o.close();

    if let Some(c) = &p.calibration {
        let n = c.to_numbers();
        o.open("calibration");
        o.line(format!("scale {};", n[0]));
        o.line(format!("rotation {};", nums(&n[1..10])));
        o.line(format!("translation {};", nums(&n[10..13])));
        o.close();
    }

    for (name, a) in &p.assets {
        o.open(format!("asset {name}"));
        let kind = match a.kind {
            AssetKind::Image => "image",
            AssetKind::FrameSequence => "frames",
        };
        o.line(format!("kind {kind};"));
        let paths: Vec<String> = a.paths.iter().map(|s| quote(s)).collect();
        o.line(format!("path {};", paths.join(" ")));
        o.line(format!("size_m {};", nums(&a.size_m)));
        o.close();
    }

    for e in &p.entities {
        o.open(format!("entity {}", e.name));
        o.line(format!("asset {};", e.asset));
        o.line(format!("layer {};", e.layer.as_str()));
        o.line(format!("center_m {};", nums(&e.center_m)));
        o.line(format!("scale {};", e.scale));
        o.line(format!("alpha {};", e.alpha));
        link(&mut o, e.linking.name(), &e.linking_params);
        o.close();
    }

    for (name, c) in &p.cues {
        o.open(format!("cue {name}"));
        o.line(format!("target {};", c.target));
        transition(&mut o, &c.spec);
        o.close();
    }

    for b in &p.bindings {
        o.open("bind");
        let when = match b.condition {
            Condition::ZoneEnter(z) => format!("zone_enter {}", z.name()),
            Condition::ZoneExit(z) => format!("zone_exit {}", z.name()),
            Condition::DepthBelow(t) => format!("depth_below {t}"),
            Condition::Manual => "manual".into(),
        };
        o.line(format!("when {when};"));
        o.line(format!("source {};", b.source.name()));
        o.line(format!("fire {};", b.fire));
        o.close();
    }

    for (name, s) in &p.segments {
        o.open(format!("segment {name}"));
        o.line(format!("asset {};", s.asset));
        o.line(format!("front {};", s.front_entity));
        o.line(format!("back {};", s.back_entity));
        o.line(format!("threshold_m {};", s.threshold_m));
        o.close();
    }
    o.s
}
