use std::collections::{BTreeMap, HashMap};

use super::lexer::Pos;
use super::syntax::{parse_tree, Arg, Block, Item, Stmt, Value};
use super::{
    AssetDecl, AssetKind, BindingDecl, Condition, CueDecl, DistanceSource, EntityDecl, ExperienceProfile, ParseError,
    SegmentDecl,
};
use crate::calibration::SimilarityTransform;
use crate::linalg::{Mat3, Vec3};
use crate::linking::{LinkingParams, LinkingStyle};
use crate::model::{Color, DisplayGeometry, LayerId};
use crate::runtime::proximity::{Zone, ZoneConfig};
use crate::transition::{Direction, EasingStyle, Envelope, Look, ParamSet, PhaseSpec, TransitionSpec};

type PResult<T> = Result<T, ParseError>;

struct Ctx<'s> {
    src: &'s str,
}

/// Tracks keys seen in one block to reject duplicates.
struct Seen(HashMap<String, Pos>);

impl Seen {
    fn new() -> Self {
        Seen(HashMap::new())
    }
}

impl<'s> Ctx<'s> {
    fn err(&self, pos: Pos, msg: impl Into<String>) -> ParseError {
        ParseError::at(self.src, pos, msg.into())
    }

    fn once(&self, seen: &mut Seen, item: &Item) -> PResult<()> {
        if let Some(first) = seen.0.get(item.key()) {
            return Err(self.err(
                item.pos(),
                format!("duplicate key `{}` (first set on line {})", item.key(), first.line),
            ));
        }
        seen.0.insert(item.key().to_string(), item.pos());
        Ok(())
    }

    fn as_stmt<'a>(&self, item: &'a Item) -> PResult<&'a Stmt> {
        match item {
            Item::Stmt(s) => Ok(s),
            Item::Block(b) => Err(self.err(b.pos, format!("`{}` takes values, not a block", b.name))),
        }
    }

    fn as_block<'a>(&self, item: &'a Item) -> PResult<&'a Block> {
        match item {
            Item::Block(b) => Ok(b),
            Item::Stmt(s) => Err(self.err(s.pos, format!("`{}` must be a block", s.key))),
        }
    }

    fn arity<'a>(&self, s: &'a Stmt, n: usize) -> PResult<&'a [Arg]> {
        if s.args.len() < n {
            let at = s.args.last().map_or(s.pos, |a| a.pos);
            return Err(self.err(at, format!("`{}` expects {n} value(s), found {}", s.key, s.args.len())));
        }
        if s.args.len() > n {
            return Err(self.err(s.args[n].pos, format!("`{}` expects {n} value(s), found {}", s.key, s.args.len())));
        }
        Ok(&s.args)
    }

    fn num(&self, a: &Arg) -> PResult<f64> {
        match &a.value {
            Value::Number(t) => {
                let v: f64 = t.parse().map_err(|_| self.err(a.pos, format!("invalid number `{t}`")))?;
                if !v.is_finite() {
                    return Err(self.err(a.pos, format!("number `{t}` is out of range")));
                }
                Ok(v)
            }
            other => Err(self.err(a.pos, format!("expected a number, found {}", other.describe()))),
        }
    }

    fn num_where(&self, a: &Arg, ok: impl Fn(f64) -> bool, what: &str) -> PResult<f64> {
        let v = self.num(a)?;
        if !ok(v) {
            return Err(self.err(a.pos, format!("value {v} must be {what}")));
        }
        Ok(v)
    }

    fn positive(&self, a: &Arg) -> PResult<f64> {
        self.num_where(a, |v| v > 0.0, "> 0")
    }

    fn unit(&self, a: &Arg) -> PResult<f64> {
        self.num_where(a, |v| (0.0..=1.0).contains(&v), "in [0, 1]")
    }

    fn uint(&self, a: &Arg) -> PResult<usize> {
        match &a.value {
            Value::Number(t) if t.bytes().all(|b| b.is_ascii_digit()) => {
                t.parse().map_err(|_| self.err(a.pos, format!("integer `{t}` is out of range")))
            }
            other => Err(self.err(a.pos, format!("expected a non-negative integer, found {}", other.describe()))),
        }
    }

    fn positive_uint(&self, a: &Arg) -> PResult<usize> {
        let v = self.uint(a)?;
        if v == 0 {
            return Err(self.err(a.pos, "value must be a positive integer"));
        }
        Ok(v)
    }

    fn ident<'a>(&self, a: &'a Arg) -> PResult<&'a str> {
        match &a.value {
            Value::Ident(s) => Ok(s),
            other => Err(self.err(a.pos, format!("expected an identifier, found {}", other.describe()))),
        }
    }

    fn string<'a>(&self, a: &'a Arg) -> PResult<&'a str> {
        match &a.value {
            Value::Str(s) => Ok(s),
            other => Err(self.err(a.pos, format!("expected a string, found {}", other.describe()))),
        }
    }

    fn pair(&self, s: &Stmt) -> PResult<[f64; 2]> {
        let a = self.arity(s, 2)?;
        Ok([self.num(&a[0])?, self.num(&a[1])?])
    }

    fn single<'a>(&self, s: &'a Stmt) -> PResult<&'a Arg> {
        Ok(&self.arity(s, 1)?[0])
    }

    fn no_label(&self, b: &Block) -> PResult<()> {
        match &b.label {
            Some(l) => Err(self.err(l.pos, format!("`{}` block takes no name", b.name))),
            None => Ok(()),
        }
    }

    fn label<'a>(&self, b: &'a Block) -> PResult<(&'a str, Pos)> {
        match &b.label {
            Some(l) => Ok((self.ident(l)?, l.pos)),
            None => Err(self.err(b.pos, format!("`{}` block needs a name", b.name))),
        }
    }

    fn unknown(&self, item: &Item, ctx: &str) -> ParseError {
        self.err(item.pos(), format!("unknown key `{}` in {ctx}", item.key()))
    }

    fn missing(&self, b: &Block, key: &str) -> ParseError {
        self.err(b.pos, format!("`{}` block is missing required key `{key}`", b.name))
    }

    fn display(&self, b: &Block) -> PResult<DisplayGeometry> {
        self.no_label(b)?;
        let mut g = DisplayGeometry::default();
        let mut seen = Seen::new();
        for item in &b.items {
            self.once(&mut seen, item)?;
            let s = self.as_stmt(item)?;
            match s.key.as_str() {
                "resolution_px" => {
                    let a = self.arity(s, 2)?;
                    g.width_px = self.positive_uint(&a[0])?;
                    g.height_px = self.positive_uint(&a[1])?;
                }
                "size_m" => {
                    let a = self.arity(s, 2)?;
                    g.physical_width_m = self.positive(&a[0])?;
                    g.physical_height_m = self.positive(&a[1])?;
                }
                "separation_m" => g.separation_m = self.positive(self.single(s)?)?,
                _ => return Err(self.unknown(item, "display")),
            }
        }
        g.validate().map_err(|e| self.err(b.pos, e.to_string()))?;
        Ok(g)
    }

    fn zones(&self, b: &Block) -> PResult<ZoneConfig> {
        self.no_label(b)?;
        let mut z = ZoneConfig::default();
        let mut seen = Seen::new();
        for item in &b.items {
            self.once(&mut seen, item)?;
            let s = self.as_stmt(item)?;
            match s.key.as_str() {
                "personal_max_m" => z.personal_max_m = self.positive(self.single(s)?)?,
                "social_max_m" => z.social_max_m = self.positive(self.single(s)?)?,
                _ => return Err(self.unknown(item, "zones")),
            }
        }
        z.validate().map_err(|e| self.err(b.pos, e.to_string()))?;
        Ok(z)
    }

    fn calibration(&self, b: &Block) -> PResult<SimilarityTransform> {
        self.no_label(b)?;
        let (mut scale, mut rot, mut trans) = (None, None, None);
        let mut seen = Seen::new();
        for item in &b.items {
            self.once(&mut seen, item)?;
            let s = self.as_stmt(item)?;
            match s.key.as_str() {
                "scale" => scale = Some(self.positive(self.single(s)?)?),
                "rotation" => {
                    let a = self.arity(s, 9)?;
                    let mut m = [[0.0; 3]; 3];
                    for (i, arg) in a.iter().enumerate() {
                        m[i / 3][i % 3] = self.num(arg)?;
                    }
                    rot = Some((Mat3(m), s.pos));
                }
                "translation" => {
                    let a = self.arity(s, 3)?;
                    trans = Some(Vec3::new(self.num(&a[0])?, self.num(&a[1])?, self.num(&a[2])?));
                }
                _ => return Err(self.unknown(item, "calibration")),
            }
        }
        let (rotation, rot_pos) = rot.ok_or_else(|| self.missing(b, "rotation"))?;
        let t = SimilarityTransform {
            scale: scale.ok_or_else(|| self.missing(b, "scale"))?,
            rotation,
            translation: trans.ok_or_else(|| self.missing(b, "translation"))?,
        };
        if !t.is_proper(1e-6) {
            return Err(self.err(rot_pos, "rotation must be orthonormal with determinant +1"));
        }
        Ok(t)
    }

    fn asset(&self, b: &Block) -> PResult<AssetDecl> {
        let mut kind = AssetKind::Image;
        let mut paths: Option<(Vec<String>, Pos)> = None;
        let mut size = None;
        let mut seen = Seen::new();
        for item in &b.items {
            self.once(&mut seen, item)?;
            let s = self.as_stmt(item)?;
            match s.key.as_str() {
                "kind" => {
                    let a = self.single(s)?;
                    kind = match self.ident(a)? {
                        "image" => AssetKind::Image,
                        "frames" => AssetKind::FrameSequence,
                        other => return Err(self.err(a.pos, format!("unknown asset kind `{other}` (image, frames)"))),
                    };
                }
                "path" => {
                    if s.args.is_empty() {
                        return Err(self.err(s.pos, "`path` expects at least one file"));
                    }
                    let ps = s.args.iter().map(|a| self.string(a).map(str::to_string)).collect::<PResult<Vec<_>>>()?;
                    paths = Some((ps, s.pos));
                }
                "size_m" => {
                    let a = self.arity(s, 2)?;
                    size = Some([self.positive(&a[0])?, self.positive(&a[1])?]);
                }
                _ => return Err(self.unknown(item, "asset")),
            }
        }
        let (paths, ppos) = paths.ok_or_else(|| self.missing(b, "path"))?;
        if kind == AssetKind::Image && paths.len() != 1 {
            return Err(self.err(ppos, "an image asset takes exactly one path"));
        }
        Ok(AssetDecl { kind, paths, size_m: size.ok_or_else(|| self.missing(b, "size_m"))? })
    }

    fn link_params(&self, b: &Block) -> PResult<LinkingParams> {
        let mut p = LinkingParams::default();
        let mut seen = Seen::new();
        for item in &b.items {
            self.once(&mut seen, item)?;
            let s = self.as_stmt(item)?;
            match s.key.as_str() {
                "halo_radius_px" => p.halo_radius_px = self.positive_uint(self.single(s)?)?,
                "halo_blur_px" => p.halo_blur_px = self.uint(self.single(s)?)?,
                "outline_thickness_px" => p.outline_thickness_px = self.positive_uint(self.single(s)?)?,
                "clone_alpha" => p.clone_alpha = self.unit(self.single(s)?)?,
                "landmark_size_px" => p.landmark_size_px = self.positive_uint(self.single(s)?)?,
                "tint" => {
                    let a = self.arity(s, 3)?;
                    p.tint = Some(Color::new(self.unit(&a[0])?, self.unit(&a[1])?, self.unit(&a[2])?));
                }
                _ => return Err(self.unknown(item, "link")),
            }
        }
        Ok(p)
    }

    fn link_style(&self, a: &Arg) -> PResult<LinkingStyle> {
        let name = self.ident(a)?;
        LinkingStyle::from_name(name).ok_or_else(|| {
            self.err(a.pos, format!("unknown linking style `{name}` (none, landmark, halo, outline, clone)"))
        })
    }

    fn layer(&self, a: &Arg) -> PResult<LayerId> {
        match self.ident(a)? {
            "front" => Ok(LayerId::Front),
            "back" => Ok(LayerId::Back),
            other => Err(self.err(a.pos, format!("unknown layer `{other}` (front, back)"))),
        }
    }

    fn entity(&self, b: &Block, name: &str, g: &DisplayGeometry) -> PResult<(EntityDecl, Arg)> {
        let mut asset: Option<Arg> = None;
        let mut layer = None;
        let mut center = ([0.0, 0.0], b.pos);
        let (mut scale, mut alpha) = (1.0, 1.0);
        let mut linking = (LinkingStyle::None, LinkingParams::default());
        let mut seen = Seen::new();
        for item in &b.items {
            self.once(&mut seen, item)?;
            if item.key() == "link" {
                linking = match item {
                    Item::Stmt(s) => (self.link_style(self.single(s)?)?, LinkingParams::default()),
                    Item::Block(lb) => {
                        let style = match &lb.label {
                            Some(l) => self.link_style(l)?,
                            None => return Err(self.err(lb.pos, "`link` block needs a style")),
                        };
                        (style, self.link_params(lb)?)
                    }
                };
                continue;
            }
            let s = self.as_stmt(item)?;
            match s.key.as_str() {
                "asset" => {
                    let a = self.single(s)?;
                    self.ident(a)?;
                    asset = Some(a.clone());
                }
                "layer" => layer = Some(self.layer(self.single(s)?)?),
                "center_m" => center = (self.pair(s)?, s.pos),
                "scale" => scale = self.positive(self.single(s)?)?,
                "alpha" => alpha = self.unit(self.single(s)?)?,
                _ => return Err(self.unknown(item, "entity")),
            }
        }
        let asset = asset.ok_or_else(|| self.missing(b, "asset"))?;
        let [hx, hy] = g.half_extent_m();
        let slack = g.physical_width_m;
        if center.0[0].abs() > hx + slack || center.0[1].abs() > hy + slack {
            return Err(self.err(center.1, "entity center is more than one panel width outside the panel"));
        }
        let decl = EntityDecl {
            name: name.to_string(),
            asset: self.ident(&asset)?.to_string(),
            layer: layer.ok_or_else(|| self.missing(b, "layer"))?,
            center_m: center.0,
            scale,
            alpha,
            linking: linking.0,
            linking_params: linking.1,
        };
        Ok((decl, asset))
    }

    fn look(&self, b: &Block) -> PResult<Look> {
        self.no_label(b)?;
        let mut l = Look::default();
        let mut seen = Seen::new();
        for item in &b.items {
            self.once(&mut seen, item)?;
            let s = self.as_stmt(item)?;
            match s.key.as_str() {
                "scale" => l.scale = self.positive(self.single(s)?)?,
                "shadow" => l.shadow = self.unit(self.single(s)?)?,
                "offset_m" => l.offset_m = self.pair(s)?,
                _ => return Err(self.unknown(item, b.name.as_str())),
            }
        }
        Ok(l)
    }

    /// Envelope running `from -> to`; defaults to an S-curve spanning the
    /// whole transition.
    fn envelope(&self, b: Option<&Block>, from: f64, to: f64, transition_s: f64) -> PResult<Envelope> {
        let Some(b) = b else {
            return Envelope::s_curve(from, to, transition_s).map_err(|e| ParseError {
                line: 1,
                column: 1,
                message: e.to_string(),
                snippet: String::new(),
            });
        };
        self.no_label(b)?;
        let mut delay = 0.0;
        let mut duration = transition_s;
        let mut phases: Vec<(PhaseSpec, Pos)> = Vec::new();
        let mut ramp: Option<(&str, Pos)> = None;
        let mut seen = Seen::new();
        for item in &b.items {
            if item.key() != "phase" {
                self.once(&mut seen, item)?;
            }
            let s = self.as_stmt(item)?;
            match s.key.as_str() {
                "delay_s" => delay = self.num_where(self.single(s)?, |v| v >= 0.0, ">= 0")?,
                "duration_s" => duration = self.positive(self.single(s)?)?,
                "ramp" => {
                    let a = self.single(s)?;
                    let name = self.ident(a)?;
                    if !matches!(name, "linear" | "s_curve") {
                        return Err(self.err(a.pos, format!("unknown ramp `{name}` (linear, s_curve)")));
                    }
                    ramp = Some((name, s.pos));
                }
                "phase" => {
                    if phases.len() == 3 {
                        return Err(self.err(s.pos, "an envelope has exactly three phases"));
                    }
                    let a = self.arity(s, 4)?;
                    let sname = self.ident(&a[0])?;
                    let style = EasingStyle::from_name(sname).ok_or_else(|| {
                        self.err(a[0].pos, format!("unknown easing `{sname}` (linear, ease_in, ease_out, smoothstep, hold)"))
                    })?;
                    let fraction = self.num_where(&a[1], |v| v > 0.0 && v <= 1.0, "in (0, 1]")?;
                    phases.push((PhaseSpec::new(fraction, style, self.num(&a[2])?, self.num(&a[3])?), s.pos));
                }
                _ => return Err(self.unknown(item, b.name.as_str())),
            }
        }
        let env = match (ramp, phases.len()) {
            (Some(_), n) if n > 0 => return Err(self.err(phases[0].1, "use either `ramp` or `phase`, not both")),
            (Some(("linear", _)), _) => Envelope::linear(from, to, duration),
            (Some(_), _) => Envelope::s_curve(from, to, duration),
            (None, 0) => Envelope::s_curve(from, to, duration),
            (None, 3) => Envelope::new([phases[0].0, phases[1].0, phases[2].0], duration, 0.0),
            (None, _) => return Err(self.err(b.pos, format!("`{}` needs three `phase` lines, found {}", b.name, phases.len()))),
        };
        env.and_then(|e| e.with_delay(delay)).map_err(|e| self.err(b.pos, e.to_string()))
    }

    fn transition(&self, b: &Block) -> PResult<TransitionSpec> {
        self.no_label(b)?;
        let mut direction = None;
        let mut params = ParamSet::ALPHA_ONLY;
        let mut duration = None;
        let mut lag = 0.0;
        let mut separation = None;
        let (mut src_b, mut dst_b, mut absent, mut present) = (None, None, Look::default(), Look::default());
        let mut seen = Seen::new();
        for item in &b.items {
            self.once(&mut seen, item)?;
            match item.key() {
                "source" => src_b = Some(self.as_block(item)?),
                "dest" => dst_b = Some(self.as_block(item)?),
                "absent" => absent = self.look(self.as_block(item)?)?,
                "present" => present = self.look(self.as_block(item)?)?,
                _ => {
                    let s = self.as_stmt(item)?;
                    match s.key.as_str() {
                        "direction" => {
                            let Some(first) = s.args.first() else {
                                return Err(self.err(s.pos, "`direction` expects a value"));
                            };
                            direction = Some(match self.ident(first)? {
                                "front_to_back" => {
                                    self.arity(s, 1)?;
                                    Direction::FrontToBack
                                }
                                "back_to_front" => {
                                    self.arity(s, 1)?;
                                    Direction::BackToFront
                                }
                                "fade_in" => Direction::FadeIn(self.layer(&self.arity(s, 2)?[1])?),
                                "fade_out" => Direction::FadeOut(self.layer(&self.arity(s, 2)?[1])?),
                                other => {
                                    return Err(self.err(
                                        first.pos,
                                        format!("unknown direction `{other}` (front_to_back, back_to_front, fade_in, fade_out)"),
                                    ))
                                }
                            });
                        }
                        "params" => {
                            if s.args.is_empty() {
                                return Err(self.err(s.pos, "`params` expects at least one parameter"));
                            }
                            let names = s.args.iter().map(|a| self.ident(a)).collect::<PResult<Vec<_>>>()?;
                            params = ParamSet::from_names(names).map_err(|m| self.err(s.args[0].pos, m))?;
                        }
                        "duration_s" => duration = Some(self.positive(self.single(s)?)?),
                        "lag_s" => lag = self.num_where(self.single(s)?, |v| v >= 0.0, ">= 0")?,
                        "separation_m" => separation = Some(self.positive(self.single(s)?)?),
                        _ => return Err(self.unknown(item, "transition")),
                    }
                }
            }
        }
        let direction = direction.ok_or_else(|| self.missing(b, "direction"))?;
        let duration = duration.ok_or_else(|| self.missing(b, "duration_s"))?;
        let spec = TransitionSpec {
            direction,
            parameters: params,
            duration_s: duration,
            lag_s: lag,
            source_envelope: self.envelope(src_b, 1.0, 0.0, duration)?,
            dest_envelope: self.envelope(dst_b, 0.0, 1.0, duration)?,
            absent_look: absent,
            present_look: present,
            separation_m: separation,
        };
        spec.validate().map_err(|e| self.err(b.pos, e.to_string()))?;
        Ok(spec)
    }

    fn cue(&self, b: &Block) -> PResult<(Arg, TransitionSpec)> {
        let mut target = None;
        let mut spec = None;
        let mut seen = Seen::new();
        for item in &b.items {
            self.once(&mut seen, item)?;
            match item.key() {
                "transition" => spec = Some(self.transition(self.as_block(item)?)?),
                "target" => {
                    let a = self.single(self.as_stmt(item)?)?;
                    self.ident(a)?;
                    target = Some(a.clone());
                }
                _ => return Err(self.unknown(item, "cue")),
            }
        }
        Ok((target.ok_or_else(|| self.missing(b, "target"))?, spec.ok_or_else(|| self.missing(b, "transition"))?))
    }

    fn zone(&self, a: &Arg) -> PResult<Zone> {
        let n = self.ident(a)?;
        Zone::from_name(n).ok_or_else(|| self.err(a.pos, format!("unknown zone `{n}` (personal, social, public)")))
    }

    fn binding(&self, b: &Block) -> PResult<(Condition, DistanceSource, Arg)> {
        self.no_label(b)?;
        let (mut cond, mut source, mut fire) = (None, DistanceSource::User, None);
        let mut seen = Seen::new();
        for item in &b.items {
            self.once(&mut seen, item)?;
            let s = self.as_stmt(item)?;
            match s.key.as_str() {
                "when" => {
                    let Some(first) = s.args.first() else {
                        return Err(self.err(s.pos, "`when` expects a condition"));
                    };
                    cond = Some(match self.ident(first)? {
                        "zone_enter" => Condition::ZoneEnter(self.zone(&self.arity(s, 2)?[1])?),
                        "zone_exit" => Condition::ZoneExit(self.zone(&self.arity(s, 2)?[1])?),
                        "depth_below" => Condition::DepthBelow(self.positive(&self.arity(s, 2)?[1])?),
                        "manual" => {
                            self.arity(s, 1)?;
                            Condition::Manual
                        }
                        other => {
                            return Err(self.err(
                                first.pos,
                                format!("unknown condition `{other}` (zone_enter, zone_exit, depth_below, manual)"),
                            ))
                        }
                    });
                }
                "source" => {
                    let a = self.single(s)?;
                    let n = self.ident(a)?;
                    source = DistanceSource::from_name(n)
                        .ok_or_else(|| self.err(a.pos, format!("unknown distance source `{n}` (user, hand)")))?;
                }
                "fire" => {
                    let a = self.single(s)?;
                    self.ident(a)?;
                    fire = Some(a.clone());
                }
                _ => return Err(self.unknown(item, "bind")),
            }
        }
        Ok((cond.ok_or_else(|| self.missing(b, "when"))?, source, fire.ok_or_else(|| self.missing(b, "fire"))?))
    }

    fn segment(&self, b: &Block) -> PResult<(Arg, Arg, Arg, f64)> {
        let (mut asset, mut front, mut back, mut thr) = (None, None, None, None);
        let mut seen = Seen::new();
        for item in &b.items {
            self.once(&mut seen, item)?;
            let s = self.as_stmt(item)?;
            let slot = match s.key.as_str() {
                "asset" => &mut asset,
                "front" => &mut front,
                "back" => &mut back,
                "threshold_m" => {
                    thr = Some(self.positive(self.single(s)?)?);
                    continue;
                }
                _ => return Err(self.unknown(item, "segment")),
            };
            let a = self.single(s)?;
            self.ident(a)?;
            *slot = Some(a.clone());
        }
        Ok((
            asset.ok_or_else(|| self.missing(b, "asset"))?,
            front.ok_or_else(|| self.missing(b, "front"))?,
            back.ok_or_else(|| self.missing(b, "back"))?,
            thr.ok_or_else(|| self.missing(b, "threshold_m"))?,
        ))
    }
}

fn ident_of(a: &Arg) -> &str {
    match &a.value {
        Value::Ident(s) => s,
        _ => "",
    }
}

/// Parses profile text; the first error aborts with its exact position.
pub fn parse_profile(text: &str) -> Result<ExperienceProfile, ParseError> {
    let cx = Ctx { src: text };
    let tree = parse_tree(text)?;

    let mut display: Option<&Block> = None;
    for item in &tree {
        if item.key() == "display" {
            let b = cx.as_block(item)?;
            if display.is_some() {
                return Err(cx.err(b.pos, "duplicate `display` block"));
            }
            display = Some(b);
        }
    }
    let Some(display) = display else {
        return Err(ParseError::at(text, Pos { line: 1, column: 1 }, "missing display block".into()));
    };
    let geometry = cx.display(display)?;

    let mut zone_config: Option<ZoneConfig> = None;
    let mut calibration: Option<SimilarityTransform> = None;
    let mut assets = BTreeMap::new();
    let mut entities: Vec<EntityDecl> = Vec::new();
    let mut cues = BTreeMap::new();
    let mut bindings = Vec::new();
    let mut segments = BTreeMap::new();
    // Deferred reference checks: (reference, namespace).
    let mut refs: Vec<(Arg, &'static str)> = Vec::new();
    let mut names: HashMap<(&'static str, String), Pos> = HashMap::new();
    let mut claim = |ns: &'static str, name: &str, pos: Pos| -> PResult<()> {
        if let Some(first) = names.get(&(ns, name.to_string())) {
            return Err(cx.err(pos, format!("duplicate {ns} `{name}` (first declared on line {})", first.line)));
        }
        names.insert((ns, name.to_string()), pos);
        Ok(())
    };

    for item in &tree {
        let b = cx.as_block(item)?;
        match b.name.as_str() {
            "display" => {}
            "zones" => {
                if zone_config.is_some() {
                    return Err(cx.err(b.pos, "duplicate `zones` block"));
                }
                zone_config = Some(cx.zones(b)?);
            }
            "calibration" => {
                if calibration.is_some() {
                    return Err(cx.err(b.pos, "duplicate `calibration` block"));
                }
                calibration = Some(cx.calibration(b)?);
            }
            "asset" => {
                let (name, pos) = cx.label(b)?;
                claim("asset", name, pos)?;
                assets.insert(name.to_string(), cx.asset(b)?);
            }
            "entity" => {
                let (name, pos) = cx.label(b)?;
                claim("entity", name, pos)?;
                let (decl, asset_ref) = cx.entity(b, name, &geometry)?;
                refs.push((asset_ref, "asset"));
                entities.push(decl);
            }
            "cue" => {
                let (name, pos) = cx.label(b)?;
                claim("cue", name, pos)?;
                let (target, spec) = cx.cue(b)?;
                cues.insert(name.to_string(), CueDecl { target: ident_of(&target).to_string(), spec });
                refs.push((target, "entity"));
            }
            "bind" => {
                let (condition, source, fire) = cx.binding(b)?;
                bindings.push(BindingDecl { condition, source, fire: ident_of(&fire).to_string() });
                refs.push((fire, "cue"));
            }
            "segment" => {
                let (name, pos) = cx.label(b)?;
                claim("segment", name, pos)?;
                let (asset, front, back, threshold_m) = cx.segment(b)?;
                segments.insert(
                    name.to_string(),
                    SegmentDecl {
                        asset: ident_of(&asset).to_string(),
                        front_entity: ident_of(&front).to_string(),
                        back_entity: ident_of(&back).to_string(),
                        threshold_m,
                    },
                );
                refs.push((asset, "asset"));
                refs.push((front, "entity"));
                refs.push((back, "entity"));
            }
            other => {
                return Err(cx.err(
                    b.pos,
                    format!("unknown block `{other}` (display, zones, calibration, asset, entity, cue, bind, segment)"),
                ))
            }
        }
    }

    for (arg, ns) in &refs {
        let name = ident_of(arg);
        let found = match *ns {
            "asset" => assets.contains_key(name),
            "entity" => entities.iter().any(|e| e.name == name),
            _ => cues.contains_key(name),
        };
        if !found {
            return Err(cx.err(arg.pos, format!("undefined {ns} `{name}`")));
        }
    }

    Ok(ExperienceProfile {
        geometry,
        zone_config: zone_config.unwrap_or_default(),
        calibration,
        assets,
        entities,
        cues,
        bindings,
        segments,
    })
}
