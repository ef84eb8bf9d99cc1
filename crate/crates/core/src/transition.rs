//! Transitions of an entity between the front and back layer.
//!
//! A transition drives a scalar *presence* per layer through a three-phase
//! [`Envelope`]. Presence maps onto the rendering parameters named in the
//! transition's [`ParamSet`]: alpha follows presence directly, while scale,
//! shadow and offset interpolate between an "absent" and a "present"
//! [`Look`]. Fading is the special case where only one layer is driven.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LayerId;

/// Phase fractions used when a profile does not spell out its phases.
pub const DEFAULT_FRACTIONS: [f64; 3] = [0.25, 0.5, 0.25];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EasingStyle {
    Linear,
    /// Quadratic, slow start.
    EaseIn,
    /// Quadratic, slow finish.
    EaseOut,
    Smoothstep,
    /// Jumps to the end value when the phase completes.
    Hold,
}

impl EasingStyle {
    pub const ALL: [EasingStyle; 5] =
        [EasingStyle::Linear, EasingStyle::EaseIn, EasingStyle::EaseOut, EasingStyle::Smoothstep, EasingStyle::Hold];

    /// Maps normalized phase time `u` in `[0, 1]` to progress in `[0, 1]`.
    pub fn apply(self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            EasingStyle::Linear => u,
            EasingStyle::EaseIn => u * u,
            EasingStyle::EaseOut => 1.0 - (1.0 - u) * (1.0 - u),
            EasingStyle::Smoothstep => u * u * (3.0 - 2.0 * u),
            EasingStyle::Hold => {
                if u >= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EasingStyle::Linear => "linear",
            EasingStyle::EaseIn => "ease_in",
            EasingStyle::EaseOut => "ease_out",
            EasingStyle::Smoothstep => "smoothstep",
            EasingStyle::Hold => "hold",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        EasingStyle::ALL.into_iter().find(|e| e.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpec {
    pub fraction: f64,
    pub style: EasingStyle,
    pub start_value: f64,
    pub end_value: f64,
}

impl PhaseSpec {
    pub fn new(fraction: f64, style: EasingStyle, start_value: f64, end_value: f64) -> Self {
        PhaseSpec { fraction, style, start_value, end_value }
    }
}

/// Three eased segments laid end to end over `duration_s`, starting after
/// `delay_s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    phases: [PhaseSpec; 3],
    duration_s: f64,
    delay_s: f64,
}

impl Envelope {
    pub fn new(phases: [PhaseSpec; 3], duration_s: f64, delay_s: f64) -> Result<Self> {
        if !(duration_s > 0.0 && duration_s.is_finite()) {
            return Err(Error::domain(format!("envelope duration_s must be > 0, got {duration_s}")));
        }
        if !(delay_s >= 0.0 && delay_s.is_finite()) {
            return Err(Error::domain(format!("envelope delay_s must be >= 0, got {delay_s}")));
        }
        let mut sum = 0.0;
        for (i, p) in phases.iter().enumerate() {
            if !(p.fraction > 0.0 && p.fraction <= 1.0) {
                return Err(Error::domain(format!("phase {} fraction must be in (0, 1], got {}", i + 1, p.fraction)));
            }
            if !p.start_value.is_finite() || !p.end_value.is_finite() {
                return Err(Error::domain(format!("phase {} values must be finite", i + 1)));
            }
            sum += p.fraction;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("phase fractions sum to {sum}, expected 1")));
        }
        for i in 0..2 {
            if phases[i].end_value != phases[i + 1].start_value {
                return Err(Error::domain(format!(
                    "phase {} ends at {} but phase {} starts at {}",
                    i + 1,
                    phases[i].end_value,
                    i + 2,
                    phases[i + 1].start_value
                )));
            }
        }
        Ok(Envelope { phases, duration_s, delay_s })
    }

    /// Equal thirds, all linear: a straight ramp from `from` to `to`.
    pub fn linear(from: f64, to: f64, duration_s: f64) -> Result<Self> {
        let third = 1.0 / 3.0;
        let v1 = from + (to - from) * third;
        let v2 = from + (to - from) * (2.0 * third);
        Envelope::new(
            [
                PhaseSpec::new(third, EasingStyle::Linear, from, v1),
                PhaseSpec::new(third, EasingStyle::Linear, v1, v2),
                PhaseSpec::new(third, EasingStyle::Linear, v2, to),
            ],
            duration_s,
            0.0,
        )
    }

    /// Accelerate, cruise, decelerate over [`DEFAULT_FRACTIONS`]. Boundary
    /// values are chosen so the slope is continuous at both phase joints.
    pub fn s_curve(from: f64, to: f64, duration_s: f64) -> Result<Self> {
        Envelope::s_curve_with(from, to, duration_s, DEFAULT_FRACTIONS)
    }

    pub fn s_curve_with(from: f64, to: f64, duration_s: f64, fractions: [f64; 3]) -> Result<Self> {
        let [f1, f2, f3] = fractions;
        // Peak rate v satisfies v * (f1/2 + f2 + f3/2) = 1.
        let v = 1.0 / (f1 / 2.0 + f2 + f3 / 2.0);
        let d = to - from;
        let v1 = from + d * v * f1 / 2.0;
        let v2 = to - d * v * f3 / 2.0;
        Envelope::new(
            [
                PhaseSpec::new(f1, EasingStyle::EaseIn, from, v1),
                PhaseSpec::new(f2, EasingStyle::Linear, v1, v2),
                PhaseSpec::new(f3, EasingStyle::EaseOut, v2, to),
            ],
            duration_s,
            0.0,
        )
    }

    pub fn with_delay(mut self, delay_s: f64) -> Result<Self> {
        if !(delay_s >= 0.0 && delay_s.is_finite()) {
            return Err(Error::domain(format!("envelope delay_s must be >= 0, got {delay_s}")));
        }
        self.delay_s = delay_s;
        Ok(self)
    }

    pub fn phases(&self) -> &[PhaseSpec; 3] {
        &self.phases
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_s
    }

    pub fn delay_s(&self) -> f64 {
        self.delay_s
    }

    pub fn end_time_s(&self) -> f64 {
        self.delay_s + self.duration_s
    }

    pub fn start_value(&self) -> f64 {
        self.phases[0].start_value
    }

    pub fn end_value(&self) -> f64 {
        self.phases[2].end_value
    }

    /// Every value the envelope can take lies between its extreme phase
    /// boundary values.
    pub fn value_range(&self) -> (f64, f64) {
        let mut lo = self.start_value();
        let mut hi = lo;
        for p in &self.phases {
            lo = lo.min(p.end_value);
            hi = hi.max(p.end_value);
        }
        (lo, hi)
    }

    pub fn is_monotone(&self) -> bool {
        let v = [self.phases[0].start_value, self.phases[0].end_value, self.phases[1].end_value, self.phases[2].end_value];
        v.windows(2).all(|w| w[0] <= w[1]) || v.windows(2).all(|w| w[0] >= w[1])
    }

    /// Envelope value at time `t`; clamps outside `[delay, delay + duration]`.
    pub fn evaluate(&self, t: f64) -> f64 {
        if t.is_nan() || t <= self.delay_s {
            return self.start_value();
        }
        if t >= self.end_time_s() {
            return self.end_value();
        }
        let local = (t - self.delay_s) / self.duration_s;
        let mut phase_start = 0.0;
        for (i, p) in self.phases.iter().enumerate() {
            let phase_end = phase_start + p.fraction;
            if local < phase_end || i == 2 {
                let u = ((local - phase_start) / p.fraction).clamp(0.0, 1.0);
                return p.start_value + (p.end_value - p.start_value) * p.style.apply(u);
            }
            phase_start = phase_end;
        }
        unreachable!()
    }
}

/// Rendering parameters of one entity on one layer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderParams {
    pub alpha: f64,
    pub scale: f64,
    pub shadow: f64,
    pub offset_m: [f64; 2],
}

impl RenderParams {
    /// Resident on a layer, untouched.
    pub const REST: RenderParams = RenderParams { alpha: 1.0, scale: 1.0, shadow: 0.0, offset_m: [0.0, 0.0] };
    /// Not shown on a layer.
    pub const HIDDEN: RenderParams = RenderParams { alpha: 0.0, scale: 1.0, shadow: 0.0, offset_m: [0.0, 0.0] };

    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.alpha)
            && (0.0..=1.0).contains(&self.shadow)
            && self.scale > 0.0
            && self.scale.is_finite()
            && self.offset_m.iter().all(|v| v.is_finite())
    }

    pub fn at_rest_on(layer: LayerId, resident: LayerId) -> Self {
        if layer == resident {
            RenderParams::REST
        } else {
            RenderParams::HIDDEN
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerRenderState {
    pub front: RenderParams,
    pub back: RenderParams,
}

impl LayerRenderState {
    pub fn resting(resident: LayerId) -> Self {
        LayerRenderState {
            front: RenderParams::at_rest_on(LayerId::Front, resident),
            back: RenderParams::at_rest_on(LayerId::Back, resident),
        }
    }

    pub fn get(&self, layer: LayerId) -> &RenderParams {
        match layer {
            LayerId::Front => &self.front,
            LayerId::Back => &self.back,
        }
    }

    pub fn get_mut(&mut self, layer: LayerId) -> &mut RenderParams {
        match layer {
            LayerId::Front => &mut self.front,
            LayerId::Back => &mut self.back,
        }
    }
}

/// Which rendering parameters a transition animates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSet {
    pub alpha: bool,
    pub scale: bool,
    pub shadow: bool,
    pub offset: bool,
}

impl ParamSet {
    pub const ALPHA_ONLY: ParamSet = ParamSet { alpha: true, scale: false, shadow: false, offset: false };
    pub const ALL: ParamSet = ParamSet { alpha: true, scale: true, shadow: true, offset: true };
    pub const NAMES: [&'static str; 4] = ["alpha", "scale", "shadow", "offset"];

    pub fn names(&self) -> Vec<&'static str> {
        let flags = [self.alpha, self.scale, self.shadow, self.offset];
        ParamSet::NAMES.iter().zip(flags).filter(|(_, on)| *on).map(|(n, _)| *n).collect()
    }

    pub fn from_names<'a>(names: impl IntoIterator<Item = &'a str>) -> std::result::Result<Self, String> {
        let mut set = ParamSet { alpha: false, scale: false, shadow: false, offset: false };
        for n in names {
            let slot = match n {
                "alpha" => &mut set.alpha,
                "scale" => &mut set.scale,
                "shadow" => &mut set.shadow,
                "offset" => &mut set.offset,
                other => return Err(format!("unknown transition parameter {other:?}")),
            };
            if *slot {
                return Err(format!("transition parameter {n:?} listed twice"));
            }
            *slot = true;
        }
        Ok(set)
    }

    pub fn is_empty(&self) -> bool {
        !(self.alpha || self.scale || self.shadow || self.offset)
    }
}

/// Appearance of an entity at zero and at full presence on a layer, for the
/// non-alpha parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Look {
    pub scale: f64,
    pub shadow: f64,
    pub offset_m: [f64; 2],
}

impl Default for Look {
    fn default() -> Self {
        Look { scale: 1.0, shadow: 0.0, offset_m: [0.0, 0.0] }
    }
}

impl Look {
    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::domain(format!("look scale must be > 0, got {}", self.scale)));
        }
        if !(0.0..=1.0).contains(&self.shadow) {
            return Err(Error::domain(format!("look shadow must be in [0, 1], got {}", self.shadow)));
        }
        if !self.offset_m.iter().all(|v| v.is_finite()) {
            return Err(Error::domain("look offset must be finite"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    FrontToBack,
    BackToFront,
    FadeIn(LayerId),
    FadeOut(LayerId),
}

impl Direction {
    /// Layer the entity leaves, if any.
    pub fn source(self) -> Option<LayerId> {
        match self {
            Direction::FrontToBack => Some(LayerId::Front),
            Direction::BackToFront => Some(LayerId::Back),
            Direction::FadeIn(_) => None,
            Direction::FadeOut(l) => Some(l),
        }
    }

    /// Layer the entity enters, if any.
    pub fn destination(self) -> Option<LayerId> {
        match self {
            Direction::FrontToBack => Some(LayerId::Back),
            Direction::BackToFront => Some(LayerId::Front),
            Direction::FadeIn(l) => Some(l),
            Direction::FadeOut(_) => None,
        }
    }

    pub fn is_fade(self) -> bool {
        matches!(self, Direction::FadeIn(_) | Direction::FadeOut(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FadeDirection {
    In,
    Out,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionSpec {
    pub direction: Direction,
    pub parameters: ParamSet,
    pub duration_s: f64,
    pub lag_s: f64,
    /// Presence of the leaving layer, 1 to 0. Unused by fade-ins.
    pub source_envelope: Envelope,
    /// Presence of the entering layer, 0 to 1, delayed by `lag_s`. Unused by
    /// fade-outs.
    pub dest_envelope: Envelope,
    pub absent_look: Look,
    pub present_look: Look,
    /// Layer gap the transition was authored for; consumed by the compositor.
    pub separation_m: Option<f64>,
}

/// Presence per layer; `None` means the transition leaves that layer alone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerPresence {
    pub front: Option<f64>,
    pub back: Option<f64>,
}

impl LayerPresence {
    pub fn get(&self, layer: LayerId) -> Option<f64> {
        match layer {
            LayerId::Front => self.front,
            LayerId::Back => self.back,
        }
    }

    fn set(&mut self, layer: LayerId, v: Option<f64>) {
        match layer {
            LayerId::Front => self.front = v,
            LayerId::Back => self.back = v,
        }
    }
}

impl TransitionSpec {
    /// Builds a front/back transition with the given envelopes; looks default
    /// to identity.
    pub fn directional(
        direction: Direction,
        parameters: ParamSet,
        duration_s: f64,
        lag_s: f64,
        source_envelope: Envelope,
        dest_envelope: Envelope,
    ) -> Result<Self> {
        let spec = TransitionSpec {
            direction,
            parameters,
            duration_s,
            lag_s,
            source_envelope,
            dest_envelope,
            absent_look: Look::default(),
            present_look: Look::default(),
            separation_m: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Alpha-only transition with linear envelopes over `duration_s`.
    pub fn linear(direction: Direction, duration_s: f64, lag_s: f64) -> Result<Self> {
        TransitionSpec::directional(
            direction,
            ParamSet::ALPHA_ONLY,
            duration_s,
            lag_s,
            Envelope::linear(1.0, 0.0, duration_s)?,
            Envelope::linear(0.0, 1.0, duration_s)?,
        )
    }

    pub fn with_looks(mut self, absent: Look, present: Look) -> Result<Self> {
        self.absent_look = absent;
        self.present_look = present;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::domain(format!("duration_s must be > 0, got {}", self.duration_s)));
        }
        if !(self.lag_s >= 0.0 && self.lag_s.is_finite()) {
            return Err(Error::domain(format!("lag_s must be >= 0, got {}", self.lag_s)));
        }
        if self.parameters.is_empty() {
            return Err(Error::domain("transition must animate at least one parameter"));
        }
        if let Some(sep) = self.separation_m {
            if !(sep > 0.0 && sep.is_finite()) {
                return Err(Error::domain(format!("separation_m must be > 0, got {sep}")));
            }
        }
        self.absent_look.validate()?;
        self.present_look.validate()?;
        let check = |name: &str, env: &Envelope, from: f64, to: f64| -> Result<()> {
            if env.start_value() != from || env.end_value() != to {
                return Err(Error::domain(format!(
                    "{name} envelope must run {from} -> {to}, got {} -> {}",
                    env.start_value(),
                    env.end_value()
                )));
            }
            let (lo, hi) = env.value_range();
            if lo < 0.0 || hi > 1.0 {
                return Err(Error::domain(format!("{name} envelope leaves [0, 1]")));
            }
            if env.end_time_s() > self.duration_s + 1e-9 {
                return Err(Error::domain(format!(
                    "{name} envelope ends at {} s, after the transition's {} s",
                    env.end_time_s(),
                    self.duration_s
                )));
            }
            Ok(())
        };
        if self.direction.source().is_some() {
            check("source", &self.source_envelope, 1.0, 0.0)?;
        }
        if self.direction.destination().is_some() {
            check("dest", &self.dest_envelope, 0.0, 1.0)?;
        }
        Ok(())
    }

    pub fn total_s(&self) -> f64 {
        self.duration_s + self.lag_s
    }

    /// Presence of each driven layer at time `t`.
    pub fn presence_at(&self, t: f64) -> LayerPresence {
        let mut out = LayerPresence { front: None, back: None };
        if let Some(src) = self.direction.source() {
            out.set(src, Some(self.source_envelope.evaluate(t)));
        }
        if let Some(dst) = self.direction.destination() {
            out.set(dst, Some(self.dest_envelope.evaluate(t - self.lag_s)));
        }
        out
    }

    /// Rendering parameters of a layer whose presence is `p`.
    pub fn params_for_presence(&self, p: f64) -> RenderParams {
        let set = self.parameters;
        let lerp = |a: f64, b: f64| a + (b - a) * p;
        let (a, b) = (self.absent_look, self.present_look);
        let alpha = if set.alpha {
            p
        } else if p > 0.0 {
            1.0
        } else {
            0.0
        };
        RenderParams {
            alpha: alpha.clamp(0.0, 1.0),
            scale: if set.scale { lerp(a.scale, b.scale) } else { 1.0 },
            shadow: if set.shadow { lerp(a.shadow, b.shadow).clamp(0.0, 1.0) } else { 0.0 },
            offset_m: if set.offset {
                [lerp(a.offset_m[0], b.offset_m[0]), lerp(a.offset_m[1], b.offset_m[1])]
            } else {
                [0.0, 0.0]
            },
        }
    }
}

/// Per-layer rendering parameters of the transitioning entity at time `t`.
/// Layers the transition does not drive are hidden.
pub fn evaluate_transition(spec: &TransitionSpec, t: f64) -> LayerRenderState {
    let presence = spec.presence_at(t);
    let params = |p: Option<f64>| p.map_or(RenderParams::HIDDEN, |p| spec.params_for_presence(p));
    LayerRenderState { front: params(presence.front), back: params(presence.back) }
}

pub fn evaluate_envelope(e: &Envelope, t: f64) -> f64 {
    e.evaluate(t)
}

/// Alpha-only fade of one layer over `duration_s`, all three phases in
/// `style`.
pub fn make_fade(layer: LayerId, dir: FadeDirection, duration_s: f64, style: EasingStyle) -> Result<TransitionSpec> {
    let ramp = |from: f64, to: f64| -> Result<Envelope> {
        let third = 1.0 / 3.0;
        let v1 = from + (to - from) * third;
        let v2 = from + (to - from) * (2.0 * third);
        Envelope::new(
            [
                PhaseSpec::new(third, style, from, v1),
                PhaseSpec::new(third, style, v1, v2),
                PhaseSpec::new(third, style, v2, to),
            ],
            duration_s,
            0.0,
        )
    };
    let (direction, source, dest) = match dir {
        FadeDirection::In => (Direction::FadeIn(layer), ramp(1.0, 0.0)?, ramp(0.0, 1.0)?),
        FadeDirection::Out => (Direction::FadeOut(layer), ramp(1.0, 0.0)?, ramp(0.0, 1.0)?),
    };
    TransitionSpec::directional(direction, ParamSet::ALPHA_ONLY, duration_s, 0.0, source, dest)
}
