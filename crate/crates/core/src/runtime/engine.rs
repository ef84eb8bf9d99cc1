use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::commands::{Command, LoggedCommand, Origin};
use super::replay::Replay;
use super::proximity::{classify_proximity, Zone};
use super::sensors::{depth_segment, ingest_hand, DepthFrame, SensorLog, SensorSample};
use super::{time_of_tick, TICK_RATE_HZ};
use crate::compositor::{LinkPlacement, Viewpoint};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::linking::{BinaryMask, LinkingStyle};
use crate::model::{Color, LayerId, PixelBuffer};
use crate::pnm;
use crate::profile::{parse_profile, AssetKind, Condition, DistanceSource, ExperienceProfile};
use crate::transition::LayerRenderState;

/// Decoded frames per asset name.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AssetLibrary {
    frames: BTreeMap<String, Vec<PixelBuffer>>,
}

impl AssetLibrary {
    /// Reads every asset of `p`, resolving paths against `base_dir`.
    pub fn load(p: &ExperienceProfile, base_dir: &Path) -> Result<Self> {
        let mut lib = AssetLibrary::default();
        for (name, decl) in &p.assets {
            let frames = decl.paths.iter().map(|f| pnm::read_image(&base_dir.join(f))).collect::<Result<Vec<_>>>()?;
            lib.frames.insert(name.clone(), frames);
        }
        Ok(lib)
    }

    pub fn insert(&mut self, name: impl Into<String>, frames: Vec<PixelBuffer>) {
        self.frames.insert(name.into(), frames);
    }

    /// Frame shown at `tick`; sequences loop.
    pub fn frame(&self, name: &str, tick: u64) -> Option<&PixelBuffer> {
        let f = self.frames.get(name)?;
        f.get((tick % f.len().max(1) as u64) as usize)
    }

    fn check(&self, p: &ExperienceProfile) -> Result<()> {
        for (name, decl) in &p.assets {
            let n = self.frames.get(name).map_or(0, Vec::len);
            let want = if decl.kind == AssetKind::Image { 1 } else { decl.paths.len() };
            if n == 0 || n != want {
                return Err(Error::domain(format!("asset `{name}` needs {want} frame(s), library has {n}")));
            }
        }
        Ok(())
    }
}

const fn slot(l: LayerId) -> usize {
    match l {
        LayerId::Front => 0,
        LayerId::Back => 1,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntityStatus {
    /// How much the entity occupies each layer, `[front, back]`.
    pub presence: [f64; 2],
    pub state: LayerRenderState,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActiveCue {
    pub cue: String,
    pub entity: String,
    pub start_tick: u64,
    /// Presence when the cue started; envelopes are remapped from here so a
    /// preempting cue never pops.
    pub start_presence: [f64; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct EngineState {
    pub tick: u64,
    pub profile: ExperienceProfile,
    pub viewpoint: Viewpoint,
    pub ambient: Color,
    pub link_placement: LinkPlacement,
    pub entities: BTreeMap<String, EntityStatus>,
    pub active: Vec<ActiveCue>,
    pub zones: BTreeMap<DistanceSource, Zone>,
    pub distances: BTreeMap<DistanceSource, f64>,
    /// Per binding: whether a `depth_below` condition held at the last sample.
    pub below: Vec<bool>,
    /// Latest depth split per segment, `(front, back)`.
    pub masks: BTreeMap<String, (BinaryMask, BinaryMask)>,
}

impl EngineState {
    pub fn time_s(&self) -> f64 {
        time_of_tick(self.tick)
    }

    fn fresh(profile: ExperienceProfile, tick: u64, viewpoint: Viewpoint) -> Self {
        let entities = profile
            .entities
            .iter()
            .map(|e| {
                let mut presence = [0.0; 2];
                presence[slot(e.layer)] = 1.0;
                (e.name.clone(), EntityStatus { presence, state: LayerRenderState::resting(e.layer) })
            })
            .collect();
        let below = vec![false; profile.bindings.len()];
        EngineState {
            tick,
            profile,
            viewpoint,
            ambient: Color::BLACK,
            link_placement: LinkPlacement::OnAxis,
            entities,
            active: Vec::new(),
            zones: BTreeMap::new(),
            distances: BTreeMap::new(),
            below,
            masks: BTreeMap::new(),
        }
    }
}

/// Deterministic fixed-step engine. All state depends only on the profile,
/// the tick count and the ordered inputs.
#[derive(Clone, Debug)]
pub struct Engine {
    state: EngineState,
    assets: AssetLibrary,
    base_dir: PathBuf,
    command_log: Vec<LoggedCommand>,
    sensor_log: SensorLog,
    anomalies: Vec<String>,
}

impl Engine {
    pub fn new(profile: ExperienceProfile, assets: AssetLibrary) -> Result<Self> {
        assets.check(&profile)?;
        Ok(Engine {
            state: EngineState::fresh(profile, 0, Viewpoint::default()),
            assets,
            base_dir: PathBuf::from("."),
            command_log: Vec::new(),
            sensor_log: Vec::new(),
            anomalies: Vec::new(),
        })
    }

    /// Parses the profile at `path` and loads its assets from its directory.
    pub fn open(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let profile = parse_profile(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let assets = AssetLibrary::load(&profile, &base)?;
        let mut eng = Engine::new(profile, assets)?;
        eng.base_dir = base;
        Ok(eng)
    }

    pub fn set_base_dir(&mut self, dir: impl Into<PathBuf>) {
        self.base_dir = dir.into();
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    pub fn assets(&self) -> &AssetLibrary {
        &self.assets
    }

    pub fn tick(&self) -> u64 {
        self.state.tick
    }

    pub fn command_log(&self) -> &[LoggedCommand] {
        &self.command_log
    }

    pub fn sensor_log(&self) -> &SensorLog {
        &self.sensor_log
    }

    /// Sensor problems seen so far, oldest first. They never stop the engine.
    pub fn anomalies(&self) -> &[String] {
        &self.anomalies
    }

    /// Applies `cmd` at the current tick. Rejected commands leave the state
    /// and the log untouched.
    pub fn handle(&mut self, cmd: Command) -> Result<Value> {
        let tick = self.state.tick;
        let reply = self.apply(&cmd)?;
        self.record(tick, cmd);
        Ok(reply)
    }

    /// Logs an operator command issued at `tick` whose effect was produced
    /// outside [`Engine::handle`], such as steps a session clock ran itself.
    pub fn record(&mut self, tick: u64, command: Command) {
        // A step returns after its ticks ran; keep the log ordered by tick.
        let at = self.command_log.partition_point(|c| c.tick <= tick);
        self.command_log.insert(at, LoggedCommand { tick, origin: Origin::Operator, command });
    }

    fn apply(&mut self, cmd: &Command) -> Result<Value> {
        match cmd {
            Command::Trigger { cue } => {
                self.trigger(cue)?;
                Ok(Value::Null)
            }
            Command::SetEye { eye } => {
                self.state.viewpoint = Viewpoint::new(eye[0], eye[1], eye[2])?;
                Ok(Value::Null)
            }
            Command::SetSeparation { separation_m } => {
                let mut g = self.state.profile.geometry;
                g.separation_m = *separation_m;
                g.validate()?;
                self.state.profile.geometry = g;
                Ok(Value::Null)
            }
            Command::SetParam { path, value } => {
                self.set_param(path, value)?;
                Ok(Value::Null)
            }
            Command::LoadProfile { text } => {
                let profile = parse_profile(text)?;
                let assets = AssetLibrary::load(&profile, &self.base_dir)?;
                assets.check(&profile)?;
                let s = &self.state;
                let mut fresh = EngineState::fresh(profile, s.tick, s.viewpoint);
                fresh.ambient = s.ambient;
                fresh.link_placement = s.link_placement;
                self.state = fresh;
                self.assets = assets;
                Ok(Value::Null)
            }
            Command::Step { n } => {
                for _ in 0..*n {
                    self.step(&[]);
                }
                Ok(json!({ "tick": self.state.tick }))
            }
            Command::Query { topic } => self.query(topic),
        }
    }

    fn trigger(&mut self, cue_name: &str) -> Result<()> {
        let cue = self
            .state
            .profile
            .cues
            .get(cue_name)
            .ok_or_else(|| Error::domain(format!("unknown cue `{cue_name}`")))?;
        let entity = cue.target.clone();
        let sep = cue.spec.separation_m;
        let status = self
            .state
            .entities
            .get(&entity)
            .ok_or_else(|| Error::domain(format!("cue `{cue_name}` targets unknown entity `{entity}`")))?;
        let start_presence = status.presence;
        // The newest cue on an entity wins.
        self.state.active.retain(|a| a.entity != entity);
        // A cue authored for a specific gap moves the back panel there.
        if let Some(sep) = sep {
            self.state.profile.geometry.separation_m = sep;
        }
        let a = ActiveCue { cue: cue_name.to_string(), entity, start_tick: self.state.tick, start_presence };
        self.evaluate(&a, 0.0);
        self.state.active.push(a);
        Ok(())
    }

    /// Writes the cue's state at local time `t` into its entity.
    fn evaluate(&mut self, a: &ActiveCue, t: f64) {
        let spec = &self.state.profile.cues[&a.cue].spec;
        let raw = spec.presence_at(t);
        let status = self.state.entities.get_mut(&a.entity).expect("active cue targets a live entity");
        for layer in LayerId::ALL {
            let Some(env) = raw.get(layer) else { continue };
            let s0 = a.start_presence[slot(layer)];
            let p = if spec.direction.source() == Some(layer) { s0 * env } else { s0 + (1.0 - s0) * env };
            status.presence[slot(layer)] = p;
            *status.state.get_mut(layer) = spec.params_for_presence(p);
        }
    }

    fn set_param(&mut self, path: &str, value: &Value) -> Result<()> {
        let bad = |what: &str| Error::domain(format!("set_param `{path}`: expected {what}, got {value}"));
        let num = || value.as_f64().filter(|v| v.is_finite()).ok_or_else(|| bad("a number"));
        let nums = |n: usize| -> Result<Vec<f64>> {
            let arr = value.as_array().filter(|a| a.len() == n).ok_or_else(|| bad(&format!("{n} numbers")))?;
            arr.iter().map(|v| v.as_f64().filter(|v| v.is_finite()).ok_or_else(|| bad(&format!("{n} numbers")))).collect()
        };
        let parts: Vec<&str> = path.split('.').collect();
        match parts.as_slice() {
            ["entity", name, field] => {
                let geometry = self.state.profile.geometry;
                let e = self
                    .state
                    .profile
                    .entity_mut(name)
                    .ok_or_else(|| Error::domain(format!("set_param `{path}`: unknown entity `{name}`")))?;
                match *field {
                    "alpha" => {
                        let v = num()?;
                        if !(0.0..=1.0).contains(&v) {
                            return Err(bad("a value in [0, 1]"));
                        }
                        e.alpha = v;
                    }
                    "scale" => {
                        let v = num()?;
                        if v <= 0.0 {
                            return Err(bad("a value > 0"));
                        }
                        e.scale = v;
                    }
                    "center_m" => {
                        let v = nums(2)?;
                        let [hx, hy] = geometry.half_extent_m();
                        let slack = geometry.physical_width_m;
                        if v[0].abs() > hx + slack || v[1].abs() > hy + slack {
                            return Err(bad("a center within one panel width of the panel"));
                        }
                        e.center_m = [v[0], v[1]];
                    }
                    "linking" => {
                        let s = value.as_str().ok_or_else(|| bad("a style name"))?;
                        e.linking = LinkingStyle::from_name(s).ok_or_else(|| bad("none, landmark, halo, outline or clone"))?;
                    }
                    _ => return Err(Error::domain(format!("set_param: unknown path `{path}`"))),
                }
            }
            ["ambient"] => {
                let v = nums(3)?;
                self.state.ambient = Color::checked(v[0], v[1], v[2]).map_err(|_| bad("channels in [0, 1]"))?;
            }
            ["link_placement"] => {
                self.state.link_placement = match value.as_str() {
                    Some("on_axis") => LinkPlacement::OnAxis,
                    Some("viewer_corrected") => LinkPlacement::ViewerCorrected,
                    _ => return Err(bad("on_axis or viewer_corrected")),
                };
            }
            ["zones", field @ ("personal_max_m" | "social_max_m")] => {
                let mut z = self.state.profile.zone_config;
                if *field == "personal_max_m" {
                    z.personal_max_m = num()?;
                } else {
                    z.social_max_m = num()?;
                }
                z.validate()?;
                self.state.profile.zone_config = z;
            }
            _ => return Err(Error::domain(format!("set_param: unknown path `{path}`"))),
        }
        Ok(())
    }

    /// Read-only snapshot. Topics: `state` (everything), `entities`,
    /// `zones`, `active`, `cues`, `tick`, `log`.
    pub fn query(&self, topic: &str) -> Result<Value> {
        let s = &self.state;
        let entities = || -> Value {
            s.entities
                .iter()
                .map(|(name, st)| {
                    let decl = s.profile.entity(name).expect("status mirrors profile");
                    (
                        name.clone(),
                        json!({
                            "home_layer": decl.layer,
                            "presence": { "front": st.presence[0], "back": st.presence[1] },
                            "front": st.state.front,
                            "back": st.state.back,
                            "center_m": decl.center_m,
                            "scale": decl.scale,
                            "alpha": decl.alpha,
                            "linking": decl.linking,
                        }),
                    )
                })
                .collect::<serde_json::Map<_, _>>()
                .into()
        };
        let zones = || -> Value {
            DistanceSource::ALL
                .iter()
                .map(|src| {
                    (
                        src.name().to_string(),
                        json!({ "zone": s.zones.get(src), "distance_m": s.distances.get(src) }),
                    )
                })
                .collect::<serde_json::Map<_, _>>()
                .into()
        };
        let active = || -> Value {
            s.active
                .iter()
                .map(|a| json!({ "cue": a.cue, "entity": a.entity, "start_tick": a.start_tick }))
                .collect()
        };
        let cues = || -> Value {
            s.profile.cues.iter().map(|(n, c)| json!({ "name": n, "target": c.target, "direction": c.spec.direction })).collect()
        };
        Ok(match topic {
            "tick" => json!({ "tick": s.tick, "time_s": s.time_s() }),
            "entities" => entities(),
            "zones" => zones(),
            "active" => active(),
            "cues" => cues(),
            "log" => serde_json::to_value(&self.command_log).expect("log serializes"),
            "state" => json!({
                "tick": s.tick,
                "time_s": s.time_s(),
                "rate_hz": TICK_RATE_HZ,
                "eye": s.viewpoint.eye.0,
                "separation_m": s.profile.geometry.separation_m,
                "resolution_px": [s.profile.geometry.width_px, s.profile.geometry.height_px],
                "ambient": s.ambient,
                "link_placement": s.link_placement,
                "entities": entities(),
                "zones": zones(),
                "active": active(),
                "cues": cues(),
            }),
            other => {
                return Err(Error::domain(format!(
                    "unknown query topic `{other}` (state, entities, zones, active, cues, tick, log)"
                )))
            }
        })
    }

    /// Advances one tick with no sensor input.
    pub fn step_idle(&mut self) {
        self.step(&[]);
    }

    /// Advances one tick: ingests `samples`, fires bindings on condition
    /// edges, then advances and retires active cues.
    pub fn step(&mut self, samples: &[SensorSample]) {
        self.state.tick += 1;
        let tick = self.state.tick;
        for s in samples {
            self.sensor_log.push((tick, s.clone()));
            self.ingest(s);
        }
        let mut keep = Vec::with_capacity(self.state.active.len());
        for a in std::mem::take(&mut self.state.active) {
            let total = self.state.profile.cues[&a.cue].spec.total_s();
            let t = time_of_tick(tick - a.start_tick);
            if t >= total {
                self.evaluate(&a, total);
            } else {
                self.evaluate(&a, t);
                keep.push(a);
            }
        }
        self.state.active = keep;
    }

    fn anomaly(&mut self, msg: String) {
        log::warn!("tick {}: {msg}", self.state.tick);
        self.anomalies.push(format!("tick {}: {msg}", self.state.tick));
    }

    fn ingest(&mut self, s: &SensorSample) {
        match s {
            SensorSample::UserDistance { distance_m } => self.observe(DistanceSource::User, *distance_m),
            SensorSample::HandFrame(h) => match ingest_hand(h, self.state.profile.calibration.as_ref()) {
                Ok(r) => self.observe(DistanceSource::Hand, r.distance_m),
                Err(e) => self.anomaly(e.to_string()),
            },
            SensorSample::DepthFrame(f) => self.segment(f),
        }
    }

    fn segment(&mut self, f: &DepthFrame) {
        let segs: Vec<(String, String, f64)> =
            self.state.profile.segments.iter().map(|(n, s)| (n.clone(), s.asset.clone(), s.threshold_m)).collect();
        for (name, asset, threshold) in segs {
            let Some(rgb) = self.assets.frame(&asset, self.state.tick) else { continue };
            match depth_segment(f, rgb, threshold) {
                Ok(m) => {
                    self.state.masks.insert(name, m);
                }
                Err(e) => self.anomaly(format!("segment `{name}`: {e}")),
            }
        }
    }

    fn observe(&mut self, src: DistanceSource, d: f64) {
        let zone = match classify_proximity(d, &self.state.profile.zone_config) {
            Ok(z) => z,
            Err(e) => return self.anomaly(format!("{} distance: {e}", src.name())),
        };
        let prev = self.state.zones.insert(src, zone);
        self.state.distances.insert(src, d);
        let mut fire = Vec::new();
        for (i, b) in self.state.profile.bindings.iter().enumerate() {
            if b.source != src {
                continue;
            }
            let edge = match b.condition {
                Condition::ZoneEnter(z) => zone == z && prev != Some(z),
                Condition::ZoneExit(z) => prev == Some(z) && zone != z,
                Condition::DepthBelow(t) => {
                    let now = d < t;
                    let was = std::mem::replace(&mut self.state.below[i], now);
                    now && !was
                }
                Condition::Manual => false,
            };
            if edge {
                fire.push(b.fire.clone());
            }
        }
        for cue in fire {
            if self.trigger(&cue).is_ok() {
                let tick = self.state.tick;
                self.command_log.push(LoggedCommand { tick, origin: Origin::Binding, command: Command::Trigger { cue } });
            }
        }
    }

    /// Rebuilds the state from the initial profile by re-applying the logs
    /// up to `until_tick`.
    pub fn replay(
        profile: ExperienceProfile,
        assets: AssetLibrary,
        commands: &[LoggedCommand],
        sensors: &[(u64, SensorSample)],
        until_tick: u64,
    ) -> Result<Engine> {
        let mut eng = Engine::new(profile, assets)?;
        Replay::new(commands, sensors).advance_to(&mut eng, until_tick, |_| Ok(()))?;
        Ok(eng)
    }

    /// Moves the viewer without logging a command; used by batch renders.
    pub fn set_viewpoint(&mut self, v: Viewpoint) {
        self.state.viewpoint = v;
    }

    /// Eye currently used by the compositor.
    pub fn eye(&self) -> Vec3 {
        self.state.viewpoint.eye
    }
}
