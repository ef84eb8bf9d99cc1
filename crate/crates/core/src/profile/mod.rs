//! Experience profiles: a small block-structured language declaring the
//! display, assets, entities, cues and sensor bindings of one experience.
//!
//! ```text
//! display { resolution_px 320 180; size_m 1.218 0.685; separation_m 0.72; }
//! asset hand { kind image; path "hand.pam"; size_m 0.2 0.3; }
//! entity h1 { asset hand; layer back; center_m 0.1 0; link halo; }
//! cue raise {
//!   target h1;
//!   transition { direction back_to_front; params alpha; duration_s 1; dest { ramp linear; } }
//! }
//! bind { when manual; fire raise; }
//! ```
//!
//! The full grammar lives in `docs/profile-grammar.md`. Units are always in
//! the key name (`_m`, `_s`, `_px`). Parsing stops at the first error.

mod lexer;
mod parse;
mod serialize;
mod syntax;
mod validate;

use std::collections::BTreeMap;

use serde::Serialize;

pub use lexer::Pos;
pub use parse::parse_profile;
pub use serialize::serialize_profile;
pub use validate::{validate, Diagnostic};

use crate::calibration::SimilarityTransform;
use crate::linking::{LinkingParams, LinkingStyle};
use crate::model::{DisplayGeometry, LayerId};
use crate::runtime::proximity::{Zone, ZoneConfig};
use crate::transition::TransitionSpec;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}\n  | {snippet}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub snippet: String,
}

impl ParseError {
    pub(crate) fn at(src: &str, pos: Pos, message: String) -> Self {
        let snippet = src.lines().nth(pos.line - 1).unwrap_or("").to_string();
        ParseError { line: pos.line, column: pos.column, message, snippet }
    }

    /// Whether `(line, column)` addresses a character of `src`, or the
    /// position just past the end of a line.
    pub fn points_into(&self, src: &str) -> bool {
        let line_count = src.split('\n').count();
        if self.line == 0 || self.line > line_count || self.column == 0 {
            return false;
        }
        let line = src.split('\n').nth(self.line - 1).unwrap_or("");
        self.column <= line.chars().count() + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetKind {
    Image,
    FrameSequence,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssetDecl {
    pub kind: AssetKind,
    /// Image files relative to the profile's directory; one per frame.
    pub paths: Vec<String>,
    pub size_m: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntityDecl {
    pub name: String,
    pub asset: String,
    pub layer: LayerId,
    pub center_m: [f64; 2],
    pub scale: f64,
    pub alpha: f64,
    pub linking: LinkingStyle,
    pub linking_params: LinkingParams,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CueDecl {
    pub target: String,
    pub spec: TransitionSpec,
}

/// Scalar distance a binding watches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceSource {
    /// Viewer distance from the front panel.
    User,
    /// Nearest tracked hand joint to the front panel.
    Hand,
}

impl DistanceSource {
    pub const ALL: [DistanceSource; 2] = [DistanceSource::User, DistanceSource::Hand];

    pub fn name(self) -> &'static str {
        match self {
            DistanceSource::User => "user",
            DistanceSource::Hand => "hand",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        DistanceSource::ALL.into_iter().find(|d| d.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    ZoneEnter(Zone),
    ZoneExit(Zone),
    DepthBelow(f64),
    /// Fired only by an operator.
    Manual,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BindingDecl {
    pub condition: Condition,
    pub source: DistanceSource,
    pub fire: String,
}

/// Splits an RGB asset by a depth threshold into a front and a back entity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentDecl {
    pub asset: String,
    pub front_entity: String,
    pub back_entity: String,
    pub threshold_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperienceProfile {
    pub geometry: DisplayGeometry,
    pub zone_config: ZoneConfig,
    pub calibration: Option<SimilarityTransform>,
    pub assets: BTreeMap<String, AssetDecl>,
    /// Declaration order is drawing order.
    pub entities: Vec<EntityDecl>,
    pub cues: BTreeMap<String, CueDecl>,
    pub bindings: Vec<BindingDecl>,
    pub segments: BTreeMap<String, SegmentDecl>,
}

impl ExperienceProfile {
    pub fn entity(&self, name: &str) -> Option<&EntityDecl> {
        self.entities.iter().find(|e| e.name == name)
    }

    pub fn entity_mut(&mut self, name: &str) -> Option<&mut EntityDecl> {
        self.entities.iter_mut().find(|e| e.name == name)
    }
}
