use std::collections::BTreeSet;
use std::fmt;

use super::ExperienceProfile;

/// Plausible layer gaps for a desk-sized stack, exclusive.
pub const SEPARATION_LINT_RANGE_M: (f64, f64) = (0.05, 3.0);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

/// Non-fatal lints. An empty list means the profile is clean.
pub fn validate(p: &ExperienceProfile) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let sep = p.geometry.separation_m;
    let (lo, hi) = SEPARATION_LINT_RANGE_M;
    if !(sep > lo && sep < hi) {
        out.push(Diagnostic {
            code: "separation",
            message: format!("separation_m {sep} is outside the plausible range ({lo}, {hi}) m"),
        });
    }

    let [hx, hy] = p.geometry.half_extent_m();
    for e in &p.entities {
        let [x, y] = e.center_m;
        if x.abs() > hx || y.abs() > hy {
            out.push(Diagnostic {
                code: "off-panel",
                message: format!("entity `{}` is centered at ({x}, {y}) m, outside the panel", e.name),
            });
        }
    }

    let used_assets: BTreeSet<&str> = p
        .entities
        .iter()
        .map(|e| e.asset.as_str())
        .chain(p.segments.values().map(|s| s.asset.as_str()))
        .collect();
    for name in p.assets.keys() {
        if !used_assets.contains(name.as_str()) {
            out.push(Diagnostic { code: "unused-asset", message: format!("asset `{name}` is never used") });
        }
    }

    // A manual binding counts: it lists the cue for the operator.
    let used_cues: BTreeSet<&str> = p.bindings.iter().map(|b| b.fire.as_str()).collect();
    for name in p.cues.keys() {
        if !used_cues.contains(name.as_str()) {
            out.push(Diagnostic { code: "unused-cue", message: format!("cue `{name}` is never bound") });
        }
    }
    out
}
