use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Proxemic distance band, nearest first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Zone {
    Personal,
    Social,
    Public,
}

impl Zone {
    pub const ALL: [Zone; 3] = [Zone::Personal, Zone::Social, Zone::Public];

    pub fn name(self) -> &'static str {
        match self {
            Zone::Personal => "personal",
            Zone::Social => "social",
            Zone::Public => "public",
        }
    }

    pub fn from_name(s: &str) -> Option<Zone> {
        Zone::ALL.into_iter().find(|z| z.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoneConfig {
    pub personal_max_m: f64,
    pub social_max_m: f64,
}

impl Default for ZoneConfig {
    fn default() -> Self {
        ZoneConfig { personal_max_m: 1.2, social_max_m: 3.6 }
    }
}

impl ZoneConfig {
    pub fn new(personal_max_m: f64, social_max_m: f64) -> Result<Self> {
        let z = ZoneConfig { personal_max_m, social_max_m };
        z.validate()?;
        Ok(z)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.personal_max_m > 0.0 && self.personal_max_m < self.social_max_m && self.social_max_m.is_finite()) {
            return Err(Error::domain(format!(
                "zone thresholds must satisfy 0 < personal ({}) < social ({})",
                self.personal_max_m, self.social_max_m
            )));
        }
        Ok(())
    }
}

/// Bands are half-open and lower-inclusive: a distance exactly on a
/// threshold belongs to the outer zone.
pub fn classify_proximity(d: f64, z: &ZoneConfig) -> Result<Zone> {
    if d.is_nan() || d < 0.0 {
        return Err(Error::domain(format!("distance must be >= 0, got {d}")));
    }
    Ok(if d < z.personal_max_m {
        Zone::Personal
    } else if d < z.social_max_m {
        Zone::Social
    } else {
        Zone::Public
    })
}
