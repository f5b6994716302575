use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::geometry::Point;

/// Nine qualitative channels every phenomenon carries, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Qualia {
    pub redness: f64,
    pub greenness: f64,
    pub blueness: f64,
    pub odour_plus: f64,
    pub odour_minus: f64,
    pub loudness: f64,
    pub flavour_plus: f64,
    pub flavour_minus: f64,
    pub hardness: f64,
}

impl Qualia {
    pub const CHANNELS: usize = 9;
    /// Channels perceived from a distance; the rest need contact.
    pub const DISTAL: usize = 6;

    pub fn to_array(self) -> [f64; Self::CHANNELS] {
        [
            self.redness,
            self.greenness,
            self.blueness,
            self.odour_plus,
            self.odour_minus,
            self.loudness,
            self.flavour_plus,
            self.flavour_minus,
            self.hardness,
        ]
    }

    pub fn is_valid(&self) -> bool {
        self.to_array().iter().all(|x| (0.0..=1.0).contains(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhenomenonId(pub u64);

impl fmt::Display for PhenomenonId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhenomenonKind {
    Food,
    Rock,
    Lightning,
    Rain,
}

impl PhenomenonKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PhenomenonKind::Food => "food",
            PhenomenonKind::Rock => "rock",
            PhenomenonKind::Lightning => "lightning",
            PhenomenonKind::Rain => "rain",
        }
    }
}

impl fmt::Display for PhenomenonKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhenomenonKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "food" => Ok(Self::Food),
            "rock" => Ok(Self::Rock),
            "lightning" => Ok(Self::Lightning),
            "rain" => Ok(Self::Rain),
            other => Err(format!("unknown phenomenon kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phenomenon {
    pub id: PhenomenonId,
    pub kind: PhenomenonKind,
    pub position: Point,
    /// Touch radius.
    pub size: f64,
    pub age: u64,
    pub qualia: Qualia,
}

/// Default qualia and size of each kind of phenomenon (and of animats).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KindTable {
    pub food: KindSpec,
    pub rock: KindSpec,
    pub rain: KindSpec,
    pub lightning: KindSpec,
    pub animat: KindSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KindSpec {
    pub size: f64,
    pub qualia: Qualia,
}

impl KindTable {
    pub fn get(&self, kind: PhenomenonKind) -> &KindSpec {
        match kind {
            PhenomenonKind::Food => &self.food,
            PhenomenonKind::Rock => &self.rock,
            PhenomenonKind::Rain => &self.rain,
            PhenomenonKind::Lightning => &self.lightning,
        }
    }
}

impl Default for KindTable {
    fn default() -> Self {
        Self {
            food: KindSpec {
                size: 1.0,
                qualia: Qualia { greenness: 0.8, odour_plus: 0.9, flavour_plus: 0.9, hardness: 0.2, ..Default::default() },
            },
            rock: KindSpec {
                size: 1.5,
                qualia: Qualia { redness: 0.5, greenness: 0.5, blueness: 0.5, hardness: 1.0, ..Default::default() },
            },
            rain: KindSpec { size: 1.5, qualia: Qualia { blueness: 0.9, loudness: 0.4, ..Default::default() } },
            lightning: KindSpec {
                size: 1.0,
                qualia: Qualia { redness: 1.0, greenness: 1.0, blueness: 1.0, loudness: 1.0, ..Default::default() },
            },
            animat: KindSpec {
                size: 1.0,
                qualia: Qualia {
                    redness: 0.7,
                    odour_minus: 0.5,
                    loudness: 0.3,
                    flavour_plus: 0.6,
                    hardness: 0.5,
                    ..Default::default()
                },
            },
        }
    }
}
