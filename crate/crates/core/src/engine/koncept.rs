use serde::{Deserialize, Serialize};
use std::fmt;

use crate::action::{argmax, Action};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KonceptId(pub u32);

impl fmt::Display for KonceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k{}", self.0)
    }
}

/// Link strength from a koncept to each action, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Links {
    pub eat: f64,
    pub drink: f64,
    pub none: f64,
}

impl Links {
    pub fn from_array(a: [f64; Action::COUNT]) -> Self {
        Self { eat: a[0], drink: a[1], none: a[2] }
    }

    pub fn to_array(self) -> [f64; Action::COUNT] {
        [self.eat, self.drink, self.none]
    }

    pub fn get(&self, action: Action) -> f64 {
        match action {
            Action::Eat => self.eat,
            Action::Drink => self.drink,
            Action::None => self.none,
        }
    }

    pub fn set(&mut self, action: Action, value: f64) {
        match action {
            Action::Eat => self.eat = value,
            Action::Drink => self.drink = value,
            Action::None => self.none = value,
        }
    }

    /// The action with the strongest link (lowest index on ties).
    pub fn strongest(&self) -> Action {
        Action::ALL[argmax(&self.to_array())]
    }
}

/// Lower and upper bound of a "medium" initial link value.
pub const MEDIUM_LINK: (f64, f64) = (0.4, 0.6);

/// Draws initial links: medium values for protokoncepts, and for higher
/// levels the average of the parents' mean link and a medium value.
/// Without `medium_none`, the `none` link starts at 0 on every level
/// (a draw is still consumed so the stream layout does not change).
pub fn init_links(parent_links: &[Links], medium_none: bool, rng: &mut RngStream) -> Links {
    let mut out = [0.0; Action::COUNT];
    for (i, slot) in out.iter_mut().enumerate() {
        let medium = rng.uniform(MEDIUM_LINK.0, MEDIUM_LINK.1);
        if i == Action::None.index() && !medium_none {
            continue;
        }
        *slot = if parent_links.is_empty() {
            medium
        } else {
            let mean = parent_links.iter().map(|l| l.to_array()[i]).sum::<f64>() / parent_links.len() as f64;
            (mean + medium) / 2.0
        };
    }
    Links::from_array(out)
}

/// Center and radii of a koncept above the protokoncept level.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenBall {
    /// One coordinate per parent, in parent order.
    pub center: Vec<f64>,
    pub r1: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Koncept {
    pub id: KonceptId,
    pub level: usize,
    pub parents: Vec<KonceptId>,
    /// `None` for protokoncepts.
    pub ball: Option<OpenBall>,
    pub v: f64,
    pub a: f64,
    pub a_prev: f64,
    pub s: f64,
    pub links: Links,
}

impl Koncept {
    pub fn is_proto(&self) -> bool {
        self.level == 0
    }
}
