use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// The animat's consummatory repertoire. Index order is also the tie-break
/// order everywhere an argmax over actions is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Eat,
    Drink,
    None,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Eat, Action::Drink, Action::None];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        match self {
            Action::Eat => 0,
            Action::Drink => 1,
            Action::None => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Eat => "eat",
            Action::Drink => "drink",
            Action::None => "none",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eat" => Ok(Action::Eat),
            "drink" => Ok(Action::Drink),
            "none" => Ok(Action::None),
            other => Err(format!("unknown action `{other}`")),
        }
    }
}

/// Index of the largest entry, lowest index on ties.
pub(crate) fn argmax(values: &[f64; Action::COUNT]) -> usize {
    let mut best = 0;
    for i in 1..Action::COUNT {
        if values[i] > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StimulusSign {
    Positive,
    Negative,
    None,
}

/// Outcome of an action on the animat's physiology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stimulus {
    pub sign: StimulusSign,
    pub magnitude: f64,
}

impl Stimulus {
    pub const NONE: Stimulus = Stimulus { sign: StimulusSign::None, magnitude: 0.0 };

    pub fn positive(magnitude: f64) -> Self {
        Self { sign: StimulusSign::Positive, magnitude: magnitude.max(0.0) }
    }

    pub fn negative(magnitude: f64) -> Self {
        Self { sign: StimulusSign::Negative, magnitude: magnitude.max(0.0) }
    }

    pub fn is_none(&self) -> bool {
        self.sign == StimulusSign::None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&[0.5, 0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.1, 0.7, 0.7]), 1);
        assert_eq!(argmax(&[0.1, 0.2, 0.7]), 2);
    }

    #[test]
    fn action_names_parse_back() {
        for a in Action::ALL {
            assert_eq!(a.as_str().parse::<Action>().unwrap(), a);
            assert_eq!(Action::from_index(a.index()), Some(a));
        }
    }
}
