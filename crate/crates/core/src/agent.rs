//! Per-animat controllers and the per-animat slice of the tick pipeline.

use serde::{Deserialize, Serialize};

use crate::action::{Action, Stimulus};
use crate::engine::{Hierarchy, KonceptId};
use crate::rng::RngStream;
use crate::world::{AnimatId, World};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    Keba,
    Random,
    None,
}

impl ControllerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ControllerKind::Keba => "keba",
            ControllerKind::Random => "random",
            ControllerKind::None => "none",
        }
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "keba" => Ok(Self::Keba),
            "random" => Ok(Self::Random),
            "none" => Ok(Self::None),
            other => Err(format!("unknown controller `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Controller {
    Keba {
        hierarchy: Box<Hierarchy>,
        /// Keep the radius-adaptation noise floor equal to the world's sensor noise.
        noise_floor_follows_world: bool,
    },
    Random {
        rng: RngStream,
    },
    None,
}

impl Controller {
    pub fn kind(&self) -> ControllerKind {
        match self {
            Controller::Keba { .. } => ControllerKind::Keba,
            Controller::Random { .. } => ControllerKind::Random,
            Controller::None => ControllerKind::None,
        }
    }

    pub fn hierarchy(&self) -> Option<&Hierarchy> {
        match self {
            Controller::Keba { hierarchy, .. } => Some(hierarchy),
            _ => None,
        }
    }

    pub fn koncept_counts(&self) -> Vec<usize> {
        self.hierarchy().map(Hierarchy::counts).unwrap_or_default()
    }

    pub fn sync_noise_floor(&mut self, noise_amplitude: f64) {
        if let Controller::Keba { hierarchy, noise_floor_follows_world: true } = self {
            hierarchy.set_noise_floor(noise_amplitude);
        }
    }
}

/// What one animat did during one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickTrace {
    pub tick: u64,
    pub animat: AnimatId,
    pub alive: bool,
    pub action: Action,
    pub stimulus: Stimulus,
    pub koncept_counts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub created: Vec<KonceptId>,
}

/// perceive → decide → act → physiology → reinforce, for animat `who`.
/// Dead animats produce a trace with `alive = false` and change nothing.
pub fn tick_animat(world: &mut World, who: usize, controller: &mut Controller, tick: u64) -> TickTrace {
    let body = &world.animats[who];
    if !body.alive() {
        return TickTrace {
            tick,
            animat: body.id,
            alive: false,
            action: Action::None,
            stimulus: Stimulus::NONE,
            koncept_counts: controller.koncept_counts(),
            created: Vec::new(),
        };
    }

    let input = world.perceive(who);
    let mut created = Vec::new();
    let action = match controller {
        Controller::Keba { hierarchy, .. } => {
            let report = hierarchy.step(&input).expect("perception yields 15 channels in [0, 1]");
            created.extend(report.created());
            hierarchy.vote().action
        }
        Controller::Random { rng } => Action::ALL[rng.index(Action::COUNT)],
        Controller::None => Action::None,
    };
    let stimulus = world.apply_action(who, action, tick);
    world.physiology_step(who, tick);
    if let Controller::Keba { hierarchy, .. } = controller {
        hierarchy.reinforce(action, stimulus);
    }
    TickTrace {
        tick,
        animat: world.animats[who].id,
        alive: world.animats[who].alive(),
        action,
        stimulus,
        koncept_counts: controller.koncept_counts(),
        created,
    }
}
