//! Deterministic text-adventure engine.
//!
//! Transitions are pure: [`WorldSpec::step`] borrows a state and returns its
//! successor together with the rendered [`Observation`]. There is no RNG
//! anywhere in the engine.

mod alphabet;
mod explore;
mod render;
mod spec;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use alphabet::ActionAlphabet;
pub use explore::{explore, ExploredTransition};
pub use spec::{Direction, Goal, Object, Rewards, Room, SpecError, UseRule, WorldSpec, INVENTORY};

/// An agent action, addressed by object id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Move(Direction),
    Take(String),
    Drop(String),
    Use(String, Option<String>),
    Open(String),
    Look,
    Inventory,
}

impl Command {
    /// Player-typeable form using object display names.
    pub fn to_input(&self, spec: &WorldSpec) -> String {
        let name = |id: &str| {
            spec.object(id)
                .map(|o| o.name.clone())
                .unwrap_or_else(|| id.to_string())
        };
        match self {
            Command::Move(d) => format!("go {d}"),
            Command::Take(o) => format!("take {}", name(o)),
            Command::Drop(o) => format!("drop {}", name(o)),
            Command::Use(o, None) => format!("use {}", name(o)),
            Command::Use(o, Some(t)) => format!("use {} on {}", name(o), name(t)),
            Command::Open(o) => format!("open {}", name(o)),
            Command::Look => "look".into(),
            Command::Inventory => "inventory".into(),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Command::Move(d) => write!(f, "go {d}"),
            Command::Take(o) => write!(f, "take {o}"),
            Command::Drop(o) => write!(f, "drop {o}"),
            Command::Use(o, None) => write!(f, "use {o}"),
            Command::Use(o, Some(t)) => write!(f, "use {o} on {t}"),
            Command::Open(o) => write!(f, "open {o}"),
            Command::Look => f.write_str("look"),
            Command::Inventory => f.write_str("inventory"),
        }
    }
}

/// Where an object currently is.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Room(String),
    Inventory,
    Container(String),
}

impl Location {
    fn resolve(spec: &WorldSpec, raw: &str) -> Location {
        if raw == INVENTORY {
            Location::Inventory
        } else if spec.room(raw).is_some() {
            Location::Room(raw.to_string())
        } else {
            Location::Container(raw.to_string())
        }
    }
}

/// Mutable game situation. Every object has exactly one entry in
/// `object_locations`, so the inventory is derived rather than stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorldState {
    pub current_room: String,
    pub object_locations: BTreeMap<String, Location>,
    pub flags: BTreeSet<String>,
    pub steps_taken: u32,
    pub subgoals_done: Vec<bool>,
}

impl WorldState {
    pub fn inventory(&self) -> BTreeSet<&str> {
        self.object_locations
            .iter()
            .filter(|(_, l)| **l == Location::Inventory)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    pub fn carries(&self, object: &str) -> bool {
        self.object_locations.get(object) == Some(&Location::Inventory)
    }

    pub fn won(&self) -> bool {
        self.subgoals_done.iter().all(|&d| d)
    }

    pub fn is_done(&self, spec: &WorldSpec) -> bool {
        self.won() || self.steps_taken >= spec.max_steps
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub text: String,
    pub reward: f64,
    pub done: bool,
    pub won: bool,
    /// Commands valid in the new state, in action-alphabet order. Empty once done.
    pub admissible: Vec<Command>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("episode is over after {steps} steps; call reset")]
    EpisodeOver { steps: u32 },
}

impl WorldSpec {
    pub fn initial_state(&self) -> WorldState {
        WorldState {
            current_room: self.start_room().id.clone(),
            object_locations: self
                .objects
                .iter()
                .map(|o| (o.id.clone(), Location::resolve(self, &o.location)))
                .collect(),
            flags: BTreeSet::new(),
            steps_taken: 0,
            subgoals_done: vec![false; self.goals.len()],
        }
    }

    pub fn reset(&self) -> (WorldState, Observation) {
        let state = self.initial_state();
        let obs = Observation {
            text: render::observation(self, &state, None),
            reward: 0.0,
            done: false,
            won: false,
            admissible: self.admissible(&state),
        };
        (state, obs)
    }

    /// Fraction of subgoals latched so far.
    pub fn goal_status(&self, state: &WorldState) -> f64 {
        let done = state.subgoals_done.iter().filter(|&&d| d).count();
        done as f64 / self.goals.len() as f64
    }

    pub fn is_open(&self, state: &WorldState, object: &Object) -> bool {
        state.flags.contains(&object.open_flag())
    }

    /// Whether the contents of `container` can be seen and reached.
    fn container_accessible(&self, state: &WorldState, container: &str) -> bool {
        match self.object(container) {
            Some(c) => (!c.openable || self.is_open(state, c)) && self.is_visible(state, container),
            None => false,
        }
    }

    /// Visible means in the current room, carried, or inside an accessible container.
    pub fn is_visible(&self, state: &WorldState, object: &str) -> bool {
        match state.object_locations.get(object) {
            Some(Location::Inventory) => true,
            Some(Location::Room(r)) => *r == state.current_room,
            Some(Location::Container(c)) => self.container_accessible(state, c),
            None => false,
        }
    }

    fn use_rule<'a>(&'a self, object: &str, target: Option<&str>) -> Option<&'a UseRule> {
        self.object(object)?
            .uses
            .iter()
            .find(|r| r.target.as_deref() == target)
    }

    pub fn is_admissible(&self, state: &WorldState, cmd: &Command) -> bool {
        match cmd {
            Command::Move(d) => self
                .room(&state.current_room)
                .is_some_and(|r| r.exits.contains_key(d)),
            Command::Take(o) => {
                self.object(o).is_some_and(|obj| obj.portable)
                    && !state.carries(o)
                    && self.is_visible(state, o)
            }
            Command::Drop(o) => state.carries(o),
            Command::Open(o) => match self.object(o) {
                Some(obj) => {
                    obj.openable
                        && self.is_visible(state, o)
                        && !self.is_open(state, obj)
                        && obj.requires.as_deref().is_none_or(|k| state.carries(k))
                }
                None => false,
            },
            Command::Use(o, t) => {
                let Some(rule) = self.use_rule(o, t.as_deref()) else {
                    return false;
                };
                self.is_visible(state, o)
                    && t.as_deref().is_none_or(|t| self.is_visible(state, t))
                    && !state.flags.contains(&rule.sets_flag)
            }
            Command::Look | Command::Inventory => true,
        }
    }

    /// Admissible commands in alphabet order.
    pub fn admissible(&self, state: &WorldState) -> Vec<Command> {
        ActionAlphabet::for_spec(self)
            .commands()
            .iter()
            .filter(|c| self.is_admissible(state, c))
            .cloned()
            .collect()
    }

    fn goal_satisfied(&self, state: &WorldState, goal: &Goal) -> bool {
        match goal {
            Goal::ObjectAt { object, location } => {
                state.object_locations.get(object) == Some(&Location::resolve(self, location))
            }
            Goal::InInventory { object } => state.carries(object),
            Goal::FlagSet { flag } => state.flags.contains(flag),
        }
    }

    /// Applies `cmd`. Inadmissible commands cost a step and the invalid penalty
    /// but leave the world unchanged.
    pub fn step(
        &self,
        state: &WorldState,
        cmd: &Command,
    ) -> Result<(WorldState, Observation), EngineError> {
        if state.is_done(self) {
            return Err(EngineError::EpisodeOver {
                steps: state.steps_taken,
            });
        }
        let mut next = state.clone();
        next.steps_taken += 1;
        let mut reward = self.rewards.step_penalty;

        let message = if self.is_admissible(state, cmd) {
            self.apply(&mut next, cmd)
        } else {
            reward += self.rewards.invalid_penalty;
            render::failure(self, state, cmd)
        };

        for (i, goal) in self.goals.iter().enumerate() {
            if !next.subgoals_done[i] && self.goal_satisfied(&next, goal) {
                next.subgoals_done[i] = true;
                reward += self.rewards.subgoal;
            }
        }
        let won = next.won();
        if won {
            reward += self.rewards.win;
        }
        let done = next.is_done(self);
        let mut text = render::observation(self, &next, Some(&message));
        if won {
            text.push_str("\n*** You have won ***");
        } else if done {
            text.push_str("\nYou have run out of time.");
        }
        let admissible = if done { Vec::new() } else { self.admissible(&next) };
        Ok((
            next,
            Observation {
                text,
                reward,
                done,
                won,
                admissible,
            },
        ))
    }

    fn apply(&self, next: &mut WorldState, cmd: &Command) -> String {
        match cmd {
            Command::Move(d) => {
                let target = self.room(&next.current_room).unwrap().exits[d].clone();
                next.current_room = target;
                format!("You go {d}.")
            }
            Command::Take(o) => {
                next.object_locations.insert(o.clone(), Location::Inventory);
                format!("You take the {}.", self.object(o).unwrap().name)
            }
            Command::Drop(o) => {
                next.object_locations
                    .insert(o.clone(), Location::Room(next.current_room.clone()));
                format!("You drop the {}.", self.object(o).unwrap().name)
            }
            Command::Open(o) => {
                let obj = self.object(o).unwrap();
                next.flags.insert(obj.open_flag());
                format!("You open the {}.", obj.name)
            }
            Command::Use(o, t) => {
                let rule = self.use_rule(o, t.as_deref()).unwrap();
                next.flags.insert(rule.sets_flag.clone());
                rule.message.clone().unwrap_or_else(|| {
                    let name = &self.object(o).unwrap().name;
                    match t {
                        Some(t) => format!("You use the {name} on the {}.", self.object(t).unwrap().name),
                        None => format!("You use the {name}."),
                    }
                })
            }
            Command::Look => "You look around.".into(),
            Command::Inventory => "You check your belongings.".into(),
        }
    }
}

/// Worlds bundled with the crate, by name.
pub const BUILTIN_WORLDS: [(&str, &str); 2] = [
    ("fetch-quest-3", include_str!("../../data/worlds/fetch-quest-3.json")),
    (
        "fetch-quest-3-distractor",
        include_str!("../../data/worlds/fetch-quest-3-distractor.json"),
    ),
];

pub fn builtin_world(name: &str) -> Option<WorldSpec> {
    BUILTIN_WORLDS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, doc)| WorldSpec::from_json(doc).expect("bundled world is valid"))
}

/// Loads and validates a world document.
pub fn load_world_spec(document: &str) -> Result<WorldSpec, SpecError> {
    WorldSpec::from_json(document)
}
