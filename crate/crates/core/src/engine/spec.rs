//! Declarative world definitions and their validation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reserved location name for objects the player carries.
pub const INVENTORY: &str = "inventory";

/// Compass and vertical directions understood by the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    North,
    South,
    East,
    West,
    Northeast,
    Northwest,
    Southeast,
    Southwest,
    Up,
    Down,
}

impl Direction {
    pub const ALL: [Direction; 10] = [
        Direction::North,
        Direction::South,
        Direction::East,
        Direction::West,
        Direction::Northeast,
        Direction::Northwest,
        Direction::Southeast,
        Direction::Southwest,
        Direction::Up,
        Direction::Down,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Direction::North => "north",
            Direction::South => "south",
            Direction::East => "east",
            Direction::West => "west",
            Direction::Northeast => "northeast",
            Direction::Northwest => "northwest",
            Direction::Southeast => "southeast",
            Direction::Southwest => "southwest",
            Direction::Up => "up",
            Direction::Down => "down",
        }
    }

    pub fn abbreviation(self) -> &'static str {
        match self {
            Direction::North => "n",
            Direction::South => "s",
            Direction::East => "e",
            Direction::West => "w",
            Direction::Northeast => "ne",
            Direction::Northwest => "nw",
            Direction::Southeast => "se",
            Direction::Southwest => "sw",
            Direction::Up => "u",
            Direction::Down => "d",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Direction::ALL
            .iter()
            .copied()
            .find(|d| d.name() == s || d.abbreviation() == s)
            .ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Room {
    pub id: String,
    pub name: String,
    /// Prose shown when the player is in the room.
    pub description: String,
    #[serde(default)]
    pub exits: BTreeMap<Direction, String>,
}

/// Effect of using an object, optionally on a target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UseRule {
    #[serde(default)]
    pub target: Option<String>,
    pub sets_flag: String,
    #[serde(default)]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Object {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub synonyms: Vec<String>,
    /// Room id, container object id, or `"inventory"`.
    pub location: String,
    #[serde(default)]
    pub portable: bool,
    #[serde(default)]
    pub container: bool,
    #[serde(default)]
    pub openable: bool,
    /// Object that must be carried for `open` to succeed.
    #[serde(default)]
    pub requires: Option<String>,
    /// Flag raised when the object is opened. Defaults to `<id>_open`.
    #[serde(default)]
    pub open_flag: Option<String>,
    #[serde(default)]
    pub uses: Vec<UseRule>,
}

impl Object {
    pub fn open_flag(&self) -> String {
        self.open_flag
            .clone()
            .unwrap_or_else(|| format!("{}_open", self.id))
    }
}

/// A single subgoal condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Goal {
    ObjectAt { object: String, location: String },
    InInventory { object: String },
    FlagSet { flag: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rewards {
    #[serde(default = "Rewards::default_win")]
    pub win: f64,
    #[serde(default = "Rewards::default_subgoal")]
    pub subgoal: f64,
    #[serde(default = "Rewards::default_step_penalty")]
    pub step_penalty: f64,
    #[serde(default = "Rewards::default_invalid_penalty")]
    pub invalid_penalty: f64,
}

impl Rewards {
    fn default_win() -> f64 {
        1.0
    }
    fn default_subgoal() -> f64 {
        0.5
    }
    fn default_step_penalty() -> f64 {
        -0.01
    }
    fn default_invalid_penalty() -> f64 {
        -0.05
    }
}

impl Default for Rewards {
    fn default() -> Self {
        Self {
            win: Self::default_win(),
            subgoal: Self::default_subgoal(),
            step_penalty: Self::default_step_penalty(),
            invalid_penalty: Self::default_invalid_penalty(),
        }
    }
}

fn default_max_steps() -> u32 {
    50
}

/// A complete, validated game definition. The first room is the start room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldSpec {
    pub rooms: Vec<Room>,
    #[serde(default)]
    pub objects: Vec<Object>,
    pub goals: Vec<Goal>,
    #[serde(default)]
    pub rewards: Rewards,
    #[serde(default = "default_max_steps")]
    pub max_steps: u32,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("world has no rooms")]
    NoRooms,
    #[error("world has no goals")]
    NoGoals,
    #[error("max_steps must be at least 1")]
    ZeroMaxSteps,
    #[error("duplicate id '{0}'")]
    DuplicateId(String),
    #[error("'{0}' is reserved and cannot be used as an id")]
    ReservedId(String),
    #[error("room '{room}' exit {direction} leads to undeclared room '{target}'")]
    DanglingExit {
        room: String,
        direction: Direction,
        target: String,
    },
    #[error("object '{object}' has unknown location '{location}'")]
    UnknownLocation { object: String, location: String },
    #[error("object '{object}' is placed inside '{container}', which is not a container")]
    NotAContainer { object: String, container: String },
    #[error("object '{0}' is part of a containment cycle")]
    ContainmentCycle(String),
    #[error("object '{object}' refers to unknown object '{reference}'")]
    UnknownObjectRef { object: String, reference: String },
    #[error("goal refers to unknown object '{0}'")]
    UnknownGoalObject(String),
    #[error("goal refers to unknown location '{0}'")]
    UnknownGoalLocation(String),
    #[error("goal flag '{0}' can never be set")]
    UnreachableFlag(String),
    #[error("reward '{0}' is invalid")]
    BadReward(&'static str),
}

impl WorldSpec {
    /// Parses and validates a JSON world document.
    pub fn from_json(document: &str) -> Result<Self, SpecError> {
        let spec: WorldSpec =
            serde_json::from_str(document).map_err(|e| SpecError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("world spec serializes")
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.rooms.is_empty() {
            return Err(SpecError::NoRooms);
        }
        if self.goals.is_empty() {
            return Err(SpecError::NoGoals);
        }
        if self.max_steps < 1 {
            return Err(SpecError::ZeroMaxSteps);
        }
        let r = &self.rewards;
        for (name, value) in [
            ("win", r.win),
            ("subgoal", r.subgoal),
            ("step_penalty", r.step_penalty),
            ("invalid_penalty", r.invalid_penalty),
        ] {
            if !value.is_finite() {
                return Err(SpecError::BadReward(name));
            }
        }
        if r.step_penalty > 0.0 {
            return Err(SpecError::BadReward("step_penalty"));
        }
        if r.invalid_penalty > 0.0 {
            return Err(SpecError::BadReward("invalid_penalty"));
        }

        let mut ids = BTreeSet::new();
        for id in self
            .rooms
            .iter()
            .map(|r| &r.id)
            .chain(self.objects.iter().map(|o| &o.id))
        {
            if id == INVENTORY {
                return Err(SpecError::ReservedId(id.clone()));
            }
            if !ids.insert(id.as_str()) {
                return Err(SpecError::DuplicateId(id.clone()));
            }
        }

        for room in &self.rooms {
            for (direction, target) in &room.exits {
                if self.room(target).is_none() {
                    return Err(SpecError::DanglingExit {
                        room: room.id.clone(),
                        direction: *direction,
                        target: target.clone(),
                    });
                }
            }
        }

        for object in &self.objects {
            let loc = &object.location;
            if loc != INVENTORY && self.room(loc).is_none() {
                match self.object(loc) {
                    Some(c) if c.container => {}
                    Some(_) => {
                        return Err(SpecError::NotAContainer {
                            object: object.id.clone(),
                            container: loc.clone(),
                        })
                    }
                    None => {
                        return Err(SpecError::UnknownLocation {
                            object: object.id.clone(),
                            location: loc.clone(),
                        })
                    }
                }
            }
            if let Some(req) = &object.requires {
                if self.object(req).is_none() {
                    return Err(SpecError::UnknownObjectRef {
                        object: object.id.clone(),
                        reference: req.clone(),
                    });
                }
            }
            for rule in &object.uses {
                if let Some(t) = &rule.target {
                    if self.object(t).is_none() {
                        return Err(SpecError::UnknownObjectRef {
                            object: object.id.clone(),
                            reference: t.clone(),
                        });
                    }
                }
            }
        }
        self.check_containment_cycles()?;

        let settable = self.settable_flags();
        for goal in &self.goals {
            match goal {
                Goal::ObjectAt { object, location } => {
                    if self.object(object).is_none() {
                        return Err(SpecError::UnknownGoalObject(object.clone()));
                    }
                    let known = location == INVENTORY
                        || self.room(location).is_some()
                        || self.object(location).is_some_and(|o| o.container);
                    if !known {
                        return Err(SpecError::UnknownGoalLocation(location.clone()));
                    }
                }
                Goal::InInventory { object } => {
                    if self.object(object).is_none() {
                        return Err(SpecError::UnknownGoalObject(object.clone()));
                    }
                }
                Goal::FlagSet { flag } => {
                    if !settable.contains(flag.as_str()) {
                        return Err(SpecError::UnreachableFlag(flag.clone()));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_containment_cycles(&self) -> Result<(), SpecError> {
        let parent: HashMap<&str, &str> = self
            .objects
            .iter()
            .map(|o| (o.id.as_str(), o.location.as_str()))
            .collect();
        for object in &self.objects {
            let mut cursor = object.location.as_str();
            let mut hops = 0;
            while let Some(next) = parent.get(cursor) {
                if cursor == object.id || hops > self.objects.len() {
                    return Err(SpecError::ContainmentCycle(object.id.clone()));
                }
                cursor = next;
                hops += 1;
            }
        }
        Ok(())
    }

    /// Flags that some command can raise.
    pub fn settable_flags(&self) -> BTreeSet<String> {
        let mut flags = BTreeSet::new();
        for o in &self.objects {
            if o.openable {
                flags.insert(o.open_flag());
            }
            for rule in &o.uses {
                flags.insert(rule.sets_flag.clone());
            }
        }
        flags
    }

    pub fn room(&self, id: &str) -> Option<&Room> {
        self.rooms.iter().find(|r| r.id == id)
    }

    pub fn object(&self, id: &str) -> Option<&Object> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn start_room(&self) -> &Room {
        &self.rooms[0]
    }

    /// Directions used by at least one exit, in canonical order.
    pub fn directions(&self) -> Vec<Direction> {
        let used: BTreeSet<Direction> = self
            .rooms
            .iter()
            .flat_map(|r| r.exits.keys().copied())
            .collect();
        used.into_iter().collect()
    }
}
