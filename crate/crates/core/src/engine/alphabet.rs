use std::collections::HashMap;

use super::{Command, WorldSpec};

/// Fixed enumeration of every grammatically possible command for a world.
///
/// Order: moves (canonical direction order, only directions some exit uses),
/// take, drop, open, use without target, use with target, look, inventory.
/// Object order follows the world document.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionAlphabet {
    commands: Vec<Command>,
    index: HashMap<Command, usize>,
}

impl ActionAlphabet {
    pub fn for_spec(spec: &WorldSpec) -> Self {
        let ids: Vec<&String> = spec.objects.iter().map(|o| &o.id).collect();
        let mut commands: Vec<Command> = spec.directions().into_iter().map(Command::Move).collect();
        commands.extend(ids.iter().map(|o| Command::Take((*o).clone())));
        commands.extend(ids.iter().map(|o| Command::Drop((*o).clone())));
        commands.extend(ids.iter().map(|o| Command::Open((*o).clone())));
        commands.extend(ids.iter().map(|o| Command::Use((*o).clone(), None)));
        for o in &ids {
            for t in &ids {
                if o != t {
                    commands.push(Command::Use((*o).clone(), Some((*t).clone())));
                }
            }
        }
        commands.push(Command::Look);
        commands.push(Command::Inventory);
        Self::from_commands(commands).expect("generated commands are distinct")
    }

    /// Alphabet with an explicit order. `None` if a command repeats.
    pub fn from_commands(commands: Vec<Command>) -> Option<Self> {
        let index: HashMap<Command, usize> = commands
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        (index.len() == commands.len()).then_some(Self { commands, index })
    }

    pub fn len(&self) -> usize {
        self.commands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commands.is_empty()
    }

    pub fn commands(&self) -> &[Command] {
        &self.commands
    }

    pub fn command(&self, index: usize) -> Option<&Command> {
        self.commands.get(index)
    }

    pub fn index_of(&self, cmd: &Command) -> Option<usize> {
        self.index.get(cmd).copied()
    }

    /// Admissibility bitmask over the alphabet. Commands outside the
    /// alphabet are ignored.
    pub fn mask(&self, admissible: &[Command]) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        for c in admissible {
            if let Some(i) = self.index_of(c) {
                mask[i] = true;
            }
        }
        mask
    }

    /// Stable textual form, stored in checkpoints to detect mismatches.
    pub fn labels(&self) -> Vec<String> {
        self.commands.iter().map(|c| c.to_string()).collect()
    }
}
