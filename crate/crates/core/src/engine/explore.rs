use std::collections::{HashSet, VecDeque};

use super::{ActionAlphabet, Command, WorldSpec, WorldState};

/// One edge of the reachable transition graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ExploredTransition {
    pub text: String,
    pub command: Command,
    pub reward: f64,
    pub next_text: String,
    pub done: bool,
}

/// Breadth-first enumeration of every (observation, command) pair reachable
/// from reset, trying every command of the action alphabet.
///
/// Step counts are ignored when deduplicating, so timeouts never appear;
/// terminal transitions are wins only. Stops expanding after `max_nodes`
/// distinct observations.
pub fn explore(spec: &WorldSpec, max_nodes: usize) -> Vec<ExploredTransition> {
    let alphabet = ActionAlphabet::for_spec(spec);
    let (start, obs) = spec.reset();
    let mut seen: HashSet<(WorldState, String)> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert((start.clone(), obs.text.clone()));
    queue.push_back((start, obs.text));
    let mut out = Vec::new();

    while let Some((state, text)) = queue.pop_front() {
        for cmd in alphabet.commands() {
            let mut from = state.clone();
            from.steps_taken = 0;
            let Ok((mut next, o)) = spec.step(&from, cmd) else {
                continue;
            };
            if o.done && !o.won {
                continue;
            }
            out.push(ExploredTransition {
                text: text.clone(),
                command: cmd.clone(),
                reward: o.reward,
                next_text: o.text.clone(),
                done: o.done,
            });
            next.steps_taken = 0;
            if !o.done && seen.len() < max_nodes {
                let key = (next, o.text);
                if seen.insert(key.clone()) {
                    queue.push_back(key);
                }
            }
        }
    }
    out
}
