//! Player-command grammar:
//!
//! ```text
//! command := VERB [PARTICLE] [ARTICLE] [NOUN [PREP [ARTICLE] NOUN]]
//!          | DIRECTION
//! ```
//!
//! Nouns are multi-word phrases matched against object names and synonyms
//! (and direction words for movement). See `docs/grammar.md`.

use thiserror::Error;

use super::tokenize;
use crate::engine::{Command, Direction, WorldSpec};

const ARTICLES: [&str; 3] = ["a", "an", "the"];
const PREPOSITIONS: [&str; 8] = ["on", "with", "in", "into", "at", "to", "from", "using"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Verb {
    Go,
    Take,
    Drop,
    Use,
    Open,
    Look,
    Inventory,
}

impl Verb {
    fn lookup(word: &str) -> Option<Verb> {
        Some(match word {
            "go" | "walk" | "move" | "run" | "head" | "travel" => Verb::Go,
            "take" | "get" | "grab" | "pick" | "collect" => Verb::Take,
            "drop" | "discard" | "leave" => Verb::Drop,
            "use" | "apply" => Verb::Use,
            "open" | "unlock" => Verb::Open,
            "look" | "l" => Verb::Look,
            "inventory" | "inv" | "i" => Verb::Inventory,
            _ => return None,
        })
    }

    /// Optional particle that may follow the verb ("pick up", "look around").
    fn particle(self) -> &'static [&'static str] {
        match self {
            Verb::Take => &["up"],
            Verb::Drop => &["down"],
            Verb::Look => &["around"],
            _ => &[],
        }
    }
}

/// Errors a human player can be told about directly.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("I beg your pardon?")]
    Empty,
    #[error("I don't know the verb '{0}'.")]
    UnknownVerb(String),
    #[error("I don't know the word '{0}'.")]
    UnknownNoun(String),
    #[error("What do you want to {0}?")]
    MissingArgument(String),
    #[error("Which '{noun}' do you mean: {}?", candidates.join(" or "))]
    AmbiguousNoun { noun: String, candidates: Vec<String> },
    #[error("I didn't understand '{0}'.")]
    UnexpectedToken(String),
}

/// Parses already-tokenized input against a world's objects.
pub fn parse_command(tokens: &[String], spec: &WorldSpec) -> Result<Command, ParseError> {
    let Some(first) = tokens.first() else {
        return Err(ParseError::Empty);
    };
    if let Ok(d) = first.parse::<Direction>() {
        return match tokens.get(1) {
            None => Ok(Command::Move(d)),
            Some(t) => Err(ParseError::UnexpectedToken(t.clone())),
        };
    }
    let verb = Verb::lookup(first).ok_or_else(|| ParseError::UnknownVerb(first.clone()))?;
    let mut rest = &tokens[1..];
    if let Some(t) = rest.first() {
        if verb.particle().contains(&t.as_str()) {
            rest = &rest[1..];
        }
    }

    match verb {
        Verb::Look | Verb::Inventory => match rest.first() {
            None => Ok(if verb == Verb::Look { Command::Look } else { Command::Inventory }),
            Some(t) => Err(ParseError::UnexpectedToken(t.clone())),
        },
        Verb::Go => {
            let words: Vec<&String> = rest
                .iter()
                .filter(|t| !ARTICLES.contains(&t.as_str()) && t.as_str() != "to")
                .collect();
            match words.as_slice() {
                [] => Err(ParseError::MissingArgument(first.clone())),
                [w] => w
                    .parse::<Direction>()
                    .map(Command::Move)
                    .map_err(|_| ParseError::UnknownNoun((*w).clone())),
                [w, extra, ..] => {
                    if w.parse::<Direction>().is_ok() {
                        Err(ParseError::UnexpectedToken((*extra).clone()))
                    } else {
                        Err(ParseError::UnknownNoun((*w).clone()))
                    }
                }
            }
        }
        Verb::Take | Verb::Drop | Verb::Use | Verb::Open => {
            let split = rest
                .iter()
                .position(|t| PREPOSITIONS.contains(&t.as_str()));
            let (object_words, target_words) = match split {
                Some(i) => (&rest[..i], Some(&rest[i + 1..])),
                None => (rest, None),
            };
            let object = resolve_noun(object_words, spec)?
                .ok_or_else(|| ParseError::MissingArgument(first.clone()))?;
            let target = match target_words {
                Some(words) => Some(
                    resolve_noun(words, spec)?
                        .ok_or_else(|| ParseError::MissingArgument(first.clone()))?,
                ),
                None => None,
            };
            Ok(match verb {
                Verb::Take => Command::Take(object),
                Verb::Drop => Command::Drop(object),
                Verb::Open => Command::Open(object),
                _ => Command::Use(object, target),
            })
        }
    }
}

/// Tokenizes then parses.
pub fn parse_input(input: &str, spec: &WorldSpec) -> Result<Command, ParseError> {
    parse_command(&tokenize(input), spec)
}

/// Resolves a noun phrase to a single object id. `Ok(None)` means the phrase
/// was empty after dropping articles.
fn resolve_noun(words: &[String], spec: &WorldSpec) -> Result<Option<String>, ParseError> {
    let phrase: Vec<&str> = words
        .iter()
        .map(String::as_str)
        .filter(|w| !ARTICLES.contains(w))
        .collect();
    if phrase.is_empty() {
        return Ok(None);
    }
    let phrase = phrase.join(" ");
    let matches: Vec<&crate::engine::Object> = spec
        .objects
        .iter()
        .filter(|o| {
            std::iter::once(&o.name)
                .chain(o.synonyms.iter())
                .any(|n| tokenize(n).join(" ") == phrase)
        })
        .collect();
    match matches.as_slice() {
        [] => Err(ParseError::UnknownNoun(phrase)),
        [one] => Ok(Some(one.id.clone())),
        many => Err(ParseError::AmbiguousNoun {
            noun: phrase,
            candidates: many.iter().map(|o| o.name.clone()).collect(),
        }),
    }
}
