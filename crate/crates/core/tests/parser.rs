mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use textrl::engine::{Command, WorldSpec};
use textrl::textproc::{parse_input, ParseError};

#[test]
fn grammar_corpus_parses_exactly() {
    let g = common::grammar();
    assert!(g.commands.len() >= 60);
    for case in &g.commands {
        let spec = common::world(&case.world);
        assert_eq!(parse_input(&case.input, &spec), Ok(case.expected.clone()), "input {:?}", case.input);
    }
}

#[test]
fn grammar_corpus_errors_are_typed() {
    for case in common::grammar().errors {
        let spec = common::world(&case.world);
        let err = parse_input(&case.input, &spec).expect_err(&case.input);
        let kind = match err {
            ParseError::Empty => "empty",
            ParseError::UnknownVerb(_) => "unknown_verb",
            ParseError::UnknownNoun(_) => "unknown_noun",
            ParseError::MissingArgument(_) => "missing_argument",
            ParseError::AmbiguousNoun { .. } => "ambiguous_noun",
            ParseError::UnexpectedToken(_) => "unexpected_token",
        };
        assert_eq!(kind, case.error, "input {:?}", case.input);
    }
}

#[test]
fn corpus_commands_round_trip_through_display_names() {
    for case in common::grammar().commands {
        let spec = common::world(&case.world);
        let text = case.expected.to_input(&spec);
        assert_eq!(parse_input(&text, &spec), Ok(case.expected.clone()), "{text}");
    }
}

fn fuzz_once(spec: &WorldSpec, input: &str) -> bool {
    catch_unwind(AssertUnwindSafe(|| match parse_input(input, spec) {
        Ok(Command::Take(o) | Command::Drop(o) | Command::Open(o)) => spec.object(&o).is_some(),
        Ok(_) | Err(_) => true,
    }))
    .unwrap_or(false)
}

#[test]
fn random_bytes_never_crash() {
    let spec = common::world("fetch-quest-3-distractor");
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20_000 {
        let len = rng.gen_range(0..48);
        let bytes: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        let input = String::from_utf8_lossy(&bytes);
        assert!(fuzz_once(&spec, &input), "{input:?}");
    }
}

#[test]
fn random_word_salad_never_crashes() {
    let spec = common::world("fetch-quest-3-distractor");
    let words = [
        "take", "pick", "up", "the", "key", "rusty", "brass", "on", "with", "use", "go", "north", "n", "open", "crate",
        "chest", "oak", "wooden", "look", "around", "i", "drop", "down", "to", "a", "xyzzy", "", "!",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20_000 {
        let n = rng.gen_range(0..7);
        let input: Vec<&str> = (0..n).map(|_| words[rng.gen_range(0..words.len())]).collect();
        assert!(fuzz_once(&spec, &input.join(" ")));
    }
}
