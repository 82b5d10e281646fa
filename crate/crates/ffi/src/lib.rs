//! C ABI over the textrl engine, harness and trained agents.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free`. Every function returns a [`TrlStatus`]; on failure a
//! message is available from [`trl_last_error`] on the same thread. Strings
//! returned through out-parameters are NUL-terminated UTF-8 and must be
//! released with [`trl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use serde_json::json;
use textrl::checkpoint::Checkpoint;
use textrl::engine::{builtin_world, ActionAlphabet, Observation, WorldSpec, WorldState};
use textrl::harness::{evaluate, episode_rng, Agent, LearnedAgent, RandomAgent};
use textrl::textproc::parse_input;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    InvalidWorld = 4,
    ParseError = 5,
    EpisodeOver = 6,
    InvalidCheckpoint = 7,
    AlphabetMismatch = 8,
    Internal = 9,
}

/// A world and its current episode.
pub struct TrlWorld {
    spec: WorldSpec,
    alphabet: ActionAlphabet,
    state: WorldState,
    last: Observation,
}

/// A trained policy acting greedily.
pub struct TrlAgent {
    agent: LearnedAgent,
    steps: u64,
}

struct Failure(TrlStatus, String);

type FfiResult<T> = Result<T, Failure>;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> TrlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TrlStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TrlStatus::Internal
        }
    }
}

fn fail<T>(status: TrlStatus, msg: impl Into<String>) -> FfiResult<T> {
    Err(Failure(status, msg.into()))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return fail(TrlStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(TrlStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut()
        .map_or_else(|| fail(TrlStatus::NullPointer, format!("{what} is null")), Ok)
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> FfiResult<()> {
    let c = CString::new(s).or_else(|_| fail(TrlStatus::Internal, "string contains NUL"))?;
    *out = c.into_raw();
    Ok(())
}

fn check_out<T>(out: *mut *mut T) -> FfiResult<()> {
    if out.is_null() {
        return fail(TrlStatus::NullPointer, "output pointer is null");
    }
    Ok(())
}

impl TrlWorld {
    fn new(spec: WorldSpec) -> Self {
        let (state, last) = spec.reset();
        Self {
            alphabet: ActionAlphabet::for_spec(&spec),
            spec,
            state,
            last,
        }
    }

    fn observation_json(&self) -> String {
        let admissible: Vec<String> = self.last.admissible.iter().map(|c| c.to_input(&self.spec)).collect();
        json!({
            "text": self.last.text,
            "reward": self.last.reward,
            "done": self.last.done,
            "won": self.last.won,
            "step": self.state.steps_taken,
            "goal_status": self.spec.goal_status(&self.state),
            "admissible": admissible,
        })
        .to_string()
    }
}

/// Loads a world from a JSON document, or by bundled name such as
/// `"fetch-quest-3"`. The episode starts reset.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trl_world_load(source: *const c_char, out: *mut *mut TrlWorld) -> TrlStatus {
    guard(|| {
        check_out(out)?;
        let text = read_str(source, "source")?;
        let spec = if text.trim_start().starts_with('{') {
            WorldSpec::from_json(text).or_else(|e| fail(TrlStatus::InvalidWorld, e.to_string()))?
        } else {
            builtin_world(text).map_or_else(
                || fail(TrlStatus::InvalidWorld, format!("no bundled world named {text:?}")),
                Ok,
            )?
        };
        *out = Box::into_raw(Box::new(TrlWorld::new(spec)));
        Ok(())
    })
}

/// Starts a new episode; writes the initial observation as JSON.
///
/// # Safety
/// `world` must come from [`trl_world_load`]; `obs_json` may be null.
#[no_mangle]
pub unsafe extern "C" fn trl_world_reset(world: *mut TrlWorld, obs_json: *mut *mut c_char) -> TrlStatus {
    guard(|| {
        let w = handle(world, "world")?;
        (w.state, w.last) = w.spec.reset();
        if !obs_json.is_null() {
            write_string(obs_json, w.observation_json())?;
        }
        Ok(())
    })
}

/// Parses `input` and applies it. Unparseable input returns
/// `ParseError` and does not advance the episode.
///
/// # Safety
/// `world` must come from [`trl_world_load`]; `input` must be a
/// NUL-terminated string; `obs_json` may be null.
#[no_mangle]
pub unsafe extern "C" fn trl_world_step_text(
    world: *mut TrlWorld,
    input: *const c_char,
    obs_json: *mut *mut c_char,
) -> TrlStatus {
    guard(|| {
        let w = handle(world, "world")?;
        let text = read_str(input, "input")?;
        let cmd = parse_input(text, &w.spec).or_else(|e| fail(TrlStatus::ParseError, e.to_string()))?;
        (w.state, w.last) = w
            .spec
            .step(&w.state, &cmd)
            .or_else(|e| fail(TrlStatus::EpisodeOver, e.to_string()))?;
        if !obs_json.is_null() {
            write_string(obs_json, w.observation_json())?;
        }
        Ok(())
    })
}

/// Applies the command at `action` in the world's action alphabet.
///
/// # Safety
/// `world` must come from [`trl_world_load`]; `obs_json` may be null.
#[no_mangle]
pub unsafe extern "C" fn trl_world_step_action(
    world: *mut TrlWorld,
    action: u32,
    obs_json: *mut *mut c_char,
) -> TrlStatus {
    guard(|| {
        let w = handle(world, "world")?;
        let cmd = match w.alphabet.command(action as usize) {
            Some(c) => c.clone(),
            None => return fail(TrlStatus::InvalidArgument, format!("action {action} out of range")),
        };
        (w.state, w.last) = w
            .spec
            .step(&w.state, &cmd)
            .or_else(|e| fail(TrlStatus::EpisodeOver, e.to_string()))?;
        if !obs_json.is_null() {
            write_string(obs_json, w.observation_json())?;
        }
        Ok(())
    })
}

/// Writes the current observation as JSON.
///
/// # Safety
/// `world` must come from [`trl_world_load`]; `obs_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trl_world_observation(world: *mut TrlWorld, obs_json: *mut *mut c_char) -> TrlStatus {
    guard(|| {
        let w = handle(world, "world")?;
        check_out(obs_json)?;
        write_string(obs_json, w.observation_json())
    })
}

/// Writes the admissible commands as a JSON array of input strings.
///
/// # Safety
/// `world` must come from [`trl_world_load`]; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trl_world_admissible(world: *mut TrlWorld, out_json: *mut *mut c_char) -> TrlStatus {
    guard(|| {
        let w = handle(world, "world")?;
        check_out(out_json)?;
        let list: Vec<String> = w.last.admissible.iter().map(|c| c.to_input(&w.spec)).collect();
        write_string(out_json, json!(list).to_string())
    })
}

/// Number of commands in the world's action alphabet.
///
/// # Safety
/// `world` must come from [`trl_world_load`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trl_world_action_count(world: *mut TrlWorld, out: *mut u32) -> TrlStatus {
    guard(|| {
        let w = handle(world, "world")?;
        let out = handle(out, "output pointer")?;
        *out = w.alphabet.len() as u32;
        Ok(())
    })
}

/// # Safety
/// `world` must come from [`trl_world_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn trl_world_free(world: *mut TrlWorld) {
    if !world.is_null() {
        drop(Box::from_raw(world));
    }
}

/// Loads a trained agent from checkpoint JSON text.
///
/// # Safety
/// `checkpoint_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trl_agent_load(checkpoint_json: *const c_char, out: *mut *mut TrlAgent) -> TrlStatus {
    guard(|| {
        check_out(out)?;
        let text = read_str(checkpoint_json, "checkpoint_json")?;
        let model = Checkpoint::from_json(text)
            .and_then(|c| c.model())
            .or_else(|e| fail(TrlStatus::InvalidCheckpoint, e.to_string()))?;
        *out = Box::into_raw(Box::new(TrlAgent {
            agent: LearnedAgent { model },
            steps: 0,
        }));
        Ok(())
    })
}

/// Chooses a command for the world's current observation and writes its
/// input string. The world is not stepped.
///
/// # Safety
/// `agent` and `world` must be live handles; `command_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trl_agent_act(
    agent: *mut TrlAgent,
    world: *mut TrlWorld,
    command_out: *mut *mut c_char,
) -> TrlStatus {
    guard(|| {
        let a = handle(agent, "agent")?;
        let w = handle(world, "world")?;
        check_out(command_out)?;
        if a.agent.model.alphabet.commands() != w.alphabet.commands() {
            return fail(TrlStatus::AlphabetMismatch, "agent was trained on a different action alphabet");
        }
        if w.last.done {
            return fail(TrlStatus::EpisodeOver, "episode is over; call trl_world_reset");
        }
        let mut rng = episode_rng(0, a.steps as usize);
        a.steps += 1;
        let cmd = a
            .agent
            .act(&w.last.text, &w.last.admissible, &mut rng)
            .or_else(|e| fail(TrlStatus::Internal, e.to_string()))?;
        write_string(command_out, cmd.to_input(&w.spec))
    })
}

/// # Safety
/// `agent` must come from [`trl_agent_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn trl_agent_free(agent: *mut TrlAgent) {
    if !agent.is_null() {
        drop(Box::from_raw(agent));
    }
}

unsafe fn run_evaluation(
    agent: &mut dyn Agent,
    world: *mut TrlWorld,
    n_episodes: u32,
    seed: u64,
    report_json: *mut *mut c_char,
) -> FfiResult<()> {
    let w = handle(world, "world")?;
    check_out(report_json)?;
    let report = evaluate(agent, &w.spec, n_episodes as usize, seed)
        .or_else(|e| fail(TrlStatus::InvalidArgument, e.to_string()))?;
    write_string(report_json, report.to_json())
}

/// Evaluates the uniform random agent for `n_episodes` on fresh episodes of
/// the world; writes the evaluation report as JSON. The world's own episode
/// is untouched.
///
/// # Safety
/// `world` must be a live handle; `report_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trl_evaluate_random(
    world: *mut TrlWorld,
    n_episodes: u32,
    seed: u64,
    report_json: *mut *mut c_char,
) -> TrlStatus {
    guard(|| run_evaluation(&mut RandomAgent, world, n_episodes, seed, report_json))
}

/// Evaluates a trained agent greedily, as [`trl_evaluate_random`].
///
/// # Safety
/// `agent` and `world` must be live handles; `report_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn trl_evaluate_agent(
    agent: *mut TrlAgent,
    world: *mut TrlWorld,
    n_episodes: u32,
    seed: u64,
    report_json: *mut *mut c_char,
) -> TrlStatus {
    guard(|| {
        let a = handle(agent, "agent")?;
        let w = handle(world, "world")?;
        if a.agent.model.alphabet.commands() != w.alphabet.commands() {
            return fail(TrlStatus::AlphabetMismatch, "agent was trained on a different action alphabet");
        }
        run_evaluation(&mut a.agent, world, n_episodes, seed, report_json)
    })
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call on this thread. Never null.
#[no_mangle]
pub extern "C" fn trl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn trl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version string. Static; do not free.
#[no_mangle]
pub extern "C" fn trl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
