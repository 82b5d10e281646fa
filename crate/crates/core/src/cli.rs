//! The `textrl` command line: `train`, `eval`, `compare`, `play`, `gradcheck`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numeric abort
//! during training, 3 gradient-check failure.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::agent::{check_networks, gradcheck_config, metrics_csv, train, AgentConfig, AgentError};
use crate::checkpoint::Checkpoint;
use crate::engine::{builtin_world, WorldSpec};
use crate::harness::{
    compare, evaluate, parse_rules, Agent, EvalReport, LearnedAgent, RandomAgent, RuleBasedAgent, FETCH_QUEST_RULES,
};
use crate::neural::NeuralError;
use crate::textproc::parse_input;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_GRADCHECK: i32 = 3;

/// Everything a run depends on. Written next to every output as
/// `config.json`; feeding that file back through `--config` reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Path to a world document, or the name of a bundled world.
    pub spec: String,
    pub seed: u64,
    /// Training episodes.
    pub episodes: usize,
    /// Episodes per evaluation.
    pub eval_episodes: usize,
    pub out: PathBuf,
    /// Rule table for the rule-based agent: a path, or `fetch-quest`.
    pub rules: String,
    pub agent: AgentConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            spec: "fetch-quest-3".into(),
            seed: 0,
            episodes: 3000,
            eval_episodes: 200,
            out: PathBuf::from("runs/latest"),
            rules: "fetch-quest".into(),
            agent: AgentConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Parser)]
#[command(name = "textrl", version, about = "Text-adventure reinforcement-learning lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// World document path or bundled world name.
    #[arg(long)]
    pub spec: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Training episodes (train) or evaluation episodes (eval, compare).
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set agent.lr=0.001`.
    #[arg(long = "set", value_name = "K=V")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train an agent; writes checkpoint.json, metrics.csv and config.json.
    Train(RunArgs),
    /// Evaluate one agent and print its report as JSON.
    Eval {
        /// `random`, `rules`, or a checkpoint file / training output directory.
        agent: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Evaluate two agents and print the win-rate comparison as JSON.
    Compare {
        /// As for `eval`; also `baseline:PATH` for a stored report.
        a: String,
        b: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Play a world interactively.
    Play {
        #[arg(long, default_value = "fetch-quest-3")]
        spec: String,
    },
    /// Finite-difference check of every network's gradients.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "fetch-quest-3")]
        spec: String,
        /// Corrupt the analytic gradients (tests the checker itself).
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Loads a world from a path, falling back to bundled world names.
pub fn load_spec(reference: &str) -> Result<WorldSpec, String> {
    match std::fs::read_to_string(reference) {
        Ok(doc) => WorldSpec::from_json(&doc).map_err(|e| format!("invalid world spec '{reference}': {e}")),
        Err(err) => builtin_world(reference).ok_or_else(|| format!("cannot read world spec '{reference}': {err}")),
    }
}

fn set_dotted(root: &mut Value, key: &str, value: Value) -> Result<(), String> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| format!("unknown config key '{key}'"))?;
        let slot = obj.get_mut(*part).ok_or_else(|| format!("unknown config key '{key}'"))?;
        if i + 1 == parts.len() {
            *slot = value;
            return Ok(());
        }
        node = slot;
    }
    unreachable!("split yields at least one part")
}

/// Defaults, then the config file, then `--set`, then explicit flags.
pub fn resolve_config(args: &RunArgs) -> Result<RunConfig, String> {
    let base = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config '{}': {e}", path.display()))?;
            serde_json::from_str::<RunConfig>(&text).map_err(|e| format!("invalid config '{}': {e}", path.display()))?
        }
        None => RunConfig::default(),
    };
    let mut tree = serde_json::to_value(&base).expect("config serializes");
    for item in &args.overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| format!("--set expects K=V, got '{item}'"))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_dotted(&mut tree, key.trim(), value)?;
    }
    let mut cfg: RunConfig = serde_json::from_value(tree).map_err(|e| format!("invalid config: {e}"))?;
    if let Some(s) = &args.spec {
        cfg.spec = s.clone();
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.out = o.clone();
    }
    cfg.agent.validate()?;
    Ok(cfg)
}

fn is_numeric(err: &AgentError) -> bool {
    matches!(
        err,
        AgentError::Aborted { .. } | AgentError::NonFiniteLoss(_) | AgentError::Neural(NeuralError::NonFinite { .. })
    )
}

fn write_file(path: &Path, contents: &str) -> CmdResult {
    std::fs::write(path, contents).map_err(|e| Failure::config(format!("cannot write '{}': {e}", path.display())))
}

fn cmd_train(args: &RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let mut cfg = resolve_config(args).map_err(Failure::config)?;
    if let Some(n) = args.episodes {
        cfg.episodes = n;
    }
    let spec = load_spec(&cfg.spec).map_err(Failure::config)?;
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| Failure::config(format!("cannot create '{}': {e}", cfg.out.display())))?;
    write_file(&cfg.out.join("config.json"), &cfg.to_json())?;

    let started = Instant::now();
    let mut recent: Vec<bool> = Vec::new();
    let outcome = train(&cfg.agent, &spec, cfg.seed, cfg.episodes, |m| {
        recent.push(m.win);
        if (m.episode + 1) % 500 == 0 {
            let tail = &recent[recent.len().saturating_sub(100)..];
            let rate = tail.iter().filter(|&&w| w).count() as f64 / tail.len() as f64;
            let _ = writeln!(stderr, "episode {}: win rate over last 100 = {rate:.2}", m.episode + 1);
        }
    })
    .map_err(|e| Failure {
        code: if is_numeric(&e) { EXIT_NUMERIC } else { EXIT_CONFIG },
        message: e.to_string(),
    })?;

    write_file(&cfg.out.join("metrics.csv"), &metrics_csv(&outcome.metrics))?;
    let ckpt = Checkpoint::new(&outcome.model, &outcome.rng, cfg.episodes);
    write_file(&cfg.out.join("checkpoint.json"), &ckpt.to_json())?;

    let tail = &outcome.metrics[outcome.metrics.len().saturating_sub(100)..];
    let win_rate = if tail.is_empty() {
        0.0
    } else {
        tail.iter().filter(|m| m.win).count() as f64 / tail.len() as f64
    };
    let summary = serde_json::json!({
        "episodes": cfg.episodes,
        "train_win_rate_last_100": win_rate,
        "seconds": started.elapsed().as_secs_f64(),
        "out": cfg.out,
    });
    let _ = writeln!(stdout, "{summary}");
    Ok(())
}

/// Builds an agent from a reference: `random`, `rules`, or a checkpoint.
fn load_agent(reference: &str, cfg: &RunConfig, spec: &WorldSpec) -> Result<Box<dyn Agent>, String> {
    match reference {
        "random" => Ok(Box::new(RandomAgent)),
        "rules" => {
            let text = if cfg.rules == "fetch-quest" {
                FETCH_QUEST_RULES.to_string()
            } else {
                std::fs::read_to_string(&cfg.rules).map_err(|e| format!("cannot read rules '{}': {e}", cfg.rules))?
            };
            let rules = parse_rules(&text).map_err(|e| e.to_string())?;
            Ok(Box::new(RuleBasedAgent {
                rules,
                spec: spec.clone(),
            }))
        }
        path => {
            let mut p = PathBuf::from(path);
            if p.is_dir() {
                p = p.join("checkpoint.json");
            }
            let ckpt = Checkpoint::load(&p).map_err(|e| format!("checkpoint '{}': {e}", p.display()))?;
            let model = ckpt.model_for(spec).map_err(|e| format!("checkpoint '{}': {e}", p.display()))?;
            Ok(Box::new(LearnedAgent { model }))
        }
    }
}

fn report_for(reference: &str, cfg: &RunConfig, spec: &WorldSpec) -> Result<EvalReport, String> {
    if let Some(path) = reference.strip_prefix("baseline:") {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read baseline '{path}': {e}"))?;
        return serde_json::from_str(&text).map_err(|e| format!("invalid baseline '{path}': {e}"));
    }
    let mut agent = load_agent(reference, cfg, spec)?;
    evaluate(agent.as_mut(), spec, cfg.eval_episodes, cfg.seed).map_err(|e| e.to_string())
}

fn eval_config(args: &RunArgs) -> Result<(RunConfig, WorldSpec), Failure> {
    let mut cfg = resolve_config(args).map_err(Failure::config)?;
    if let Some(n) = args.episodes {
        cfg.eval_episodes = n;
    }
    if cfg.eval_episodes == 0 {
        return Err(Failure::config(crate::harness::HarnessError::NoEpisodes.to_string()));
    }
    let spec = load_spec(&cfg.spec).map_err(Failure::config)?;
    Ok((cfg, spec))
}

fn cmd_eval(agent: &str, args: &RunArgs, stdout: &mut dyn Write) -> CmdResult {
    let (cfg, spec) = eval_config(args)?;
    let report = report_for(agent, &cfg, &spec).map_err(Failure::config)?;
    if args.out.is_some() {
        std::fs::create_dir_all(&cfg.out)
            .map_err(|e| Failure::config(format!("cannot create '{}': {e}", cfg.out.display())))?;
        write_file(&cfg.out.join("eval.json"), &report.to_json())?;
        write_file(&cfg.out.join("eval.csv"), &report.episodes_csv())?;
        write_file(&cfg.out.join("config.json"), &cfg.to_json())?;
    }
    let _ = stdout.write_all(report.to_json().as_bytes());
    Ok(())
}

fn cmd_compare(a: &str, b: &str, args: &RunArgs, stdout: &mut dyn Write) -> CmdResult {
    let (cfg, spec) = eval_config(args)?;
    let ra = report_for(a, &cfg, &spec).map_err(Failure::config)?;
    let rb = report_for(b, &cfg, &spec).map_err(Failure::config)?;
    let cmp = compare(&ra, &rb);
    if args.out.is_some() {
        std::fs::create_dir_all(&cfg.out)
            .map_err(|e| Failure::config(format!("cannot create '{}': {e}", cfg.out.display())))?;
        write_file(&cfg.out.join("compare.json"), &cmp.to_json())?;
        write_file(&cfg.out.join("config.json"), &cfg.to_json())?;
    }
    let _ = stdout.write_all(cmp.to_json().as_bytes());
    Ok(())
}

fn cmd_play(spec_ref: &str, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> CmdResult {
    let spec = load_spec(spec_ref).map_err(Failure::config)?;
    let (mut state, obs) = spec.reset();
    let _ = writeln!(stdout, "{}", obs.text);
    loop {
        let _ = write!(stdout, "> ");
        let _ = stdout.flush();
        let mut line = String::new();
        match stdin.read_line(&mut line) {
            Ok(0) => return Ok(()),
            Ok(_) => {}
            Err(e) => return Err(Failure::config(format!("cannot read input: {e}"))),
        }
        let input = line.trim();
        if input.eq_ignore_ascii_case("quit") {
            return Ok(());
        }
        let cmd = match parse_input(input, &spec) {
            Ok(c) => c,
            Err(e) => {
                let _ = writeln!(stdout, "{e}");
                continue;
            }
        };
        let (next, obs) = spec
            .step(&state, &cmd)
            .map_err(|e| Failure::config(e.to_string()))?;
        state = next;
        let _ = writeln!(stdout, "{}", obs.text);
        let _ = writeln!(
            stdout,
            "[reward {:+.2} | step {}/{} | goals {:.0}%]",
            obs.reward,
            state.steps_taken,
            spec.max_steps,
            100.0 * spec.goal_status(&state)
        );
        if obs.done {
            return Ok(());
        }
    }
}

fn cmd_gradcheck(seed: u64, spec_ref: &str, inject_fault: bool, stdout: &mut dyn Write) -> CmdResult {
    let spec = load_spec(spec_ref).map_err(Failure::config)?;
    let checks = check_networks(&spec, &gradcheck_config(), seed, inject_fault).map_err(|e| Failure {
        code: EXIT_GRADCHECK,
        message: e.to_string(),
    })?;
    for c in &checks {
        let _ = writeln!(
            stdout,
            "{:<12} max_rel_error={:.3e} coordinates={} {}",
            c.network,
            c.result.max_rel_error,
            c.result.coordinates,
            if c.passed() { "ok" } else { "FAIL" }
        );
    }
    if checks.iter().all(|c| c.passed()) {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_GRADCHECK,
            message: "gradient check failed".into(),
        })
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
            } else {
                let _ = stdout.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Train(args) => cmd_train(args, stdout, stderr),
        Command::Eval { agent, run } => cmd_eval(agent, run, stdout),
        Command::Compare { a, b, run } => cmd_compare(a, b, run, stdout),
        Command::Play { spec } => cmd_play(spec, stdin, stdout),
        Command::Gradcheck {
            seed,
            spec,
            inject_fault,
        } => cmd_gradcheck(*seed, spec, *inject_fault, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
