//! The tick loop that drives agents through a task.

pub mod endpoint;
pub mod log;
pub mod suite;

pub use endpoint::{
    AgentEndpoint, EchoEndpoint, EndpointError, Event, IdleEndpoint, Message, Role, ScriptedEndpoint, TaskBrief,
};
pub use log::{CommandStatus, EndReason, EpisodeLog, LogError, Record, Transition};
pub use suite::{run_suite, GeneratedTasks, GroupKey, GroupStats, SuiteManifest, SuiteReport, SuiteRun};

use crate::command::{execute, parse_first_command, remainder, CommandContext, Outcome};
use crate::conversation::{Conversations, DeliveryKind};
use crate::evaluator::{score_task, ProgressStore, Score};
use crate::recipes::RecipeBook;
use crate::task::TaskSpec;
use crate::world::provision::seat_agents;
use crate::world::{spawn_world_from_spec, Inventory, WorldState};
use std::collections::BTreeMap;
use std::path::PathBuf;
use thiserror::Error;

/// Idle agents with nothing new to read are still asked this often.
pub const POLL_INTERVAL: u64 = 10;

#[derive(Debug, Clone)]
pub struct EpisodeConfig {
    pub task: TaskSpec,
    pub seed: u64,
    /// Overrides the task timeout when set.
    pub max_ticks: Option<u64>,
    /// Backing file for Hell's Kitchen progress.
    pub progress_path: Option<PathBuf>,
}

impl EpisodeConfig {
    pub fn new(task: TaskSpec, seed: u64) -> Self {
        EpisodeConfig { task, seed, max_ticks: None, progress_path: None }
    }

    pub fn max_ticks(&self) -> u64 {
        self.max_ticks.unwrap_or_else(|| self.task.max_ticks())
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("no endpoint for agent {0}")]
    MissingEndpoint(String),
    #[error("endpoint for {0} is not an agent of this task")]
    UnknownEndpoint(String),
    #[error("invalid task: {0}")]
    Task(#[from] crate::task::TaskError),
    #[error("progress store: {0}")]
    Io(#[from] std::io::Error),
}

pub type Endpoints<'a> = BTreeMap<String, Box<dyn AgentEndpoint + 'a>>;

/// A fresh world for `task`: provisioned and with the agents seated.
pub fn reset(task: &TaskSpec, seed: u64) -> WorldState {
    let mut world = spawn_world_from_spec(&task.world_spec, seed);
    let invs: Vec<Inventory> =
        task.agent_names.iter().map(|a| task.initial_inventories.get(a).cloned().unwrap_or_default()).collect();
    seat_agents(&mut world, &task.agent_names, &invs, seed);
    for name in &task.agent_names {
        if let Some(body) = world.agent_mut(name) {
            body.capabilities = task.capabilities_for(name);
        }
    }
    world
}

struct Runner<'e, 'a> {
    log: EpisodeLog,
    endpoints: &'e mut Endpoints<'a>,
    unread: BTreeMap<String, bool>,
    failure: Option<String>,
}

impl Runner<'_, '_> {
    fn note(&mut self, tick: u64, agent: &str, role: Role, content: &str) {
        self.log.push(Record::Message { tick, agent: agent.to_string(), role, content: content.to_string() });
    }

    fn deliver(&mut self, tick: u64, agent: &str, event: Event) {
        self.note(tick, agent, event.role(), event.content());
        self.unread.insert(agent.to_string(), true);
        if let Err(e) = self.endpoints.get_mut(agent).expect("checked").deliver(tick, &event) {
            self.failure.get_or_insert(e.to_string());
        }
    }
}

/// Run one episode to completion, timeout or agent failure.
pub fn run_episode(cfg: &EpisodeConfig, endpoints: &mut Endpoints) -> Result<EpisodeLog, RunError> {
    let task = &cfg.task;
    task.validate()?;
    for name in &task.agent_names {
        if !endpoints.contains_key(name) {
            return Err(RunError::MissingEndpoint(name.clone()));
        }
    }
    if let Some(extra) = endpoints.keys().find(|k| !task.agent_names.contains(k)) {
        return Err(RunError::UnknownEndpoint(extra.clone()));
    }
    let names = task.agent_names.clone();
    let max_ticks = cfg.max_ticks();
    let book = RecipeBook::builtin();
    let mut world = reset(task, cfg.seed);
    let mut convos = Conversations::new(names.iter().cloned());
    let mut progress = match &cfg.progress_path {
        Some(p) => ProgressStore::open(p)?,
        None => ProgressStore::in_memory(),
    };

    let mut log = EpisodeLog::default();
    log.push(Record::Header {
        task: Box::new(task.clone()),
        seed: cfg.seed,
        agents: names.clone(),
        endpoints: names.iter().map(|n| endpoints[n].kind().to_string()).collect(),
        max_ticks,
    });
    let mut run = Runner { log, endpoints, unread: BTreeMap::new(), failure: None };
    let mut last_poll: BTreeMap<String, u64> = BTreeMap::new();

    for name in &names {
        let brief = TaskBrief::new(task, name);
        run.note(0, name, Role::System, &brief.system_prompt());
        if let Err(e) = run.endpoints.get_mut(name).expect("checked").brief(&brief) {
            run.failure.get_or_insert(e.to_string());
        }
    }

    let mut last_score: Option<f64> = None;
    let mut tick = 0u64;
    let (end_tick, reason, score) = loop {
        if tick > 0 {
            for c in world.advance_tick() {
                let text = crate::command::action_output(&c.result);
                let ev = Event::CommandResult { command: c.result.label.clone(), ok: c.result.ok, text };
                run.deliver(tick, &c.agent, ev);
            }
        }
        let deliveries = convos.pump(tick, |a| world.is_busy(a));
        for d in deliveries {
            run.log.push(Record::Chat {
                tick,
                from: d.from.clone(),
                to: d.to.clone(),
                kind: d.kind,
                text: d.text.clone(),
            });
            let ev = match d.kind {
                DeliveryKind::Chat => Event::Chat { from: d.from, text: d.text },
                DeliveryKind::Notice => Event::System { text: d.text },
            };
            run.deliver(tick, &d.to, ev);
        }

        for name in &names {
            if run.failure.is_some() {
                break;
            }
            if world.is_busy(name) {
                continue;
            }
            let due = run.unread.get(name).copied().unwrap_or(false)
                || last_poll.get(name).map(|t| tick >= t + POLL_INTERVAL).unwrap_or(true);
            if !due {
                continue;
            }
            last_poll.insert(name.clone(), tick);
            run.unread.insert(name.clone(), false);
            let text = match run.endpoints.get_mut(name).expect("checked").poll(tick) {
                Ok(t) => t,
                Err(e) => {
                    run.failure = Some(e.to_string());
                    break;
                }
            };
            if text.trim().is_empty() {
                continue;
            }
            run.note(tick, name, Role::Assistant, &text);
            handle_text(&mut run, &mut world, book, &mut convos, task, name, &text, tick);
        }

        let score = score_task(&world, task, &mut progress);
        if last_score != Some(score.value) {
            run.log.push(Record::Score { tick, value: score.value });
            last_score = Some(score.value);
        }
        if run.failure.is_some() {
            break (tick, EndReason::AgentError, score);
        }
        if score.is_complete() {
            break (tick, EndReason::Completed, score);
        }
        tick += 1;
        if tick >= max_ticks {
            break (tick, EndReason::Timeout, score);
        }
    };

    for name in &names {
        if let Some(ep) = run.endpoints.get_mut(name) {
            ep.end(reason.as_str(), score.value);
        }
    }
    let detail = run.failure.take();
    run.log.push(Record::End { tick: end_tick, reason, score, detail });
    Ok(run.log)
}

#[allow(clippy::too_many_arguments)]
fn handle_text(
    run: &mut Runner,
    world: &mut WorldState,
    book: &RecipeBook,
    convos: &mut Conversations,
    task: &TaskSpec,
    name: &str,
    text: &str,
    tick: u64,
) {
    let chat = match parse_first_command(text) {
        Ok(Some(parsed)) => {
            let cmd = parsed.command.clone();
            let mut ctx = CommandContext {
                world,
                book,
                conversations: convos,
                blueprint: task.blueprint.as_ref(),
                plan_access: task.has_plan_access(name),
            };
            let outcome = execute(&mut ctx, name, &cmd);
            let status = match &outcome {
                Outcome::Pending => CommandStatus::Pending,
                Outcome::Done(r) if r.ok => CommandStatus::Ok,
                Outcome::Done(_) => CommandStatus::Error,
            };
            run.log.push(Record::Command { tick, agent: name.to_string(), command: cmd.to_string(), status });
            if let Outcome::Done(r) = outcome {
                if let Some(msg) = r.message {
                    run.deliver(tick, name, Event::CommandResult { command: cmd.name.clone(), ok: r.ok, text: msg });
                }
            }
            remainder(text, &parsed)
        }
        Ok(None) => text.trim().to_string(),
        Err(e) => {
            run.deliver(tick, name, Event::CommandResult { command: String::new(), ok: false, text: e.to_string() });
            String::new()
        }
    };
    if !chat.is_empty() {
        convos.send(name, &chat, tick);
    }
}

/// Score obtained by feeding a log's recorded responses back through a
/// fresh episode.
pub fn replay_episode(log: &EpisodeLog) -> Result<(EpisodeLog, Score), RunError> {
    let task = log.task().map_err(|_| RunError::MissingEndpoint("header".into()))?.clone();
    let seed = log.seed().map_err(|_| RunError::MissingEndpoint("header".into()))?;
    let max_ticks = match log.records.first() {
        Some(Record::Header { max_ticks, .. }) => Some(*max_ticks),
        _ => None,
    };
    let mut responses = log.responses();
    let mut endpoints: Endpoints = BTreeMap::new();
    for name in &task.agent_names {
        let lines = responses.remove(name).unwrap_or_default();
        endpoints.insert(name.clone(), Box::new(ScriptedEndpoint::at_ticks(lines)));
    }
    let cfg = EpisodeConfig { task, seed, max_ticks, progress_path: None };
    let replayed = run_episode(&cfg, &mut endpoints)?;
    let score = replayed.end().expect("runner writes an end record").2.clone();
    Ok((replayed, score))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::{generate_crafting_task, PlanBlocked};

    fn boxed<'a, E: AgentEndpoint + 'a>(e: E) -> Box<dyn AgentEndpoint + 'a> {
        Box::new(e)
    }

    #[test]
    fn idle_agents_time_out() {
        let task = generate_crafting_task(3, 2, "stone_pickaxe", PlanBlocked::None).unwrap();
        let mut cfg = EpisodeConfig::new(task.clone(), 3);
        cfg.max_ticks = Some(50);
        let mut eps: Endpoints = task.agent_names.iter().map(|n| (n.clone(), boxed(IdleEndpoint))).collect();
        let log = run_episode(&cfg, &mut eps).unwrap();
        let (tick, reason, score) = log.end().unwrap();
        assert_eq!((tick, reason, score.value), (50, EndReason::Timeout, 0.0));
        assert!(log.transitions().is_empty());
    }

    #[test]
    fn commands_and_chat_reach_the_log() {
        let task = generate_crafting_task(3, 2, "stone_pickaxe", PlanBlocked::None).unwrap();
        let mut cfg = EpisodeConfig::new(task.clone(), 3);
        cfg.max_ticks = Some(40);
        let mut eps: Endpoints = BTreeMap::new();
        eps.insert(
            "Andy_0".into(),
            boxed(ScriptedEndpoint::new(["!startConversation(\"Jill_0\", \"hello\")", "!inventory", "!fly()"])),
        );
        eps.insert("Jill_0".into(), boxed(EchoEndpoint::default()));
        let log = run_episode(&cfg, &mut eps).unwrap();
        let chats: Vec<_> = log.chats().collect();
        assert!(chats.len() >= 2, "{chats:?}");
        let h = log.histories();
        assert!(h["Jill_0"].iter().any(|m| m.role == Role::User && m.content == "Andy_0: (FROM OTHER BOT)hello"));
        assert!(h["Andy_0"].iter().any(|m| m.content.contains("INVENTORY")));
        assert!(h["Andy_0"].iter().any(|m| m.content.contains("!fly does not exist")));
        assert!(h["Andy_0"][0].content.contains("YOUR CURRENT ASSIGNED GOAL"));
        assert_eq!(log.commands().count(), 2);
    }

    #[test]
    fn replay_matches() {
        let task = generate_crafting_task(5, 2, "stone_pickaxe", PlanBlocked::None).unwrap();
        let mut cfg = EpisodeConfig::new(task.clone(), 5);
        cfg.max_ticks = Some(60);
        let mut eps: Endpoints = BTreeMap::new();
        eps.insert("Andy_0".into(), boxed(ScriptedEndpoint::new(["!nearbyBlocks", "!collectBlocks(\"oak_log\", 1)", "hi"])));
        eps.insert("Jill_0".into(), boxed(IdleEndpoint));
        let log = run_episode(&cfg, &mut eps).unwrap();
        let (again, score) = replay_episode(&log).unwrap();
        assert_eq!(score.value, log.final_score().unwrap());
        assert_eq!(again.to_jsonl().lines().skip(1).collect::<Vec<_>>().len(), log.to_jsonl().lines().skip(1).count());
    }
}
