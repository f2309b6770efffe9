//! Batches of episodes and their aggregate scores.

use super::{run_episode, AgentEndpoint, EndReason, Endpoints, EpisodeConfig, EpisodeLog, RunError};
use crate::task::{PlanBlocked, TaskSpec, TaskType};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Aggregation key: agent count, blocked plans and, for construction,
/// the material and room complexity levels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupKey {
    pub task_type: TaskType,
    pub agent_count: usize,
    pub plan_blocked: PlanBlocked,
    pub m: Option<u8>,
    pub r: Option<u8>,
}

impl GroupKey {
    pub fn of(task: &TaskSpec) -> Self {
        let cfg = task.blueprint.as_ref().map(|b| b.config);
        GroupKey {
            task_type: task.task_type,
            agent_count: task.agent_count,
            plan_blocked: task.plan_blocked,
            m: cfg.map(|c| c.m),
            r: cfg.map(|c| c.r),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub runs: usize,
    pub completed: usize,
    pub mean_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRun {
    pub task_name: String,
    pub seed: u64,
    pub score: f64,
    pub reason: EndReason,
    pub ticks: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub runs: Vec<SuiteRun>,
    pub groups: Vec<(GroupKey, GroupStats)>,
}

impl SuiteReport {
    pub fn mean_score(&self) -> f64 {
        if self.runs.is_empty() {
            return 0.0;
        }
        self.runs.iter().map(|r| r.score).sum::<f64>() / self.runs.len() as f64
    }

    pub fn success_rate(&self) -> f64 {
        if self.runs.is_empty() {
            return 0.0;
        }
        self.runs.iter().filter(|r| r.reason == EndReason::Completed).count() as f64 / self.runs.len() as f64
    }
}

/// Run every task once per seed. `make` builds the endpoint for one agent
/// of one task. Logs are handed to `sink` as they finish.
pub fn run_suite<'a, F, S>(tasks: &[TaskSpec], seeds: &[u64], mut make: F, mut sink: S) -> Result<SuiteReport, RunError>
where
    F: FnMut(&TaskSpec, &str) -> Box<dyn AgentEndpoint + 'a>,
    S: FnMut(&TaskSpec, u64, &EpisodeLog),
{
    let mut runs = Vec::new();
    let mut acc: BTreeMap<GroupKey, (usize, usize, f64)> = BTreeMap::new();
    for task in tasks {
        for &seed in seeds {
            let mut eps: Endpoints = task.agent_names.iter().map(|n| (n.clone(), make(task, n))).collect();
            let log = run_episode(&EpisodeConfig::new(task.clone(), seed), &mut eps)?;
            let (ticks, reason, score) = log.end().expect("runner writes an end record");
            let e = acc.entry(GroupKey::of(task)).or_default();
            e.0 += 1;
            e.1 += usize::from(reason == EndReason::Completed);
            e.2 += score.value;
            runs.push(SuiteRun { task_name: task.task_name.clone(), seed, score: score.value, reason, ticks });
            sink(task, seed, &log);
        }
    }
    let groups = acc
        .into_iter()
        .map(|(k, (n, done, sum))| (k, GroupStats { runs: n, completed: done, mean_score: sum / n as f64 }))
        .collect();
    Ok(SuiteReport { runs, groups })
}

/// Tasks drawn from a generated split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedTasks {
    pub domain: crate::task::Domain,
    pub split: crate::task::SplitKind,
    pub count: usize,
}

/// What `run-suite` reads: task files, generated tasks, seeds and the
/// endpoint kind for every agent. Relative paths resolve against the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteManifest {
    #[serde(default)]
    pub tasks: Vec<std::path::PathBuf>,
    #[serde(default)]
    pub generate: Vec<GeneratedTasks>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_agent_kind")]
    pub agents: String,
}

fn default_agent_kind() -> String {
    "oracle".to_string()
}

impl SuiteManifest {
    pub fn load(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Every task the manifest names, files first.
    pub fn resolve_tasks(&self, base: &std::path::Path) -> Result<Vec<TaskSpec>, String> {
        let mut out = Vec::new();
        for p in &self.tasks {
            let p = if p.is_absolute() { p.clone() } else { base.join(p) };
            out.push(TaskSpec::load(&p).map_err(|e| format!("{}: {e}", p.display()))?);
        }
        for g in &self.generate {
            let sizes = match g.split {
                crate::task::SplitKind::Train => crate::task::SplitSizes { train: g.count, test: 0 },
                crate::task::SplitKind::Test => crate::task::SplitSizes { train: 0, test: g.count },
            };
            let (train, test) = crate::task::split_train_test(g.domain, sizes).map_err(|e| e.to_string())?;
            out.extend(if g.split == crate::task::SplitKind::Train { train } else { test });
        }
        Ok(out)
    }
}
