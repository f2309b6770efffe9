//! Turning episode logs into fine-tuning examples.

use crate::episode::{run_suite, AgentEndpoint, EpisodeLog, LogError, Message, Record, Role, RunError};
use crate::oracle::OracleAgent;
use crate::task::{Domain, TaskSpec, TaskType};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum FilterPolicy {
    SuccessOnly,
    TopFraction { fraction: f64 },
}

impl FilterPolicy {
    pub const TOP25: FilterPolicy = FilterPolicy::TopFraction { fraction: 0.25 };

    /// Binary domains keep successes, construction keeps its best quarter.
    pub fn default_for(domain: Domain) -> Self {
        match domain {
            Domain::Construction => Self::TOP25,
            _ => FilterPolicy::SuccessOnly,
        }
    }
}

impl FromStr for FilterPolicy {
    type Err = DatasetError;
    /// `success`, `top25`, or `top:<fraction>`.
    fn from_str(s: &str) -> Result<Self, DatasetError> {
        match s {
            "success" | "success_only" => Ok(FilterPolicy::SuccessOnly),
            "top25" => Ok(Self::TOP25),
            other => {
                let f = other
                    .strip_prefix("top:")
                    .and_then(|f| f.parse::<f64>().ok())
                    .ok_or_else(|| DatasetError::BadPolicy(other.to_string()))?;
                if f > 0.0 && f <= 1.0 {
                    Ok(FilterPolicy::TopFraction { fraction: f })
                } else {
                    Err(DatasetError::BadPolicy(other.to_string()))
                }
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("no runs to filter")]
    EmptyInput,
    #[error("runs mix the {0} and {1} domains")]
    MixedDomains(Domain, Domain),
    #[error("unknown filter policy {0:?}")]
    BadPolicy(String),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Run(#[from] RunError),
}

pub fn domain_of(task_type: TaskType) -> Domain {
    match task_type {
        TaskType::Cooking => Domain::Cooking,
        TaskType::Crafting | TaskType::Techtree => Domain::Crafting,
        TaskType::Construction => Domain::Construction,
    }
}

/// Score at or above which a run is kept. None keeps nothing.
pub fn keep_threshold(scores: &[f64], policy: FilterPolicy) -> Option<f64> {
    match policy {
        FilterPolicy::SuccessOnly => Some(1.0),
        FilterPolicy::TopFraction { fraction } => {
            if scores.is_empty() {
                return None;
            }
            let mut sorted = scores.to_vec();
            sorted.sort_by(|a, b| b.total_cmp(a));
            let k = ((fraction * sorted.len() as f64) - 1e-9).ceil().max(1.0) as usize;
            Some(sorted[k.min(sorted.len()) - 1])
        }
    }
}

/// Indices of the runs the policy keeps, in input order. Ties at the
/// threshold are kept.
pub fn filter_runs(logs: &[EpisodeLog], policy: FilterPolicy) -> Result<Vec<usize>, DatasetError> {
    if logs.is_empty() {
        return Err(DatasetError::EmptyInput);
    }
    let domain = domain_of(logs[0].task()?.task_type);
    let mut scores = Vec::with_capacity(logs.len());
    for log in logs {
        let d = domain_of(log.task()?.task_type);
        if d != domain {
            return Err(DatasetError::MixedDomains(domain, d));
        }
        scores.push(log.final_score()?);
    }
    let Some(t) = keep_threshold(&scores, policy) else { return Ok(Vec::new()) };
    Ok(scores.iter().enumerate().filter(|(_, s)| **s >= t).map(|(i, _)| i).collect())
}

/// One training example: the agent's prompt as memory, then its dialogue up
/// to and including the assistant turn being learned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub memory: String,
    pub turns: Vec<Message>,
    pub task: String,
    pub agent: String,
    pub tick: u64,
    pub score: f64,
}

impl Example {
    /// Everything before the response.
    pub fn context(&self) -> &[Message] {
        &self.turns[..self.turns.len() - 1]
    }

    pub fn target(&self) -> &str {
        &self.turns[self.turns.len() - 1].content
    }
}

/// Calls `f` once per assistant turn, in log order.
pub fn for_each_example(log: &EpisodeLog, mut f: impl FnMut(Example)) -> Result<(), DatasetError> {
    let task = log.task()?.task_name.clone();
    let score = log.final_score()?;
    let mut memory: std::collections::BTreeMap<&str, String> = Default::default();
    let mut turns: std::collections::BTreeMap<&str, Vec<Message>> = Default::default();
    for r in &log.records {
        let Record::Message { tick, agent, role, content } = r else { continue };
        if !memory.contains_key(agent.as_str()) && *role == Role::System {
            memory.insert(agent, content.clone());
            continue;
        }
        let h = turns.entry(agent).or_default();
        h.push(Message { role: *role, content: content.clone() });
        if *role == Role::Assistant {
            f(Example {
                memory: memory.get(agent.as_str()).cloned().unwrap_or_default(),
                turns: h.clone(),
                task: task.clone(),
                agent: agent.clone(),
                tick: *tick,
                score,
            });
        }
    }
    Ok(())
}

pub fn emit_transitions(log: &EpisodeLog) -> Result<Vec<Example>, DatasetError> {
    let mut out = Vec::new();
    for_each_example(log, |e| out.push(e))?;
    Ok(out)
}

/// Writes the examples of every log as JSON lines. Returns how many.
pub fn write_examples<'a, W: Write>(logs: impl IntoIterator<Item = &'a EpisodeLog>, mut w: W) -> Result<usize, DatasetError> {
    let mut count = 0;
    let mut err = None;
    for log in logs {
        for_each_example(log, |e| {
            if err.is_some() {
                return;
            }
            let line = serde_json::to_string(&e).expect("example serializes");
            if let Err(e) = writeln!(w, "{line}") {
                err = Some(e);
            }
            count += 1;
        })?;
        if let Some(e) = err.take() {
            return Err(e.into());
        }
    }
    Ok(count)
}

pub fn assistant_turns(log: &EpisodeLog) -> usize {
    log.records.iter().filter(|r| matches!(r, Record::Message { role: Role::Assistant, .. })).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub domain: Domain,
    pub train: usize,
    pub test: usize,
    pub trials: usize,
    /// Runs that scored 1.0.
    pub successes: usize,
    pub kept_runs: usize,
    pub transitions: usize,
    pub avg_trajectory_length: f64,
}

pub const STATS_COLUMNS: [&str; 7] = ["Task", "Train", "Test", "Trials", "Success", "Transitions", "Avg Traj. Len."];

impl DatasetStats {
    /// `train`/`test` are task-set sizes; the rest comes from the runs.
    pub fn compute(domain: Domain, train: usize, test: usize, logs: &[EpisodeLog], kept: &[usize]) -> Result<Self, DatasetError> {
        let mut successes = 0;
        for log in logs {
            if log.final_score()? >= 1.0 {
                successes += 1;
            }
        }
        let transitions: usize = kept.iter().map(|&i| assistant_turns(&logs[i])).sum();
        Ok(DatasetStats {
            domain,
            train,
            test,
            trials: logs.len(),
            successes,
            kept_runs: kept.len(),
            transitions,
            avg_trajectory_length: if kept.is_empty() { 0.0 } else { transitions as f64 / kept.len() as f64 },
        })
    }

    fn cells(&self) -> [String; 7] {
        let mut name = self.domain.to_string();
        name[..1].make_ascii_uppercase();
        [
            name,
            self.train.to_string(),
            self.test.to_string(),
            self.trials.to_string(),
            self.kept_runs.to_string(),
            self.transitions.to_string(),
            format!("{:.1}", self.avg_trajectory_length),
        ]
    }
}

/// Plain-text table, one row per domain. The Success column counts kept runs.
pub struct StatsTable<'a>(pub &'a [DatasetStats]);

impl fmt::Display for StatsTable<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<[String; 7]> = self.0.iter().map(DatasetStats::cells).collect();
        let width = |c: usize| rows.iter().map(|r| r[c].len()).chain([STATS_COLUMNS[c].len()]).max().unwrap_or(0);
        let widths: Vec<usize> = (0..7).map(width).collect();
        let line = |cells: &[&str]| -> String {
            cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect::<Vec<_>>().join(" | ")
        };
        writeln!(f, "{}", line(&STATS_COLUMNS))?;
        writeln!(f, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-|-"))?;
        for r in &rows {
            writeln!(f, "{}", line(&r.iter().map(String::as_str).collect::<Vec<_>>()))?;
        }
        Ok(())
    }
}

/// Runs the oracle on every task once and returns the logs.
pub fn oracle_runs(tasks: &[TaskSpec], seed: u64) -> Result<Vec<EpisodeLog>, DatasetError> {
    let mut logs = Vec::with_capacity(tasks.len());
    run_suite(
        tasks,
        &[seed],
        |_, _| Box::new(OracleAgent::new()) as Box<dyn AgentEndpoint>,
        |_, _, log| logs.push(log.clone()),
    )?;
    Ok(logs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_names_parse() {
        assert_eq!("success".parse::<FilterPolicy>().unwrap(), FilterPolicy::SuccessOnly);
        assert_eq!("top25".parse::<FilterPolicy>().unwrap(), FilterPolicy::TOP25);
        assert_eq!("top:0.5".parse::<FilterPolicy>().unwrap(), FilterPolicy::TopFraction { fraction: 0.5 });
        assert!("top:0".parse::<FilterPolicy>().is_err());
        assert!("best".parse::<FilterPolicy>().is_err());
    }

    #[test]
    fn quarter_of_ten_keeps_three() {
        let scores: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        assert_eq!(keep_threshold(&scores, FilterPolicy::TOP25), Some(0.8));
    }

    #[test]
    fn table_has_header_columns() {
        let s = DatasetStats {
            domain: Domain::Cooking,
            train: 280,
            test: 90,
            trials: 10,
            successes: 4,
            kept_runs: 4,
            transitions: 40,
            avg_trajectory_length: 10.0,
        };
        let text = StatsTable(&[s]).to_string();
        let header: Vec<&str> = text.lines().next().unwrap().split('|').map(str::trim).collect();
        assert_eq!(header, STATS_COLUMNS);
        assert!(text.lines().nth(2).unwrap().starts_with("Cooking"));
    }
}
