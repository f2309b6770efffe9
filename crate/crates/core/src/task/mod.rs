//! Task definitions and procedural task generation.

pub mod blueprint;
pub mod generate;
pub mod instructions;
pub mod split;

use crate::world::{Capabilities, Inventory, ProvisionSpec, TICKS_PER_SECOND};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use thiserror::Error;

pub use blueprint::{generate_blueprint, Blueprint, BlueprintConfig, BlueprintError, Fix};
pub use generate::{
    generate_construction_task, generate_cooking_task, generate_crafting_task, CookingOptions, GenerateError,
    COOKING_TEST_ITEMS, COOKING_TRAIN_ITEMS, CRAFTING_TEST_ITEMS,
};
pub use split::{split_train_test, Domain, SplitSizes};

pub const AGENT_NAMES: [&str; 5] = ["Andy_0", "Jill_0", "Bob_0", "Sally_0", "Mike_0"];

pub fn agent_names(n: usize) -> Vec<String> {
    AGENT_NAMES[..n].iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskType {
    Cooking,
    Crafting,
    Construction,
    Techtree,
}

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskType::Cooking => "cooking",
            TaskType::Crafting => "crafting",
            TaskType::Construction => "construction",
            TaskType::Techtree => "techtree",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanBlocked {
    #[default]
    None,
    One,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetItem {
    pub item: String,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_name: String,
    pub task_type: TaskType,
    /// Shared goal text; agents with recipe access also get `recipe_text`.
    pub goal: String,
    pub agent_names: Vec<String>,
    pub agent_count: usize,
    pub initial_inventories: BTreeMap<String, Inventory>,
    /// Ordered so Hell's Kitchen assignments can refer to indices.
    pub target_items: Vec<TargetItem>,
    pub plan_access: BTreeMap<String, bool>,
    #[serde(default)]
    pub recipe_text: BTreeMap<String, String>,
    #[serde(default)]
    pub hells_kitchen: bool,
    /// Hell's Kitchen only: target indices each agent must end up holding.
    #[serde(default)]
    pub assignments: BTreeMap<String, Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blueprint: Option<Blueprint>,
    #[serde(default)]
    pub capabilities: BTreeMap<String, Capabilities>,
    pub timeout_seconds: u64,
    pub world_spec: ProvisionSpec,
    pub seed: u64,
    #[serde(default)]
    pub plan_blocked: PlanBlocked,
    #[serde(default)]
    pub cheats: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitKind>,
    /// Recipe depth the crafting endowment was expanded to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
}

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("task file I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("task file is not valid: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("task is inconsistent: {0}")]
    Invalid(String),
}

impl TaskSpec {
    pub fn validate(&self) -> Result<(), TaskError> {
        let bad = |m: &str| Err(TaskError::Invalid(m.to_string()));
        if self.agent_count != self.agent_names.len() {
            return bad("agent_count does not match agent_names");
        }
        if !(2..=5).contains(&self.agent_count) {
            return bad("agent_count must be between 2 and 5");
        }
        if self.timeout_seconds == 0 {
            return bad("timeout must be positive");
        }
        if self.task_type == TaskType::Construction && self.blueprint.is_none() {
            return bad("construction tasks need a blueprint");
        }
        if self.hells_kitchen {
            let mut seen: Vec<usize> = self.assignments.values().flatten().copied().collect();
            seen.sort();
            if seen != (0..self.target_items.len()).collect::<Vec<_>>() {
                return bad("hell's kitchen assignments must cover every target exactly once");
            }
        }
        if self.capabilities.values().any(|c| matches!(c, Capabilities::Only(s) if s.is_empty())) {
            return bad("capabilities must not be empty");
        }
        Ok(())
    }

    pub fn max_ticks(&self) -> u64 {
        self.timeout_seconds * TICKS_PER_SECOND
    }

    pub fn has_plan_access(&self, agent: &str) -> bool {
        self.plan_access.get(agent).copied().unwrap_or(true)
    }

    /// Full goal as shown to one agent.
    pub fn goal_for(&self, agent: &str) -> String {
        match self.recipe_text.get(agent) {
            Some(text) if !text.is_empty() => format!("{}\n\n{}", self.goal, text),
            _ => self.goal.clone(),
        }
    }

    pub fn inventory_note(&self, agent: &str) -> String {
        match self.initial_inventories.get(agent) {
            Some(inv) if !inv.is_empty() => {
                let parts: Vec<String> = inv.iter().map(|(i, n)| format!("{n} {i}")).collect();
                format!("You start with: {}.", parts.join(", "))
            }
            _ => "You start with an empty inventory.".to_string(),
        }
    }

    pub fn capabilities_for(&self, agent: &str) -> Capabilities {
        self.capabilities.get(agent).cloned().unwrap_or(Capabilities::All)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("task serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TaskError> {
        let t: TaskSpec = serde_json::from_str(text)?;
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self, TaskError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn canonical_hash(&self) -> String {
        crate::canonical::canonical_hash(self)
    }
}
