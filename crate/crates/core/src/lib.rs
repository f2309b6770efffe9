//! Deterministic multi-agent crafting, cooking and construction simulator.
//!
//! Agents act through `!command(...)` text and talk through pairwise
//! conversations. [`episode::run_episode`] drives one episode and writes an
//! [`episode::EpisodeLog`]; [`dataset`] turns logs into training examples.

pub mod canonical;
pub mod command;
pub mod conversation;
pub mod dataset;
pub mod episode;
pub mod evaluator;
pub mod gateway;
pub mod oracle;
pub mod recipes;
pub mod task;
pub mod world;

pub use command::{parse_first_command, Command, Value};
pub use conversation::Conversations;
pub use dataset::{emit_transitions, filter_runs, DatasetStats, Example, FilterPolicy};
pub use episode::{
    replay_episode, run_episode, run_suite, AgentEndpoint, EndReason, EpisodeConfig, EpisodeLog, Event, Record,
    TaskBrief, Transition,
};
pub use evaluator::{score_task, Score};
pub use oracle::OracleAgent;
pub use recipes::RecipeBook;
pub use task::{generate_blueprint, Blueprint, BlueprintConfig, Domain, TaskSpec, TaskType};
pub use world::{BlockPos, Inventory, WorldState};
