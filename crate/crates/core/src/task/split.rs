//! Train/test task suites with disjoint goals.

use super::blueprint::{generate_blueprint, BlueprintConfig};
use super::generate::{
    crafting_pool, generate_construction_task, generate_cooking_task, generate_crafting_task, CookingOptions,
    GenerateError,
};
use super::{PlanBlocked, SplitKind, TaskSpec};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

pub const CONSTRUCTION_TRAIN_SEED_BASE: u64 = 0;
pub const CONSTRUCTION_TEST_SEED_BASE: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Cooking,
    Crafting,
    Construction,
}

impl FromStr for Domain {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cooking" => Ok(Domain::Cooking),
            "crafting" => Ok(Domain::Crafting),
            "construction" => Ok(Domain::Construction),
            other => Err(format!("unknown domain {other}")),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Cooking => "cooking",
            Domain::Crafting => "crafting",
            Domain::Construction => "construction",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSizes {
    pub train: usize,
    pub test: usize,
}

impl SplitSizes {
    pub fn default_for(domain: Domain) -> Self {
        match domain {
            Domain::Cooking => SplitSizes { train: 280, test: 90 },
            Domain::Crafting => SplitSizes { train: 1200, test: 100 },
            Domain::Construction => SplitSizes { train: 2000, test: 30 },
        }
    }
}

/// The `index`-th task of one split. Seeds are offset per split so the two
/// halves never share a seed.
pub fn generate_one(domain: Domain, split: SplitKind, index: usize, base_seed: u64) -> Result<TaskSpec, GenerateError> {
    let seed = base_seed.wrapping_add(index as u64);
    match domain {
        Domain::Cooking => {
            let opts = CookingOptions {
                agent_count: 2 + index % 4,
                item_count: 1 + (index / 4) % 2,
                hells_kitchen: index % 5 == 4,
                blocked_agents: 0,
                split,
                items: None,
            };
            generate_cooking_task(seed, &opts)
        }
        Domain::Crafting => {
            let pool = crafting_pool(split);
            let target = &pool[index % pool.len()];
            let blocked = [PlanBlocked::None, PlanBlocked::One, PlanBlocked::Both][(index / pool.len()) % 3];
            generate_crafting_task(seed, 2 + (index / (3 * pool.len())) % 4, target, blocked)
        }
        Domain::Construction => {
            let k = index % 81;
            let cfg = BlueprintConfig::new((k / 27) as u8, (k / 9 % 3) as u8, (k / 3 % 3) as u8, (k % 3) as u8, index as u32)?;
            generate_construction_task(cfg, seed, 2)
        }
    }
}

fn seed_base(domain: Domain, split: SplitKind) -> u64 {
    match (domain, split) {
        (Domain::Construction, SplitKind::Train) => CONSTRUCTION_TRAIN_SEED_BASE,
        (Domain::Construction, SplitKind::Test) => CONSTRUCTION_TEST_SEED_BASE,
        (_, SplitKind::Train) => 0,
        (_, SplitKind::Test) => 1_000_000,
    }
}

/// Construction splits skip any seed whose blueprint already appeared.
fn construction_split(sizes: SplitSizes) -> Result<(Vec<TaskSpec>, Vec<TaskSpec>), GenerateError> {
    let mut seen = BTreeSet::new();
    let mut out = [Vec::new(), Vec::new()];
    for (slot, (split, n)) in [(SplitKind::Train, sizes.train), (SplitKind::Test, sizes.test)].into_iter().enumerate() {
        let base = seed_base(Domain::Construction, split);
        let mut index = 0usize;
        let mut attempt = 0u64;
        while out[slot].len() < n {
            let k = index % 81;
            let cfg = BlueprintConfig::new((k / 27) as u8, (k / 9 % 3) as u8, (k / 3 % 3) as u8, (k % 3) as u8, index as u32)?;
            let seed = base + index as u64 + attempt * 100_000_000;
            let hash = generate_blueprint(cfg, seed)?.content_hash();
            if !seen.insert(hash) {
                attempt += 1;
                continue;
            }
            let mut task = generate_construction_task(cfg, seed, 2)?;
            task.split = Some(split);
            out[slot].push(task);
            index += 1;
            attempt = 0;
        }
    }
    let [train, test] = out;
    Ok((train, test))
}

pub fn split_train_test(domain: Domain, sizes: SplitSizes) -> Result<(Vec<TaskSpec>, Vec<TaskSpec>), GenerateError> {
    if domain == Domain::Construction {
        return construction_split(sizes);
    }
    let make = |split, n| -> Result<Vec<TaskSpec>, GenerateError> {
        (0..n).map(|i| generate_one(domain, split, i, seed_base(domain, split))).collect()
    };
    Ok((make(SplitKind::Train, sizes.train)?, make(SplitKind::Test, sizes.test)?))
}

pub fn goal_items(tasks: &[TaskSpec]) -> BTreeSet<String> {
    tasks.iter().flat_map(|t| t.target_items.iter().map(|i| i.item.clone())).collect()
}
