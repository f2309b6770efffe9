//! Procedural generators for cooking, crafting and construction tasks.

use super::blueprint::{generate_blueprint, BlueprintConfig, BlueprintError};
use super::instructions::{cooking_expands, cooking_instructions};
use super::{agent_names, PlanBlocked, SplitKind, TargetItem, TaskSpec, TaskType};
use crate::recipes::{RecipeBook, RecipeKind};
use crate::world::{Capabilities, Inventory, ProvisionSpec, WorldKind};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub const COOKING_TRAIN_ITEMS: [&str; 10] = [
    "cooked_beef",
    "cooked_porkchop",
    "cooked_chicken",
    "cooked_rabbit",
    "beetroot_soup",
    "rabbit_stew",
    "suspicious_stew",
    "cookie",
    "pumpkin_pie",
    "golden_apple",
];

pub const COOKING_TEST_ITEMS: [&str; 6] = ["cooked_mutton", "baked_potato", "cake", "golden_carrot", "mushroom_stew", "bread"];

/// Held-out crafting goals; training goals are every other craftable item.
pub const CRAFTING_TEST_ITEMS: [&str; 12] = [
    "compass",
    "clock",
    "bookshelf",
    "shield",
    "white_bed",
    "lectern",
    "barrel",
    "item_frame",
    "painting",
    "bucket",
    "campfire",
    "hopper",
];

pub const COOKING_TIMEOUT: u64 = 300;
pub const CRAFTING_TIMEOUT: u64 = 300;
pub const CRAFTING_MAX_DEPTH: u32 = 2;
const MAX_DEALS: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error("only {available} items in the pool, {requested} requested")]
    InsufficientPool { requested: usize, available: usize },
    #[error("{0} cannot be crafted.")]
    UnknownTarget(String),
    #[error("cannot split the materials for {0} so that every agent is needed")]
    Unsplittable(String),
    #[error("agent count must be between 2 and 5, got {0}")]
    AgentCount(usize),
    #[error("{0}")]
    Argument(String),
    #[error(transparent)]
    Blueprint(#[from] BlueprintError),
}

fn check_agents(n: usize) -> Result<(), GenerateError> {
    if (2..=5).contains(&n) {
        Ok(())
    } else {
        Err(GenerateError::AgentCount(n))
    }
}

fn item_list(items: &[TargetItem]) -> String {
    items.iter().map(|t| format!("{} {}", t.count, t.item)).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CookingOptions {
    pub agent_count: usize,
    pub item_count: usize,
    pub hells_kitchen: bool,
    pub blocked_agents: usize,
    pub split: SplitKind,
    /// Fixed targets; sampled from the split's pool when absent.
    pub items: Option<Vec<String>>,
}

impl Default for CookingOptions {
    fn default() -> Self {
        CookingOptions { agent_count: 2, item_count: 1, hells_kitchen: false, blocked_agents: 0, split: SplitKind::Test, items: None }
    }
}

pub fn cooking_pool(split: SplitKind) -> &'static [&'static str] {
    match split {
        SplitKind::Train => &COOKING_TRAIN_ITEMS,
        SplitKind::Test => &COOKING_TEST_ITEMS,
    }
}

pub fn generate_cooking_task(seed: u64, opts: &CookingOptions) -> Result<TaskSpec, GenerateError> {
    check_agents(opts.agent_count)?;
    if opts.blocked_agents > 2 || opts.blocked_agents > opts.agent_count {
        return Err(GenerateError::Argument(format!("cannot block {} agents", opts.blocked_agents)));
    }
    let book = RecipeBook::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items: Vec<String> = match &opts.items {
        Some(list) => {
            if let Some(bad) = list.iter().find(|i| book.get(i).is_none()) {
                return Err(GenerateError::UnknownTarget(bad.clone()));
            }
            list.clone()
        }
        None => {
            let pool = cooking_pool(opts.split);
            if !(1..=4).contains(&opts.item_count) || opts.item_count > pool.len() {
                return Err(GenerateError::InsufficientPool { requested: opts.item_count, available: pool.len() });
            }
            pool.choose_multiple(&mut rng, opts.item_count).map(|s| s.to_string()).collect()
        }
    };
    let names = agent_names(opts.agent_count);
    let targets: Vec<TargetItem> = items.iter().map(|i| TargetItem { item: i.clone(), count: 1 }).collect();

    let mut blocked: Vec<String> = names.clone();
    blocked.shuffle(&mut rng);
    blocked.truncate(opts.blocked_agents);
    let plan_access: BTreeMap<String, bool> = names.iter().map(|n| (n.clone(), !blocked.contains(n))).collect();

    let recipes: Vec<String> = targets.iter().map(|t| cooking_instructions(book, &t.item, t.count).to_string()).collect();
    let receiver = &names[0];
    let mut recipe_text = BTreeMap::new();
    let mut assignments = BTreeMap::new();
    let goal;
    if opts.hells_kitchen {
        // Agent i%n holds the recipe for target i, agent (i+1)%n must make it.
        let n = names.len();
        for (i, _) in targets.iter().enumerate() {
            assignments.entry(names[(i + 1) % n].clone()).or_insert_with(Vec::new).push(i);
        }
        goal = "Each bot has its own cooking goal below. The recipes you were given are for your teammates' dishes, \
                so share them and ask for yours."
            .to_string();
        for (a, agent) in names.iter().enumerate() {
            let mine: Vec<TargetItem> = assignments.get(agent).into_iter().flatten().map(|&i| targets[i].clone()).collect();
            let mut text = if mine.is_empty() {
                "You have no dish of your own, help the others.".to_string()
            } else {
                format!("Your dish: {}. Keep it in your inventory.", item_list(&mine))
            };
            if plan_access[agent] {
                for (i, r) in recipes.iter().enumerate() {
                    if i % n == a {
                        text.push_str("\n\n");
                        text.push_str(r.trim_end());
                    }
                }
            }
            recipe_text.insert(agent.clone(), text);
        }
    } else {
        goal = format!("Cook together and give all of these to {receiver}: {}.", item_list(&targets));
        let all = recipes.iter().map(|r| r.trim_end()).collect::<Vec<_>>().join("\n\n");
        for agent in &names {
            if plan_access[agent] {
                recipe_text.insert(agent.clone(), all.clone());
            }
        }
    }

    let mut resources = Inventory::new();
    for t in &targets {
        resources.merge(&book.raw_bill(&t.item, t.count, |i| cooking_expands(book, i)));
    }
    let spare: Vec<String> = resources.iter().map(|(i, _)| i.to_string()).collect();
    for item in spare {
        resources.add(&item, 1);
    }

    let prefix = if opts.hells_kitchen { "hells_kitchen_cooking" } else { "multiagent_cooking" };
    let task = TaskSpec {
        task_name: format!("{prefix}_{}_{}agents_b{}_s{seed}", items.join("_"), names.len(), opts.blocked_agents),
        task_type: TaskType::Cooking,
        goal,
        agent_count: names.len(),
        initial_inventories: names.iter().map(|n| (n.clone(), Inventory::new())).collect(),
        agent_names: names,
        target_items: targets,
        plan_access,
        recipe_text,
        hells_kitchen: opts.hells_kitchen,
        assignments,
        blueprint: None,
        capabilities: BTreeMap::new(),
        timeout_seconds: COOKING_TIMEOUT,
        world_spec: ProvisionSpec { kind: WorldKind::CookingFarm, resources },
        seed,
        plan_blocked: PlanBlocked::None,
        cheats: false,
        split: Some(opts.split),
        depth: None,
    };
    task.validate().map_err(|e| GenerateError::Argument(e.to_string()))?;
    Ok(task)
}

/// Training crafting goals: every table craft not held out and not a cooking goal.
pub fn crafting_train_items() -> Vec<String> {
    let book = RecipeBook::builtin();
    book.recipes()
        .filter(|r| r.kind == RecipeKind::Craft)
        .map(|r| r.output.as_str())
        .filter(|i| !CRAFTING_TEST_ITEMS.contains(i) && !COOKING_TRAIN_ITEMS.contains(i) && !COOKING_TEST_ITEMS.contains(i))
        .filter(|i| endowment(book, i, 0).total() >= 2)
        .map(str::to_string)
        .collect()
}

pub fn crafting_pool(split: SplitKind) -> Vec<String> {
    match split {
        SplitKind::Train => crafting_train_items(),
        SplitKind::Test => CRAFTING_TEST_ITEMS.iter().map(|s| s.to_string()).collect(),
    }
}

/// Materials for one `target`, expanded `depth` recipe levels below its
/// direct inputs.
pub fn endowment(book: &RecipeBook, target: &str, depth: u32) -> Inventory {
    fn go(book: &RecipeBook, item: &str, n: u32, level: i64, out: &mut Inventory) {
        match book.get(item) {
            Some(r) if level >= 0 => {
                let times = n.div_ceil(r.count);
                for (input, k) in &r.inputs {
                    go(book, input, k * times, level - 1, out);
                }
            }
            _ => out.add(item, n),
        }
    }
    let mut out = Inventory::new();
    go(book, target, 1, depth as i64, &mut out);
    out
}

fn suffices(book: &RecipeBook, target: &str, inv: &Inventory) -> bool {
    book.compute_crafting_plan(target, 1, inv).map(|p| p.missing.is_empty()).unwrap_or(false)
}

/// Deal `bill` unit by unit so that every agent is needed.
fn deal(book: &RecipeBook, target: &str, bill: &Inventory, n: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Inventory>> {
    let mut units: Vec<&str> = bill.iter().flat_map(|(i, c)| std::iter::repeat_n(i, c as usize)).collect();
    if units.len() < 2 {
        return None;
    }
    for _ in 0..MAX_DEALS {
        units.shuffle(rng);
        let mut hands = vec![Inventory::new(); n];
        let offset = rng.gen_range(0..n);
        for (k, u) in units.iter().enumerate() {
            hands[(k + offset) % n].add(u, 1);
        }
        if hands.iter().all(|h| !suffices(book, target, h)) {
            return Some(hands);
        }
    }
    None
}

pub fn generate_crafting_task(
    seed: u64,
    agent_count: usize,
    target: &str,
    plan_blocked: PlanBlocked,
) -> Result<TaskSpec, GenerateError> {
    check_agents(agent_count)?;
    let book = RecipeBook::builtin();
    match book.get(target) {
        Some(r) if r.kind == RecipeKind::Craft => {}
        _ => return Err(GenerateError::UnknownTarget(target.to_string())),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = rng.gen_range(0..=CRAFTING_MAX_DEPTH);
    let mut dealt = None;
    for depth in (0..=start).rev() {
        let bill = endowment(book, target, depth);
        if let Some(hands) = deal(book, target, &bill, agent_count, &mut rng) {
            dealt = Some((depth, hands));
            break;
        }
    }
    let (depth, hands) = dealt.ok_or_else(|| GenerateError::Unsplittable(target.to_string()))?;
    let names = agent_names(agent_count);
    let mut blocked = names.clone();
    blocked.shuffle(&mut rng);
    blocked.truncate(match plan_blocked {
        PlanBlocked::None => 0,
        PlanBlocked::One => 1,
        PlanBlocked::Both => agent_count,
    });
    let targets = vec![TargetItem { item: target.to_string(), count: 1 }];
    let split = if CRAFTING_TEST_ITEMS.contains(&target) { SplitKind::Test } else { SplitKind::Train };
    let blocked_tag = match plan_blocked {
        PlanBlocked::None => "open",
        PlanBlocked::One => "blocked_one",
        PlanBlocked::Both => "blocked_both",
    };
    let task = TaskSpec {
        task_name: format!("multiagent_crafting_{target}_{agent_count}agents_{blocked_tag}_s{seed}"),
        task_type: TaskType::Crafting,
        goal: format!("Pool your items with the other bots and craft {}.", item_list(&targets)),
        plan_access: names.iter().map(|n| (n.clone(), !blocked.contains(n))).collect(),
        initial_inventories: names.iter().cloned().zip(hands).collect(),
        agent_count,
        agent_names: names,
        target_items: targets,
        recipe_text: BTreeMap::new(),
        hells_kitchen: false,
        assignments: BTreeMap::new(),
        blueprint: None,
        capabilities: BTreeMap::new(),
        timeout_seconds: CRAFTING_TIMEOUT,
        world_spec: ProvisionSpec::new(WorldKind::CraftingForest),
        seed,
        plan_blocked,
        cheats: false,
        split: Some(split),
        depth: Some(depth),
    };
    task.validate().map_err(|e| GenerateError::Argument(e.to_string()))?;
    Ok(task)
}

pub fn construction_timeout(config: &BlueprintConfig) -> u64 {
    600 + 300 * config.r as u64
}

pub fn generate_construction_task(config: BlueprintConfig, seed: u64, agent_count: usize) -> Result<TaskSpec, GenerateError> {
    check_agents(agent_count)?;
    let blueprint = generate_blueprint(config, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);

    // One share per material; split the largest until every agent gets one.
    let mut shares: Vec<(String, u32)> = blueprint.bill_of_materials().iter().map(|(m, n)| (m.to_string(), n)).collect();
    shares.shuffle(&mut rng);
    while shares.len() < agent_count {
        let (idx, _) = shares.iter().enumerate().max_by_key(|(i, s)| (s.1, std::cmp::Reverse(*i))).expect("bill is never empty");
        let (m, n) = shares[idx].clone();
        if n < 2 {
            return Err(GenerateError::Argument("blueprint too small to share".into()));
        }
        shares[idx].1 = n - n / 2;
        shares.push((m, n / 2));
    }
    let names = agent_names(agent_count);
    let mut inventories: BTreeMap<String, Inventory> = BTreeMap::new();
    let mut capabilities: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (k, (m, n)) in shares.iter().enumerate() {
        let agent = &names[k % agent_count];
        let inv = inventories.entry(agent.clone()).or_default();
        let spare = if inv.count(m) == 0 { 1 } else { 0 };
        inv.add(m, n + spare);
        capabilities.entry(agent.clone()).or_default().insert(m.clone());
    }
    let task = TaskSpec {
        task_name: format!("construction_{}_s{seed}", blueprint.name()),
        task_type: TaskType::Construction,
        goal: "Build the blueprint together with the other bots. Check the blueprint often to see which blocks are \
               still needed and who holds them."
            .to_string(),
        plan_access: names.iter().map(|n| (n.clone(), true)).collect(),
        initial_inventories: inventories,
        capabilities: capabilities.into_iter().map(|(a, s)| (a, Capabilities::Only(s))).collect(),
        agent_count,
        agent_names: names,
        target_items: Vec::new(),
        recipe_text: BTreeMap::new(),
        hells_kitchen: false,
        assignments: BTreeMap::new(),
        timeout_seconds: construction_timeout(&config),
        blueprint: Some(blueprint),
        world_spec: ProvisionSpec::new(WorldKind::ConstructionSuperflat),
        seed,
        plan_blocked: PlanBlocked::None,
        cheats: false,
        split: None,
        depth: None,
    };
    task.validate().map_err(|e| GenerateError::Argument(e.to_string()))?;
    Ok(task)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cooking_targets_come_from_split() {
        for seed in 0..20 {
            let opts = CookingOptions { item_count: 2, ..Default::default() };
            let t = generate_cooking_task(seed, &opts).unwrap();
            assert!(t.target_items.iter().all(|i| COOKING_TEST_ITEMS.contains(&i.item.as_str())));
            assert!(t.goal.contains("Andy_0"));
        }
    }

    #[test]
    fn hells_kitchen_gives_partner_recipes() {
        let opts = CookingOptions {
            hells_kitchen: true,
            items: Some(vec!["baked_potato".into(), "cake".into()]),
            ..Default::default()
        };
        let t = generate_cooking_task(3, &opts).unwrap();
        assert_eq!(t.assignments["Andy_0"], vec![1]);
        assert_eq!(t.assignments["Jill_0"], vec![0]);
        assert!(t.recipe_text["Andy_0"].contains("Recipe for baked_potato:"));
        assert!(!t.recipe_text["Andy_0"].contains("Recipe for cake:"));
        assert!(t.recipe_text["Jill_0"].contains("Recipe for cake:"));
    }

    #[test]
    fn blocked_agents_lose_recipes() {
        let opts = CookingOptions { blocked_agents: 2, ..Default::default() };
        let t = generate_cooking_task(1, &opts).unwrap();
        assert!(t.recipe_text.is_empty());
        assert!(t.plan_access.values().all(|v| !v));
    }

    #[test]
    fn crafting_split_needs_everyone() {
        let book = RecipeBook::builtin();
        for (seed, target) in CRAFTING_TEST_ITEMS.iter().enumerate() {
            let t = generate_crafting_task(seed as u64, 2, target, PlanBlocked::None).unwrap();
            let mut union = Inventory::new();
            for inv in t.initial_inventories.values() {
                assert!(!suffices(book, target, inv), "{target}");
                union.merge(inv);
            }
            assert!(suffices(book, target, &union), "{target}");
        }
    }

    #[test]
    fn every_train_item_is_splittable() {
        for (seed, target) in crafting_train_items().iter().enumerate() {
            for n in 2..=5 {
                generate_crafting_task(seed as u64, n, target, PlanBlocked::One).unwrap();
            }
        }
    }

    #[test]
    fn crafting_plan_blocking() {
        let t = generate_crafting_task(0, 2, "compass", PlanBlocked::Both).unwrap();
        assert!(t.plan_access.values().all(|v| !v));
        let t = generate_crafting_task(0, 3, "compass", PlanBlocked::One).unwrap();
        assert_eq!(t.plan_access.values().filter(|v| !**v).count(), 1);
    }

    #[test]
    fn construction_timeout_and_partition() {
        for r in 0..=2u8 {
            let cfg = BlueprintConfig::new(1, r, 1, 1, 0).unwrap();
            let t = generate_construction_task(cfg, 5, 2).unwrap();
            assert_eq!(t.timeout_seconds, 600 + 300 * r as u64);
            assert!(!t.cheats);
            let bill = t.blueprint.as_ref().unwrap().bill_of_materials();
            let mut union = Inventory::new();
            for inv in t.initial_inventories.values() {
                assert!(!inv.covers(&bill));
                union.merge(inv);
            }
            assert!(union.covers(&bill));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_crafting_task(9, 3, "bookshelf", PlanBlocked::One).unwrap();
        let b = generate_crafting_task(9, 3, "bookshelf", PlanBlocked::One).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }
}
