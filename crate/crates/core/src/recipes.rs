//! Recipe book, craft/smelt action builders and the crafting-plan solver.

use crate::world::action::{Effect, Step, Transform, TransformKind};
use crate::world::{BlockPos, Inventory, PendingAction, StationKind, WorldState, INTERACTION_RADIUS};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;
use thiserror::Error;

/// How far craft and smelt commands look for a station before giving up.
pub const STATION_SEARCH_RANGE: f64 = 32.0;

const BUILTIN: &str = include_str!("../data/recipes.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Station {
    None,
    CraftingTable,
    Furnace,
    Smoker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecipeKind {
    Craft,
    Smelt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recipe {
    pub output: String,
    pub count: u32,
    /// Ordered; the order is what error messages and plan lines show.
    pub inputs: Vec<(String, u32)>,
    pub station: Station,
    pub kind: RecipeKind,
}

impl Recipe {
    pub fn requirement_text(&self) -> String {
        self.inputs.iter().map(|(i, n)| format!("{i}: {n}")).collect::<Vec<_>>().join(", ")
    }

    fn scaled_inputs(&self, times: u32) -> Vec<(String, u32)> {
        self.inputs.iter().map(|(i, n)| (i.clone(), n * times)).collect()
    }
}

#[derive(Debug, Deserialize)]
struct RecipeFile {
    version: u32,
    recipes: Vec<Recipe>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecipeError {
    #[error("unsupported recipe file version {0}")]
    Version(u32),
    #[error("recipe file is malformed: {0}")]
    Malformed(String),
    #[error("{0} has more than one recipe")]
    Duplicate(String),
    #[error("recipe for {0} is invalid: {1}")]
    Invalid(String, String),
    #[error("recipe cycle through {0}")]
    Cycle(String),
    #[error("Could not find a recipe for {0}.")]
    UnknownRecipe(String),
    #[error("{0} cannot be crafted.")]
    UnknownTarget(String),
    #[error("You do not have the resources to craft a {item}. It requires: {requires}.")]
    MissingResources { item: String, requires: String },
    #[error("There is no crafting table nearby.")]
    NoStationNearby,
    #[error("There is no furnace nearby.")]
    NoFurnaceNearby,
    #[error("The furnace is out of fuel.")]
    OutOfFuel,
    #[error("Cannot smelt {0}.")]
    NotSmeltable(String),
    #[error("You do not have enough {0} to smelt.")]
    MissingItem(String),
    #[error("Could not find a path to {0}.")]
    Unreachable(BlockPos),
    #[error("Unknown agent {0}.")]
    UnknownAgent(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecipeBook {
    recipes: BTreeMap<String, Recipe>,
    raw_items: BTreeSet<String>,
}

impl RecipeBook {
    pub fn from_json(text: &str) -> Result<Self, RecipeError> {
        let file: RecipeFile = serde_json::from_str(text).map_err(|e| RecipeError::Malformed(e.to_string()))?;
        if file.version != 1 {
            return Err(RecipeError::Version(file.version));
        }
        Self::from_recipes(file.recipes)
    }

    pub fn from_recipes(list: Vec<Recipe>) -> Result<Self, RecipeError> {
        let mut recipes = BTreeMap::new();
        for r in list {
            if r.inputs.is_empty() || r.count == 0 || r.inputs.iter().any(|(_, n)| *n == 0) {
                return Err(RecipeError::Invalid(r.output, "empty or zero-count inputs".into()));
            }
            if r.kind == RecipeKind::Smelt && (r.inputs.len() != 1 || r.inputs[0].1 != 1) {
                return Err(RecipeError::Invalid(r.output, "smelting takes exactly one input".into()));
            }
            if recipes.contains_key(&r.output) {
                return Err(RecipeError::Duplicate(r.output));
            }
            recipes.insert(r.output.clone(), r);
        }
        let raw_items = recipes
            .values()
            .flat_map(|r| r.inputs.iter().map(|(i, _)| i.clone()))
            .filter(|i| !recipes.contains_key(i))
            .collect();
        let book = Self { recipes, raw_items };
        book.check_acyclic()?;
        Ok(book)
    }

    fn check_acyclic(&self) -> Result<(), RecipeError> {
        // 0 = unvisited, 1 = on stack, 2 = done
        fn visit(book: &RecipeBook, item: &str, state: &mut BTreeMap<String, u8>) -> Result<(), RecipeError> {
            match state.get(item) {
                Some(1) => return Err(RecipeError::Cycle(item.to_string())),
                Some(2) => return Ok(()),
                _ => {}
            }
            state.insert(item.to_string(), 1);
            if let Some(r) = book.recipes.get(item) {
                for (i, _) in &r.inputs {
                    visit(book, i, state)?;
                }
            }
            state.insert(item.to_string(), 2);
            Ok(())
        }
        let mut state = BTreeMap::new();
        for item in self.recipes.keys() {
            visit(self, item, &mut state)?;
        }
        Ok(())
    }

    /// The bundled recipe book.
    pub fn builtin() -> &'static RecipeBook {
        static BOOK: OnceLock<RecipeBook> = OnceLock::new();
        BOOK.get_or_init(|| RecipeBook::from_json(BUILTIN).expect("bundled recipe file is valid"))
    }

    pub fn get(&self, item: &str) -> Option<&Recipe> {
        self.recipes.get(item)
    }

    pub fn recipes(&self) -> impl Iterator<Item = &Recipe> {
        self.recipes.values()
    }

    pub fn raw_items(&self) -> &BTreeSet<String> {
        &self.raw_items
    }

    pub fn is_raw(&self, item: &str) -> bool {
        !self.recipes.contains_key(item)
    }

    pub fn smelt_recipe_for_input(&self, input: &str) -> Option<&Recipe> {
        self.recipes.values().find(|r| r.kind == RecipeKind::Smelt && r.inputs[0].0 == input)
    }

    /// Longest chain of recipes from `item` down to raw items.
    pub fn depth(&self, item: &str) -> usize {
        match self.recipes.get(item) {
            None => 0,
            Some(r) => 1 + r.inputs.iter().map(|(i, _)| self.depth(i)).max().unwrap_or(0),
        }
    }

    /// Craft recipes whose inputs `inventory` fully covers, sorted by output.
    pub fn craftable(&self, inventory: &Inventory) -> Vec<String> {
        self.recipes
            .values()
            .filter(|r| r.kind == RecipeKind::Craft && r.inputs.iter().all(|(i, n)| inventory.count(i) >= *n))
            .map(|r| r.output.clone())
            .collect()
    }

    /// Raw items needed to make `quantity` of `item` from nothing, expanding
    /// only through items for which `expand` returns true.
    pub fn raw_bill<F>(&self, item: &str, quantity: u32, expand: F) -> Inventory
    where
        F: Fn(&str) -> bool,
    {
        let plan = self.plan_with(item, quantity, &Inventory::new(), &expand);
        plan.missing.iter().map(|(i, n)| (i.as_str(), *n)).collect()
    }

    pub fn compute_crafting_plan(&self, target: &str, quantity: u32, inventory: &Inventory) -> Result<CraftingPlan, RecipeError> {
        if !self.recipes.contains_key(target) {
            return Err(RecipeError::UnknownTarget(target.to_string()));
        }
        Ok(self.plan_with(target, quantity, inventory, &|_| true))
    }

    fn plan_with(&self, target: &str, quantity: u32, inventory: &Inventory, expand: &dyn Fn(&str) -> bool) -> CraftingPlan {
        let mut solver = Solver { book: self, work: inventory.clone(), plan: CraftingPlan::default(), expand };
        solver.need(target, quantity, true);
        let mut plan = solver.plan;
        plan.target = target.to_string();
        plan.quantity = quantity;
        plan.already_have = plan.steps.is_empty() && plan.missing.is_empty();
        plan
    }
}

struct Solver<'a> {
    book: &'a RecipeBook,
    work: Inventory,
    plan: CraftingPlan,
    expand: &'a dyn Fn(&str) -> bool,
}

impl Solver<'_> {
    fn need(&mut self, item: &str, n: u32, top: bool) {
        let used = n.min(self.work.count(item));
        self.work.remove(item, used).expect("bounded by count");
        let n = n - used;
        if n == 0 {
            return;
        }
        let recipe = match self.book.get(item) {
            Some(r) if top || (self.expand)(item) => r,
            _ => {
                match self.plan.missing.iter_mut().find(|(i, _)| i == item) {
                    Some(entry) => entry.1 += n,
                    None => self.plan.missing.push((item.to_string(), n)),
                }
                return;
            }
        };
        let times = n.div_ceil(recipe.count);
        for (input, k) in &recipe.inputs {
            self.need(input, k * times, false);
        }
        self.plan.steps.push(PlanStep {
            kind: recipe.kind,
            inputs: recipe.scaled_inputs(times),
            output: item.to_string(),
            produced: recipe.count * times,
            times,
        });
        self.work.add(item, recipe.count * times - n);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub kind: RecipeKind,
    pub inputs: Vec<(String, u32)>,
    pub output: String,
    pub produced: u32,
    /// How many times the recipe runs.
    pub times: u32,
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verb = match self.kind {
            RecipeKind::Craft => "Craft",
            RecipeKind::Smelt => "Smelt",
        };
        let ins: Vec<String> = self.inputs.iter().map(|(i, n)| format!("{n} {i}")).collect();
        write!(f, "{verb} {} -> {} {}", ins.join(" + "), self.produced, self.output)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CraftingPlan {
    pub target: String,
    pub quantity: u32,
    /// Raw items to acquire, in discovery order.
    pub missing: Vec<(String, u32)>,
    pub steps: Vec<PlanStep>,
    pub already_have: bool,
}

impl CraftingPlan {
    pub fn missing_inventory(&self) -> Inventory {
        self.missing.iter().map(|(i, n)| (i.as_str(), *n)).collect()
    }

    /// Text returned by the plan query.
    pub fn render(&self) -> String {
        if self.already_have {
            return format!("\nYou already have {} {} in your inventory.\n", self.quantity, self.target);
        }
        let mut out = String::new();
        if self.missing.is_empty() {
            out.push_str("\nYou have all items required to craft this item!\nHere's your crafting plan:\n\n");
        } else {
            out.push_str("\nYou are missing the following items:\n");
            for (item, n) in &self.missing {
                out.push_str(&format!("- {n} {item}\n"));
            }
            out.push_str("\nOnce you have these items, here's your crafting plan:\n\n");
        }
        for step in &self.steps {
            out.push_str(&format!("{step}\n"));
        }
        out
    }
}

fn station_kinds(station: Station) -> &'static [StationKind] {
    match station {
        Station::None => &[],
        Station::CraftingTable => &[StationKind::CraftingTable],
        // any smelting station will do for food
        Station::Furnace | Station::Smoker => &[StationKind::Furnace, StationKind::Smoker],
    }
}

/// Steps that bring `agent` within reach of `station` (nothing if already there).
fn approach(world: &WorldState, agent: &str, station: BlockPos) -> Result<Vec<Step>, RecipeError> {
    let from = world.agent(agent).ok_or_else(|| RecipeError::UnknownAgent(agent.to_string()))?.pos;
    if from.distance(station) <= INTERACTION_RADIUS {
        return Ok(Vec::new());
    }
    let path = world.path_near(from, station, INTERACTION_RADIUS).ok_or(RecipeError::Unreachable(station))?;
    Ok(vec![Step::walk(path, station, INTERACTION_RADIUS, None)])
}

/// Build the action for crafting `output_item` `times` times. All checks
/// that can fail are made here, so an error leaves the world untouched.
pub fn craft(world: &WorldState, book: &RecipeBook, agent: &str, output_item: &str, times: u32) -> Result<PendingAction, RecipeError> {
    let recipe = match book.get(output_item) {
        Some(r) if r.kind == RecipeKind::Craft => r,
        _ => return Err(RecipeError::UnknownRecipe(output_item.to_string())),
    };
    let body = world.agent(agent).ok_or_else(|| RecipeError::UnknownAgent(agent.to_string()))?;
    let times = times.max(1);
    let consume = recipe.scaled_inputs(times);
    if consume.iter().any(|(i, n)| body.inventory.count(i) < *n) {
        return Err(RecipeError::MissingResources { item: output_item.to_string(), requires: recipe.requirement_text() });
    }
    let mut steps = Vec::new();
    let mut station = None;
    if recipe.station != Station::None {
        let near = world.stations_near(body.pos, station_kinds(recipe.station), STATION_SEARCH_RANGE);
        let table = *near.first().ok_or(RecipeError::NoStationNearby)?;
        steps.extend(approach(world, agent, table)?);
        station = Some(table);
    }
    steps.push(Step::after(
        1,
        Effect::Transform(Transform {
            kind: TransformKind::Craft { item: output_item.to_string() },
            consume,
            produce: vec![(output_item.to_string(), recipe.count * times)],
            station,
            fuel: 0,
            shortfall_message: RecipeError::MissingResources {
                item: output_item.to_string(),
                requires: recipe.requirement_text(),
            }
            .to_string(),
        }),
    ));
    Ok(PendingAction::new("craftRecipe", steps))
}

/// Build the action for smelting `input_item` `times` times at the nearest
/// furnace or smoker holding enough fuel.
pub fn smelt(world: &WorldState, book: &RecipeBook, agent: &str, input_item: &str, times: u32) -> Result<PendingAction, RecipeError> {
    let recipe = book.smelt_recipe_for_input(input_item).ok_or_else(|| RecipeError::NotSmeltable(input_item.to_string()))?;
    let body = world.agent(agent).ok_or_else(|| RecipeError::UnknownAgent(agent.to_string()))?;
    let times = times.max(1);
    if body.inventory.count(input_item) < times {
        return Err(RecipeError::MissingItem(input_item.to_string()));
    }
    let near = world.stations_near(body.pos, station_kinds(recipe.station), STATION_SEARCH_RANGE);
    if near.is_empty() {
        return Err(RecipeError::NoFurnaceNearby);
    }
    let furnace = *near
        .iter()
        .find(|p| world.fuel(**p).unwrap_or(0) >= times)
        .ok_or(RecipeError::OutOfFuel)?;
    let mut steps = approach(world, agent, furnace)?;
    steps.push(Step::after(
        times,
        Effect::Transform(Transform {
            kind: TransformKind::Smelt {
                input: input_item.to_string(),
                output: recipe.output.clone(),
                produced: recipe.count * times,
            },
            consume: vec![(input_item.to_string(), times)],
            produce: vec![(recipe.output.clone(), recipe.count * times)],
            station: Some(furnace),
            fuel: times,
            shortfall_message: RecipeError::MissingItem(input_item.to_string()).to_string(),
        }),
    ));
    Ok(PendingAction::new("smeltItem", steps))
}
