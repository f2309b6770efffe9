//! Command dispatch against the world, recipe book, conversations and
//! blueprint.

use super::{registry, render_command_docs, validate, Command};
use crate::conversation::{Conversations, StartOutcome};
use crate::recipes::{self, RecipeBook, STATION_SEARCH_RANGE};
use crate::task::Blueprint;
use crate::world::action::Effect;
use crate::world::materials::{self, GROUND};
use crate::world::{ActionResult, BlockPos, PendingAction, StationKind, Step, WorldState, INTERACTION_RADIUS};

/// Radius of the nearbyBlocks and entities queries.
pub const NEARBY_RADIUS: u32 = 16;
/// Range used by collectBlocks and attack, which take no range argument.
pub const DEFAULT_SEARCH_RANGE: u32 = 64;
const MAX_COUNT: f64 = 10_000.0;

pub struct CommandContext<'a> {
    pub world: &'a mut WorldState,
    pub book: &'a RecipeBook,
    pub conversations: &'a mut Conversations,
    pub blueprint: Option<&'a Blueprint>,
    /// Whether the actor may call getCraftingPlan.
    pub plan_access: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub ok: bool,
    /// Text shown to the actor; `None` for commands that answer silently.
    pub message: Option<String>,
}

impl CommandResult {
    fn ok(msg: impl Into<String>) -> Self {
        CommandResult { ok: true, message: Some(msg.into()) }
    }

    fn err(msg: impl Into<String>) -> Self {
        CommandResult { ok: false, message: Some(msg.into()) }
    }

    fn silent() -> Self {
        CommandResult { ok: true, message: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Done(CommandResult),
    /// The action runs over later ticks; its result arrives as a completion.
    Pending,
}

pub fn action_output(result: &ActionResult) -> String {
    format!("Code output:\n{}\n", result.message())
}

fn code(msg: impl std::fmt::Display) -> String {
    format!("Code output:\n{msg}\n")
}

fn fail(msg: impl std::fmt::Display) -> Outcome {
    Outcome::Done(CommandResult::err(code(msg)))
}

fn count_arg(cmd: &Command, i: usize) -> Result<u32, Outcome> {
    let n = cmd.num_arg(i);
    if n.fract() != 0.0 || !(1.0..=MAX_COUNT).contains(&n) {
        let name = super::spec_for(&cmd.name).map(|s| s.params[i].name).unwrap_or("num");
        return Err(fail(format!("{name} must be a whole number from 1 to {MAX_COUNT}.")));
    }
    Ok(n as u32)
}

fn submit(world: &mut WorldState, actor: &str, action: PendingAction) -> Outcome {
    match world.submit(actor, action) {
        Ok(Some(result)) => Outcome::Done(CommandResult { ok: result.ok, message: Some(action_output(&result)) }),
        Ok(None) => Outcome::Pending,
        Err(e) => fail(e),
    }
}

/// Run one validated command for `actor`. Every error path leaves the world
/// unchanged.
pub fn execute(ctx: &mut CommandContext, actor: &str, cmd: &Command) -> Outcome {
    if let Err(e) = validate(cmd) {
        return Outcome::Done(CommandResult::err(e.to_string()));
    }
    let Some(me) = ctx.world.agent(actor) else {
        return Outcome::Done(CommandResult::err(format!("Unknown agent {actor}.")));
    };
    let me = me.clone();
    let here = me.pos;
    let world = &mut *ctx.world;
    let result = match cmd.name.as_str() {
        "stats" => {
            let doing = me.action.as_ref().map(|a| a.label.as_str()).unwrap_or("Idle");
            CommandResult::ok(format!(
                "\nSTATS\n- Position: x: {}, y: {}, z: {}\n- Biome: {}\n- Current action: {doing}\n",
                here.x, here.y, here.z, world.biome
            ))
        }
        "inventory" => CommandResult::ok(me.inventory.render()),
        "nearbyBlocks" => {
            let obs = world.scan_nearby(actor, NEARBY_RADIUS);
            let mut seen: Vec<&str> = Vec::new();
            for s in &obs.blocks {
                if !seen.contains(&s.label.as_str()) {
                    seen.push(&s.label);
                }
            }
            if !seen.contains(&GROUND) {
                seen.push(GROUND);
            }
            let mut out = String::from("\nNEARBY_BLOCKS\n");
            for b in seen {
                out.push_str(&format!("- {b}\n"));
            }
            CommandResult::ok(out)
        }
        "craftable" => {
            let items = ctx.book.craftable(&me.inventory);
            if items.is_empty() {
                CommandResult::ok("\nCRAFTABLE_ITEMS: none\n")
            } else {
                let list: String = items.iter().map(|i| format!("- {i}\n")).collect();
                CommandResult::ok(format!("\nCRAFTABLE_ITEMS\n{list}"))
            }
        }
        "entities" => {
            let obs = world.scan_nearby(actor, NEARBY_RADIUS);
            let mut lines: Vec<String> = obs.agents.iter().map(|s| format!("- player: {}\n", s.label)).collect();
            lines.extend(obs.entities.iter().map(|s| format!("- {}\n", s.label)));
            if lines.is_empty() {
                CommandResult::ok("\nNEARBY_ENTITIES: none\n")
            } else {
                CommandResult::ok(format!("\nNEARBY_ENTITIES\n{}", lines.concat()))
            }
        }
        "savedPlaces" => {
            if me.saved_places.is_empty() {
                CommandResult::ok("No places saved.")
            } else {
                let names: Vec<&str> = me.saved_places.keys().map(String::as_str).collect();
                CommandResult::ok(format!("Saved place names: {}", names.join(", ")))
            }
        }
        "getCraftingPlan" => {
            if !ctx.plan_access {
                return Outcome::Done(CommandResult::err("You do not have access to crafting plans in this task."));
            }
            let qty = match count_arg(cmd, 1) {
                Ok(q) => q,
                Err(o) => return o,
            };
            match ctx.book.compute_crafting_plan(cmd.str_arg(0), qty, &me.inventory) {
                Ok(plan) => CommandResult::ok(plan.render()),
                Err(e) => CommandResult::err(e.to_string()),
            }
        }
        "help" => CommandResult::ok(render_command_docs(registry())),
        "stop" => {
            if world.cancel(actor) {
                CommandResult::ok(code("Stopping the current action."))
            } else {
                CommandResult::ok(code("Nothing to stop."))
            }
        }
        "goToPlayer" => {
            let name = cmd.str_arg(0);
            let closeness = cmd.num_arg(1).max(0.0);
            let Some(target) = world.agent(name).map(|a| a.pos) else {
                return fail(format!("Could not find player {name}."));
            };
            if name == actor {
                return fail("You are already there.");
            }
            let Some(path) = world.path_near(here, target, closeness) else {
                return fail(format!("Could not find a path to {target}."));
            };
            let arrive = format!("You have reached {name}.");
            return submit(world, actor, PendingAction::new("goToPlayer", vec![Step::walk(path, target, closeness, Some(arrive))]));
        }
        "goToCoordinates" => {
            let coords = [cmd.num_arg(0), cmd.num_arg(1), cmd.num_arg(2)];
            if coords.iter().any(|c| c.fract() != 0.0 || c.abs() > 1e6) {
                return fail("Coordinates must be whole numbers.");
            }
            let to = BlockPos::new(coords[0] as i32, coords[1] as i32, coords[2] as i32);
            let closeness = cmd.num_arg(3).max(0.0);
            let Some(path) = world.path_near(here, to, closeness) else {
                return fail(format!("Could not find a path to {to}."));
            };
            let end = path.last().copied().unwrap_or(here);
            let arrive = format!("You have reached at {end}.");
            return submit(world, actor, PendingAction::new("goToCoordinates", vec![Step::walk(path, to, closeness, Some(arrive))]));
        }
        "searchForBlock" => {
            let kind = cmd.str_arg(0);
            let range = cmd.num_arg(1);
            if !(1.0..=512.0).contains(&range) {
                return fail("search_range must be between 1 and 512.");
            }
            let range = range as u32;
            let Some(pos) = world.nearest_block(here, kind, range) else {
                return fail(format!("Could not find any {kind} in {range} blocks."));
            };
            let closeness = if materials::is_passable(kind) { 0.0 } else { 1.0 };
            let Some(path) = world.path_near(here, pos, closeness) else {
                return fail(format!("Could not find a path to {pos}."));
            };
            let end = path.last().copied().unwrap_or(here);
            return submit(
                world,
                actor,
                PendingAction::new(
                    "searchForBlock",
                    vec![
                        Step::now(Effect::Say(format!("Found {kind} at ({pos})."))),
                        Step::walk(path, pos, closeness, Some(format!("You have reached at {end}."))),
                    ],
                ),
            );
        }
        "rememberHere" => {
            let name = cmd.str_arg(0).trim().to_string();
            if name.is_empty() {
                return fail("A place needs a name.");
            }
            world.agent_mut(actor).unwrap().saved_places.insert(name.clone(), here);
            CommandResult::ok(code(format!("Saved location {name} at ({here}).")))
        }
        "goToRememberedPlace" => {
            let name = cmd.str_arg(0);
            let Some(to) = me.saved_places.get(name).copied() else {
                return fail(format!("No location named {name} saved."));
            };
            let Some(path) = world.path_near(here, to, 0.0) else {
                return fail(format!("Could not find a path to {to}."));
            };
            let arrive = format!("You have reached {name}.");
            return submit(world, actor, PendingAction::new("goToRememberedPlace", vec![Step::walk(path, to, 0.0, Some(arrive))]));
        }
        "givePlayer" => {
            let (to, item) = (cmd.str_arg(0), cmd.str_arg(1));
            let n = match count_arg(cmd, 2) {
                Ok(n) => n,
                Err(o) => return o,
            };
            if to == actor {
                return fail("You cannot give items to yourself.");
            }
            let Some(target) = world.agent(to).map(|a| a.pos) else {
                return fail(format!("Could not find player {to}."));
            };
            if me.inventory.count(item) < n {
                return fail(format!("You do not have {n} {item} to give."));
            }
            let mut steps = Vec::new();
            if here.distance(target) > INTERACTION_RADIUS {
                let Some(path) = world.path_near(here, target, INTERACTION_RADIUS) else {
                    return fail(format!("Could not find a path to {to}."));
                };
                steps.push(Step::walk(path, target, INTERACTION_RADIUS, Some(format!("You have reached {to}."))));
            } else {
                steps.push(Step::now(Effect::Say(format!("You have reached {to}."))));
            }
            steps.push(Step::after(1, Effect::Give { to: to.to_string(), item: item.to_string(), count: n }));
            return submit(world, actor, PendingAction::new("givePlayer", steps));
        }
        "putInChest" | "takeFromChest" | "viewChest" => {
            let Some(chest) = world.stations_near(here, &[StationKind::Chest], STATION_SEARCH_RANGE).first().copied() else {
                return fail("Could not find a chest nearby.");
            };
            let effect = match cmd.name.as_str() {
                "viewChest" => Effect::ChestView { pos: chest },
                name => {
                    let item = cmd.str_arg(0).to_string();
                    let count = match count_arg(cmd, 1) {
                        Ok(n) => n,
                        Err(o) => return o,
                    };
                    if name == "putInChest" {
                        if me.inventory.count(&item) < count {
                            return fail(format!("You do not have {count} {item} to put in the chest."));
                        }
                        Effect::ChestPut { pos: chest, item, count }
                    } else {
                        Effect::ChestTake { pos: chest, item, count }
                    }
                }
            };
            let mut steps = approach(world, here, chest);
            steps.push(Step::after(1, effect));
            return submit(world, actor, PendingAction::new(&cmd.name, steps));
        }
        "discard" => {
            let item = cmd.str_arg(0).to_string();
            let count = match count_arg(cmd, 1) {
                Ok(n) => n,
                Err(o) => return o,
            };
            if me.inventory.count(&item) == 0 {
                return fail(format!("You do not have any {item} to discard."));
            }
            return submit(world, actor, PendingAction::new("discard", vec![Step::now(Effect::Discard { item, count })]));
        }
        "collectBlocks" => {
            let asked = cmd.str_arg(0);
            let material = materials::crop_block_for(asked).unwrap_or(asked).to_string();
            let count = match count_arg(cmd, 1) {
                Ok(n) => n,
                Err(o) => return o,
            };
            if materials::block_drop(&material).is_none() || materials::is_unbreakable(&material) {
                return fail(format!("Invalid block type: {asked}."));
            }
            if !me.capabilities.allows(&material) {
                return fail(format!("You lack the capability to handle {material} blocks."));
            }
            if world.nearest_block(here, &material, DEFAULT_SEARCH_RANGE).is_none() {
                return fail(format!("No {material} nearby to collect."));
            }
            let effect = Effect::CollectNext { material, remaining: count, range: DEFAULT_SEARCH_RANGE };
            return submit(world, actor, PendingAction::new("collectBlocks", vec![Step::now(effect)]));
        }
        "craftRecipe" => {
            let times = match count_arg(cmd, 1) {
                Ok(n) => n,
                Err(o) => return o,
            };
            return match recipes::craft(world, ctx.book, actor, cmd.str_arg(0), times) {
                Ok(action) => submit(world, actor, action),
                Err(e) => fail(e),
            };
        }
        "smeltItem" => {
            let times = match count_arg(cmd, 1) {
                Ok(n) => n,
                Err(o) => return o,
            };
            return match recipes::smelt(world, ctx.book, actor, cmd.str_arg(0), times) {
                Ok(action) => submit(world, actor, action),
                Err(e) => fail(e),
            };
        }
        "clearFurnace" => {
            let kinds = [StationKind::Furnace, StationKind::Smoker];
            let Some(furnace) = world.stations_near(here, &kinds, STATION_SEARCH_RANGE).first().copied() else {
                return fail("There is no furnace nearby.");
            };
            let mut steps = approach(world, here, furnace);
            steps.push(Step::after(1, Effect::ClearFurnace { pos: furnace }));
            return submit(world, actor, PendingAction::new("clearFurnace", steps));
        }
        "placeHere" => {
            let material = cmd.str_arg(0).to_string();
            if materials::block_for_item(&material).is_none() {
                return fail(format!("Cannot place {material}: it is not a block."));
            }
            if me.inventory.count(&material) == 0 {
                return fail(format!("Don't have any {material} to place."));
            }
            if !me.capabilities.allows(&material) {
                return fail(format!("You lack the capability to handle {material} blocks."));
            }
            return submit(world, actor, PendingAction::new("placeHere", vec![Step::after(1, Effect::PlaceHere { material })]));
        }
        "attack" => {
            let kind = cmd.str_arg(0).to_string();
            if materials::livestock_drop(&kind).is_none() {
                return fail(format!("{kind} is not an animal you can hunt."));
            }
            if world.nearest_livestock(here, &kind, DEFAULT_SEARCH_RANGE).is_none() {
                return fail(format!("Could not find any {kind} to attack."));
            }
            let effect = Effect::AttackNext { kind, range: DEFAULT_SEARCH_RANGE };
            return submit(world, actor, PendingAction::new("attack", vec![Step::now(effect)]));
        }
        "startConversation" => {
            let tick = world.tick();
            match ctx.conversations.start(actor, cmd.str_arg(0), cmd.str_arg(1), tick) {
                Ok(StartOutcome::Started) => CommandResult::silent(),
                Ok(StartOutcome::AlreadyConversing(notice)) => CommandResult::ok(notice),
                Err(e) => CommandResult::err(e.to_string()),
            }
        }
        "endConversation" => {
            let tick = world.tick();
            match ctx.conversations.end(actor, cmd.str_arg(0), cmd.opt_str(1), tick) {
                Ok(()) => CommandResult::silent(),
                Err(e) => CommandResult::err(e.to_string()),
            }
        }
        "checkBlueprintLevel" | "checkBlueprint" | "getBlueprint" | "getBlueprintLevel" => {
            let Some(bp) = ctx.blueprint else {
                return Outcome::Done(CommandResult::err("There is no blueprint for this task."));
            };
            let level = || {
                let n = cmd.num_arg(0);
                if n.fract() != 0.0 || n < 0.0 {
                    None
                } else {
                    Some(n as usize)
                }
            };
            let text = match cmd.name.as_str() {
                "checkBlueprint" => Ok(bp.report(world)),
                "getBlueprint" => Ok(bp.render()),
                "checkBlueprintLevel" => match level() {
                    Some(l) => bp.level_report(world, l),
                    None => Ok(format!("Level {} does not exist.", cmd.num_arg(0))),
                },
                _ => match level() {
                    Some(l) => bp.render_level(l),
                    None => Ok(format!("Level {} does not exist.", cmd.num_arg(0))),
                },
            };
            match text {
                Ok(t) => CommandResult::ok(t),
                Err(e) => CommandResult::err(e.to_string()),
            }
        }
        other => CommandResult::err(format!("Command !{other} does not exist. {}", super::HELP_HINT)),
    };
    Outcome::Done(result)
}

fn approach(world: &WorldState, here: BlockPos, station: BlockPos) -> Vec<Step> {
    if here.distance(station) <= INTERACTION_RADIUS {
        return Vec::new();
    }
    match world.path_near(here, station, INTERACTION_RADIUS) {
        Some(path) => vec![Step::walk(path, station, INTERACTION_RADIUS, None)],
        // the effect itself reports the station as out of reach
        None => Vec::new(),
    }
}
