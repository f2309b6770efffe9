//! Multi-tick actions: an ordered queue of walk, work and effect steps that
//! advance once per tick and produce one result message on completion.

use super::{materials, BlockPos, Completion, EntityKind, WorldError, WorldState, INTERACTION_RADIUS, SPEED};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Radius within which a walking agent sweeps up dropped items on arrival.
pub const PICKUP_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionResult {
    pub label: String,
    pub ok: bool,
    pub lines: Vec<String>,
}

impl ActionResult {
    pub fn message(&self) -> String {
        self.lines.join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TransformKind {
    Craft { item: String },
    Smelt { input: String, output: String, produced: u32 },
}

/// Pre-resolved craft or smelt: inputs and outputs are fixed at submission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub kind: TransformKind,
    pub consume: Vec<(String, u32)>,
    pub produce: Vec<(String, u32)>,
    pub station: Option<BlockPos>,
    pub fuel: u32,
    pub shortfall_message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Effect {
    Say(String),
    /// Place at the actor's own cell.
    PlaceHere { material: String },
    Break { pos: BlockPos, material: String },
    PickUp { radius: f64 },
    CollectNext { material: String, remaining: u32, range: u32 },
    AttackNext { kind: String, range: u32 },
    Kill { id: u64, kind: String },
    Transform(Transform),
    Give { to: String, item: String, count: u32 },
    ChestPut { pos: BlockPos, item: String, count: u32 },
    ChestTake { pos: BlockPos, item: String, count: u32 },
    ChestView { pos: BlockPos },
    Discard { item: String, count: u32 },
    ClearFurnace { pos: BlockPos },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Step {
    Walk {
        path: VecDeque<BlockPos>,
        goal: BlockPos,
        closeness: f64,
        arrive: Option<String>,
    },
    Work { remaining: u32, effect: Effect },
}

impl Step {
    pub fn walk(path: Vec<BlockPos>, goal: BlockPos, closeness: f64, arrive: Option<String>) -> Self {
        Step::Walk { path: path.into(), goal, closeness, arrive }
    }

    pub fn now(effect: Effect) -> Self {
        Step::Work { remaining: 0, effect }
    }

    pub fn after(ticks: u32, effect: Effect) -> Self {
        Step::Work { remaining: ticks, effect }
    }

    fn ticks(&self) -> u64 {
        match self {
            Step::Walk { path, .. } => path.len().div_ceil(SPEED) as u64,
            Step::Work { remaining, .. } => *remaining as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingAction {
    pub label: String,
    pub steps: VecDeque<Step>,
    pub lines: Vec<String>,
    pub tally: u32,
    pub failed: bool,
    pub cancelled: bool,
}

impl PendingAction {
    pub fn new(label: &str, steps: Vec<Step>) -> Self {
        Self {
            label: label.to_string(),
            steps: steps.into(),
            lines: Vec::new(),
            tally: 0,
            failed: false,
            cancelled: false,
        }
    }

    /// Ticks left if nothing replans or expands.
    pub fn remaining_ticks(&self) -> u64 {
        self.steps.iter().map(Step::ticks).sum()
    }

    fn finish(self) -> ActionResult {
        ActionResult { label: self.label, ok: !self.failed, lines: self.lines }
    }
}

impl WorldState {
    /// Attach an action to an idle agent. Zero-duration prefixes run at once;
    /// if nothing remains the result is returned immediately and the agent
    /// stays idle.
    pub fn submit(&mut self, agent: &str, action: PendingAction) -> Result<Option<ActionResult>, WorldError> {
        let body = self.agents.get(agent).ok_or_else(|| WorldError::UnknownAgent(agent.to_string()))?;
        if body.busy() {
            return Err(WorldError::AlreadyBusy(agent.to_string()));
        }
        let mut action = action;
        self.run_instant(agent, &mut action);
        if action.steps.is_empty() || action.failed {
            return Ok(Some(action.finish()));
        }
        self.agents.get_mut(agent).unwrap().action = Some(action);
        Ok(None)
    }

    /// Ask the agent's in-flight action to stop at the next tick boundary.
    pub fn cancel(&mut self, agent: &str) -> bool {
        match self.agents.get_mut(agent).and_then(|a| a.action.as_mut()) {
            Some(action) => {
                action.cancelled = true;
                true
            }
            None => false,
        }
    }

    /// Advance the clock by one tick, progressing every in-flight action in
    /// agent-name order.
    pub fn advance_tick(&mut self) -> Vec<Completion> {
        self.tick += 1;
        let mut done = Vec::new();
        let names: Vec<String> = self.agents.iter().filter(|(_, a)| a.busy()).map(|(n, _)| n.clone()).collect();
        for name in names {
            let mut action = self.agents.get_mut(&name).unwrap().action.take().unwrap();
            if action.cancelled {
                action.lines.push("Stopped.".to_string());
                action.failed = true;
                done.push(Completion { agent: name, result: action.finish() });
                continue;
            }
            self.run_tick(&name, &mut action);
            if action.steps.is_empty() || action.failed {
                done.push(Completion { agent: name, result: action.finish() });
            } else {
                self.agents.get_mut(&name).unwrap().action = Some(action);
            }
        }
        done
    }

    /// One tick of work for one agent: a single tick-consuming step advances,
    /// then zero-duration steps that follow it run too.
    fn run_tick(&mut self, agent: &str, action: &mut PendingAction) {
        let consumed = match action.steps.front_mut() {
            None => return,
            Some(Step::Work { remaining, .. }) if *remaining > 0 => {
                *remaining -= 1;
                true
            }
            Some(Step::Walk { path, .. }) if !path.is_empty() => {
                self.walk_tick(agent, action);
                true
            }
            _ => false,
        };
        let _ = consumed;
        self.run_instant(agent, action);
    }

    fn walk_tick(&mut self, agent: &str, action: &mut PendingAction) {
        let Some(Step::Walk { path, goal, closeness, .. }) = action.steps.front_mut() else { return };
        let (goal, closeness) = (*goal, *closeness);
        for _ in 0..SPEED {
            let Some(next) = path.front().copied() else { break };
            let cur = self.agents[agent].pos;
            if self.neighbours(cur).contains(&next) {
                path.pop_front();
                self.agents.get_mut(agent).unwrap().pos = next;
                continue;
            }
            match self.path_near(cur, goal, closeness) {
                Some(fresh) if !fresh.is_empty() => {
                    *path = fresh.into();
                    let step = path.pop_front().unwrap();
                    self.agents.get_mut(agent).unwrap().pos = step;
                }
                Some(_) => {
                    path.clear();
                    break;
                }
                None => {
                    action.lines.push(format!("Could not find a path to {goal}."));
                    action.failed = true;
                    return;
                }
            }
        }
    }

    /// Run steps that need no further ticks.
    fn run_instant(&mut self, agent: &str, action: &mut PendingAction) {
        while !action.failed {
            match action.steps.front() {
                Some(Step::Work { remaining: 0, .. }) => {
                    let Some(Step::Work { effect, .. }) = action.steps.pop_front() else { unreachable!() };
                    self.apply_effect(agent, effect, action);
                }
                Some(Step::Walk { path, .. }) if path.is_empty() => {
                    let Some(Step::Walk { goal, closeness, arrive, .. }) = action.steps.pop_front() else {
                        unreachable!()
                    };
                    let here = self.agents[agent].pos;
                    if here.distance(goal) > closeness + 1e-9 {
                        match self.path_near(here, goal, closeness) {
                            Some(fresh) if !fresh.is_empty() => {
                                action.steps.push_front(Step::walk(fresh, goal, closeness, arrive));
                                return;
                            }
                            _ => {
                                action.lines.push(format!("Could not find a path to {goal}."));
                                action.failed = true;
                                return;
                            }
                        }
                    }
                    if let Some(line) = arrive {
                        action.lines.push(line);
                    }
                    let picked = self.pick_up_drops(agent, PICKUP_RADIUS);
                    if picked > 0 {
                        action.lines.push(format!("Picked up {picked} items."));
                    }
                }
                _ => return,
            }
        }
    }

    fn fail(action: &mut PendingAction, msg: String) {
        action.lines.push(msg);
        action.failed = true;
    }

    fn apply_effect(&mut self, agent: &str, effect: Effect, action: &mut PendingAction) {
        match effect {
            Effect::Say(line) => action.lines.push(line),
            Effect::PlaceHere { material } => {
                let pos = self.agents[agent].pos;
                match self.set_block(pos, &material, agent) {
                    Ok(()) => action.lines.push(format!("Placed {material} at ({pos}).")),
                    Err(e) => Self::fail(action, e.to_string()),
                }
            }
            Effect::Break { pos, material } => {
                if self.material_at(pos) == material && self.set_block(pos, materials::AIR, agent).is_ok() {
                    action.tally += 1;
                }
            }
            Effect::PickUp { radius } => {
                let picked = self.pick_up_drops(agent, radius);
                if picked > 0 {
                    action.lines.push(format!("Picked up {picked} items."));
                }
            }
            Effect::CollectNext { material, remaining, range } => {
                let from = self.agents[agent].pos;
                let target = if remaining == 0 { None } else { self.nearest_block(from, &material, range) };
                let Some(pos) = target else {
                    if action.tally == 0 {
                        Self::fail(action, format!("No {material} nearby to collect."));
                    } else {
                        action.lines.push(format!("Collected {} {material}.", action.tally));
                    }
                    return;
                };
                let Some(path) = self.path_near(from, pos, INTERACTION_RADIUS) else {
                    if action.tally == 0 {
                        Self::fail(action, format!("Could not find a path to {pos}."));
                    } else {
                        action.lines.push(format!("Collected {} {material}.", action.tally));
                    }
                    return;
                };
                let arrive = format!("You have reached at {}.", path.last().copied().unwrap_or(from));
                let steps = [
                    Step::walk(path, pos, INTERACTION_RADIUS, Some(arrive)),
                    Step::after(1, Effect::Break { pos, material: material.clone() }),
                    Step::now(Effect::PickUp { radius: INTERACTION_RADIUS }),
                    Step::now(Effect::CollectNext { material, remaining: remaining - 1, range }),
                ];
                for s in steps.into_iter().rev() {
                    action.steps.push_front(s);
                }
            }
            Effect::AttackNext { kind, range } => {
                let from = self.agents[agent].pos;
                let Some(entity) = self.nearest_livestock(from, &kind, range) else {
                    Self::fail(action, format!("Could not find any {kind} to attack."));
                    return;
                };
                let (id, pos) = (entity.id, entity.pos);
                let Some(path) = self.path_near(from, pos, INTERACTION_RADIUS) else {
                    Self::fail(action, format!("Could not find a path to {pos}."));
                    return;
                };
                action.steps.push_front(Step::now(Effect::PickUp { radius: INTERACTION_RADIUS }));
                action.steps.push_front(Step::after(1, Effect::Kill { id, kind }));
                action.steps.push_front(Step::walk(path, pos, INTERACTION_RADIUS, None));
            }
            Effect::Kill { id, kind } => {
                let here = self.agents[agent].pos;
                let alive = self.entities.iter().any(|e| e.id == id && e.pos.distance(here) <= INTERACTION_RADIUS + 1e-9);
                if !alive {
                    Self::fail(action, format!("The {kind} got away."));
                    return;
                }
                let entity = self.take_entity(id).unwrap();
                if let Some(drop) = materials::livestock_drop(&kind) {
                    self.spawn_drop(entity.pos, drop, 1);
                }
                action.lines.push(format!("Successfully killed {kind}."));
            }
            Effect::Transform(t) => self.apply_transform(agent, t, action),
            Effect::Give { to, item, count } => self.apply_give(agent, &to, &item, count, action),
            Effect::ChestPut { pos, item, count } => {
                if !self.station_in_reach(agent, pos) {
                    Self::fail(action, "Could not reach the chest.".to_string());
                    return;
                }
                let have = self.agents[agent].inventory.count(&item);
                if have < count {
                    Self::fail(action, format!("You do not have {count} {item} to put in the chest."));
                    return;
                }
                self.agents.get_mut(agent).unwrap().inventory.remove(&item, count).unwrap();
                self.chest_contents.entry(pos).or_default().add(&item, count);
                action.lines.push(format!("Successfully put {count} {item} in the chest."));
            }
            Effect::ChestTake { pos, item, count } => {
                if !self.station_in_reach(agent, pos) {
                    Self::fail(action, "Could not reach the chest.".to_string());
                    return;
                }
                let chest = self.chest_contents.entry(pos).or_default();
                let n = count.min(chest.count(&item));
                if n == 0 {
                    Self::fail(action, format!("Could not find {item} in the chest."));
                    return;
                }
                chest.remove(&item, n).unwrap();
                self.agents.get_mut(agent).unwrap().inventory.add(&item, n);
                action.lines.push(format!("Successfully took {n} {item} from the chest."));
            }
            Effect::ChestView { pos } => {
                let contents = self.chest_contents.get(&pos).cloned().unwrap_or_default();
                if contents.is_empty() {
                    action.lines.push("The chest is empty.".to_string());
                } else {
                    action.lines.push("Chest contents:".to_string());
                    for (item, n) in contents.iter() {
                        action.lines.push(format!("{item}: {n}"));
                    }
                }
            }
            Effect::Discard { item, count } => {
                let have = self.agents[agent].inventory.count(&item);
                let n = count.min(have);
                if n == 0 {
                    Self::fail(action, format!("You do not have any {item} to discard."));
                    return;
                }
                self.agents.get_mut(agent).unwrap().inventory.remove(&item, n).unwrap();
                let pos = self.agents[agent].pos;
                self.spawn_drop(pos, &item, n);
                action.lines.push(format!("Discarded {n} {item}."));
            }
            Effect::ClearFurnace { pos } => {
                if !self.station_in_reach(agent, pos) {
                    Self::fail(action, "Could not reach the furnace.".to_string());
                    return;
                }
                action.lines.push("The furnace is already empty.".to_string());
            }
        }
    }

    fn station_in_reach(&self, agent: &str, pos: BlockPos) -> bool {
        self.grid.get(&pos).and_then(|b| b.station).is_some()
            && self.agents[agent].pos.distance(pos) <= INTERACTION_RADIUS + 1e-9
    }

    fn apply_transform(&mut self, agent: &str, t: Transform, action: &mut PendingAction) {
        if let Some(station) = t.station {
            if !self.station_in_reach(agent, station) {
                Self::fail(action, "Could not reach the station.".to_string());
                return;
            }
            if t.fuel > 0 && self.furnace_fuel.get(&station).copied().unwrap_or(0) < t.fuel {
                Self::fail(action, "The furnace is out of fuel.".to_string());
                return;
            }
        }
        let inv = &mut self.agents.get_mut(agent).unwrap().inventory;
        if inv.remove_all(&t.consume).is_err() {
            Self::fail(action, t.shortfall_message);
            return;
        }
        for (item, n) in &t.produce {
            inv.add(item, *n);
        }
        let line = match &t.kind {
            TransformKind::Craft { item } => {
                format!("Successfully crafted {item}, you now have {} {item}.", inv.count(item))
            }
            TransformKind::Smelt { input, output, produced } => {
                format!("Successfully smelted {input}, got {produced} {output}.")
            }
        };
        if let (Some(station), true) = (t.station, t.fuel > 0) {
            *self.furnace_fuel.get_mut(&station).unwrap() -= t.fuel;
        }
        action.lines.push(line);
    }

    fn apply_give(&mut self, agent: &str, to: &str, item: &str, count: u32, action: &mut PendingAction) {
        let have = self.agents[agent].inventory.count(item);
        if have < count {
            Self::fail(action, format!("You do not have {count} {item} to give."));
            return;
        }
        let here = self.agents[agent].pos;
        self.agents.get_mut(agent).unwrap().inventory.remove(item, count).unwrap();
        action.lines.push(format!("Discarded {count} {item}."));
        let receiver_near = self
            .agents
            .get(to)
            .map(|r| r.pos.distance(here) <= INTERACTION_RADIUS + 1e-9)
            .unwrap_or(false);
        if receiver_near {
            self.agents.get_mut(to).unwrap().inventory.add(item, count);
            action.lines.push(format!("{to} received {item}."));
        } else {
            self.spawn_drop(here, item, count);
            Self::fail(action, format!("Failed to give {item} to {to}, it was never received."));
        }
    }

    /// Nearest block of `material` within `range` (Euclidean) by grid
    /// distance, ties broken by position.
    pub fn nearest_block(&self, from: BlockPos, material: &str, range: u32) -> Option<BlockPos> {
        let r2 = (range as i64) * (range as i64);
        self.grid
            .iter()
            .filter(|(p, b)| b.material == material && !b.upper && p.distance_sq(from) <= r2)
            .map(|(p, _)| (p.grid_distance(from), *p))
            .min()
            .map(|(_, p)| p)
    }

    pub fn nearest_livestock(&self, from: BlockPos, kind: &str, range: u32) -> Option<&super::Entity> {
        let r2 = (range as i64) * (range as i64);
        self.entities
            .iter()
            .filter(|e| matches!(&e.kind, EntityKind::Livestock(k) if k == kind) && e.pos.distance_sq(from) <= r2)
            .min_by_key(|e| (e.pos.grid_distance(from), e.pos, e.id))
    }
}
