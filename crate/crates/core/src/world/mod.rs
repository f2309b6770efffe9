//! Deterministic tick-based voxel world.
//!
//! The world owns blocks, agents, inventories, stations and entities. All
//! mutation goes through [`WorldState::submit`] (multi-tick actions) or the
//! immediate primitives such as [`WorldState::set_block`]; observation
//! queries take `&self` and never mutate.

pub mod action;
pub mod materials;
mod path;
pub mod provision;

use crate::canonical::{canonical_hash, pairs};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

pub use action::{ActionResult, Effect, PendingAction, Step};
pub use path::MAX_DROP;
pub use provision::{spawn_world_from_spec, ProvisionSpec, WorldKind};

/// Blocks travelled per tick.
pub const SPEED: usize = 2;
/// Simulated seconds are converted to ticks at this rate (one tick = 100 ms).
pub const TICKS_PER_SECOND: u64 = 10;
/// Reach for placing, collecting, trading and station use.
pub const INTERACTION_RADIUS: f64 = 3.0;
/// Smelt charges held by a fully fuelled furnace or smoker.
pub const FULL_FUEL: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockPos {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl BlockPos {
    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Self { x, y, z }
    }

    pub fn offset(self, dx: i32, dy: i32, dz: i32) -> Self {
        Self::new(self.x + dx, self.y + dy, self.z + dz)
    }

    pub fn below(self) -> Self {
        self.offset(0, -1, 0)
    }

    pub fn above(self) -> Self {
        self.offset(0, 1, 0)
    }

    pub fn distance_sq(self, other: BlockPos) -> i64 {
        let dx = (self.x - other.x) as i64;
        let dy = (self.y - other.y) as i64;
        let dz = (self.z - other.z) as i64;
        dx * dx + dy * dy + dz * dz
    }

    pub fn distance(self, other: BlockPos) -> f64 {
        (self.distance_sq(other) as f64).sqrt()
    }

    /// Grid (Manhattan) distance.
    pub fn grid_distance(self, other: BlockPos) -> i64 {
        ((self.x - other.x).abs() + (self.y - other.y).abs() + (self.z - other.z).abs()) as i64
    }
}

impl fmt::Display for BlockPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, {}, {}", self.x, self.y, self.z)
    }
}

/// Axis-aligned region agents and blocks live in. Everything below
/// `ground_y` is solid, unbreakable ground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub min_x: i32,
    pub max_x: i32,
    pub min_z: i32,
    pub max_z: i32,
    pub ground_y: i32,
    pub height: i32,
}

impl Bounds {
    /// Square region of half-width `half_extent` centred on `center`, with the
    /// standing surface at `center.y`.
    pub fn around(center: BlockPos, half_extent: i32, height: i32) -> Self {
        Self {
            min_x: center.x - half_extent,
            max_x: center.x + half_extent,
            min_z: center.z - half_extent,
            max_z: center.z + half_extent,
            ground_y: center.y,
            height,
        }
    }

    pub fn contains(&self, p: BlockPos) -> bool {
        p.x >= self.min_x
            && p.x <= self.max_x
            && p.z >= self.min_z
            && p.z <= self.max_z
            && p.y >= self.ground_y
            && p.y < self.ground_y + self.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StationKind {
    CraftingTable,
    Furnace,
    Smoker,
    Chest,
}

impl StationKind {
    pub fn label(self) -> &'static str {
        match self {
            StationKind::CraftingTable => "crafting table",
            StationKind::Furnace => "furnace",
            StationKind::Smoker => "smoker",
            StationKind::Chest => "chest",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub material: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub station: Option<StationKind>,
    /// Upper half of a two-cell door.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub upper: bool,
}

impl Block {
    pub fn new(material: &str) -> Self {
        Self {
            material: material.to_string(),
            station: materials::station_for(material),
            upper: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemStack {
    pub item: String,
    pub count: u32,
}

impl ItemStack {
    pub fn new(item: &str, count: u32) -> Self {
        Self { item: item.to_string(), count }
    }
}

/// Item counts keyed by item identifier. Zero counts are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Inventory(BTreeMap<String, u32>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("have {have} {item}, need {need}")]
pub struct Shortfall {
    pub item: String,
    pub have: u32,
    pub need: u32,
}

impl Inventory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self, item: &str) -> u32 {
        self.0.get(item).copied().unwrap_or(0)
    }

    pub fn add(&mut self, item: &str, n: u32) {
        if n == 0 {
            return;
        }
        *self.0.entry(item.to_string()).or_insert(0) += n;
    }

    pub fn remove(&mut self, item: &str, n: u32) -> Result<(), Shortfall> {
        let have = self.count(item);
        if have < n {
            return Err(Shortfall { item: item.to_string(), have, need: n });
        }
        if have == n {
            self.0.remove(item);
        } else {
            self.0.insert(item.to_string(), have - n);
        }
        Ok(())
    }

    /// Remove every stack listed, or nothing at all.
    pub fn remove_all(&mut self, items: &[(String, u32)]) -> Result<(), Shortfall> {
        let mut need: BTreeMap<&str, u32> = BTreeMap::new();
        for (item, n) in items {
            *need.entry(item.as_str()).or_insert(0) += n;
        }
        if let Some((item, n)) = need.iter().find(|(item, n)| self.count(item) < **n) {
            return Err(Shortfall { item: item.to_string(), have: self.count(item), need: *n });
        }
        for (item, n) in need {
            self.remove(item, n).expect("checked above");
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &Inventory) {
        for (item, n) in other.iter() {
            self.add(item, n);
        }
    }

    pub fn covers(&self, other: &Inventory) -> bool {
        other.iter().all(|(item, n)| self.count(item) >= n)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u64 {
        self.0.values().map(|&n| n as u64).sum()
    }

    /// Observation text returned by the inventory query.
    pub fn render(&self) -> String {
        if self.is_empty() {
            return "\nINVENTORY: Nothing\nWEARING: Nothing\n".to_string();
        }
        let mut out = String::from("\nINVENTORY\n");
        for (item, n) in self.iter() {
            out.push_str(&format!("- {item}: {n}\n"));
        }
        out.push_str("WEARING: Nothing\n");
        out
    }
}

impl<S: AsRef<str>> FromIterator<(S, u32)> for Inventory {
    fn from_iter<I: IntoIterator<Item = (S, u32)>>(iter: I) -> Self {
        let mut inv = Inventory::new();
        for (item, n) in iter {
            inv.add(item.as_ref(), n);
        }
        inv
    }
}

/// Material classes an agent may place or remove.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capabilities {
    All,
    Only(BTreeSet<String>),
}

impl Capabilities {
    pub fn only<I, S>(materials: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Capabilities::Only(materials.into_iter().map(Into::into).collect())
    }

    pub fn allows(&self, material: &str) -> bool {
        match self {
            Capabilities::All => true,
            Capabilities::Only(set) => set.contains(material),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentBody {
    pub name: String,
    pub pos: BlockPos,
    pub inventory: Inventory,
    pub capabilities: Capabilities,
    #[serde(default)]
    pub action: Option<PendingAction>,
    #[serde(default, with = "pairs")]
    pub saved_places: BTreeMap<String, BlockPos>,
}

impl AgentBody {
    pub fn new(name: &str, pos: BlockPos) -> Self {
        Self {
            name: name.to_string(),
            pos,
            inventory: Inventory::new(),
            capabilities: Capabilities::All,
            action: None,
            saved_places: BTreeMap::new(),
        }
    }

    pub fn busy(&self) -> bool {
        self.action.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "name")]
pub enum EntityKind {
    Livestock(String),
    DroppedItem,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: u64,
    pub kind: EntityKind,
    pub pos: BlockPos,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<ItemStack>,
}

impl Entity {
    pub fn label(&self) -> String {
        match (&self.kind, &self.payload) {
            (EntityKind::Livestock(kind), _) => kind.clone(),
            (EntityKind::DroppedItem, Some(stack)) => format!("item: {} x{}", stack.item, stack.count),
            (EntityKind::DroppedItem, None) => "item".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorldError {
    #[error("Unknown agent {0}.")]
    UnknownAgent(String),
    #[error("{0} is already busy with another action.")]
    AlreadyBusy(String),
    #[error("Position {0} is out of range.")]
    OutOfRange(BlockPos),
    #[error("Position {0} is outside the world.")]
    OutOfBounds(BlockPos),
    #[error("Don't have any {0} to place.")]
    MissingItem(String),
    #[error("You lack the capability to handle {0} blocks.")]
    CapabilityDenied(String),
    #[error("Cannot place {0}: it is not a block.")]
    NotPlaceable(String),
    #[error("Cannot place {material} at ({pos}): {reason}.")]
    Obstructed { material: String, pos: BlockPos, reason: String },
    #[error("Cannot break {0}.")]
    Unbreakable(String),
    #[error("There is no block at ({0}).")]
    NothingThere(BlockPos),
    #[error("Could not find a path to {0}.")]
    Unreachable(BlockPos),
}

/// One observed thing in a nearby scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sighting {
    pub distance_sq: i64,
    pub label: String,
    pub pos: BlockPos,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Observation {
    pub blocks: Vec<Sighting>,
    pub agents: Vec<Sighting>,
    pub entities: Vec<Sighting>,
}

/// A completed action, reported by [`WorldState::advance_tick`].
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub agent: String,
    pub result: ActionResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub biome: String,
    pub bounds: Bounds,
    #[serde(with = "pairs")]
    grid: BTreeMap<BlockPos, Block>,
    agents: BTreeMap<String, AgentBody>,
    entities: Vec<Entity>,
    #[serde(with = "pairs")]
    chest_contents: BTreeMap<BlockPos, Inventory>,
    #[serde(with = "pairs")]
    furnace_fuel: BTreeMap<BlockPos, u32>,
    tick: u64,
    rng_seed: u64,
    next_entity_id: u64,
}

impl WorldState {
    pub fn empty(bounds: Bounds, rng_seed: u64, biome: &str) -> Self {
        Self {
            biome: biome.to_string(),
            bounds,
            grid: BTreeMap::new(),
            agents: BTreeMap::new(),
            entities: Vec::new(),
            chest_contents: BTreeMap::new(),
            furnace_fuel: BTreeMap::new(),
            tick: 0,
            rng_seed,
            next_entity_id: 1,
        }
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn ground_level(&self) -> i32 {
        self.bounds.ground_y
    }

    // ---- blocks ---------------------------------------------------------

    pub fn block(&self, pos: BlockPos) -> Option<&Block> {
        self.grid.get(&pos)
    }

    pub fn material_at(&self, pos: BlockPos) -> &str {
        if pos.y < self.bounds.ground_y {
            return materials::GROUND;
        }
        self.grid.get(&pos).map(|b| b.material.as_str()).unwrap_or(materials::AIR)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (BlockPos, &Block)> {
        self.grid.iter().map(|(p, b)| (*p, b))
    }

    /// Unconditional block write used by provisioning, resets and tests.
    /// Writing a station initialises its chest or fuel slot.
    pub fn put_block(&mut self, pos: BlockPos, material: &str) {
        if material == materials::AIR {
            self.grid.remove(&pos);
            self.chest_contents.remove(&pos);
            self.furnace_fuel.remove(&pos);
            return;
        }
        let block = Block::new(material);
        match block.station {
            Some(StationKind::Chest) => {
                self.chest_contents.entry(pos).or_default();
            }
            Some(StationKind::Furnace) | Some(StationKind::Smoker) => {
                self.furnace_fuel.entry(pos).or_insert(0);
            }
            _ => {}
        }
        self.grid.insert(pos, block);
    }

    pub(crate) fn put_door_upper(&mut self, pos: BlockPos, material: &str) {
        let mut block = Block::new(material);
        block.upper = true;
        self.grid.insert(pos, block);
    }

    /// Place or remove a block on behalf of `actor`.
    ///
    /// Placing consumes one matching item (doors fill two cells for one
    /// item); removing drops the block's item as an entity at `pos`.
    pub fn set_block(&mut self, pos: BlockPos, material: &str, actor: &str) -> Result<(), WorldError> {
        let agent = self.agents.get(actor).ok_or_else(|| WorldError::UnknownAgent(actor.to_string()))?;
        if !self.bounds.contains(pos) {
            return Err(WorldError::OutOfBounds(pos));
        }
        if agent.pos.distance(pos) > INTERACTION_RADIUS {
            return Err(WorldError::OutOfRange(pos));
        }
        if material == materials::AIR {
            return self.remove_block(pos, actor);
        }
        let block_material =
            materials::block_for_item(material).ok_or_else(|| WorldError::NotPlaceable(material.to_string()))?;
        if agent.inventory.count(material) == 0 {
            return Err(WorldError::MissingItem(material.to_string()));
        }
        if !agent.capabilities.allows(material) {
            return Err(WorldError::CapabilityDenied(material.to_string()));
        }
        if self.material_at(pos) != materials::AIR {
            return Err(WorldError::Obstructed {
                material: material.to_string(),
                pos,
                reason: format!("{} is already there", self.material_at(pos)),
            });
        }
        if let Some(other) = self.agents.values().find(|a| a.pos == pos && a.name != actor) {
            return Err(WorldError::Obstructed {
                material: material.to_string(),
                pos,
                reason: format!("{} is standing there", other.name),
            });
        }
        let door = materials::is_door(block_material);
        if door && (!self.bounds.contains(pos.above()) || self.material_at(pos.above()) != materials::AIR) {
            return Err(WorldError::Obstructed {
                material: material.to_string(),
                pos,
                reason: "not enough room for a door".to_string(),
            });
        }
        let actor_here = self.agents[actor].pos == pos;
        if actor_here && materials::is_solid(block_material) {
            let up = pos.above();
            if !self.bounds.contains(up) || !materials::is_passable(self.material_at(up)) {
                return Err(WorldError::Obstructed {
                    material: material.to_string(),
                    pos,
                    reason: "no room to stand on top".to_string(),
                });
            }
        }

        self.agents.get_mut(actor).unwrap().inventory.remove(material, 1).expect("checked above");
        self.put_block(pos, block_material);
        if door {
            self.put_door_upper(pos.above(), block_material);
        }
        if actor_here && materials::is_solid(block_material) {
            self.agents.get_mut(actor).unwrap().pos = pos.above();
        }
        Ok(())
    }

    fn remove_block(&mut self, pos: BlockPos, actor: &str) -> Result<(), WorldError> {
        let block = self.grid.get(&pos).cloned().ok_or(WorldError::NothingThere(pos))?;
        if materials::is_unbreakable(&block.material) {
            return Err(WorldError::Unbreakable(block.material));
        }
        let agent = &self.agents[actor];
        if !agent.capabilities.allows(&block.material) {
            return Err(WorldError::CapabilityDenied(block.material));
        }
        let drop = materials::block_drop(&block.material).expect("breakable blocks drop").to_string();
        let (lower, upper) = if materials::is_door(&block.material) {
            if block.upper {
                (pos.below(), pos)
            } else {
                (pos, pos.above())
            }
        } else {
            (pos, pos)
        };
        self.grid.remove(&lower);
        if upper != lower && self.grid.get(&upper).map(|b| b.material == block.material).unwrap_or(false) {
            self.grid.remove(&upper);
        }
        self.spawn_drop(lower, &drop, 1);
        self.settle_agents();
        Ok(())
    }

    /// Drop agents that lost their support until they stand again.
    fn settle_agents(&mut self) {
        let names: Vec<String> = self.agents.keys().cloned().collect();
        for name in names {
            let mut pos = self.agents[&name].pos;
            while !self.is_standable(pos) && pos.y > self.bounds.ground_y {
                pos = pos.below();
            }
            self.agents.get_mut(&name).unwrap().pos = pos;
        }
    }

    // ---- stations ---------------------------------------------------------

    pub fn chest(&self, pos: BlockPos) -> Option<&Inventory> {
        self.chest_contents.get(&pos)
    }

    pub fn chest_mut(&mut self, pos: BlockPos) -> Option<&mut Inventory> {
        self.chest_contents.get_mut(&pos)
    }

    pub fn chests(&self) -> impl Iterator<Item = (BlockPos, &Inventory)> {
        self.chest_contents.iter().map(|(p, i)| (*p, i))
    }

    pub fn fuel(&self, pos: BlockPos) -> Option<u32> {
        self.furnace_fuel.get(&pos).copied()
    }

    pub fn set_fuel(&mut self, pos: BlockPos, charges: u32) {
        if let Some(f) = self.furnace_fuel.get_mut(&pos) {
            *f = charges;
        }
    }

    /// Stations of the given kinds sorted by distance from `from`, nearest first.
    pub fn stations_near(&self, from: BlockPos, kinds: &[StationKind], range: f64) -> Vec<BlockPos> {
        let mut found: Vec<(i64, BlockPos)> = self
            .grid
            .iter()
            .filter(|(_, b)| b.station.map(|s| kinds.contains(&s)).unwrap_or(false))
            .map(|(p, _)| (p.distance_sq(from), *p))
            .filter(|(d, _)| (*d as f64) <= range * range + 1e-9)
            .collect();
        found.sort();
        found.into_iter().map(|(_, p)| p).collect()
    }

    // ---- agents -----------------------------------------------------------

    pub fn add_agent(&mut self, body: AgentBody) {
        self.agents.insert(body.name.clone(), body);
    }

    pub fn agent(&self, name: &str) -> Option<&AgentBody> {
        self.agents.get(name)
    }

    pub fn agent_mut(&mut self, name: &str) -> Option<&mut AgentBody> {
        self.agents.get_mut(name)
    }

    pub fn agents(&self) -> impl Iterator<Item = &AgentBody> {
        self.agents.values()
    }

    pub fn agent_names(&self) -> Vec<String> {
        self.agents.keys().cloned().collect()
    }

    pub fn is_busy(&self, name: &str) -> bool {
        self.agents.get(name).map(AgentBody::busy).unwrap_or(false)
    }

    // ---- entities ---------------------------------------------------------

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn spawn_livestock(&mut self, kind: &str, pos: BlockPos) -> u64 {
        let id = self.next_entity_id;
        self.next_entity_id += 1;
        self.entities.push(Entity { id, kind: EntityKind::Livestock(kind.to_string()), pos, payload: None });
        id
    }

    pub fn spawn_drop(&mut self, pos: BlockPos, item: &str, count: u32) -> u64 {
        assert!(count >= 1, "dropped items carry at least one item");
        let id = self.next_entity_id;
        self.next_entity_id += 1;
        self.entities.push(Entity {
            id,
            kind: EntityKind::DroppedItem,
            pos,
            payload: Some(ItemStack::new(item, count)),
        });
        id
    }

    pub(crate) fn take_entity(&mut self, id: u64) -> Option<Entity> {
        let idx = self.entities.iter().position(|e| e.id == id)?;
        Some(self.entities.remove(idx))
    }

    /// Move every dropped item within `radius` of the agent into its
    /// inventory. Returns the number of items picked up.
    pub fn pick_up_drops(&mut self, agent: &str, radius: f64) -> u32 {
        let Some(pos) = self.agents.get(agent).map(|a| a.pos) else { return 0 };
        let ids: Vec<u64> = self
            .entities
            .iter()
            .filter(|e| e.kind == EntityKind::DroppedItem && e.pos.distance(pos) <= radius + 1e-9)
            .map(|e| e.id)
            .collect();
        let mut total = 0;
        for id in ids {
            if let Some(Entity { payload: Some(stack), .. }) = self.take_entity(id) {
                total += stack.count;
                self.agents.get_mut(agent).unwrap().inventory.add(&stack.item, stack.count);
            }
        }
        total
    }

    // ---- observation ------------------------------------------------------

    /// Blocks, agents and entities within `radius` of `actor`, each sorted by
    /// distance then label then position.
    pub fn scan_nearby(&self, actor: &str, radius: u32) -> Observation {
        let Some(me) = self.agents.get(actor) else { return Observation::default() };
        let center = me.pos;
        let r2 = (radius as i64) * (radius as i64);
        let mut obs = Observation::default();
        for (pos, block) in &self.grid {
            let d = pos.distance_sq(center);
            if d <= r2 && !block.upper {
                obs.blocks.push(Sighting { distance_sq: d, label: block.material.clone(), pos: *pos });
            }
        }
        for agent in self.agents.values() {
            let d = agent.pos.distance_sq(center);
            if agent.name != actor && d <= r2 {
                obs.agents.push(Sighting { distance_sq: d, label: agent.name.clone(), pos: agent.pos });
            }
        }
        for e in &self.entities {
            let d = e.pos.distance_sq(center);
            if d <= r2 {
                obs.entities.push(Sighting { distance_sq: d, label: e.label(), pos: e.pos });
            }
        }
        let key = |s: &Sighting| (s.distance_sq, s.label.clone(), s.pos);
        obs.blocks.sort_by_key(key);
        obs.agents.sort_by_key(key);
        obs.entities.sort_by_key(key);
        obs
    }

    /// Every item in the world, counting placed blocks by the item they drop
    /// (stations as themselves) and livestock by the item they yield.
    pub fn item_census(&self) -> BTreeMap<String, i64> {
        let mut census: BTreeMap<String, i64> = BTreeMap::new();
        let mut add = |item: &str, n: i64| *census.entry(item.to_string()).or_insert(0) += n;
        for agent in self.agents.values() {
            for (item, n) in agent.inventory.iter() {
                add(item, n as i64);
            }
        }
        for inv in self.chest_contents.values() {
            for (item, n) in inv.iter() {
                add(item, n as i64);
            }
        }
        for e in &self.entities {
            match (&e.kind, &e.payload) {
                (EntityKind::DroppedItem, Some(stack)) => add(&stack.item, stack.count as i64),
                (EntityKind::Livestock(kind), _) => {
                    if let Some(drop) = materials::livestock_drop(kind) {
                        add(drop, 1);
                    }
                }
                _ => {}
            }
        }
        for block in self.grid.values() {
            if block.upper {
                continue;
            }
            if block.station.is_some() {
                add(&block.material, 1);
            } else if let Some(drop) = materials::block_drop(&block.material) {
                add(drop, 1);
            }
        }
        census
    }

    /// Canonical JSON snapshot with sorted keys.
    pub fn to_canonical_json(&self) -> String {
        crate::canonical::to_canonical_json(self)
    }

    pub fn state_hash(&self) -> String {
        canonical_hash(self)
    }
}
