//! Seeded world construction for the three task world kinds, plus agent
//! spawn placement used on reset.

use super::materials::{self, Source};
use super::{AgentBody, BlockPos, Bounds, Inventory, WorldState, FULL_FUEL};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::str::FromStr;
use thiserror::Error;

/// Standing level of every provisioned world.
pub const SURFACE_Y: i32 = -60;
pub const WORLD_HEIGHT: i32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorldKind {
    CraftingForest,
    CookingFarm,
    ConstructionSuperflat,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown world spec {0:?}")]
pub struct InvalidSpec(pub String);

impl FromStr for WorldKind {
    type Err = InvalidSpec;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "crafting-forest" => Ok(WorldKind::CraftingForest),
            "cooking-farm" => Ok(WorldKind::CookingFarm),
            "construction-superflat" => Ok(WorldKind::ConstructionSuperflat),
            other => Err(InvalidSpec(other.to_string())),
        }
    }
}

impl WorldKind {
    pub fn name(self) -> &'static str {
        match self {
            WorldKind::CraftingForest => "crafting-forest",
            WorldKind::CookingFarm => "cooking-farm",
            WorldKind::ConstructionSuperflat => "construction-superflat",
        }
    }

    fn half_extent(self) -> i32 {
        match self {
            WorldKind::ConstructionSuperflat => 32,
            _ => 20,
        }
    }

    fn biome(self) -> &'static str {
        match self {
            WorldKind::CraftingForest => "forest",
            WorldKind::CookingFarm => "plains",
            WorldKind::ConstructionSuperflat => "superflat",
        }
    }
}

/// What a fresh world must contain beyond its kind's fixed furniture.
/// `resources` lists raw items; each is placed where it naturally lives
/// (crop block, livestock, tree, or the chest).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvisionSpec {
    pub kind: WorldKind,
    #[serde(default)]
    pub resources: Inventory,
}

impl ProvisionSpec {
    pub fn new(kind: WorldKind) -> Self {
        Self { kind, resources: Inventory::new() }
    }
}

pub const CRAFTING_TABLE_AT: BlockPos = BlockPos::new(3, SURFACE_Y, 0);
pub const FURNACE_AT: BlockPos = BlockPos::new(3, SURFACE_Y, 2);
pub const SMOKER_AT: BlockPos = BlockPos::new(3, SURFACE_Y, -2);
pub const CHEST_AT: BlockPos = BlockPos::new(-3, SURFACE_Y, 0);

fn cooking_chest_baseline() -> Inventory {
    [("milk_bucket", 1u32), ("gold_ingot", 1), ("bowl", 1), ("egg", 1)].into_iter().collect()
}

/// Build the deterministic world for `(spec, seed)`.
pub fn spawn_world_from_spec(spec: &ProvisionSpec, seed: u64) -> WorldState {
    let center = BlockPos::new(0, SURFACE_Y, 0);
    let bounds = Bounds::around(center, spec.kind.half_extent(), WORLD_HEIGHT);
    let mut world = WorldState::empty(bounds, seed, spec.kind.biome());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_f00d);
    let mut taken: BTreeSet<(i32, i32)> = BTreeSet::new();
    // keep the spawn square clear
    for x in -2..=2 {
        for z in -2..=2 {
            taken.insert((x, z));
        }
    }

    match spec.kind {
        WorldKind::ConstructionSuperflat => {}
        WorldKind::CookingFarm => {
            for (pos, m) in [
                (CRAFTING_TABLE_AT, "crafting_table"),
                (FURNACE_AT, "furnace"),
                (SMOKER_AT, "smoker"),
                (CHEST_AT, "chest"),
            ] {
                world.put_block(pos, m);
                taken.insert((pos.x, pos.z));
            }
            world.set_fuel(FURNACE_AT, FULL_FUEL);
            world.set_fuel(SMOKER_AT, FULL_FUEL);
            world.chest_mut(CHEST_AT).unwrap().merge(&cooking_chest_baseline());
            let mut baseline = Inventory::new();
            for crop in ["potato", "carrot", "beetroot", "wheat", "brown_mushroom", "red_mushroom", "sugar_cane"] {
                baseline.add(crop, 1);
            }
            for kind in materials::livestock_kinds() {
                baseline.add(materials::livestock_drop(kind).unwrap(), 1);
            }
            place_resources(&mut world, &baseline, &mut rng, &mut taken);
        }
        WorldKind::CraftingForest => {
            world.put_block(CRAFTING_TABLE_AT, "crafting_table");
            world.put_block(CHEST_AT, "chest");
            taken.insert((CRAFTING_TABLE_AT.x, CRAFTING_TABLE_AT.z));
            taken.insert((CHEST_AT.x, CHEST_AT.z));
            let baseline: Inventory = [("oak_log", 3u32)].into_iter().collect();
            place_resources(&mut world, &baseline, &mut rng, &mut taken);
        }
    }
    place_resources(&mut world, &spec.resources, &mut rng, &mut taken);
    world
}

fn free_cell(world: &WorldState, rng: &mut ChaCha8Rng, taken: &mut BTreeSet<(i32, i32)>) -> BlockPos {
    let reach = world.bounds.max_x.min(14);
    loop {
        let x = rng.gen_range(-reach..=reach);
        let z = rng.gen_range(-reach..=reach);
        // leave a free ring around every placed feature so nothing walls in a spot
        let crowded = (-1..=1).any(|dx| (-1..=1).any(|dz| taken.contains(&(x + dx, z + dz))));
        if !crowded {
            taken.insert((x, z));
            return BlockPos::new(x, SURFACE_Y, z);
        }
    }
}

fn place_resources(world: &mut WorldState, items: &Inventory, rng: &mut ChaCha8Rng, taken: &mut BTreeSet<(i32, i32)>) {
    for (item, n) in items.iter() {
        match materials::source_of(item) {
            Source::Block("oak_log") => {
                // trees: trunks of up to three logs
                let mut left = n;
                while left > 0 {
                    let base = free_cell(world, rng, taken);
                    let h = left.min(3);
                    for dy in 0..h as i32 {
                        world.put_block(base.offset(0, dy, 0), "oak_log");
                    }
                    left -= h;
                }
            }
            Source::Block(block) => {
                for _ in 0..n {
                    let pos = free_cell(world, rng, taken);
                    world.put_block(pos, block);
                }
            }
            Source::Livestock(kind) => {
                for _ in 0..n {
                    let pos = free_cell(world, rng, taken);
                    world.spawn_livestock(kind, pos);
                }
            }
            Source::Chest => {
                if world.chest(CHEST_AT).is_none() {
                    world.put_block(CHEST_AT, "chest");
                }
                world.chest_mut(CHEST_AT).unwrap().add(item, n);
            }
        }
    }
}

/// Seeded spawn cells near the world centre, one per agent, all distinct
/// and standable.
pub fn spawn_positions(world: &WorldState, names: &[String], seed: u64) -> Vec<BlockPos> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xa6e47);
    let mut cells: Vec<BlockPos> = (-2..=2)
        .flat_map(|x| (-2..=2).map(move |z| BlockPos::new(x, SURFACE_Y, z)))
        .filter(|p| world.is_standable(*p))
        .collect();
    cells.shuffle(&mut rng);
    assert!(cells.len() >= names.len(), "not enough spawn cells");
    cells.truncate(names.len());
    cells
}

/// Put the named agents into `world` at seeded spawn cells with the given
/// inventories.
pub fn seat_agents(world: &mut WorldState, names: &[String], inventories: &[Inventory], seed: u64) {
    let spots = spawn_positions(world, names, seed);
    for ((name, pos), inv) in names.iter().zip(spots).zip(inventories) {
        let mut body = AgentBody::new(name, pos);
        body.inventory = inv.clone();
        world.add_agent(body);
    }
}
