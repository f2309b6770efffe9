//! Procedural multi-room, multi-story building blueprints.
//!
//! A story is four levels: a floor slab and three wall rows. Rooms come from
//! a seeded binary split of the footprint; every split wall gets a door, the
//! ground story gets an exterior door, and stories are linked by a four-step
//! staircase under a hole in the floor above.

use crate::canonical::canonical_hash;
use crate::world::{materials, BlockPos, Inventory, WorldState};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use thiserror::Error;

pub const LEVELS_PER_STORY: usize = 4;
/// Smallest room edge, walls included.
const MIN_ROOM: i32 = 6;

const STRUCTURAL: &[&str] = &[
    "stone",
    "cobblestone",
    "terracotta",
    "bricks",
    "sandstone",
    "oak_planks",
    "spruce_planks",
    "birch_planks",
    "dark_oak_planks",
    "quartz_block",
];

const CARPETS: &[&str] = &[
    "white_carpet",
    "lime_carpet",
    "blue_carpet",
    "light_blue_carpet",
    "cyan_carpet",
    "red_carpet",
    "yellow_carpet",
];

const DOOR: &str = "dark_oak_door";
const WINDOW: &str = "glass";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlueprintConfig {
    pub m: u8,
    pub r: u8,
    pub w: u8,
    pub c: u8,
    pub v: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlueprintError {
    #[error("complexity levels must be 0, 1 or 2 (got m={m}, r={r}, w={w}, c={c})")]
    InvalidConfig { m: u8, r: u8, w: u8, c: u8 },
    #[error("Level {0} does not exist.")]
    InvalidLevel(usize),
}

impl BlueprintConfig {
    pub fn new(m: u8, r: u8, w: u8, c: u8, v: u32) -> Result<Self, BlueprintError> {
        let cfg = Self { m, r, w, c, v };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), BlueprintError> {
        if [self.m, self.r, self.w, self.c].iter().any(|&x| x > 2) {
            return Err(BlueprintError::InvalidConfig { m: self.m, r: self.r, w: self.w, c: self.c });
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        format!(
            "materials_{}_rooms_{}_window_{}_carpet_{}_variant_{}",
            self.m, self.r, self.w, self.c, self.v
        )
    }

    fn room_range(&self) -> (usize, usize, usize) {
        // (min rooms, max rooms, max stories)
        match self.r {
            0 => (1, 2, 1),
            1 => (3, 4, 2),
            _ => (5, 6, 3),
        }
    }

    fn material_range(&self) -> (usize, usize) {
        match self.m {
            0 => (1, 1),
            1 => (2, 3),
            _ => (4, 5),
        }
    }
}

/// Layered material grid. `levels[l][z][x]` is the cell at
/// `origin + (x, l, z)`; `"air"` marks empty cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blueprint {
    pub config: BlueprintConfig,
    pub origin: BlockPos,
    pub levels: Vec<Vec<Vec<String>>>,
    pub materials_used: BTreeSet<String>,
    pub rooms: usize,
    pub stories: usize,
    pub structural_materials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Rect {
    x0: i32,
    z0: i32,
    x1: i32,
    z1: i32,
}

impl Rect {
    fn w(&self) -> i32 {
        self.x1 - self.x0 + 1
    }
    fn d(&self) -> i32 {
        self.z1 - self.z0 + 1
    }
    fn interior_area(&self) -> i32 {
        (self.w() - 2) * (self.d() - 2)
    }
}

/// A wall line created by one split, with the cells a door may use.
struct Split {
    cells: Vec<(i32, i32)>,
}

fn bsp(footprint: Rect, rooms: usize, rng: &mut ChaCha8Rng) -> (Vec<Rect>, Vec<Split>) {
    let mut rects = vec![footprint];
    let mut splits = Vec::new();
    while rects.len() < rooms {
        // split the biggest room that can still be split
        let mut order: Vec<usize> = (0..rects.len()).collect();
        order.sort_by_key(|&i| (-(rects[i].w() * rects[i].d()), i));
        let Some(&idx) = order.iter().find(|&&i| rects[i].w() >= 2 * MIN_ROOM - 1 || rects[i].d() >= 2 * MIN_ROOM - 1)
        else {
            break;
        };
        let r = rects[idx];
        let vertical = if r.w() >= 2 * MIN_ROOM - 1 && r.d() >= 2 * MIN_ROOM - 1 {
            r.w() >= r.d()
        } else {
            r.w() >= 2 * MIN_ROOM - 1
        };
        if vertical {
            let at = rng.gen_range(r.x0 + MIN_ROOM - 1..=r.x1 - MIN_ROOM + 1);
            rects[idx] = Rect { x1: at, ..r };
            rects.push(Rect { x0: at, ..r });
            splits.push(Split { cells: (r.z0 + 1..r.z1).map(|z| (at, z)).collect() });
        } else {
            let at = rng.gen_range(r.z0 + MIN_ROOM - 1..=r.z1 - MIN_ROOM + 1);
            rects[idx] = Rect { z1: at, ..r };
            rects.push(Rect { z0: at, ..r });
            splits.push(Split { cells: (r.x0 + 1..r.x1).map(|x| (x, at)).collect() });
        }
    }
    (rects, splits)
}

fn footprint_for(rooms: usize, rng: &mut ChaCha8Rng) -> Rect {
    // rooms laid out roughly two deep once there are more than two
    let cols = if rooms <= 2 { rooms as i32 } else { (rooms as i32 + 1) / 2 };
    let rows = if rooms <= 2 { 1 } else { 2 };
    let w = cols * (MIN_ROOM - 1) + 1 + rng.gen_range(0..=2);
    let d = rows * (MIN_ROOM - 1) + 1 + rng.gen_range(0..=2);
    Rect { x0: 0, z0: 0, x1: w - 1, z1: d - 1 }
}

fn on_wall(rects: &[Rect], x: i32, z: i32) -> bool {
    rects.iter().any(|r| {
        (x == r.x0 || x == r.x1) && (r.z0..=r.z1).contains(&z) || (z == r.z0 || z == r.z1) && (r.x0..=r.x1).contains(&x)
    })
}

/// A wall cell where more than one wall line meets.
fn is_junction(rects: &[Rect], x: i32, z: i32) -> bool {
    let horiz = on_wall(rects, x - 1, z) || on_wall(rects, x + 1, z);
    let vert = on_wall(rects, x, z - 1) || on_wall(rects, x, z + 1);
    on_wall(rects, x, z) && horiz && vert
}

struct Story {
    rooms: Vec<Rect>,
    splits: Vec<Split>,
}

pub fn generate_blueprint(config: BlueprintConfig, seed: u64) -> Result<Blueprint, BlueprintError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(
        seed ^ ((config.m as u64) << 48 | (config.r as u64) << 40 | (config.w as u64) << 32 | config.v as u64)
            .wrapping_mul(0x2545_F491_4F6C_DD1D),
    );
    let (lo, hi, max_stories) = config.room_range();
    let rooms = rng.gen_range(lo..=hi);
    let stories = rng.gen_range(1..=max_stories.min(rooms));

    // rooms per story, ground floor gets the remainder
    let mut per_story = vec![rooms / stories; stories];
    for slot in per_story.iter_mut().take(rooms % stories) {
        *slot += 1;
    }
    let footprint = footprint_for(per_story[0], &mut rng);
    let plan: Vec<Story> = per_story
        .iter()
        .map(|&k| {
            let (rooms, splits) = bsp(footprint, k, &mut rng);
            Story { rooms, splits }
        })
        .collect();
    let built_rooms: usize = plan.iter().map(|s| s.rooms.len()).sum();

    // materials: floor, row 1, row 2, row 3, corners
    let (mlo, mhi) = config.material_range();
    let n_mat = rng.gen_range(mlo..=mhi);
    let mut palette: Vec<&str> = STRUCTURAL.to_vec();
    palette.shuffle(&mut rng);
    let chosen = &palette[..n_mat];
    let mut parts = [chosen[0]; 5];
    for (i, part) in parts.iter_mut().enumerate() {
        *part = if i < n_mat { chosen[i] } else { chosen[rng.gen_range(0..n_mat)] };
    }
    // shuffle which part shows which material, keeping all in use
    parts.shuffle(&mut rng);
    let [floor_mat, row1, row2, row3, corner_mat] = parts;

    let (w, d) = (footprint.w() as usize, footprint.d() as usize);
    let n_levels = stories * LEVELS_PER_STORY;
    let mut levels = vec![vec![vec![materials::AIR.to_string(); w]; d]; n_levels];
    let set = |levels: &mut Vec<Vec<Vec<String>>>, l: usize, x: i32, z: i32, m: &str| {
        levels[l][z as usize][x as usize] = m.to_string();
    };

    let carpet_palette: Vec<&str> = {
        let mut p = CARPETS.to_vec();
        p.shuffle(&mut rng);
        p
    };

    let mut holes: BTreeSet<(usize, i32, i32)> = BTreeSet::new();
    let mut stairs: BTreeSet<(usize, i32, i32)> = BTreeSet::new();

    for (s, story) in plan.iter().enumerate() {
        let base = s * LEVELS_PER_STORY;
        for x in 0..w as i32 {
            for z in 0..d as i32 {
                set(&mut levels, base, x, z, floor_mat);
                if on_wall(&story.rooms, x, z) {
                    let outer_corner = (x == 0 || x == w as i32 - 1) && (z == 0 || z == d as i32 - 1);
                    let junction = is_junction(&story.rooms, x, z);
                    for (row, mat) in [row1, row2, row3].into_iter().enumerate() {
                        let m = if outer_corner || junction { corner_mat } else { mat };
                        set(&mut levels, base + 1 + row, x, z, m);
                    }
                }
            }
        }

        // doors in every split wall
        let mut door_cells: Vec<(i32, i32)> = Vec::new();
        for split in &story.splits {
            let options: Vec<(i32, i32)> = split
                .cells
                .iter()
                .copied()
                .filter(|&(x, z)| !is_junction(&story.rooms, x, z))
                .filter(|&(x, z)| !door_cells.iter().any(|&(dx, dz)| (dx - x).abs() + (dz - z).abs() <= 1))
                .collect();
            if let Some(&cell) = options.choose(&mut rng) {
                door_cells.push(cell);
            }
        }
        if s == 0 {
            // front door on the z = 0 face
            let options: Vec<(i32, i32)> = (1..w as i32 - 1)
                .map(|x| (x, 0))
                .filter(|&(x, z)| !is_junction(&story.rooms, x, z) && !is_junction(&story.rooms, x - 1, z) && !is_junction(&story.rooms, x + 1, z))
                .collect();
            let cell = options.choose(&mut rng).copied().unwrap_or((1, 0));
            door_cells.push(cell);
        }
        for &(x, z) in &door_cells {
            set(&mut levels, base + 1, x, z, DOOR);
            set(&mut levels, base + 2, x, z, DOOR);
        }

        // windows on the exterior middle row
        if config.w > 0 {
            for x in 0..w as i32 {
                for z in 0..d as i32 {
                    let exterior = x == 0 || z == 0 || x == w as i32 - 1 || z == d as i32 - 1;
                    if !exterior || is_junction(&story.rooms, x, z) || door_cells.contains(&(x, z)) {
                        continue;
                    }
                    let corner_gap = x.min(w as i32 - 1 - x) >= 2 || z.min(d as i32 - 1 - z) >= 2;
                    let along = if z == 0 || z == d as i32 - 1 { x } else { z };
                    let glass = match config.w {
                        1 => along % 4 == 2 && corner_gap,
                        _ => corner_gap,
                    };
                    let next_to_door = door_cells.iter().any(|&(dx, dz)| (dx - x).abs() + (dz - z).abs() <= 1);
                    if glass && !next_to_door && !is_junction(&story.rooms, x - 1, z) && !is_junction(&story.rooms, x + 1, z)
                        && !is_junction(&story.rooms, x, z - 1) && !is_junction(&story.rooms, x, z + 1)
                    {
                        set(&mut levels, base + 2, x, z, WINDOW);
                    }
                }
            }
        }

        // staircase up to the next story, inside the biggest room
        if s + 1 < stories {
            let room = *story.rooms.iter().max_by_key(|r| (r.interior_area(), r.x0, r.z0)).unwrap();
            let z = room.z1 - 1;
            for i in 0..4 {
                let x = room.x0 + 1 + i;
                for h in 0..=i as usize {
                    set(&mut levels, base + 1 + h, x, z, floor_mat);
                    stairs.insert((base + 1 + h, x, z));
                }
                if i < 3 {
                    holes.insert((base + LEVELS_PER_STORY, x, z));
                    // headroom beside the climb line
                    holes.insert((base + LEVELS_PER_STORY, x, z - 1));
                }
            }
        }
    }
    for &(l, x, z) in &holes {
        set(&mut levels, l, x, z, materials::AIR);
    }

    // carpets on the first wall row of every room interior
    if config.c > 0 {
        for (s, story) in plan.iter().enumerate() {
            let l = s * LEVELS_PER_STORY + 1;
            for (i, room) in story.rooms.iter().enumerate() {
                let colour_a = carpet_palette[if config.c == 1 { 0 } else { (2 * i) % carpet_palette.len() }];
                let colour_b = carpet_palette[if config.c == 1 { 0 } else { (2 * i + 1) % carpet_palette.len() }];
                for x in room.x0 + 1..room.x1 {
                    for z in room.z0 + 1..room.z1 {
                        let cell = &levels[l][z as usize][x as usize];
                        if cell != materials::AIR || stairs.contains(&(l, x, z)) || holes.contains(&(l - 1, x, z)) {
                            continue;
                        }
                        // keep a walkway clear next to the walls for single-colour rugs
                        let inner = x > room.x0 + 1 && x < room.x1 - 1 && z > room.z0 + 1 && z < room.z1 - 1;
                        if config.c == 1 && !inner {
                            continue;
                        }
                        let m = if (x + z) % 2 == 0 { colour_a } else { colour_b };
                        set(&mut levels, l, x, z, m);
                    }
                }
            }
        }
    }

    let materials_used: BTreeSet<String> = levels
        .iter()
        .flatten()
        .flatten()
        .filter(|m| *m != materials::AIR)
        .cloned()
        .collect();
    let structural_materials = materials_used.iter().filter(|m| STRUCTURAL.contains(&m.as_str())).count();
    let origin = BlockPos::new(-(w as i32) / 2, crate::world::provision::SURFACE_Y, -(d as i32) / 2);
    Ok(Blueprint { config, origin, levels, materials_used, rooms: built_rooms, stories, structural_materials })
}

/// One correction needed to make the world match the blueprint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fix {
    Place { material: String, pos: BlockPos },
    Remove { material: String, pos: BlockPos },
}

impl std::fmt::Display for Fix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Fix::Place { material, pos } => {
                write!(f, "Place {material} at coordinates X: {}, Y: {}, Z: {}", pos.x, pos.y, pos.z)
            }
            Fix::Remove { material, pos } => {
                write!(f, "Remove the {material} at coordinates X: {}, Y: {}, Z: {}", pos.x, pos.y, pos.z)
            }
        }
    }
}

impl Blueprint {
    pub fn name(&self) -> String {
        self.config.name()
    }

    pub fn width(&self) -> usize {
        self.levels.first().and_then(|l| l.first()).map(Vec::len).unwrap_or(0)
    }

    pub fn depth(&self) -> usize {
        self.levels.first().map(Vec::len).unwrap_or(0)
    }

    pub fn pos_of(&self, level: usize, x: usize, z: usize) -> BlockPos {
        self.origin.offset(x as i32, level as i32, z as i32)
    }

    /// Every cell in level, z, x order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, BlockPos, &str)> + '_ {
        self.levels.iter().enumerate().flat_map(move |(l, grid)| {
            grid.iter().enumerate().flat_map(move |(z, row)| {
                row.iter().enumerate().map(move |(x, m)| (l, self.pos_of(l, x, z), m.as_str()))
            })
        })
    }

    pub fn total_cells(&self) -> usize {
        self.cells().filter(|(_, _, m)| *m != materials::AIR).count()
    }

    /// True for the upper cell of a two-high door.
    pub fn is_door_upper(&self, pos: BlockPos) -> bool {
        let m = self.material_at(pos);
        materials::is_door(m) && self.material_at(pos.below()) == m
    }

    pub fn material_at(&self, pos: BlockPos) -> &str {
        let (dx, dl, dz) = (pos.x - self.origin.x, pos.y - self.origin.y, pos.z - self.origin.z);
        if dx < 0 || dl < 0 || dz < 0 {
            return materials::AIR;
        }
        self.levels
            .get(dl as usize)
            .and_then(|g| g.get(dz as usize))
            .and_then(|r| r.get(dx as usize))
            .map(String::as_str)
            .unwrap_or(materials::AIR)
    }

    /// Items needed to build the whole blueprint. Doors count once per
    /// two-cell door.
    pub fn bill_of_materials(&self) -> Inventory {
        let mut bill = Inventory::new();
        for (_, pos, m) in self.cells() {
            if m == materials::AIR || self.is_door_upper(pos) {
                continue;
            }
            bill.add(m, 1);
        }
        bill
    }

    pub fn fixes(&self, world: &WorldState, level: Option<usize>) -> Result<Vec<Fix>, BlueprintError> {
        if let Some(l) = level {
            if l >= self.levels.len() {
                return Err(BlueprintError::InvalidLevel(l));
            }
        }
        let mut out = Vec::new();
        for (l, pos, want) in self.cells() {
            if level.is_some_and(|lv| lv != l) {
                continue;
            }
            let have = world.material_at(pos);
            if have == want {
                continue;
            }
            if have != materials::AIR {
                out.push(Fix::Remove { material: have.to_string(), pos });
            }
            if want != materials::AIR {
                out.push(Fix::Place { material: want.to_string(), pos });
            }
        }
        Ok(out)
    }

    /// Text for the blueprint-level check: either the completion line or the
    /// list of fixes.
    pub fn level_report(&self, world: &WorldState, level: usize) -> Result<String, BlueprintError> {
        let fixes = self.fixes(world, Some(level))?;
        if fixes.is_empty() {
            return Ok(format!("Level {level} is complete"));
        }
        let mut out = format!("Level {level} requires the following fixes:\n");
        for f in fixes {
            let _ = writeln!(out, "{f}");
        }
        Ok(out)
    }

    /// Reports for every level, joined by newlines.
    pub fn report(&self, world: &WorldState) -> String {
        (0..self.levels.len())
            .map(|l| self.level_report(world, l).expect("level in range"))
            .map(|s| s.trim_end().to_string())
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn render_level(&self, level: usize) -> Result<String, BlueprintError> {
        let grid = self.levels.get(level).ok_or(BlueprintError::InvalidLevel(level))?;
        let y = self.origin.y + level as i32;
        let mut out = format!(
            "Level {level} (Y: {y}), rows run along X from {} and step along Z from {}:\n",
            self.origin.x, self.origin.z
        );
        for row in grid {
            let _ = writeln!(out, "[{}]", row.join(", "));
        }
        Ok(out)
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "Blueprint {} with {} levels, origin at ({}):\n",
            self.name(),
            self.levels.len(),
            self.origin
        );
        for l in 0..self.levels.len() {
            out.push_str(&self.render_level(l).expect("level in range"));
        }
        out
    }

    pub fn content_hash(&self) -> String {
        canonical_hash(&self.levels)
    }

    pub fn materials_by_count(&self) -> BTreeMap<String, u32> {
        self.bill_of_materials().iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{Bounds, WorldState};

    fn cfg(m: u8, r: u8, w: u8, c: u8) -> BlueprintConfig {
        BlueprintConfig::new(m, r, w, c, 0).unwrap()
    }

    #[test]
    fn minimal_config_is_single_material_shell() {
        let bp = generate_blueprint(cfg(0, 0, 0, 0), 1).unwrap();
        assert_eq!(bp.stories, 1);
        assert_eq!(bp.structural_materials, 1);
        assert_eq!(bp.levels.len(), LEVELS_PER_STORY);
        let doors = bp.cells().filter(|(_, _, m)| materials::is_door(m)).count();
        assert!(doors >= 2);
    }

    #[test]
    fn name_follows_convention() {
        let c = BlueprintConfig::new(1, 1, 1, 1, 7).unwrap();
        assert_eq!(c.name(), "materials_1_rooms_1_window_1_carpet_1_variant_7");
        assert!(BlueprintConfig::new(3, 0, 0, 0, 0).is_err());
    }

    #[test]
    fn deterministic() {
        let a = generate_blueprint(cfg(2, 2, 2, 2), 11).unwrap();
        let b = generate_blueprint(cfg(2, 2, 2, 2), 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_world_needs_every_cell() {
        let bp = generate_blueprint(cfg(0, 0, 0, 0), 3).unwrap();
        let w = WorldState::empty(Bounds::around(BlockPos::new(0, -60, 0), 32, 24), 0, "superflat");
        let fixes = bp.fixes(&w, None).unwrap();
        assert_eq!(fixes.len(), bp.total_cells());
        assert!(fixes.iter().all(|f| matches!(f, Fix::Place { .. })));
    }

    #[test]
    fn fix_line_format() {
        let f = Fix::Remove { material: "terracotta".into(), pos: BlockPos::new(150, -59, -167) };
        assert_eq!(f.to_string(), "Remove the terracotta at coordinates X: 150, Y: -59, Z: -167");
    }

    #[test]
    fn invalid_level() {
        let bp = generate_blueprint(cfg(0, 0, 0, 0), 3).unwrap();
        let w = WorldState::empty(Bounds::around(BlockPos::new(0, -60, 0), 32, 24), 0, "superflat");
        assert_eq!(bp.fixes(&w, Some(99)), Err(BlueprintError::InvalidLevel(99)));
    }
}
