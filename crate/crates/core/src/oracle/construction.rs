//! Read the blueprint fixes and place every cell we have material for,
//! growing columns upward: a placed block lifts the builder, who can then
//! place the next cell of the column without walking.

use super::{n, s, Out, Policy};
use crate::command::Value;
use crate::episode::TaskBrief;
use crate::task::Fix;
use crate::world::materials::{block_for_item, is_door, is_solid};
use crate::world::{BlockPos, Capabilities, MAX_DROP};
use std::collections::{BTreeMap, BTreeSet};

const MAX_FAILS: u32 = 3;
/// Placements between two blueprint checks.
const RECHECK_EVERY: u32 = 24;

pub(super) struct Construction {
    me: String,
    others: Vec<String>,
    capabilities: Capabilities,
    materials: Vec<String>,
    /// Outstanding placements from the last check, minus our own since.
    fixes: BTreeMap<BlockPos, String>,
    fails: BTreeMap<BlockPos, u32>,
    at: Option<BlockPos>,
    target: Option<BlockPos>,
    since_check: u32,
    stale: bool,
    park: Option<BlockPos>,
    parked: bool,
    index: i32,
    door_tops: BTreeSet<BlockPos>,
    /// Lowest level with an outstanding placement.
    floor: Option<i32>,
}

fn fix_pos(f: &Fix) -> BlockPos {
    match f {
        Fix::Place { pos, .. } | Fix::Remove { pos, .. } => *pos,
    }
}

fn num(v: i32) -> Value {
    Value::Num(v as f64)
}

/// Fix lines from the blueprint check output.
pub(crate) fn parse_fixes(text: &str) -> Vec<Fix> {
    let mut out = Vec::new();
    for line in text.lines() {
        let (place, rest) = if let Some(r) = line.strip_prefix("Place ") {
            (true, r)
        } else if let Some(r) = line.strip_prefix("Remove the ") {
            (false, r)
        } else {
            continue;
        };
        let Some((material, coords)) = rest.split_once(" at coordinates ") else { continue };
        let nums: Vec<i32> = coords
            .split(',')
            .filter_map(|p| p.split_once(':').and_then(|(_, v)| v.trim().parse().ok()))
            .collect();
        if nums.len() != 3 {
            continue;
        }
        let pos = BlockPos::new(nums[0], nums[1], nums[2]);
        let material = material.to_string();
        out.push(if place { Fix::Place { material, pos } } else { Fix::Remove { material, pos } });
    }
    out
}

impl Construction {
    pub(super) fn new(brief: &TaskBrief) -> Self {
        Construction {
            me: brief.agent.clone(),
            others: brief.others(),
            capabilities: brief.capabilities.clone(),
            materials: brief.initial_inventory.iter().map(|(i, _)| i.to_string()).collect(),
            fixes: BTreeMap::new(),
            fails: BTreeMap::new(),
            at: None,
            target: None,
            since_check: 0,
            stale: true,
            park: None,
            parked: false,
            door_tops: BTreeSet::new(),
            floor: None,
            index: brief.agents.iter().position(|a| *a == brief.agent).unwrap_or(0) as i32,
        }
    }

    fn mine(&self, material: &str) -> bool {
        self.capabilities.allows(material) && self.materials.iter().any(|m| m == material)
    }

    /// A cell may be placed once the cell below it is finished, so the
    /// cell above is still open when we stand in it. Cells more than a
    /// short drop above the lowest unfinished level wait, so we never end up
    /// on a pillar we cannot climb down from.
    fn eligible(&self, pos: BlockPos, material: &str) -> bool {
        if self.floor.is_some_and(|f| pos.y > f + MAX_DROP - 1) {
            return false;
        }
        let below = pos.below();
        let unfinished = |p: &BlockPos| self.fixes.contains_key(p) || (self.door_tops.contains(p) && self.fixes.contains_key(&p.below()));
        !unfinished(&below)
            && self.mine(material)
            && self.fails.get(&pos).copied().unwrap_or(0) < MAX_FAILS
    }

    fn load(&mut self, text: &str) {
        let fixes = parse_fixes(text);
        if self.park.is_none() && !fixes.is_empty() {
            let x = fixes.iter().map(|f| fix_pos(f).x).min().unwrap();
            let y = fixes.iter().map(|f| fix_pos(f).y).min().unwrap();
            let z = fixes.iter().map(|f| fix_pos(f).z).min().unwrap();
            self.park = Some(BlockPos::new(x - 2, y, z - 2 + 2 * self.index));
        }
        self.fixes = fixes
            .into_iter()
            .filter_map(|f| match f {
                Fix::Place { material, pos } => Some((pos, material)),
                Fix::Remove { .. } => None,
            })
            .collect();
        // a door's upper half appears with its lower half
        let uppers: Vec<BlockPos> = self
            .fixes
            .iter()
            .filter(|(p, m)| is_door(m) && self.fixes.get(&p.below()) == Some(*m))
            .map(|(p, _)| *p)
            .collect();
        for p in &uppers {
            self.fixes.remove(p);
        }
        self.door_tops = uppers.into_iter().collect();
        self.update_floor();
        self.since_check = 0;
        self.stale = false;
    }

    fn update_floor(&mut self) {
        self.floor = self.fixes.keys().map(|p| p.y).min();
    }

    fn choose(&self) -> Option<(BlockPos, String)> {
        if let Some(here) = self.at {
            if let Some(m) = self.fixes.get(&here) {
                if self.eligible(here, m) {
                    return Some((here, m.clone()));
                }
            }
        }
        let origin = self.at.unwrap_or(BlockPos::new(0, 0, 0));
        self.fixes
            .iter()
            .filter(|(p, m)| self.eligible(**p, m))
            .min_by_key(|(p, _)| (p.y, p.grid_distance(origin)))
            .map(|(p, m)| (*p, m.clone()))
    }
}

impl Policy for Construction {
    fn start(&mut self, out: &mut Out) {
        if self.others.first().is_some_and(|first| self.me < *first) {
            let mine = self.materials.join(", ");
            for o in self.others.clone() {
                out.say(&o, format!("I will place the {mine} blocks. Please place the ones I do not have."));
            }
        }
    }

    fn on_result(&mut self, command: &str, ok: bool, text: &str, out: &mut Out) {
        match command {
            "checkBlueprint" => self.load(text),
            "goToCoordinates" => {
                let target = self.target;
                if ok {
                    self.at = target.or(self.park);
                } else {
                    self.at = None;
                    if let Some(p) = target {
                        *self.fails.entry(p).or_default() += 1;
                        out.skip_next("placeHere");
                        self.target = None;
                    } else {
                        self.parked = false;
                    }
                }
            }
            "placeHere" => {
                let Some(p) = self.target.take() else { return };
                if ok {
                    let material = self.fixes.remove(&p).unwrap_or_default();
                    self.update_floor();
                    let solid = block_for_item(&material).is_some_and(is_solid);
                    self.at = Some(if solid { p.above() } else { p });
                    self.since_check += 1;
                    self.parked = false;
                } else {
                    *self.fails.entry(p).or_default() += 1;
                    if text.contains("already there") {
                        self.stale = true;
                    }
                }
            }
            _ => {}
        }
    }

    fn on_chat(&mut self, _from: &str, _body: &str, _out: &mut Out) {}

    fn idle(&mut self, out: &mut Out) {
        if self.stale || self.since_check >= RECHECK_EVERY {
            self.stale = true;
            out.cmd("checkBlueprint", vec![]);
            return;
        }
        if let Some((pos, material)) = self.choose() {
            if self.at != Some(pos) {
                out.cmd("goToCoordinates", vec![num(pos.x), num(pos.y), num(pos.z), n(0)]);
            }
            out.cmd("placeHere", vec![s(&material)]);
            self.target = Some(pos);
            return;
        }
        // nothing to do until the others catch up: step aside and look again later
        self.stale = true;
        self.fails.values_mut().for_each(|v| *v = v.saturating_sub(1));
        match self.park {
            Some(p) if !self.parked => {
                self.parked = true;
                self.target = None;
                out.cmd("goToCoordinates", vec![num(p.x), num(p.y), num(p.z), n(1)]);
            }
            _ => out.wait(3),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fix_lines_parse() {
        let f = parse_fixes("Level 0 requires the following fixes:\nPlace stone at coordinates X: 3, Y: -60, Z: -2\nRemove the dirt at coordinates X: 1, Y: -59, Z: 0\nLevel 1 is complete");
        assert_eq!(
            f,
            vec![
                Fix::Place { material: "stone".into(), pos: BlockPos::new(3, -60, -2) },
                Fix::Remove { material: "dirt".into(), pos: BlockPos::new(1, -59, 0) },
            ]
        );
    }
}
