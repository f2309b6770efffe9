//! Task scoring, blueprint diffs and shared Hell's Kitchen progress.

use crate::task::{Blueprint, Fix, TaskSpec, TaskType};
use crate::world::materials::{self, AIR};
use crate::world::WorldState;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    Binary,
    EditDistance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum ScoreDetail {
    /// Which agent, if any, holds every target.
    Items { holder: Option<String>, held: BTreeMap<String, u32> },
    HellsKitchen { done: BTreeMap<String, BTreeSet<usize>>, assigned: BTreeMap<String, Vec<usize>> },
    /// (matched, total) per blueprint level.
    Blocks { matched: usize, total: usize, per_level: Vec<(usize, usize)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub value: f64,
    pub kind: ScoreKind,
    pub detail: ScoreDetail,
}

impl Score {
    pub fn is_complete(&self) -> bool {
        self.value >= 1.0
    }
}

fn binary(ok: bool) -> f64 {
    if ok {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ProgressRecord {
    agent: String,
    index: usize,
    tick: u64,
}

/// Completed Hell's Kitchen targets per agent. Entries are only ever added,
/// and with a backing file every addition is appended and flushed before it
/// becomes visible.
#[derive(Debug, Default)]
pub struct ProgressStore {
    done: BTreeMap<String, BTreeSet<usize>>,
    log: Option<(PathBuf, File)>,
}

impl ProgressStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Open or create a store backed by a JSON-lines file, replaying what
    /// is already there.
    pub fn open(path: &Path) -> std::io::Result<Self> {
        let mut done: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(path)?).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                // a torn final line from a crash is skipped
                if let Ok(rec) = serde_json::from_str::<ProgressRecord>(&line) {
                    done.entry(rec.agent).or_default().insert(rec.index);
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(ProgressStore { done, log: Some((path.to_path_buf(), file)) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.log.as_ref().map(|(p, _)| p.as_path())
    }

    /// Returns true if this is a new completion.
    pub fn mark(&mut self, agent: &str, index: usize, tick: u64) -> std::io::Result<bool> {
        if self.is_done(agent, index) {
            return Ok(false);
        }
        if let Some((_, file)) = &mut self.log {
            let rec = ProgressRecord { agent: agent.to_string(), index, tick };
            let mut line = serde_json::to_string(&rec).expect("record serializes");
            line.push('\n');
            file.write_all(line.as_bytes())?;
            file.flush()?;
        }
        self.done.entry(agent.to_string()).or_default().insert(index);
        Ok(true)
    }

    pub fn is_done(&self, agent: &str, index: usize) -> bool {
        self.done.get(agent).is_some_and(|s| s.contains(&index))
    }

    pub fn done(&self) -> &BTreeMap<String, BTreeSet<usize>> {
        &self.done
    }
}

/// Record any assigned Hell's Kitchen target an agent now holds.
pub fn record_progress(world: &WorldState, task: &TaskSpec, progress: &mut ProgressStore) -> std::io::Result<()> {
    for (agent, indices) in &task.assignments {
        let Some(body) = world.agent(agent) else { continue };
        for &i in indices {
            let t = &task.target_items[i];
            if body.inventory.count(&t.item) >= t.count {
                progress.mark(agent, i, world.tick())?;
            }
        }
    }
    Ok(())
}

pub fn score_cooking(world: &WorldState, task: &TaskSpec, progress: &mut ProgressStore) -> Score {
    if task.hells_kitchen {
        // a failed write only loses durability, the in-memory view still counts
        let _ = record_progress(world, task, progress);
        let all = task.assignments.iter().all(|(a, idx)| idx.iter().all(|&i| progress.is_done(a, i)));
        return Score {
            value: binary(all),
            kind: ScoreKind::Binary,
            detail: ScoreDetail::HellsKitchen { done: progress.done().clone(), assigned: task.assignments.clone() },
        };
    }
    single_holder(world, task)
}

/// 1 when one agent holds every target at its count.
fn single_holder(world: &WorldState, task: &TaskSpec) -> Score {
    let holder = world
        .agents()
        .find(|a| task.target_items.iter().all(|t| a.inventory.count(&t.item) >= t.count))
        .map(|a| a.name.clone());
    Score { value: binary(holder.is_some()), kind: ScoreKind::Binary, detail: ScoreDetail::Items { holder, held: held(world, task) } }
}

fn held(world: &WorldState, task: &TaskSpec) -> BTreeMap<String, u32> {
    task.target_items
        .iter()
        .map(|t| (t.item.clone(), world.agents().map(|a| a.inventory.count(&t.item)).sum()))
        .collect()
}

/// 1 when every target is held, each by some agent, at its count. Chests
/// and dropped items do not count.
pub fn score_crafting(world: &WorldState, task: &TaskSpec) -> Score {
    let mut holder = None;
    let ok = task.target_items.iter().all(|t| match world.agents().find(|a| a.inventory.count(&t.item) >= t.count) {
        Some(a) => {
            holder.get_or_insert_with(|| a.name.clone());
            true
        }
        None => false,
    });
    Score {
        value: binary(ok),
        kind: ScoreKind::Binary,
        detail: ScoreDetail::Items { holder: if ok { holder } else { None }, held: held(world, task) },
    }
}

/// Fraction of non-air blueprint cells whose world material matches.
pub fn score_blueprint(world: &WorldState, bp: &Blueprint) -> Score {
    let mut per_level = vec![(0usize, 0usize); bp.levels.len()];
    for (l, pos, want) in bp.cells() {
        if want == AIR {
            continue;
        }
        per_level[l].1 += 1;
        if world.material_at(pos) == want {
            per_level[l].0 += 1;
        }
    }
    let matched: usize = per_level.iter().map(|p| p.0).sum();
    let total: usize = per_level.iter().map(|p| p.1).sum();
    let value = if total == 0 { 1.0 } else { matched as f64 / total as f64 };
    Score { value, kind: ScoreKind::EditDistance, detail: ScoreDetail::Blocks { matched, total, per_level } }
}

pub fn score_task(world: &WorldState, task: &TaskSpec, progress: &mut ProgressStore) -> Score {
    match task.task_type {
        TaskType::Cooking => score_cooking(world, task, progress),
        TaskType::Crafting | TaskType::Techtree => score_crafting(world, task),
        TaskType::Construction => match &task.blueprint {
            Some(bp) => score_blueprint(world, bp),
            None => Score {
                value: 0.0,
                kind: ScoreKind::EditDistance,
                detail: ScoreDetail::Blocks { matched: 0, total: 0, per_level: Vec::new() },
            },
        },
    }
}

/// Blueprint fix lines for one level, or the completion line.
pub fn blueprint_diff(world: &WorldState, bp: &Blueprint, level: Option<usize>) -> Result<String, crate::task::BlueprintError> {
    match level {
        Some(l) => bp.level_report(world, l),
        None => Ok(bp.report(world)),
    }
}

/// Apply fixes directly to the grid, in order. A door placed at its lower
/// cell also fills the upper cell when the blueprint has one there.
pub fn apply_fixes(world: &mut WorldState, bp: &Blueprint, fixes: &[Fix]) {
    for fix in fixes {
        match fix {
            Fix::Remove { pos, .. } => world.put_block(*pos, AIR),
            Fix::Place { material, pos } => {
                if world.material_at(*pos) == material {
                    continue;
                }
                if bp.is_door_upper(*pos) {
                    world.put_door_upper(*pos, material);
                    continue;
                }
                world.put_block(*pos, material);
                let above = pos.above();
                if materials::is_door(material) && bp.material_at(above) == material {
                    world.put_door_upper(above, material);
                }
            }
        }
    }
}
