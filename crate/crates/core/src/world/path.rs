//! Grid pathfinding: 4-neighbour moves with a one-block step up and short drops.

use super::{materials, BlockPos, WorldState};
use std::collections::{HashMap, VecDeque};

/// Largest fall an agent will take in a single move.
pub const MAX_DROP: i32 = 3;

/// Upper bound on explored cells; worlds are small enough that this only
/// triggers for degenerate callers.
const MAX_EXPANSIONS: usize = 250_000;

const DIRECTIONS: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

impl WorldState {
    /// An agent can occupy `pos` when the cell is passable and it is held up
    /// either by the block below or by a solid horizontal neighbour.
    pub fn is_standable(&self, pos: BlockPos) -> bool {
        if !self.bounds.contains(pos) {
            return false;
        }
        if !materials::is_passable(self.material_at(pos)) {
            return false;
        }
        if materials::is_solid(self.material_at(pos.below())) {
            return true;
        }
        DIRECTIONS.iter().any(|&(dx, dz)| {
            let side = pos.offset(dx, 0, dz);
            self.bounds.contains(side) && materials::is_solid(self.material_at(side))
        })
    }

    /// Cells reachable from `from` in one move, in a fixed order.
    pub fn neighbours(&self, from: BlockPos) -> Vec<BlockPos> {
        let mut out = Vec::with_capacity(8);
        for &(dx, dz) in &DIRECTIONS {
            // level move, step up, then drops
            for dy in [0, 1, -1, -2, -3] {
                if dy < -MAX_DROP {
                    continue;
                }
                let to = from.offset(dx, dy, dz);
                if !self.is_standable(to) {
                    continue;
                }
                if dy == 1 && !materials::is_passable(self.material_at(from.above())) {
                    continue;
                }
                if dy < 0 {
                    // the column we fall through must be open
                    let clear = (to.y + 1..=from.y).all(|y| {
                        materials::is_passable(self.material_at(BlockPos::new(to.x, y, to.z)))
                    });
                    if !clear {
                        continue;
                    }
                }
                out.push(to);
            }
        }
        out
    }

    /// Breadth-first shortest path from `from` to the first cell satisfying
    /// `goal`. The returned path excludes `from`; an empty path means `from`
    /// already satisfies the goal.
    pub fn find_path<F>(&self, from: BlockPos, goal: F) -> Option<Vec<BlockPos>>
    where
        F: Fn(BlockPos) -> bool,
    {
        if goal(from) {
            return Some(Vec::new());
        }
        let mut parent: HashMap<BlockPos, BlockPos> = HashMap::new();
        let mut queue = VecDeque::new();
        parent.insert(from, from);
        queue.push_back(from);
        let mut expanded = 0usize;
        while let Some(cur) = queue.pop_front() {
            expanded += 1;
            if expanded > MAX_EXPANSIONS {
                return None;
            }
            for next in self.neighbours(cur) {
                if parent.contains_key(&next) {
                    continue;
                }
                parent.insert(next, cur);
                if goal(next) {
                    let mut path = vec![next];
                    let mut at = next;
                    while let Some(&p) = parent.get(&at) {
                        if p == from {
                            break;
                        }
                        path.push(p);
                        at = p;
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(next);
            }
        }
        None
    }

    /// Path to any standable cell within `closeness` (Euclidean) of `target`.
    pub fn path_near(&self, from: BlockPos, target: BlockPos, closeness: f64) -> Option<Vec<BlockPos>> {
        self.find_path(from, |p| p.distance(target) <= closeness + 1e-9)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Bounds, WorldState};
    use super::*;

    fn flat() -> WorldState {
        WorldState::empty(Bounds::around(BlockPos::new(0, -60, 0), 8, 8), 1, "plains")
    }

    #[test]
    fn straight_line_path_has_manhattan_length() {
        let w = flat();
        let from = BlockPos::new(0, -60, 0);
        let to = BlockPos::new(3, -60, -2);
        let path = w.path_near(from, to, 0.0).unwrap();
        assert_eq!(path.len(), 5);
        assert_eq!(*path.last().unwrap(), to);
    }

    #[test]
    fn step_up_onto_a_block() {
        let mut w = flat();
        w.put_block(BlockPos::new(1, -60, 0), "stone");
        let path = w
            .path_near(BlockPos::new(0, -60, 0), BlockPos::new(1, -59, 0), 0.0)
            .unwrap();
        assert_eq!(path, vec![BlockPos::new(1, -59, 0)]);
    }

    #[test]
    fn two_block_wall_cannot_be_stepped_directly() {
        let mut w = flat();
        // a full ring of 2-high wall around the origin with the ring interior
        // ceiling closed off, so no cling-climbing is possible from inside.
        for x in -2i32..=2 {
            for z in -2i32..=2 {
                if x.abs() == 2 || z.abs() == 2 {
                    for y in -60..=-57 {
                        w.put_block(BlockPos::new(x, y, z), "stone");
                    }
                }
            }
        }
        for x in -1..=1 {
            for z in -1..=1 {
                w.put_block(BlockPos::new(x, -58, z), "stone");
            }
        }
        let inside = BlockPos::new(0, -60, 0);
        assert!(w.path_near(inside, BlockPos::new(5, -60, 5), 0.0).is_none());
    }
}
