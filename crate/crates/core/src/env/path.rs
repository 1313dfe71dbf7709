use std::collections::VecDeque;

use super::grid::{Dir, Grid, Pos};
use super::EnvError;

/// Shortest walk over floor cells from `from` to any floor cell orthogonally
/// adjacent to `target`.
///
/// Neighbours are expanded N, S, E, W and the frontier is FIFO, so the
/// returned path is the same for the same inputs.
pub fn bfs_path(grid: &Grid, from: Pos, target: Pos) -> Result<Vec<Dir>, EnvError> {
    if !grid.is_floor(from) {
        return Err(EnvError::NotFloor(from));
    }
    if !grid.in_bounds(target) {
        return Err(EnvError::Unreachable(target));
    }
    let is_goal = |p: Pos| p.direction_to(target).is_some();

    let width = grid.width() as usize;
    let index = |p: Pos| p.y as usize * width + p.x as usize;
    let mut parent: Vec<Option<(Pos, Dir)>> = vec![None; width * grid.height() as usize];
    let mut seen = vec![false; parent.len()];
    let mut queue = VecDeque::from([from]);
    seen[index(from)] = true;

    while let Some(p) = queue.pop_front() {
        if is_goal(p) {
            let mut moves = Vec::new();
            let mut cur = p;
            while let Some((prev, dir)) = parent[index(cur)] {
                moves.push(dir);
                cur = prev;
            }
            moves.reverse();
            return Ok(moves);
        }
        for dir in Dir::ALL {
            let next = p.step(dir);
            if grid.is_floor(next) && !seen[index(next)] {
                seen[index(next)] = true;
                parent[index(next)] = Some((p, dir));
                queue.push_back(next);
            }
        }
    }
    Err(EnvError::Unreachable(target))
}
