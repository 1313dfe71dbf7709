//! Random kitchens and an independent shortest-path oracle for them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tasklearn::env::{CellKind, Dir, Grid, Pos};

/// A `width`×`height` grid with a counter border and random interior: floor
/// with probability 0.65, otherwise a random non-floor kind. Returns the
/// grid, a floor start cell and a target cell.
pub fn random_case(seed: u64, width: i32, height: i32) -> (Grid, Pos, Pos) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let solid = [
        CellKind::Counter,
        CellKind::OnionDispenser,
        CellKind::TomatoDispenser,
        CellKind::PlateDispenser,
        CellKind::Pot,
        CellKind::DeliveryStation,
    ];
    loop {
        let mut grid = Grid::new(width, height, CellKind::Counter);
        for y in 1..height - 1 {
            for x in 1..width - 1 {
                let kind = if rng.gen_bool(0.65) {
                    CellKind::Floor
                } else {
                    solid[rng.gen_range(0..solid.len())]
                };
                grid.set(Pos::new(x, y), kind);
            }
        }
        let floors: Vec<Pos> = grid.cells_of(CellKind::Floor);
        if floors.is_empty() {
            continue;
        }
        let from = floors[rng.gen_range(0..floors.len())];
        let target = Pos::new(rng.gen_range(0..width), rng.gen_range(0..height));
        return (grid, from, target);
    }
}

/// Length of the shortest floor walk from `from` to a floor cell next to
/// `target`, by repeated relaxation of all edges until nothing changes.
pub fn oracle_len(grid: &Grid, from: Pos, target: Pos) -> Option<usize> {
    let (w, h) = (grid.width(), grid.height());
    let idx = |p: Pos| (p.y * w + p.x) as usize;
    let mut dist = vec![usize::MAX; (w * h) as usize];
    dist[idx(from)] = 0;
    let mut changed = true;
    while changed {
        changed = false;
        for y in 0..h {
            for x in 0..w {
                let p = Pos::new(x, y);
                if !grid.is_floor(p) || dist[idx(p)] == usize::MAX {
                    continue;
                }
                for (dx, dy) in [(0, 1), (0, -1), (1, 0), (-1, 0)] {
                    let q = Pos::new(x + dx, y + dy);
                    if grid.is_floor(q) && dist[idx(p)] + 1 < dist[idx(q)] {
                        dist[idx(q)] = dist[idx(p)] + 1;
                        changed = true;
                    }
                }
            }
        }
    }
    (0..h)
        .flat_map(|y| (0..w).map(move |x| Pos::new(x, y)))
        .filter(|p| grid.is_floor(*p) && (p.x - target.x).abs() + (p.y - target.y).abs() == 1)
        .map(|p| dist[idx(p)])
        .filter(|d| *d != usize::MAX)
        .min()
}

/// The walk stays on floor and ends next to the target.
pub fn path_is_valid(grid: &Grid, from: Pos, target: Pos, path: &[Dir]) -> bool {
    let mut p = from;
    for &d in path {
        p = p.step(d);
        if !grid.is_floor(p) {
            return false;
        }
    }
    (p.x - target.x).abs() + (p.y - target.y).abs() == 1
}
