use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{CellKind, Dir, Grid, Layout, Pos};
use super::path::bfs_path;
use super::{EnvError, ObjectRef};
use crate::htn::{PrimitiveCall, MOVE_TO, PRESS_SPACE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Milestone {
    PickedUpOnion,
    OnionInPot,
    PotTurnedOn,
    SoupPlated,
    SoupDelivered,
}

impl Milestone {
    pub const ALL: [Milestone; 5] = [
        Milestone::PickedUpOnion,
        Milestone::OnionInPot,
        Milestone::PotTurnedOn,
        Milestone::SoupPlated,
        Milestone::SoupDelivered,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Milestone::PickedUpOnion => "PickedUpOnion",
            Milestone::OnionInPot => "OnionInPot",
            Milestone::PotTurnedOn => "PotTurnedOn",
            Milestone::SoupPlated => "SoupPlated",
            Milestone::SoupDelivered => "SoupDelivered",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ingredient {
    Onion,
    Tomato,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Holding {
    Nothing,
    Onion,
    Tomato,
    CleanPlate,
    SoupPlate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PotPhase {
    Idle,
    Cooking { remaining: u32 },
    Ready,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotState {
    pub cell: Pos,
    pub contents: Vec<Ingredient>,
    pub phase: PotPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agent {
    pub pos: Pos,
    pub facing: Dir,
    pub holding: Holding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldConfig {
    /// Ticks between turning a pot on and the soup being ready. Zero makes
    /// soup ready the moment the pot is switched on.
    pub cook_ticks: u32,
    pub pot_capacity: usize,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            cook_ticks: 0,
            pot_capacity: 3,
        }
    }
}

/// Result of one `moveTo`: the steps walked and whether a final turn in
/// place was needed to face the target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveOutcome {
    pub target: Pos,
    pub moves: Vec<Dir>,
    pub turned: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldState {
    grid: Arc<Grid>,
    pub agent: Agent,
    pub pots: Vec<PotState>,
    pub milestones: BTreeSet<Milestone>,
    pub tick: u64,
    pub config: WorldConfig,
}

/// Frozen copy of a world for undo.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot(WorldState);

impl WorldState {
    pub fn new(layout: &Layout, config: WorldConfig) -> Self {
        let pots = layout
            .grid
            .cells_of(CellKind::Pot)
            .into_iter()
            .map(|cell| PotState {
                cell,
                contents: Vec::new(),
                phase: PotPhase::Idle,
            })
            .collect();
        Self {
            grid: Arc::new(layout.grid.clone()),
            agent: Agent {
                pos: layout.start,
                facing: Dir::N,
                holding: Holding::Nothing,
            },
            pots,
            milestones: BTreeSet::new(),
            tick: 0,
            config,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot(self.clone())
    }

    pub fn restore(snapshot: &Snapshot) -> WorldState {
        snapshot.0.clone()
    }

    /// Object refs the agent can target: one per targetable cell, grouped by
    /// class in a fixed order. The first instance of a class takes the bare
    /// class name, later ones get `2`, `3`, ... appended in scan order.
    pub fn list_objects(&self) -> Vec<ObjectRef> {
        let mut out = Vec::new();
        for kind in CellKind::TARGETABLE {
            let base = kind.object_name().expect("targetable");
            let count = self.grid.cells_of(kind).len();
            for n in 0..count {
                out.push(if n == 0 {
                    ObjectRef::new(base)
                } else {
                    ObjectRef::new(format!("{base}{}", n + 1))
                });
            }
        }
        out
    }

    /// Cells a ref may denote. A bare class name covers every instance of
    /// that class; a numbered ref names exactly one.
    fn resolve(&self, target: &ObjectRef) -> Result<Vec<Pos>, EnvError> {
        let name = target.as_str();
        for kind in CellKind::TARGETABLE {
            let base = kind.object_name().expect("targetable");
            let Some(rest) = name.strip_prefix(base) else {
                continue;
            };
            let cells = self.grid.cells_of(kind);
            if rest.is_empty() && !cells.is_empty() {
                return Ok(cells);
            }
            if let Ok(n) = rest.parse::<usize>() {
                if n >= 2 && n <= cells.len() {
                    return Ok(vec![cells[n - 1]]);
                }
            }
        }
        Err(EnvError::UnknownObject(target.clone()))
    }

    /// Walks to the nearest cell adjacent to `target` and turns to face it.
    pub fn move_to(&self, target: &ObjectRef) -> Result<(WorldState, MoveOutcome), EnvError> {
        let candidates = self.resolve(target)?;
        let mut best: Option<(Pos, Vec<Dir>)> = None;
        for cell in candidates {
            if let Ok(path) = bfs_path(&self.grid, self.agent.pos, cell) {
                if best.as_ref().is_none_or(|(_, b)| path.len() < b.len()) {
                    best = Some((cell, path));
                }
            }
        }
        let (cell, moves) = best.ok_or_else(|| EnvError::Unreachable(self.resolve(target).unwrap()[0]))?;
        let mut next = self.clone();
        for &dir in &moves {
            next.agent.pos = next.agent.pos.step(dir);
            next.agent.facing = dir;
            next.advance(1);
        }
        let want = next
            .agent
            .pos
            .direction_to(cell)
            .expect("path ends adjacent to target");
        let turned = next.agent.facing != want;
        if turned {
            next.agent.facing = want;
            next.advance(1);
        }
        Ok((
            next,
            MoveOutcome {
                target: cell,
                moves,
                turned,
            },
        ))
    }

    pub fn facing_cell(&self) -> Pos {
        self.agent.pos.step(self.agent.facing)
    }

    /// Interacts with whatever the agent faces. Never fails: contexts with no
    /// defined interaction leave the state untouched. Returns milestones
    /// reached for the first time.
    pub fn press_space(&self) -> (WorldState, Vec<Milestone>) {
        let facing = self.facing_cell();
        let Some(kind) = self.grid.get(facing) else {
            return (self.clone(), Vec::new());
        };
        let mut next = self.clone();
        next.advance(1);
        let mut reached = Vec::new();
        let holding = self.agent.holding;
        let applied = match (kind, holding) {
            (CellKind::OnionDispenser, Holding::Nothing) => {
                next.agent.holding = Holding::Onion;
                reached.push(Milestone::PickedUpOnion);
                true
            }
            (CellKind::TomatoDispenser, Holding::Nothing) => {
                next.agent.holding = Holding::Tomato;
                true
            }
            (CellKind::PlateDispenser, Holding::Nothing) => {
                next.agent.holding = Holding::CleanPlate;
                true
            }
            (CellKind::Pot, _) => next.interact_pot(facing, &mut reached),
            (CellKind::DeliveryStation, Holding::SoupPlate) => {
                next.agent.holding = Holding::Nothing;
                reached.push(Milestone::SoupDelivered);
                true
            }
            _ => false,
        };
        if !applied {
            return (self.clone(), Vec::new());
        }
        let fresh: Vec<Milestone> = reached
            .into_iter()
            .filter(|m| next.milestones.insert(*m))
            .collect();
        (next, fresh)
    }

    fn interact_pot(&mut self, cell: Pos, reached: &mut Vec<Milestone>) -> bool {
        let capacity = self.config.pot_capacity;
        let cook_ticks = self.config.cook_ticks;
        let holding = self.agent.holding;
        let pot = self
            .pots
            .iter_mut()
            .find(|p| p.cell == cell)
            .expect("every pot cell has state");
        match (pot.phase, holding) {
            (PotPhase::Idle, Holding::Onion | Holding::Tomato) if pot.contents.len() < capacity => {
                let ingredient = if holding == Holding::Onion {
                    reached.push(Milestone::OnionInPot);
                    Ingredient::Onion
                } else {
                    Ingredient::Tomato
                };
                pot.contents.push(ingredient);
                self.agent.holding = Holding::Nothing;
                true
            }
            (PotPhase::Idle, Holding::Nothing) if !pot.contents.is_empty() => {
                pot.phase = if cook_ticks == 0 {
                    PotPhase::Ready
                } else {
                    PotPhase::Cooking {
                        remaining: cook_ticks,
                    }
                };
                reached.push(Milestone::PotTurnedOn);
                true
            }
            (PotPhase::Ready, Holding::CleanPlate) => {
                pot.contents.clear();
                pot.phase = PotPhase::Idle;
                self.agent.holding = Holding::SoupPlate;
                reached.push(Milestone::SoupPlated);
                true
            }
            _ => false,
        }
    }

    /// Advances the clock; cooking pots count down and become ready.
    pub fn advance(&mut self, ticks: u32) {
        for _ in 0..ticks {
            self.tick += 1;
            for pot in &mut self.pots {
                if let PotPhase::Cooking { remaining } = pot.phase {
                    pot.phase = if remaining <= 1 {
                        PotPhase::Ready
                    } else {
                        PotPhase::Cooking {
                            remaining: remaining - 1,
                        }
                    };
                }
            }
        }
    }

    /// Runs one primitive call against the world.
    pub fn apply(&self, call: &PrimitiveCall) -> Result<(WorldState, Vec<Milestone>), EnvError> {
        match (call.action.as_str(), call.args.as_slice()) {
            (MOVE_TO, [target]) => self.move_to(target).map(|(w, _)| (w, Vec::new())),
            (PRESS_SPACE, []) => Ok(self.press_space()),
            _ => Err(EnvError::UnknownPrimitive(call.to_string())),
        }
    }

    /// Text picture of the kitchen with the agent drawn as an arrow.
    pub fn render(&self) -> Vec<String> {
        let mut rows: Vec<Vec<char>> = self
            .grid
            .render()
            .into_iter()
            .map(|r| r.chars().collect())
            .collect();
        let arrow = match self.agent.facing {
            Dir::N => '^',
            Dir::S => 'v',
            Dir::E => '>',
            Dir::W => '<',
        };
        rows[self.agent.pos.y as usize][self.agent.pos.x as usize] = arrow;
        rows.into_iter().map(|r| r.into_iter().collect()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kitchen() -> WorldState {
        WorldState::new(&Layout::default_kitchen(), WorldConfig::default())
    }

    fn obj(s: &str) -> ObjectRef {
        ObjectRef::new(s)
    }

    #[test]
    fn default_objects() {
        let names: Vec<String> = kitchen().list_objects().iter().map(|o| o.to_string()).collect();
        assert_eq!(names, ["onion", "tomato", "plate", "pot", "delivery"]);
    }

    #[test]
    fn objects_without_tomato_and_with_two_pots() {
        let layout: Layout = "\
#O#P#P#
#.....D
#..A..#
###S###
"
        .parse()
        .unwrap();
        let world = WorldState::new(&layout, WorldConfig::default());
        let names: Vec<String> = world.list_objects().iter().map(|o| o.to_string()).collect();
        // dispensers then stations, instances in scan order
        let mut expected = Vec::new();
        for kind in CellKind::TARGETABLE {
            for (i, _) in layout.grid.cells_of(kind).iter().enumerate() {
                let base = kind.object_name().unwrap();
                expected.push(if i == 0 { base.to_string() } else { format!("{base}{}", i + 1) });
            }
        }
        assert_eq!(names, expected);
        assert_eq!(names, ["onion", "plate", "pot", "pot2", "delivery"]);
        assert!(!names.contains(&"tomato".to_string()));
    }

    #[test]
    fn move_to_faces_target() {
        let world = kitchen();
        let (next, outcome) = world.move_to(&obj("onion")).unwrap();
        assert_eq!(next.facing_cell(), Pos::new(2, 0));
        assert_eq!(next.grid().get(next.facing_cell()), Some(CellKind::OnionDispenser));
        let expected_ticks = outcome.moves.len() as u64 + outcome.turned as u64;
        assert_eq!(next.tick, expected_ticks);
    }

    #[test]
    fn move_to_when_adjacent_only_turns() {
        let world = kitchen();
        let (at_pot, _) = world.move_to(&obj("pot")).unwrap();
        let mut turned_away = at_pot.clone();
        turned_away.agent.facing = Dir::S;
        let (again, outcome) = turned_away.move_to(&obj("pot")).unwrap();
        assert!(outcome.moves.is_empty());
        assert!(outcome.turned);
        assert_eq!(again.agent.pos, at_pot.agent.pos);
        assert_eq!(again.agent.facing, at_pot.agent.facing);
    }

    #[test]
    fn repeated_move_is_noop() {
        let (once, _) = kitchen().move_to(&obj("pot")).unwrap();
        let (twice, outcome) = once.move_to(&obj("pot")).unwrap();
        assert!(outcome.moves.is_empty() && !outcome.turned);
        assert_eq!(once, twice);
    }

    #[test]
    fn move_to_unknown_object() {
        assert_eq!(
            kitchen().move_to(&obj("knife")).unwrap_err(),
            EnvError::UnknownObject(obj("knife"))
        );
        assert!(kitchen().move_to(&obj("pot2")).is_err());
    }

    #[test]
    fn nearest_instance_wins() {
        let layout: Layout = "\
#P#####P#
#A......#
#########
"
        .parse()
        .unwrap();
        let world = WorldState::new(&layout, WorldConfig::default());
        let (_, outcome) = world.move_to(&obj("pot")).unwrap();
        assert_eq!(outcome.target, Pos::new(1, 0));
        let (_, outcome) = world.move_to(&obj("pot2")).unwrap();
        assert_eq!(outcome.target, Pos::new(7, 0));
    }

    #[test]
    fn pick_up_onion() {
        let (at, _) = kitchen().move_to(&obj("onion")).unwrap();
        let (next, reached) = at.press_space();
        assert_eq!(next.agent.holding, Holding::Onion);
        assert_eq!(reached, [Milestone::PickedUpOnion]);
    }

    #[test]
    fn press_space_facing_floor_is_noop() {
        let world = kitchen();
        let mut facing_floor = world.clone();
        facing_floor.agent.facing = Dir::E;
        let (next, reached) = facing_floor.press_space();
        assert_eq!(next, facing_floor);
        assert!(reached.is_empty());
    }

    fn run(world: WorldState, script: &[(&str, Option<&str>)]) -> (WorldState, Vec<Milestone>) {
        let mut all = Vec::new();
        let mut w = world;
        for (action, arg) in script {
            let call = PrimitiveCall {
                action: action.to_string(),
                args: arg.map(obj).into_iter().collect(),
            };
            let (next, reached) = w.apply(&call).unwrap();
            all.extend(reached);
            w = next;
        }
        (w, all)
    }

    const ONION_SOUP: [(&str, Option<&str>); 10] = [
        (MOVE_TO, Some("onion")),
        (PRESS_SPACE, None),
        (MOVE_TO, Some("pot")),
        (PRESS_SPACE, None),
        (PRESS_SPACE, None),
        (MOVE_TO, Some("plate")),
        (PRESS_SPACE, None),
        (MOVE_TO, Some("pot")),
        (PRESS_SPACE, None),
        (MOVE_TO, Some("delivery")),
    ];

    #[test]
    fn onion_soup_reaches_every_milestone() {
        let (w, reached) = run(kitchen(), &ONION_SOUP);
        let (w, last) = w.press_space();
        assert_eq!(last, [Milestone::SoupDelivered]);
        assert_eq!(w.milestones, Milestone::ALL.into_iter().collect());
        assert_eq!(reached.len() + last.len(), 5);
        assert_eq!(w.agent.holding, Holding::Nothing);
    }

    #[test]
    fn cooking_takes_ticks_when_configured() {
        let world = WorldState::new(
            &Layout::default_kitchen(),
            WorldConfig {
                cook_ticks: 3,
                pot_capacity: 3,
            },
        );
        let (w, _) = run(world, &ONION_SOUP[..5]);
        assert_eq!(w.pots[0].phase, PotPhase::Cooking { remaining: 3 });
        let snap = w.snapshot();
        let mut later = w.clone();
        later.advance(2);
        assert_eq!(later.pots[0].phase, PotPhase::Cooking { remaining: 1 });
        let restored = WorldState::restore(&snap);
        assert_eq!(restored.pots[0].phase, PotPhase::Cooking { remaining: 3 });
        assert_eq!(restored, w);
        later.advance(5);
        assert_eq!(later.pots[0].phase, PotPhase::Ready);
    }

    #[test]
    fn plating_before_ready_is_noop() {
        let world = WorldState::new(
            &Layout::default_kitchen(),
            WorldConfig {
                cook_ticks: 50,
                pot_capacity: 3,
            },
        );
        let (w, _) = run(world, &ONION_SOUP[..9]);
        assert_eq!(w.agent.holding, Holding::CleanPlate);
        assert!(!w.milestones.contains(&Milestone::SoupPlated));
    }

    #[test]
    fn snapshot_round_trip() {
        let w = kitchen();
        let snap = w.snapshot();
        let (moved, _) = w.move_to(&obj("delivery")).unwrap();
        assert_ne!(moved, w);
        assert_eq!(WorldState::restore(&snap), w);
        assert_eq!(w.snapshot(), kitchen().snapshot());
    }
}
