use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EnvError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn step(self, dir: Dir) -> Self {
        let (dx, dy) = dir.delta();
        Self::new(self.x + dx, self.y + dy)
    }

    /// Direction from `self` to an orthogonally adjacent `other`.
    pub fn direction_to(self, other: Pos) -> Option<Dir> {
        Dir::ALL.into_iter().find(|&d| self.step(d) == other)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    N,
    S,
    E,
    W,
}

impl Dir {
    /// Expansion order used by path search.
    pub const ALL: [Dir; 4] = [Dir::N, Dir::S, Dir::E, Dir::W];

    pub fn delta(self) -> (i32, i32) {
        match self {
            Dir::N => (0, -1),
            Dir::S => (0, 1),
            Dir::E => (1, 0),
            Dir::W => (-1, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellKind {
    Floor,
    Counter,
    OnionDispenser,
    TomatoDispenser,
    PlateDispenser,
    Pot,
    DeliveryStation,
}

impl CellKind {
    pub fn from_char(c: char) -> Option<Self> {
        Some(match c {
            '.' | ' ' | 'A' => CellKind::Floor,
            '#' => CellKind::Counter,
            'O' => CellKind::OnionDispenser,
            'T' => CellKind::TomatoDispenser,
            'D' => CellKind::PlateDispenser,
            'P' => CellKind::Pot,
            'S' => CellKind::DeliveryStation,
            _ => return None,
        })
    }

    pub fn to_char(self) -> char {
        match self {
            CellKind::Floor => '.',
            CellKind::Counter => '#',
            CellKind::OnionDispenser => 'O',
            CellKind::TomatoDispenser => 'T',
            CellKind::PlateDispenser => 'D',
            CellKind::Pot => 'P',
            CellKind::DeliveryStation => 'S',
        }
    }

    /// Object class name for cells the agent can target, in listing order.
    pub fn object_name(self) -> Option<&'static str> {
        match self {
            CellKind::OnionDispenser => Some("onion"),
            CellKind::TomatoDispenser => Some("tomato"),
            CellKind::PlateDispenser => Some("plate"),
            CellKind::Pot => Some("pot"),
            CellKind::DeliveryStation => Some("delivery"),
            CellKind::Floor | CellKind::Counter => None,
        }
    }

    pub const TARGETABLE: [CellKind; 5] = [
        CellKind::OnionDispenser,
        CellKind::TomatoDispenser,
        CellKind::PlateDispenser,
        CellKind::Pot,
        CellKind::DeliveryStation,
    ];
}

/// Rectangular kitchen map. Row-major; `(0, 0)` is the top-left corner and
/// `y` grows downwards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    width: i32,
    height: i32,
    cells: Vec<CellKind>,
}

impl Grid {
    pub fn new(width: i32, height: i32, fill: CellKind) -> Self {
        assert!(width > 0 && height > 0, "grid must be non-empty");
        Self {
            width,
            height,
            cells: vec![fill; (width * height) as usize],
        }
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.width && p.y < self.height
    }

    pub fn get(&self, p: Pos) -> Option<CellKind> {
        self.in_bounds(p)
            .then(|| self.cells[(p.y * self.width + p.x) as usize])
    }

    pub fn set(&mut self, p: Pos, kind: CellKind) {
        assert!(self.in_bounds(p), "{p} out of bounds");
        self.cells[(p.y * self.width + p.x) as usize] = kind;
    }

    pub fn is_floor(&self, p: Pos) -> bool {
        self.get(p) == Some(CellKind::Floor)
    }

    /// Every cell in scan order (rows top to bottom, left to right).
    pub fn cells(&self) -> impl Iterator<Item = (Pos, CellKind)> + '_ {
        self.cells.iter().enumerate().map(move |(i, &kind)| {
            let i = i as i32;
            (Pos::new(i % self.width, i / self.width), kind)
        })
    }

    pub fn cells_of(&self, kind: CellKind) -> Vec<Pos> {
        self.cells()
            .filter(|&(_, k)| k == kind)
            .map(|(p, _)| p)
            .collect()
    }

    pub fn render(&self) -> Vec<String> {
        (0..self.height)
            .map(|y| {
                (0..self.width)
                    .map(|x| self.get(Pos::new(x, y)).unwrap().to_char())
                    .collect()
            })
            .collect()
    }
}

/// A parsed layout file: the grid plus the agent's starting cell.
///
/// Legend: `#` counter, `.` or space floor, `A` agent start (floor),
/// `O` onion dispenser, `T` tomato dispenser, `D` plate dispenser, `P` pot,
/// `S` delivery station.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub grid: Grid,
    pub start: Pos,
}

pub const DEFAULT_LAYOUT: &str = include_str!("../../data/default_layout.txt");

impl Layout {
    pub fn default_kitchen() -> Self {
        DEFAULT_LAYOUT.parse().expect("bundled layout parses")
    }

    pub fn to_text(&self) -> String {
        let mut rows = self.grid.render();
        let row = &mut rows[self.start.y as usize];
        row.replace_range(self.start.x as usize..self.start.x as usize + 1, "A");
        let mut text = rows.join("\n");
        text.push('\n');
        text
    }
}

impl FromStr for Layout {
    type Err = EnvError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = |msg: String| EnvError::BadLayout(msg);
        let rows: Vec<&str> = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.trim().is_empty())
            .collect();
        if rows.is_empty() {
            return Err(bad("layout is empty".into()));
        }
        let width = rows[0].chars().count();
        let mut grid = Grid::new(width as i32, rows.len() as i32, CellKind::Counter);
        let mut start = None;
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(bad(format!("row {} has a different width", y + 1)));
            }
            for (x, c) in row.chars().enumerate() {
                let kind = CellKind::from_char(c)
                    .ok_or_else(|| bad(format!("unknown cell '{c}' at row {}", y + 1)))?;
                let p = Pos::new(x as i32, y as i32);
                grid.set(p, kind);
                if c == 'A' {
                    if start.is_some() {
                        return Err(bad("more than one agent start".into()));
                    }
                    start = Some(p);
                }
            }
        }
        let start = start.ok_or_else(|| bad("no agent start 'A'".into()))?;
        for (p, kind) in grid.cells() {
            let border = p.x == 0 || p.y == 0 || p.x == grid.width - 1 || p.y == grid.height - 1;
            if border && kind == CellKind::Floor {
                return Err(bad(format!("border cell {p} is floor")));
            }
        }
        if grid.cells_of(CellKind::Pot).is_empty() {
            return Err(bad("layout has no pot".into()));
        }
        Ok(Layout { grid, start })
    }
}
