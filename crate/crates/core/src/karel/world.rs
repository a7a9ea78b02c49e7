//! The 16×16 Karel grid world and its per-cell feature encoding.

use std::fmt;

use thiserror::Error;

/// Side length of every world.
pub const GRID: usize = 16;
pub const CELLS: usize = GRID * GRID;
/// Marker capacity of a cell.
pub const MAX_MARKERS: u8 = 10;
/// Length of the per-cell feature vector.
pub const CELL_FEATURES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    North,
    East,
    South,
    West,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::North, Dir::East, Dir::South, Dir::West];

    pub fn left(self) -> Dir {
        match self {
            Dir::North => Dir::West,
            Dir::West => Dir::South,
            Dir::South => Dir::East,
            Dir::East => Dir::North,
        }
    }

    pub fn right(self) -> Dir {
        match self {
            Dir::North => Dir::East,
            Dir::East => Dir::South,
            Dir::South => Dir::West,
            Dir::West => Dir::North,
        }
    }

    /// Row/column offset of one step; row 0 is the northern edge.
    pub fn delta(self) -> (isize, isize) {
        match self {
            Dir::North => (-1, 0),
            Dir::South => (1, 0),
            Dir::East => (0, 1),
            Dir::West => (0, -1),
        }
    }

    /// Index of the facing feature in the cell encoding.
    fn feature(self) -> usize {
        match self {
            Dir::North => 0,
            Dir::South => 1,
            Dir::West => 2,
            Dir::East => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Cell {
    #[default]
    Empty,
    Obstacle,
    /// 1..=10 markers.
    Markers(u8),
}

impl Cell {
    pub fn markers(self) -> u8 {
        match self {
            Cell::Markers(n) => n,
            _ => 0,
        }
    }

    fn with_markers(n: u8) -> Cell {
        if n == 0 {
            Cell::Empty
        } else {
            Cell::Markers(n)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Agent {
    pub row: usize,
    pub col: usize,
    pub facing: Dir,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorldError {
    #[error("agent at ({row},{col}) is outside the grid")]
    AgentOutOfBounds { row: usize, col: usize },
    #[error("agent at ({row},{col}) stands on an obstacle")]
    AgentOnObstacle { row: usize, col: usize },
    #[error("cell ({row},{col}) holds {count} markers, limit is 10")]
    TooManyMarkers { row: usize, col: usize, count: u8 },
    #[error("encoded world must have {expected} hex digits, got {got}")]
    EncodingLength { expected: usize, got: usize },
    #[error("bad hex digit in cell {cell}")]
    EncodingHex { cell: usize },
    #[error("cell {cell} has an inconsistent feature set {bits:#06x}")]
    EncodingCell { cell: usize, bits: u16 },
    #[error("encoded world has {0} agent cells, expected exactly one")]
    EncodingAgents(usize),
}

/// A world: marker counts and obstacles on a fixed grid plus the agent.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KarelWorld {
    cells: [Cell; CELLS],
    agent: Agent,
}

impl fmt::Debug for KarelWorld {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "KarelWorld(agent=({},{},{:?}))",
            self.agent.row, self.agent.col, self.agent.facing
        )?;
        for r in 0..GRID {
            for c in 0..GRID {
                let ch = if self.agent.row == r && self.agent.col == c {
                    match self.agent.facing {
                        Dir::North => '^',
                        Dir::South => 'v',
                        Dir::East => '>',
                        Dir::West => '<',
                    }
                } else {
                    match self.cells[r * GRID + c] {
                        Cell::Empty => '.',
                        Cell::Obstacle => '#',
                        Cell::Markers(10) => 'X',
                        Cell::Markers(n) => (b'0' + n) as char,
                    }
                };
                write!(f, "{ch}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl KarelWorld {
    /// An empty world with the agent at `agent`.
    pub fn empty(agent: Agent) -> Self {
        KarelWorld {
            cells: [Cell::Empty; CELLS],
            agent,
        }
    }

    /// Build a world and check its invariants.
    pub fn from_parts(cells: [Cell; CELLS], agent: Agent) -> Result<Self, WorldError> {
        let w = KarelWorld { cells, agent };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let Agent { row, col, .. } = self.agent;
        if row >= GRID || col >= GRID {
            return Err(WorldError::AgentOutOfBounds { row, col });
        }
        if self.cells[row * GRID + col] == Cell::Obstacle {
            return Err(WorldError::AgentOnObstacle { row, col });
        }
        for (i, cell) in self.cells.iter().enumerate() {
            if let Cell::Markers(n) = *cell {
                if n == 0 || n > MAX_MARKERS {
                    return Err(WorldError::TooManyMarkers {
                        row: i / GRID,
                        col: i % GRID,
                        count: n,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn agent(&self) -> Agent {
        self.agent
    }

    pub fn cell(&self, row: usize, col: usize) -> Cell {
        self.cells[row * GRID + col]
    }

    pub fn cells(&self) -> &[Cell; CELLS] {
        &self.cells
    }

    pub fn markers_here(&self) -> u8 {
        self.cells[self.agent.row * GRID + self.agent.col].markers()
    }

    pub fn total_markers(&self) -> u32 {
        self.cells.iter().map(|c| u32::from(c.markers())).sum()
    }

    /// Cell reached by one step in direction `dir`, if it is in bounds and free.
    fn step_target(&self, dir: Dir) -> Option<(usize, usize)> {
        let (dr, dc) = dir.delta();
        let r = self.agent.row as isize + dr;
        let c = self.agent.col as isize + dc;
        if r < 0 || c < 0 || r >= GRID as isize || c >= GRID as isize {
            return None;
        }
        let (r, c) = (r as usize, c as usize);
        (self.cells[r * GRID + c] != Cell::Obstacle).then_some((r, c))
    }

    pub fn is_clear(&self, dir: Dir) -> bool {
        self.step_target(dir).is_some()
    }

    /// Move forward; `false` (and no change) if blocked.
    pub(crate) fn try_move(&mut self) -> bool {
        match self.step_target(self.agent.facing) {
            Some((r, c)) => {
                self.agent.row = r;
                self.agent.col = c;
                true
            }
            None => false,
        }
    }

    pub(crate) fn turn_left(&mut self) {
        self.agent.facing = self.agent.facing.left();
    }

    pub(crate) fn turn_right(&mut self) {
        self.agent.facing = self.agent.facing.right();
    }

    pub(crate) fn try_pick(&mut self) -> bool {
        let i = self.agent.row * GRID + self.agent.col;
        let n = self.cells[i].markers();
        if n == 0 {
            return false;
        }
        self.cells[i] = Cell::with_markers(n - 1);
        true
    }

    pub(crate) fn try_put(&mut self) -> bool {
        let i = self.agent.row * GRID + self.agent.col;
        let n = self.cells[i].markers();
        if n >= MAX_MARKERS {
            return false;
        }
        self.cells[i] = Cell::with_markers(n + 1);
        true
    }

    pub fn set_cell(&mut self, row: usize, col: usize, cell: Cell) -> Result<(), WorldError> {
        let old = self.cells[row * GRID + col];
        self.cells[row * GRID + col] = cell;
        if let Err(e) = self.validate() {
            self.cells[row * GRID + col] = old;
            return Err(e);
        }
        Ok(())
    }

    pub fn set_agent(&mut self, agent: Agent) -> Result<(), WorldError> {
        let old = self.agent;
        self.agent = agent;
        if let Err(e) = self.validate() {
            self.agent = old;
            return Err(e);
        }
        Ok(())
    }

    /// The 16 binary features of one cell: facing N/S/W/E (agent cell only),
    /// obstacle, grid boundary, then 1..=10 markers one-hot.
    pub fn cell_features(&self, row: usize, col: usize) -> [bool; CELL_FEATURES] {
        let mut f = [false; CELL_FEATURES];
        if self.agent.row == row && self.agent.col == col {
            f[self.agent.facing.feature()] = true;
        }
        match self.cells[row * GRID + col] {
            Cell::Obstacle => f[4] = true,
            Cell::Markers(n) => f[5 + n as usize] = true,
            Cell::Empty => {}
        }
        // Index 5 (grid boundary) marks padding outside the grid and is never
        // set for an in-grid cell.
        f
    }

    fn cell_bits(&self, row: usize, col: usize) -> u16 {
        self.cell_features(row, col)
            .iter()
            .enumerate()
            .fold(0u16, |acc, (i, &b)| acc | (u16::from(b) << i))
    }

    /// One-line encoding: for each cell in row-major order, four hex digits
    /// holding its 16-feature bitmask (bit i = feature i).
    pub fn encode(&self) -> String {
        let mut s = String::with_capacity(CELLS * 4);
        for r in 0..GRID {
            for c in 0..GRID {
                s.push_str(&format!("{:04x}", self.cell_bits(r, c)));
            }
        }
        s
    }

    pub fn decode(text: &str) -> Result<KarelWorld, WorldError> {
        let text = text.trim();
        if text.len() != CELLS * 4 || !text.is_ascii() {
            return Err(WorldError::EncodingLength {
                expected: CELLS * 4,
                got: text.len(),
            });
        }
        let mut cells = [Cell::Empty; CELLS];
        let mut agent = None;
        let mut agents = 0;
        for (i, cell) in cells.iter_mut().enumerate() {
            let bits = u16::from_str_radix(&text[i * 4..i * 4 + 4], 16)
                .map_err(|_| WorldError::EncodingHex { cell: i })?;
            let facing_bits = bits & 0xf;
            let obstacle = bits & (1 << 4) != 0;
            let boundary = bits & (1 << 5) != 0;
            let marker_bits = bits >> 6;
            if boundary || facing_bits.count_ones() > 1 || marker_bits.count_ones() > 1 {
                return Err(WorldError::EncodingCell { cell: i, bits });
            }
            if obstacle && marker_bits != 0 {
                return Err(WorldError::EncodingCell { cell: i, bits });
            }
            *cell = if obstacle {
                Cell::Obstacle
            } else if marker_bits != 0 {
                Cell::Markers(marker_bits.trailing_zeros() as u8 + 1)
            } else {
                Cell::Empty
            };
            if facing_bits != 0 {
                agents += 1;
                let facing = match facing_bits.trailing_zeros() {
                    0 => Dir::North,
                    1 => Dir::South,
                    2 => Dir::West,
                    _ => Dir::East,
                };
                agent = Some(Agent {
                    row: i / GRID,
                    col: i % GRID,
                    facing,
                });
            }
        }
        if agents != 1 {
            return Err(WorldError::EncodingAgents(agents));
        }
        KarelWorld::from_parts(cells, agent.expect("one agent"))
    }
}

/// The start-signal world: no obstacles, no markers, agent at (8,8) facing north.
pub fn build_start_world() -> KarelWorld {
    KarelWorld::empty(Agent {
        row: GRID / 2,
        col: GRID / 2,
        facing: Dir::North,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_world_is_empty_and_centered() {
        let w = build_start_world();
        assert_eq!(
            w.agent(),
            Agent {
                row: 8,
                col: 8,
                facing: Dir::North
            }
        );
        assert!(w.cells().iter().all(|c| *c == Cell::Empty));
        assert!(w.validate().is_ok());
    }

    #[test]
    fn encoding_round_trips() {
        let mut w = build_start_world();
        w.set_cell(0, 0, Cell::Obstacle).unwrap();
        w.set_cell(8, 8, Cell::Markers(10)).unwrap();
        w.set_cell(15, 3, Cell::Markers(1)).unwrap();
        let text = w.encode();
        assert_eq!(text.len(), 1024);
        assert_eq!(KarelWorld::decode(&text).unwrap(), w);
        // agent cell: facing north (bit 0) and 10 markers (bit 15)
        assert_eq!(&text[(8 * 16 + 8) * 4..(8 * 16 + 8) * 4 + 4], "8001");
    }

    #[test]
    fn decode_rejects_bad_cells() {
        let mut text = build_start_world().encode();
        text.replace_range(0..4, "0030");
        assert!(matches!(
            KarelWorld::decode(&text),
            Err(WorldError::EncodingCell { cell: 0, .. })
        ));
        let no_agent = "0000".repeat(CELLS);
        assert_eq!(
            KarelWorld::decode(&no_agent),
            Err(WorldError::EncodingAgents(0))
        );
    }

    #[test]
    fn setters_keep_invariants() {
        let mut w = build_start_world();
        assert!(w.set_cell(8, 8, Cell::Obstacle).is_err());
        assert_eq!(w.cell(8, 8), Cell::Empty);
        assert!(w.set_cell(1, 1, Cell::Markers(11)).is_err());
        assert!(w
            .set_agent(Agent {
                row: 16,
                col: 0,
                facing: Dir::East
            })
            .is_err());
    }
}
