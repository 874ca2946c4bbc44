use std::collections::HashMap;

use super::{ActionId, Mdp, MdpBuilder, MdpError, Path, StateId};
use crate::task::{Alphabet, Symbol};

/// Tile colors; the discriminant is the symbol index in [`Color::alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    Red = 0,
    Blue = 1,
    Yellow = 2,
    Brown = 3,
    Blank = 4,
}

impl Color {
    pub const ALL: [Color; 5] = [Color::Red, Color::Blue, Color::Yellow, Color::Brown, Color::Blank];

    /// `{r, b, y, n, _}` in that order.
    pub fn alphabet() -> Alphabet {
        Alphabet::new(["r", "b", "y", "n", "_"]).expect("static alphabet")
    }

    pub fn symbol(self) -> Symbol {
        self as Symbol
    }

    pub fn from_map_char(c: char) -> Option<Color> {
        Some(match c {
            'r' => Color::Red,
            'b' => Color::Blue,
            'y' => Color::Yellow,
            'n' => Color::Brown,
            '.' => Color::Blank,
            _ => return None,
        })
    }

    pub fn map_char(self) -> char {
        match self {
            Color::Red => 'r',
            Color::Blue => 'b',
            Color::Yellow => 'y',
            Color::Brown => 'n',
            Color::Blank => '.',
        }
    }
}

/// Agent moves. `y` grows downwards, so wind pushes towards larger `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
}

impl Move {
    pub const ALL: [Move; 4] = [Move::Up, Move::Down, Move::Left, Move::Right];

    pub fn id(self) -> ActionId {
        self as ActionId
    }

    pub fn from_id(a: ActionId) -> Option<Move> {
        Move::ALL.get(a).copied()
    }

    pub fn letter(self) -> char {
        match self {
            Move::Up => 'U',
            Move::Down => 'D',
            Move::Left => 'L',
            Move::Right => 'R',
        }
    }

    pub fn from_letter(c: &str) -> Option<Move> {
        Some(match c {
            "U" => Move::Up,
            "D" => Move::Down,
            "L" => Move::Left,
            "R" => Move::Right,
            _ => return None,
        })
    }

    fn delta(self) -> (i64, i64) {
        match self {
            Move::Up => (0, -1),
            Move::Down => (0, 1),
            Move::Left => (-1, 0),
            Move::Right => (1, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    /// Row-major, `tiles[y][x]`.
    pub tiles: Vec<Vec<Color>>,
    pub slip_prob: f64,
    pub start_cell: (usize, usize),
    pub horizon: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), MdpError> {
        let err = |m: &str| Err(MdpError::InvalidGrid(m.to_string()));
        if self.width == 0 || self.height == 0 {
            return err("empty grid");
        }
        if self.tiles.len() != self.height || self.tiles.iter().any(|r| r.len() != self.width) {
            return err("tile rows do not match the declared dimensions");
        }
        if self.start_cell.0 >= self.width || self.start_cell.1 >= self.height {
            return err("start cell out of bounds");
        }
        if !(0.0..=1.0).contains(&self.slip_prob) {
            return err("slip probability outside [0, 1]");
        }
        if self.horizon == 0 {
            return err("horizon must be positive");
        }
        Ok(())
    }

    pub fn color(&self, (x, y): (usize, usize)) -> Color {
        self.tiles[y][x]
    }

    fn step(&self, (x, y): (usize, usize), mv: Move) -> (usize, usize) {
        let (dx, dy) = mv.delta();
        let nx = (x as i64 + dx).clamp(0, self.width as i64 - 1) as usize;
        let ny = (y as i64 + dy).clamp(0, self.height as i64 - 1) as usize;
        (nx, ny)
    }
}

/// A gridworld MDP together with its `(cell, t)` state indexing.
#[derive(Debug, Clone)]
pub struct GridWorld {
    pub spec: GridSpec,
    pub mdp: Mdp,
    index: HashMap<(usize, usize, usize), StateId>,
    coords: Vec<Option<(usize, usize, usize)>>,
}

impl GridWorld {
    /// States are `(cell, t)` for `t ∈ 0..=horizon` plus `$`. Before the
    /// horizon an action reaches its intended neighbour with probability
    /// `1 − slip` and is pushed one cell down otherwise, walls clamping both
    /// moves. At `t = horizon` every action leads to `$`.
    pub fn build(spec: GridSpec) -> Result<GridWorld, MdpError> {
        spec.validate()?;
        let names = Move::ALL.iter().map(|m| m.letter().to_string()).collect();
        let mut b = MdpBuilder::new(Color::alphabet(), names);
        let mut index = HashMap::new();
        let mut coords = vec![None];
        for t in 0..=spec.horizon {
            for y in 0..spec.height {
                for x in 0..spec.width {
                    let s = b.add_state(spec.color((x, y)).symbol());
                    index.insert((x, y, t), s);
                    coords.push(Some((x, y, t)));
                }
            }
        }
        let sink = b.sink();
        for t in 0..=spec.horizon {
            for y in 0..spec.height {
                for x in 0..spec.width {
                    let s = index[&(x, y, t)];
                    for mv in Move::ALL {
                        if t == spec.horizon {
                            b.add_transition(s, mv.id(), &[(sink, 1.0)]);
                            continue;
                        }
                        let (ix, iy) = spec.step((x, y), mv);
                        let (sx, sy) = spec.step((x, y), Move::Down);
                        b.add_transition(
                            s,
                            mv.id(),
                            &[
                                (index[&(ix, iy, t + 1)], 1.0 - spec.slip_prob),
                                (index[&(sx, sy, t + 1)], spec.slip_prob),
                            ],
                        );
                    }
                }
            }
        }
        let (sx, sy) = spec.start_cell;
        let mdp = b.build(index[&(sx, sy, 0)])?;
        Ok(GridWorld { spec, mdp, index, coords })
    }

    pub fn state(&self, cell: (usize, usize), t: usize) -> Option<StateId> {
        self.index.get(&(cell.0, cell.1, t)).copied()
    }

    /// `(x, y, t)` of a state; `None` for the sink.
    pub fn coords(&self, s: StateId) -> Option<(usize, usize, usize)> {
        self.coords.get(s).copied().flatten()
    }

    /// Builds the path visiting `cells` (the first must be the start cell)
    /// with `moves` between them. When `complete`, one more move is expected
    /// and leads to the sink.
    pub fn path(&self, cells: &[(usize, usize)], moves: &[Move], complete: bool) -> Result<Path, MdpError> {
        let expected = cells.len() - 1 + usize::from(complete);
        if cells.is_empty() || moves.len() != expected {
            return Err(MdpError::InvalidGrid(format!(
                "{} cells need {} moves, got {}",
                cells.len(),
                expected,
                moves.len()
            )));
        }
        let mut states = Vec::with_capacity(cells.len() + 1);
        for (t, &c) in cells.iter().enumerate() {
            let s = self
                .state(c, t)
                .ok_or_else(|| MdpError::InvalidGrid(format!("cell {c:?} at t={t} is outside the model")))?;
            states.push(s);
        }
        if complete {
            states.push(self.mdp.sink());
        }
        Ok(Path::new(states, moves.iter().map(|m| m.id()).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blank(w: usize, h: usize, slip: f64, horizon: usize) -> GridSpec {
        GridSpec {
            width: w,
            height: h,
            tiles: vec![vec![Color::Blank; w]; h],
            slip_prob: slip,
            start_cell: (0, 0),
            horizon,
        }
    }

    fn dist_cells(g: &GridWorld, s: StateId, mv: Move) -> Vec<((usize, usize), f64)> {
        let mut d: Vec<_> = g
            .mdp
            .transition_dist(s, mv.id())
            .unwrap()
            .iter()
            .map(|&(t, p)| {
                let (x, y, _) = g.coords(t).unwrap();
                ((x, y), p)
            })
            .collect();
        d.sort_by_key(|a| a.0);
        d
    }

    #[test]
    fn interior_left_slips_down() {
        let g = GridWorld::build(blank(8, 8, 1.0 / 32.0, 15)).unwrap();
        let s = g.state((4, 4), 3).unwrap();
        assert_eq!(dist_cells(&g, s, Move::Left), vec![((3, 4), 31.0 / 32.0), ((4, 5), 1.0 / 32.0)]);
        assert_eq!(dist_cells(&g, s, Move::Right), vec![((4, 5), 1.0 / 32.0), ((5, 4), 31.0 / 32.0)]);
    }

    #[test]
    fn no_slip_is_deterministic() {
        let g = GridWorld::build(blank(8, 8, 0.0, 15)).unwrap();
        let s = g.state((4, 4), 0).unwrap();
        assert_eq!(dist_cells(&g, s, Move::Up), vec![((4, 3), 1.0)]);
    }

    #[test]
    fn corner_clamping_merges_outcomes() {
        // bottom-left corner: left and down both clamp to the same cell
        let g = GridWorld::build(blank(3, 3, 0.25, 4)).unwrap();
        let s = g.state((0, 2), 1).unwrap();
        assert_eq!(dist_cells(&g, s, Move::Left), vec![((0, 2), 1.0)]);
        assert_eq!(dist_cells(&g, s, Move::Down), vec![((0, 2), 1.0)]);
        assert_eq!(dist_cells(&g, s, Move::Up), vec![((0, 1), 0.75), ((0, 2), 0.25)]);
        // intended move and slip coincide away from walls too
        let s = g.state((1, 0), 1).unwrap();
        assert_eq!(dist_cells(&g, s, Move::Down), vec![((1, 1), 1.0)]);
    }

    #[test]
    fn horizon_leads_to_sink() {
        let g = GridWorld::build(blank(1, 1, 0.5, 2)).unwrap();
        let m = &g.mdp;
        let last = g.state((0, 0), 2).unwrap();
        for mv in Move::ALL {
            assert_eq!(m.transition_dist(last, mv.id()).unwrap(), &[(m.sink(), 1.0)]);
        }
        let s = g.state((0, 0), 0).unwrap();
        for mv in Move::ALL {
            assert_eq!(dist_cells(&g, s, mv), vec![((0, 0), 1.0)]);
        }
        // 1×1 grid, horizon 2: three decisions, 4³ complete paths, one trace
        let paths = m.enumerate_complete_paths(10, 1000).unwrap();
        assert_eq!(paths.len(), 64);
        assert!(paths.iter().all(|p| p.len() == 3));
        let t0 = m.trace_of(&paths[0]);
        assert!(paths.iter().all(|p| m.trace_of(p) == t0));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = blank(2, 2, 0.0, 3);
        s.start_cell = (2, 0);
        assert!(matches!(GridWorld::build(s), Err(MdpError::InvalidGrid(_))));
        assert!(GridWorld::build(blank(0, 0, 0.0, 3)).is_err());
        let mut s = blank(2, 2, 0.0, 3);
        s.tiles.pop();
        assert!(GridWorld::build(s).is_err());
    }
}
