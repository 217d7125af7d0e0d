use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use super::{Cell, Position};
use crate::scalar::Scalar;

/// Which cells a mover may enter.
pub trait Passability {
    fn width(&self) -> i64;
    fn height(&self) -> i64;
    fn is_passable(&self, cell: Cell) -> bool;

    fn in_bounds(&self, cell: Cell) -> bool {
        cell.x >= 0 && cell.y >= 0 && cell.x < self.width() && cell.y < self.height()
    }
}

/// A cell sequence from start to goal (both included) and its length.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath<S> {
    pub cells: Vec<Cell>,
    pub cost: S,
}

impl<S: Scalar> GridPath<S> {
    /// Centers of every cell after the start.
    pub fn waypoints(&self) -> Vec<Position<S>> {
        self.cells.iter().skip(1).map(|c| c.center()).collect()
    }
}

struct Open<S> {
    f: S,
    cell: Cell,
}

impl<S: PartialOrd> PartialEq for Open<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S: PartialOrd> Eq for Open<S> {}
impl<S: PartialOrd> PartialOrd for Open<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: PartialOrd> Ord for Open<S> {
    // min-heap on (f, x, y)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .partial_cmp(&self.f)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

const STEPS: [(i64, i64); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

fn octile<S: Scalar>(a: Cell, b: Cell) -> S {
    let dx = (a.x - b.x).abs();
    let dy = (a.y - b.y).abs();
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    S::from_i64(lo).expect("grid size") * S::SQRT_2() + S::from_i64(hi - lo).expect("grid size")
}

fn search<S, G, F, H>(grid: &G, start: Cell, is_goal: F, heuristic: H) -> Option<GridPath<S>>
where
    S: Scalar,
    G: Passability + ?Sized,
    F: Fn(Cell) -> bool,
    H: Fn(Cell) -> S,
{
    let mut best: BTreeMap<Cell, S> = BTreeMap::new();
    let mut parent: BTreeMap<Cell, Cell> = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    best.insert(start, S::zero());
    heap.push(Open {
        f: heuristic(start),
        cell: start,
    });

    while let Some(Open { f, cell }) = heap.pop() {
        let g = best[&cell];
        if f > g + heuristic(cell) + S::boundary_eps() {
            continue; // stale entry
        }
        if is_goal(cell) {
            let mut cells = vec![cell];
            let mut cur = cell;
            while let Some(&prev) = parent.get(&cur) {
                cells.push(prev);
                cur = prev;
            }
            cells.reverse();
            return Some(GridPath { cells, cost: g });
        }
        for (dx, dy) in STEPS {
            let next = Cell::new(cell.x + dx, cell.y + dy);
            if !grid.in_bounds(next) || !grid.is_passable(next) {
                continue;
            }
            let diagonal = dx != 0 && dy != 0;
            if diagonal
                && !(grid.is_passable(Cell::new(cell.x + dx, cell.y))
                    && grid.is_passable(Cell::new(cell.x, cell.y + dy)))
            {
                continue; // no corner cutting
            }
            let step = if diagonal { S::SQRT_2() } else { S::one() };
            let ng = g + step;
            if best.get(&next).is_some_and(|&old| old <= ng) {
                continue;
            }
            best.insert(next, ng);
            parent.insert(next, cell);
            heap.push(Open {
                f: ng + heuristic(next),
                cell: next,
            });
        }
    }
    None
}

/// Shortest 8-connected path (diagonal cost sqrt 2, no corner cutting) by A*
/// with the octile heuristic. Frontier ties are broken by the lexicographic
/// `(x, y)` order of the cell. `None` when the goal is unreachable.
pub fn find_path<S, G>(grid: &G, from: Position<S>, to: Position<S>) -> Option<GridPath<S>>
where
    S: Scalar,
    G: Passability + ?Sized,
{
    let start = from.cell();
    let goal = to.cell();
    if start == goal {
        return Some(GridPath {
            cells: vec![start],
            cost: S::zero(),
        });
    }
    if !grid.in_bounds(goal) || !grid.is_passable(goal) {
        return None;
    }
    search(grid, start, |c| c == goal, |c| octile(c, goal))
}

/// Shortest path to the nearest of several goal cells (uniform-cost search).
pub fn find_path_to_any<S, G>(
    grid: &G,
    from: Position<S>,
    goals: &std::collections::BTreeSet<Cell>,
) -> Option<GridPath<S>>
where
    S: Scalar,
    G: Passability + ?Sized,
{
    if goals.is_empty() {
        return None;
    }
    search(grid, from.cell(), |c| goals.contains(&c), |_| S::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Open3(Vec<Cell>);
    impl Passability for Open3 {
        fn width(&self) -> i64 {
            3
        }
        fn height(&self) -> i64 {
            3
        }
        fn is_passable(&self, cell: Cell) -> bool {
            !self.0.contains(&cell)
        }
    }

    #[test]
    fn already_there() {
        let p = Position::new(0.5, 0.5);
        let path = find_path(&Open3(vec![]), p, p).unwrap();
        assert!(path.waypoints().is_empty());
        assert_eq!(path.cost, 0.0);
    }

    #[test]
    fn corner_to_corner_is_two_diagonals() {
        let path = find_path(&Open3(vec![]), Position::new(0.5, 0.5), Position::new(2.5, 2.5))
            .unwrap();
        assert_eq!(path.cells, vec![Cell::new(0, 0), Cell::new(1, 1), Cell::new(2, 2)]);
        assert!((path.cost - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(
            path.waypoints(),
            vec![Position::new(1.5, 1.5), Position::new(2.5, 2.5)]
        );
    }

    #[test]
    fn unreachable_goal() {
        let walls = vec![Cell::new(2, 2)];
        assert!(find_path(&Open3(walls), Position::new(0.5, 0.5), Position::new(2.5, 2.5))
            .is_none());
        let ring = vec![Cell::new(1, 2), Cell::new(1, 1), Cell::new(2, 1)];
        assert!(find_path(&Open3(ring), Position::new(0.5, 0.5), Position::new(2.5, 2.5))
            .is_none());
    }

    #[test]
    fn detours_around_walls() {
        let walls = vec![Cell::new(1, 0), Cell::new(1, 1)];
        let path: GridPath<f64> =
            find_path(&Open3(walls), Position::new(0.5, 0.5), Position::new(2.5, 0.5)).unwrap();
        // the only way round is below the wall
        assert_eq!(path.cells.first(), Some(&Cell::new(0, 0)));
        assert_eq!(path.cells.last(), Some(&Cell::new(2, 0)));
        assert!(path.cells.iter().all(|c| c.x != 1 || c.y == 2));
    }
}
