//! Spatial mathematics on the unit grid.
//!
//! Positions are real-valued, origin at the top-left corner, x to the right
//! and y downward. Cell `(i, j)` covers `[i, i+1) x [j, j+1)`. Shapes are
//! rasterized by testing cell centers, boundary inclusive.

mod path;

use std::collections::BTreeSet;
use std::fmt;

use crate::scalar::Scalar;

pub use path::{find_path, find_path_to_any, GridPath, Passability};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: i64,
    pub y: i64,
}

impl Cell {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn center<S: Scalar>(self) -> Position<S> {
        Position::new(
            S::from_i64(self.x).expect("cell index") + S::half(),
            S::from_i64(self.y).expect("cell index") + S::half(),
        )
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl From<(i64, i64)> for Cell {
    fn from((x, y): (i64, i64)) -> Self {
        Self::new(x, y)
    }
}

/// A point (or a direction vector) in cell units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Position<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    /// The cell containing this point.
    pub fn cell(&self) -> Cell {
        Cell::new(
            self.x.floor().to_i64().expect("finite coordinate"),
            self.y.floor().to_i64().expect("finite coordinate"),
        )
    }

    pub fn sub(self, other: Self) -> Self {
        Self::new(self.x - other.x, self.y - other.y)
    }

    pub fn add(self, other: Self) -> Self {
        Self::new(self.x + other.x, self.y + other.y)
    }

    pub fn scale(self, k: S) -> Self {
        Self::new(self.x * k, self.y * k)
    }

    pub fn dot(self, other: Self) -> S {
        self.x * other.x + self.y * other.y
    }

    pub fn length(self) -> S {
        self.x.hypot(self.y)
    }

    /// Counter-clockwise quarter turn in screen coordinates.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Option<Self> {
        let len = self.length();
        (len > S::zero() && len.is_finite()).then(|| self.scale(len.recip()))
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Euclidean distance, center to center.
pub fn distance<S: Scalar>(a: Position<S>, b: Position<S>) -> S {
    b.sub(a).length()
}

/// Shape of an entity footprint or an attack area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape<S> {
    Point,
    Square { side: S },
    /// `parallel` is the side facing the attacker, `perpendicular` runs along
    /// the heading.
    Rectangle { parallel: S, perpendicular: S },
    Circle { radius: S },
    /// Apex at the cast center, base of length `base` at distance `height`.
    FCone { height: S, base: S },
    /// An `FCone` turned end for end: base at the center, apex at `height`.
    BCone { height: S, base: S },
}

impl<S: Scalar> Shape<S> {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Point => "Point",
            Shape::Square { .. } => "Square",
            Shape::Rectangle { .. } => "Rectangle",
            Shape::Circle { .. } => "Circle",
            Shape::FCone { .. } => "F_Cone",
            Shape::BCone { .. } => "B_Cone",
        }
    }

    pub fn dimensions(&self) -> Vec<S> {
        match *self {
            Shape::Point => vec![],
            Shape::Square { side } => vec![side],
            Shape::Circle { radius } => vec![radius],
            Shape::Rectangle {
                parallel,
                perpendicular,
            } => vec![parallel, perpendicular],
            Shape::FCone { height, base } | Shape::BCone { height, base } => vec![height, base],
        }
    }

    /// Largest distance from the center to any covered point.
    pub fn reach(&self) -> S {
        match *self {
            Shape::Point => S::zero(),
            Shape::Square { side } => side * S::half() * S::SQRT_2(),
            Shape::Circle { radius } => radius,
            Shape::Rectangle {
                parallel,
                perpendicular,
            } => (parallel * S::half()).hypot(perpendicular * S::half()),
            Shape::FCone { height, base } | Shape::BCone { height, base } => {
                height.hypot(base * S::half())
            }
        }
    }
}

/// A shape placed at `center` and turned toward `heading`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedShape<S> {
    pub spec: Shape<S>,
    pub center: Position<S>,
    /// Unit vector from the attacker toward the aim point.
    pub heading: Position<S>,
}

impl<S: Scalar> OrientedShape<S> {
    /// A zero or non-finite heading falls back to +x.
    pub fn new(spec: Shape<S>, center: Position<S>, heading: Position<S>) -> Self {
        let heading = heading
            .normalized()
            .unwrap_or_else(|| Position::new(S::one(), S::zero()));
        Self {
            spec,
            center,
            heading,
        }
    }

    pub fn unoriented(spec: Shape<S>, center: Position<S>) -> Self {
        Self::new(spec, center, Position::new(S::one(), S::zero()))
    }

    /// Shape cast at `target`, oriented along `from -> target`.
    pub fn aimed(spec: Shape<S>, from: Position<S>, target: Position<S>) -> Self {
        Self::new(spec, target, target.sub(from))
    }

    /// Point membership with an inclusive boundary.
    pub fn contains(&self, p: Position<S>) -> bool {
        let eps = S::boundary_eps();
        let d = p.sub(self.center);
        let along = d.dot(self.heading);
        let across = d.dot(self.heading.perp()).abs();
        match self.spec {
            Shape::Point => p.cell() == self.center.cell(),
            Shape::Circle { radius } => d.dot(d) <= radius * radius + eps,
            Shape::Square { side } => {
                let half = side * S::half() + eps;
                d.x.abs() <= half && d.y.abs() <= half
            }
            Shape::Rectangle {
                parallel,
                perpendicular,
            } => {
                across <= parallel * S::half() + eps
                    && along.abs() <= perpendicular * S::half() + eps
            }
            Shape::FCone { height, base } => {
                along >= -eps
                    && along <= height + eps
                    && across <= base * S::half() * (along / height) + eps
            }
            Shape::BCone { height, base } => {
                along >= -eps
                    && along <= height + eps
                    && across <= base * S::half() * (S::one() - along / height) + eps
            }
        }
    }
}

/// Cells whose center lies inside `shape`. A `Point` covers the cell that
/// contains it.
pub fn cells_in_shape<S: Scalar>(shape: &OrientedShape<S>) -> BTreeSet<Cell> {
    if let Shape::Point = shape.spec {
        return BTreeSet::from([shape.center.cell()]);
    }
    let reach = shape.spec.reach() + S::one();
    let lo = Position::new(shape.center.x - reach, shape.center.y - reach).cell();
    let hi = Position::new(shape.center.x + reach, shape.center.y + reach).cell();
    let mut out = BTreeSet::new();
    for x in lo.x..=hi.x {
        for y in lo.y..=hi.y {
            let cell = Cell::new(x, y);
            if shape.contains(cell.center()) {
                out.insert(cell);
            }
        }
    }
    out
}

/// The vision disc: cells within `vision` of `center`, plus the cell the
/// viewer stands on.
pub fn cells_in_vision<S: Scalar>(center: Position<S>, vision: S) -> BTreeSet<Cell> {
    let vision = vision.max(S::zero());
    let mut cells = cells_in_shape(&OrientedShape::unoriented(
        Shape::Circle { radius: vision },
        center,
    ));
    cells.insert(center.cell());
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Position<f64> {
        Position::new(x, y)
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(p(0.0, 0.0), p(3.0, 4.0)), 5.0);
        assert_eq!(distance(p(2.0, 2.0), p(2.0, 2.0)), 0.0);
        assert!((distance(p(0.0, 0.0), p(1.0, 1.0)) - 1.414_213_56).abs() < 1e-8);
        let d32: f32 = distance(Position::new(0.0f32, 0.0), Position::new(3.0, 4.0));
        assert_eq!(d32, 5.0);
    }

    #[test]
    fn point_covers_its_cell() {
        let s = OrientedShape::unoriented(Shape::Point, p(4.5, 4.5));
        assert_eq!(cells_in_shape(&s), BTreeSet::from([Cell::new(4, 4)]));
    }

    #[test]
    fn square_ignores_heading() {
        let expected: BTreeSet<_> = (8..=12)
            .flat_map(|x| (8..=12).map(move |y| Cell::new(x, y)))
            .collect();
        for heading in [p(1.0, 0.0), p(0.3, -0.7), p(-1.0, 1.0)] {
            let s = OrientedShape::new(Shape::Square { side: 5.0 }, p(10.5, 10.5), heading);
            assert_eq!(cells_in_shape(&s), expected);
        }
    }

    #[test]
    fn vision_discs() {
        assert_eq!(
            cells_in_vision(p(3.5, 3.5), 0.0),
            BTreeSet::from([Cell::new(3, 3)])
        );
        let plus = cells_in_vision(p(120.5, 120.5), 1.0);
        assert_eq!(
            plus,
            BTreeSet::from([
                Cell::new(119, 120),
                Cell::new(120, 119),
                Cell::new(120, 120),
                Cell::new(120, 121),
                Cell::new(121, 120),
            ])
        );
        assert_eq!(cells_in_vision(p(10.5, 10.5), 5.0).len(), 81);
        assert_eq!(cells_in_vision(Position::new(10.5f32, 10.5), 5.0).len(), 81);
    }

    #[test]
    fn cone_points_along_heading() {
        let s = OrientedShape::new(
            Shape::FCone {
                height: 4.0,
                base: 4.0,
            },
            p(0.0, 0.0),
            p(1.0, 0.0),
        );
        let cells = cells_in_shape(&s);
        assert!(cells.iter().all(|c| c.x >= 0));
        assert!(cells.contains(&Cell::new(3, 1)));
        assert!(!cells.contains(&Cell::new(0, 1)));
        let b = OrientedShape::new(
            Shape::BCone {
                height: 4.0,
                base: 4.0,
            },
            p(0.0, 0.0),
            p(1.0, 0.0),
        );
        let cells = cells_in_shape(&b);
        assert!(cells.contains(&Cell::new(0, 1)));
        assert!(!cells.contains(&Cell::new(3, 1)));
    }

    #[test]
    fn rectangle_first_side_faces_attacker() {
        // 6 wide across the heading, 2 deep along it
        let s = OrientedShape::new(
            Shape::Rectangle {
                parallel: 6.0,
                perpendicular: 2.0,
            },
            p(10.0, 10.0),
            p(1.0, 0.0),
        );
        let cells = cells_in_shape(&s);
        assert_eq!(cells.len(), 12);
        let xs: BTreeSet<_> = cells.iter().map(|c| c.x).collect();
        let ys: BTreeSet<_> = cells.iter().map(|c| c.y).collect();
        assert_eq!(xs.len(), 2);
        assert_eq!(ys.len(), 6);
    }
}
