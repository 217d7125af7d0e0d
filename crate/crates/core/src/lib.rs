//! Rule documents, game definitions, grid geometry and the simulation kernel.

pub mod def;
pub mod doc;
pub mod fixtures;
pub mod geometry;
pub mod scalar;
pub mod sim;

pub use scalar::Scalar;

pub type Position = geometry::Position<f64>;
pub type Shape = geometry::Shape<f64>;
pub type OrientedShape = geometry::OrientedShape<f64>;
pub type GridPath = geometry::GridPath<f64>;

pub type Position32 = geometry::Position<f32>;
pub type Shape32 = geometry::Shape<f32>;
pub type OrientedShape32 = geometry::OrientedShape<f32>;
pub type GridPath32 = geometry::GridPath<f32>;
