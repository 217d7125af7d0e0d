use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point type the geometry layer is generic over.
pub trait Scalar: Float + FloatConst + FromPrimitive + Debug + Display + Default + 'static {
    /// Boundary tolerance for point-in-shape tests.
    fn boundary_eps() -> Self {
        Self::epsilon().sqrt()
    }

    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    fn half() -> Self {
        Self::lit(0.5)
    }

    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
