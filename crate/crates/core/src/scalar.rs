use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps};

/// Floating point scalar used by the filtering, assignment and regression kernels.
///
/// Implemented for `f32` and `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssignOps + Debug + Default + Send + Sync + 'static
{
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn sq(self) -> Self {
        self * self
    }

    /// Wraps `self` into `[0, period)`.
    #[inline]
    fn wrap(self, period: Self) -> Self {
        let w = self % period;
        let w = if w < Self::zero() { w + period } else { w };
        // rounding can push `w + period` onto the period itself
        if w >= period {
            Self::zero()
        } else {
            w
        }
    }

    /// Shortest distance between two points on a circle of circumference `period`.
    #[inline]
    fn wrapped_dist(self, other: Self, period: Self) -> Self {
        let d = (self - other).abs() % period;
        d.min(period - d)
    }
}

impl Real for f32 {}
impl Real for f64 {}
