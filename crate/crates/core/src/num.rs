//! Scalar abstraction shared by the geometry and shadow code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar usable by the geometric kernels: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `(sin, cos)` of an angle in degrees, exact at multiples of 90°.
    fn sin_cos_deg(deg: Self) -> (Self, Self) {
        let d = deg.as_f64();
        let quarter = d / 90.0;
        if quarter.fract() == 0.0 && quarter.abs() < 1e15 {
            let q = (quarter as i64).rem_euclid(4);
            let (s, c) = match q {
                0 => (0.0, 1.0),
                1 => (1.0, 0.0),
                2 => (0.0, -1.0),
                _ => (-1.0, 0.0),
            };
            return (Self::lit(s), Self::lit(c));
        }
        deg.to_radians().sin_cos()
    }
}

impl Real for f32 {}
impl Real for f64 {}
