use crate::geometry::Vec3;
use crate::num::Real;

/// Right-handed orthonormal frame aligned with the sunlight. `w` points
/// away from the sun, so depth grows along the light direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LightFrame<T = f64> {
    pub origin: Vec3<T>,
    pub e1: Vec3<T>,
    pub e2: Vec3<T>,
    pub w: Vec3<T>,
}

impl<T: Real> LightFrame<T> {
    /// `None` when `sun_dir` has no direction.
    pub fn new(sun_dir: Vec3<T>, origin: Vec3<T>) -> Option<Self> {
        let w = (-sun_dir).normalized()?;
        let helper = if w.z.abs() < T::lit(0.9) {
            Vec3::unit_z()
        } else {
            Vec3::new(T::one(), T::zero(), T::zero())
        };
        let e1 = helper.cross(w).normalized()?;
        let e2 = w.cross(e1);
        Some(Self { origin, e1, e2, w })
    }

    /// Light coordinates `(u, v, depth)` of a world point.
    #[inline]
    pub fn project(&self, p: Vec3<T>) -> Vec3<T> {
        let d = p - self.origin;
        Vec3::new(d.dot(self.e1), d.dot(self.e2), d.dot(self.w))
    }
}
