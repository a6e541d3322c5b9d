//! Fixed-point triangle fill with the top-left rule.
//!
//! Vertices are snapped to 1/256 texel. Coverage is decided exactly with
//! integer edge functions at texel centers, so two triangles sharing an edge
//! never both cover a center on it and never both miss it. Depth comes from
//! the triangle's plane evaluated at the texel center.

use super::depth_map::{DepthMap, TILE};
use crate::num::Real;

/// A vertex in continuous texel coordinates with its light depth.
#[derive(Clone, Copy, Debug)]
pub(crate) struct ProjectedVertex<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

const SUBPIXEL_BITS: u32 = 8;
const SUBPIXEL: i64 = 1 << SUBPIXEL_BITS;
const HALF: i64 = SUBPIXEL / 2;

/// Triangles reaching further than this many texels outside the window are
/// clipped first, which bounds the fixed-point range.
const GUARD_TEXELS: f64 = 8.0;

/// Depth as a linear function of texel coordinates, clamped to the
/// vertices' depth range so slivers cannot extrapolate.
struct Plane<T> {
    x0: T,
    y0: T,
    z0: T,
    dzdx: T,
    dzdy: T,
    zmin: T,
    zmax: T,
}

impl<T: Real> Plane<T> {
    fn new(v: &[ProjectedVertex<T>; 3]) -> Option<Self> {
        let (d1x, d1y, d1z) = (v[1].x - v[0].x, v[1].y - v[0].y, v[1].z - v[0].z);
        let (d2x, d2y, d2z) = (v[2].x - v[0].x, v[2].y - v[0].y, v[2].z - v[0].z);
        let den = d1x * d2y - d2x * d1y;
        if den == T::zero() || !den.is_finite() {
            return None;
        }
        Some(Self {
            x0: v[0].x,
            y0: v[0].y,
            z0: v[0].z,
            dzdx: (d1z * d2y - d2z * d1y) / den,
            dzdy: (d2z * d1x - d1z * d2x) / den,
            zmin: v[0].z.min(v[1].z).min(v[2].z),
            zmax: v[0].z.max(v[1].z).max(v[2].z),
        })
    }

    #[inline]
    fn at(&self, x: T, y: T) -> T {
        let z = self.z0 + self.dzdx * (x - self.x0) + self.dzdy * (y - self.y0);
        z.max(self.zmin).min(self.zmax)
    }
}

pub(crate) fn fill_triangle<T: Real>(map: &mut DepthMap<T>, v: &[ProjectedVertex<T>; 3]) {
    let pts = v.map(|p| (p.x.as_f64(), p.y.as_f64()));
    if pts.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
        return;
    }
    let (w, h) = (map.width() as f64, map.height() as f64);
    let (minx, maxx) = (
        pts[0].0.min(pts[1].0).min(pts[2].0),
        pts[0].0.max(pts[1].0).max(pts[2].0),
    );
    let (miny, maxy) = (
        pts[0].1.min(pts[1].1).min(pts[2].1),
        pts[0].1.max(pts[1].1).max(pts[2].1),
    );
    if maxx < 0.0 || maxy < 0.0 || minx > w || miny > h {
        return;
    }
    let Some(plane) = Plane::new(v) else { return };
    let inside_guard = minx >= -GUARD_TEXELS
        && miny >= -GUARD_TEXELS
        && maxx <= w + GUARD_TEXELS
        && maxy <= h + GUARD_TEXELS;
    let polygon = if inside_guard {
        pts.to_vec()
    } else {
        clip_to_rect(
            &pts,
            -GUARD_TEXELS,
            -GUARD_TEXELS,
            w + GUARD_TEXELS,
            h + GUARD_TEXELS,
        )
    };
    if polygon.len() < 3 {
        return;
    }
    let fixed: Vec<(i64, i64)> = polygon.iter().map(|&(x, y)| (snap(x), snap(y))).collect();
    for k in 1..fixed.len() - 1 {
        fill_fixed(map, fixed[0], fixed[k], fixed[k + 1], &plane);
    }
}

#[inline]
fn snap(x: f64) -> i64 {
    (x * SUBPIXEL as f64).round() as i64
}

/// Integer edge function; positive to the left of `a → b`. The bias makes
/// centers exactly on an edge count only for top and left edges, which for
/// counter-clockwise winding with y up are the edges heading down, or
/// heading left when horizontal.
struct Edge {
    ax: i64,
    ay: i64,
    dx: i64,
    dy: i64,
    bias: i64,
}

impl Edge {
    fn new(a: (i64, i64), b: (i64, i64)) -> Self {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let owned = dy < 0 || (dy == 0 && dx < 0);
        Self {
            ax: a.0,
            ay: a.1,
            dx,
            dy,
            bias: if owned { 0 } else { 1 },
        }
    }

    #[inline]
    fn covers(&self, px: i64, py: i64) -> bool {
        self.dx * (py - self.ay) - self.dy * (px - self.ax) >= self.bias
    }
}

fn fill_fixed<T: Real>(
    map: &mut DepthMap<T>,
    a: (i64, i64),
    mut b: (i64, i64),
    mut c: (i64, i64),
    plane: &Plane<T>,
) {
    let area = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    if area == 0 {
        return;
    }
    if area < 0 {
        std::mem::swap(&mut b, &mut c);
    }
    // Texel centers sit at (i + ½)·SUBPIXEL.
    let lo =
        |m: i64| (m - HALF).div_euclid(SUBPIXEL) + i64::from((m - HALF).rem_euclid(SUBPIXEL) != 0);
    let hi = |m: i64| (m - HALF).div_euclid(SUBPIXEL);
    let ix0 = lo(a.0.min(b.0).min(c.0)).max(0);
    let iy0 = lo(a.1.min(b.1).min(c.1)).max(0);
    let ix1 = hi(a.0.max(b.0).max(c.0)).min(map.width() as i64 - 1);
    let iy1 = hi(a.1.max(b.1).max(c.1)).min(map.height() as i64 - 1);
    if ix0 > ix1 || iy0 > iy1 {
        return;
    }
    let edges = [Edge::new(a, b), Edge::new(b, c), Edge::new(c, a)];
    let t = TILE as i64;
    for ty in iy0 / t..=iy1 / t {
        for tx in ix0 / t..=ix1 / t {
            debug_assert!((tx as usize) < map.tiles_x());
            let Some((slot, mut bits)) = map.tile(tx as usize, ty as usize) else {
                continue;
            };
            while bits != 0 {
                let bit = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let ix = tx * t + (bit % TILE) as i64;
                let iy = ty * t + (bit / TILE) as i64;
                if ix < ix0 || ix > ix1 || iy < iy0 || iy > iy1 {
                    continue;
                }
                let (px, py) = (ix * SUBPIXEL + HALF, iy * SUBPIXEL + HALF);
                if edges.iter().all(|e| e.covers(px, py)) {
                    let z = plane.at(T::lit(ix as f64 + 0.5), T::lit(iy as f64 + 0.5));
                    map.store_min(slot, bit, z);
                }
            }
        }
    }
}

/// Sutherland–Hodgman clip of a convex polygon to an axis-aligned rectangle.
fn clip_to_rect(poly: &[(f64, f64)], x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<(f64, f64)> {
    let mut out = poly.to_vec();
    // Each plane keeps points with `s·coord ≤ s·limit`.
    for (axis, limit, sign) in [(0, x0, -1.0), (0, x1, 1.0), (1, y0, -1.0), (1, y1, 1.0)] {
        let input = std::mem::take(&mut out);
        if input.is_empty() {
            break;
        }
        let coord = |p: &(f64, f64)| if axis == 0 { p.0 } else { p.1 };
        let keep = |p: &(f64, f64)| sign * coord(p) <= sign * limit;
        for (k, cur) in input.iter().enumerate() {
            let prev = &input[(k + input.len() - 1) % input.len()];
            let (kc, kp) = (keep(cur), keep(prev));
            if kc != kp {
                let t = (limit - coord(prev)) / (coord(cur) - coord(prev));
                let mut p = (prev.0 + t * (cur.0 - prev.0), prev.1 + t * (cur.1 - prev.1));
                if axis == 0 {
                    p.0 = limit;
                } else {
                    p.1 = limit;
                }
                out.push(p);
            }
            if kc {
                out.push(*cur);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Triangle, Vec3};
    use crate::shadow::build_depth_map;

    const UP: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    /// Footprint giving a 16×16 window with texel size 1 and texel
    /// `(i, j)` covering world `[i−8, i−7) × [j−8, j−7)`.
    fn unit_window() -> Vec<Vec3> {
        vec![Vec3::new(-6.0, -6.0, 0.0), Vec3::new(6.0, 6.0, 0.0)]
    }

    fn covered(tris: &[Triangle]) -> Vec<Vec<u32>> {
        let m = build_depth_map(tris, UP, &unit_window(), [16, 16]).unwrap();
        assert_eq!(m.texel_size(), 1.0);
        (0..16)
            .map(|iy| {
                (0..16)
                    .map(|ix| u32::from(m.depth(ix, iy).unwrap().is_finite()))
                    .collect()
            })
            .collect()
    }

    /// World x of texel column i's center, given the frame's e1 direction.
    fn world(m: &crate::shadow::DepthMap, ix: f64, iy: f64) -> (f64, f64) {
        let (u0, v0) = m.window_origin();
        let f = m.frame();
        let (u, v) = (u0 + ix, v0 + iy);
        let p = f.origin + f.e1 * u + f.e2 * v;
        (p.x, p.y)
    }

    #[test]
    fn shared_edges_cover_each_center_once() {
        let m = build_depth_map::<f64>(&[], UP, &unit_window(), [16, 16]).unwrap();
        // A quad whose diagonal and sides pass exactly through texel centers.
        let c = |ix: f64, iy: f64| {
            let (x, y) = world(&m, ix, iy);
            Vec3::new(x, y, 1.0)
        };
        let (a, b, cc, d) = (c(2.5, 2.5), c(12.5, 2.5), c(12.5, 12.5), c(2.5, 12.5));
        let t1 = Triangle::new(a, b, cc);
        let t2 = Triangle::new(a, cc, d);
        let m1 = covered(&[t1]);
        let m2 = covered(&[t2]);
        let both = covered(&[t1, t2]);
        let mut total = 0;
        for iy in 0..16 {
            for ix in 0..16 {
                assert!(m1[iy][ix] + m2[iy][ix] <= 1, "double cover at {ix},{iy}");
                assert_eq!(both[iy][ix], m1[iy][ix] | m2[iy][ix]);
                total += both[iy][ix];
            }
        }
        // Half-open on two sides: 10×10 centers.
        assert_eq!(total, 100);
    }

    #[test]
    fn winding_does_not_matter() {
        let t = Triangle::new(
            Vec3::new(-3.3, -2.1, 1.0),
            Vec3::new(4.2, -1.0, 1.0),
            Vec3::new(0.4, 5.1, 1.0),
        );
        let r = Triangle::new(t[0], t[2], t[1]);
        assert_eq!(covered(&[t]), covered(&[r]));
    }

    #[test]
    fn huge_triangles_are_clipped() {
        let t = Triangle::new(
            Vec3::new(-1e7, -1e7, 1.0),
            Vec3::new(1e7, -1e7, 1.0),
            Vec3::new(0.0, 1e7, 1.0),
        );
        assert!(covered(&[t]).iter().flatten().all(|&c| c == 1));
    }

    #[test]
    fn edge_on_triangles_draw_nothing() {
        let t = Triangle::new(
            Vec3::new(0.0, 0.0, 0.5),
            Vec3::new(1.0, 1.0, 0.5),
            Vec3::new(0.0, 0.0, 2.0),
        );
        assert!(covered(&[t]).iter().flatten().all(|&c| c == 0));
    }

    #[test]
    fn clip_keeps_inside_polygon() {
        let p = vec![(1.0, 1.0), (3.0, 1.0), (2.0, 3.0)];
        assert_eq!(clip_to_rect(&p, 0.0, 0.0, 10.0, 10.0), p);
        let q = clip_to_rect(&[(-5.0, 0.5), (5.0, 0.5), (0.0, 5.0)], 0.0, 0.0, 10.0, 10.0);
        assert!(q
            .iter()
            .all(|&(x, y)| (0.0..=10.0).contains(&x) && (0.0..=10.0).contains(&y)));
        assert!(q.len() >= 3);
    }
}
