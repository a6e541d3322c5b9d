//! Ray-cast reference for the depth-map classifier.
//!
//! Shares nothing with the rasterizer: each sample shoots a ray toward the
//! sun and tests every occluder with a watertight intersection in `f64`.

use crate::geometry::{Triangle, Vec3};
use crate::num::Real;

/// Hits closer than this (m) to the ray origin are ignored.
pub const RAY_EPSILON: f64 = 1e-7;

/// `true` iff some occluder crosses the ray from `point` toward the sun at
/// a distance beyond [`RAY_EPSILON`].
///
/// Edges and vertices count as hits, so a ray through an edge shared by
/// two triangles is blocked, and the boolean result cannot count it twice.
pub fn ray_cast_shaded<T: Real>(
    occluders: &[Triangle<T>],
    sun_dir: Vec3<T>,
    point: Vec3<T>,
) -> bool {
    let ray = Ray::new(point.cast(), sun_dir.cast());
    occluders
        .iter()
        .any(|t| ray.hits(&Triangle(t.0.map(|p| p.cast()))))
}

/// Watertight ray–triangle test (Woop, Benthin and Wald, 2013).
struct Ray {
    origin: Vec3,
    k: [usize; 3],
    shear: [f64; 3],
}

impl Ray {
    fn new(origin: Vec3, dir: Vec3) -> Self {
        let d = dir.to_array();
        let kz = (0..3)
            .max_by(|&a, &b| d[a].abs().total_cmp(&d[b].abs()))
            .expect("three axes");
        let mut kx = (kz + 1) % 3;
        let mut ky = (kx + 1) % 3;
        if d[kz] < 0.0 {
            std::mem::swap(&mut kx, &mut ky);
        }
        Self {
            origin,
            k: [kx, ky, kz],
            shear: [d[kx] / d[kz], d[ky] / d[kz], 1.0 / d[kz]],
        }
    }

    fn hits(&self, tri: &Triangle) -> bool {
        let [kx, ky, kz] = self.k;
        let [sx, sy, sz] = self.shear;
        let rel = tri.0.map(|p| (p - self.origin).to_array());
        let xy = rel.map(|a| (a[kx] - sx * a[kz], a[ky] - sy * a[kz]));
        let [(ax, ay), (bx, by), (cx, cy)] = xy;
        let u = cx * by - cy * bx;
        let v = ax * cy - ay * cx;
        let w = bx * ay - by * ax;
        if (u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0) {
            return false;
        }
        let det = u + v + w;
        if det == 0.0 {
            return false;
        }
        let [az, bz, cz] = rel.map(|a| sz * a[kz]);
        let t = u * az + v * bz + w * cz;
        // Distance along the unit ray is t / det.
        if det > 0.0 {
            t > RAY_EPSILON * det
        } else {
            t < RAY_EPSILON * det
        }
    }
}

/// Distance (m, measured across the light) from each sample to the nearest
/// shadow silhouette.
///
/// Occluders wholly nearer the sun than every sample contribute the outline
/// of the union of their projections: edge portions hidden inside another
/// such triangle are dropped. Occluders straddling the samples' depths
/// contribute all their edges. Occluders behind every sample cannot shade
/// and are ignored.
pub fn silhouette_margins<T: Real>(
    occluders: &[Triangle<T>],
    sun_dir: Vec3<T>,
    samples: &[Vec3<T>],
) -> Vec<f64> {
    let sun: Vec3 = sun_dir.cast();
    let Some(frame) = super::LightFrame::new(sun, Vec3::zero()) else {
        return vec![f64::INFINITY; samples.len()];
    };
    let pts: Vec<Vec3> = samples.iter().map(|p| frame.project(p.cast())).collect();
    let (dmin, dmax) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.z), b.max(p.z))
        });
    let mut front = Vec::new();
    let mut middle = Vec::new();
    for t in occluders {
        let q = t.0.map(|p| frame.project(p.cast()));
        let zmax = q.iter().fold(f64::NEG_INFINITY, |m, p| m.max(p.z));
        let zmin = q.iter().fold(f64::INFINITY, |m, p| m.min(p.z));
        let tri2 = q.map(|p| (p.x, p.y));
        if zmax < dmin {
            front.push(tri2);
        } else if zmin <= dmax {
            middle.push(tri2);
        }
    }
    let mut segments = Vec::new();
    for (i, t) in front.iter().enumerate() {
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            let hidden: Vec<(f64, f64)> = front
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .filter_map(|(_, o)| interior_interval(a, b, o))
                .collect();
            for (s0, s1) in complement(hidden) {
                segments.push((lerp(a, b, s0), lerp(a, b, s1)));
            }
        }
    }
    for t in &middle {
        for e in 0..3 {
            segments.push((t[e], t[(e + 1) % 3]));
        }
    }
    pts.iter()
        .map(|p| {
            segments
                .iter()
                .map(|&(a, b)| point_segment_distance((p.x, p.y), a, b))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn lerp(a: (f64, f64), b: (f64, f64), s: f64) -> (f64, f64) {
    (a.0 + s * (b.0 - a.0), a.1 + s * (b.1 - a.1))
}

/// Parameter interval of segment `a → b` strictly inside triangle `t`.
fn interior_interval(a: (f64, f64), b: (f64, f64), t: &[(f64, f64); 3]) -> Option<(f64, f64)> {
    let area = (t[1].0 - t[0].0) * (t[2].1 - t[0].1) - (t[1].1 - t[0].1) * (t[2].0 - t[0].0);
    if area == 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for e in 0..3 {
        let (p, q) = (t[e], t[(e + 1) % 3]);
        // Signed edge function, positive inside for either winding.
        let f =
            |x: (f64, f64)| area.signum() * ((q.0 - p.0) * (x.1 - p.1) - (q.1 - p.1) * (x.0 - p.0));
        let (fa, fb) = (f(a), f(b));
        if fa <= 0.0 && fb <= 0.0 {
            return None;
        }
        if fa < 0.0 || fb < 0.0 {
            let s = fa / (fa - fb);
            if fa < 0.0 {
                lo = lo.max(s);
            } else {
                hi = hi.min(s);
            }
        }
    }
    (lo < hi).then_some((lo, hi))
}

/// Parts of `[0, 1]` not covered by any interval.
fn complement(mut covered: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    covered.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    let mut at = 0.0;
    for (s0, s1) in covered {
        if s0 > at {
            out.push((at, s0));
        }
        at = f64::max(at, s1);
    }
    if at < 1.0 {
        out.push((at, 1.0));
    }
    out
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let s = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (cx, cy) = (a.0 + s * dx - p.0, a.1 + s * dy - p.1);
    (cx * cx + cy * cy).sqrt()
}
