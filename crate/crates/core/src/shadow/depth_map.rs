use super::frame::LightFrame;
use super::raster::{fill_triangle, ProjectedVertex};
use super::ShadowError;
use crate::geometry::{Triangle, Vec3};
use crate::num::Real;

/// Texels per tile side. Storage is allocated per tile.
pub const TILE: usize = 8;

/// Texels added on every side of the footprint's projection.
pub const WINDOW_MARGIN_TEXELS: usize = 2;

/// Smallest window span (m), used for point-like footprints.
const MIN_SPAN: f64 = 1e-3;

/// Tolerance on `|sun_dir| = 1`.
const UNIT_TOLERANCE: f64 = 1e-6;

const NO_SLOT: u32 = u32::MAX;

/// Orthographic depth buffer seen from the sun.
///
/// Texel `(ix, iy)` covers light coordinates
/// `[u0 + ix·s, u0 + (ix+1)·s) × [v0 + iy·s, v0 + (iy+1)·s)` with `s` the
/// texel size. Only tracked texels hold depths: all of them for a full map,
/// the ones containing given points for a sparse map. Untracked texels read
/// as `None`.
#[derive(Clone, Debug)]
pub struct DepthMap<T = f64> {
    width: usize,
    height: usize,
    frame: LightFrame<T>,
    texel: T,
    u0: T,
    v0: T,
    tiles_x: usize,
    slots: Vec<u32>,
    masks: Vec<u64>,
    depths: Vec<T>,
}

/// Options for [`build_depth_map_with`].
#[derive(Clone, Copy, Debug)]
pub struct DepthMapOptions<'a, T> {
    /// Track only the texels containing these points.
    pub track: Option<&'a [Vec3<T>]>,
    /// Skip occluders lying entirely deeper than this; they cannot shade
    /// anything at or above it.
    pub max_depth: Option<T>,
    /// Skip occluders lying entirely deeper than every tracked point.
    pub cull_behind_tracked: bool,
}

impl<T> Default for DepthMapOptions<'_, T> {
    fn default() -> Self {
        Self {
            track: None,
            max_depth: None,
            cull_behind_tracked: false,
        }
    }
}

impl<'a, T> DepthMapOptions<'a, T> {
    /// Tracks `points` and culls occluders behind all of them. The depths
    /// read at `points` are unchanged by the culling.
    pub fn sparse(points: &'a [Vec3<T>]) -> Self {
        Self {
            track: Some(points),
            max_depth: None,
            cull_behind_tracked: true,
        }
    }
}

impl<T: Real> DepthMap<T> {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn frame(&self) -> &LightFrame<T> {
        &self.frame
    }

    /// Side of one texel in meters.
    pub fn texel_size(&self) -> T {
        self.texel
    }

    /// Light coordinates of the window's lower-left corner.
    pub fn window_origin(&self) -> (T, T) {
        (self.u0, self.v0)
    }

    /// Continuous texel coordinates of a light-frame point.
    #[inline]
    pub fn texel_coords(&self, u: T, v: T) -> (T, T) {
        ((u - self.u0) / self.texel, (v - self.v0) / self.texel)
    }

    /// Texel containing light coordinates `(u, v)`, if inside the window.
    pub fn texel_at(&self, u: T, v: T) -> Option<(usize, usize)> {
        let (x, y) = self.texel_coords(u, v);
        let (w, h) = (T::lit(self.width as f64), T::lit(self.height as f64));
        if !(x >= T::zero() && x < w && y >= T::zero() && y < h) {
            return None;
        }
        let ix = x.floor().to_usize()?.min(self.width - 1);
        let iy = y.floor().to_usize()?.min(self.height - 1);
        Some((ix, iy))
    }

    /// Stored depth; `+∞` where nothing was drawn, `None` when untracked or
    /// outside the map.
    pub fn depth(&self, ix: usize, iy: usize) -> Option<T> {
        if ix >= self.width || iy >= self.height {
            return None;
        }
        let (slot, bit) = self.locate(ix, iy)?;
        (self.masks[slot] >> bit & 1 == 1).then(|| self.depths[slot * TILE * TILE + bit])
    }

    pub fn is_tracked(&self, ix: usize, iy: usize) -> bool {
        self.depth(ix, iy).is_some()
    }

    /// Number of tracked texels.
    pub fn tracked_count(&self) -> usize {
        self.masks.iter().map(|m| m.count_ones() as usize).sum()
    }

    #[inline]
    fn locate(&self, ix: usize, iy: usize) -> Option<(usize, usize)> {
        let slot = self.slots[(iy / TILE) * self.tiles_x + ix / TILE];
        (slot != NO_SLOT).then(|| (slot as usize, (iy % TILE) * TILE + ix % TILE))
    }

    fn track(&mut self, ix: usize, iy: usize) {
        let tile = (iy / TILE) * self.tiles_x + ix / TILE;
        if self.slots[tile] == NO_SLOT {
            self.slots[tile] = self.masks.len() as u32;
            self.masks.push(0);
            let len = self.depths.len() + TILE * TILE;
            self.depths.resize(len, T::infinity());
        }
        let slot = self.slots[tile] as usize;
        self.masks[slot] |= 1 << ((iy % TILE) * TILE + ix % TILE);
    }

    pub(crate) fn tiles_x(&self) -> usize {
        self.tiles_x
    }

    /// Slot and tracked-texel mask of a tile, if allocated.
    #[inline]
    pub(crate) fn tile(&self, tx: usize, ty: usize) -> Option<(usize, u64)> {
        let slot = self.slots[ty * self.tiles_x + tx];
        (slot != NO_SLOT).then(|| (slot as usize, self.masks[slot as usize]))
    }

    /// Keeps the smaller of the stored and the new depth.
    #[inline]
    pub(crate) fn store_min(&mut self, slot: usize, bit: usize, z: T) {
        let d = &mut self.depths[slot * TILE * TILE + bit];
        if z < *d {
            *d = z;
        }
    }
}

/// Full depth map of `occluders` over the footprint's projection.
pub fn build_depth_map<T: Real>(
    occluders: &[Triangle<T>],
    sun_dir: Vec3<T>,
    footprint: &[Vec3<T>],
    resolution: [usize; 2],
) -> Result<DepthMap<T>, ShadowError> {
    build_depth_map_with(
        occluders,
        sun_dir,
        footprint,
        resolution,
        &DepthMapOptions::default(),
    )
}

/// Depth map with optional sparse tracking and depth culling. For tracked
/// texels the stored depths equal those of the full map, except that texels
/// covered only by culled occluders stay at `+∞`.
pub fn build_depth_map_with<T: Real>(
    occluders: &[Triangle<T>],
    sun_dir: Vec3<T>,
    footprint: &[Vec3<T>],
    resolution: [usize; 2],
    options: &DepthMapOptions<'_, T>,
) -> Result<DepthMap<T>, ShadowError> {
    let mut map = empty_map(sun_dir, footprint, resolution)?;
    match options.track {
        None => {
            for iy in 0..map.height {
                for ix in 0..map.width {
                    map.track(ix, iy);
                }
            }
        }
        Some(points) => {
            for &p in points {
                let q = map.frame.project(p);
                if let Some((ix, iy)) = map.texel_at(q.x, q.y) {
                    map.track(ix, iy);
                }
            }
        }
    }
    if map.masks.is_empty() {
        return Ok(map);
    }
    let mut max_depth = options.max_depth;
    if let (true, Some(points)) = (options.cull_behind_tracked, options.track) {
        let deepest = points
            .iter()
            .map(|&p| map.frame.project(p).z)
            .fold(T::neg_infinity(), |a, b| a.max(b));
        max_depth = Some(max_depth.map_or(deepest, |m| m.min(deepest)));
    }
    for tri in occluders {
        let q = tri.0.map(|p| map.frame.project(p));
        if let Some(limit) = max_depth {
            if q.iter().all(|p| p.z > limit) {
                continue;
            }
        }
        let verts = q.map(|p| {
            let (x, y) = map.texel_coords(p.x, p.y);
            ProjectedVertex { x, y, z: p.z }
        });
        fill_triangle(&mut map, &verts);
    }
    Ok(map)
}

fn empty_map<T: Real>(
    sun_dir: Vec3<T>,
    footprint: &[Vec3<T>],
    resolution: [usize; 2],
) -> Result<DepthMap<T>, ShadowError> {
    let [width, height] = resolution;
    if width == 0 || height == 0 {
        return Err(ShadowError::Resolution { width, height });
    }
    if !sun_dir.is_finite() || (sun_dir.norm().as_f64() - 1.0).abs() > UNIT_TOLERANCE {
        return Err(ShadowError::SunDirection(format!(
            "{:?} is not a unit vector",
            sun_dir.to_array()
        )));
    }
    if !(sun_dir.z > T::zero()) {
        return Err(ShadowError::SunDirection(
            "sun is not above the horizon".into(),
        ));
    }
    if footprint.is_empty() {
        return Err(ShadowError::EmptyFootprint);
    }
    if footprint.iter().any(|p| !p.is_finite()) {
        return Err(ShadowError::NonFinite("footprint"));
    }
    let (lo, hi) = footprint
        .iter()
        .fold((footprint[0], footprint[0]), |(lo, hi), &p| {
            (lo.min(p), hi.max(p))
        });
    let two = T::lit(2.0);
    let center = Vec3::new(
        (lo.x + hi.x) / two,
        (lo.y + hi.y) / two,
        (lo.z + hi.z) / two,
    );
    let frame = LightFrame::new(sun_dir, center)
        .ok_or_else(|| ShadowError::SunDirection("zero vector".into()))?;
    let first = frame.project(footprint[0]);
    let (mut umin, mut umax, mut vmin, mut vmax) = (first.x, first.x, first.y, first.y);
    for &p in &footprint[1..] {
        let q = frame.project(p);
        umin = umin.min(q.x);
        umax = umax.max(q.x);
        vmin = vmin.min(q.y);
        vmax = vmax.max(q.y);
    }
    let min_span = T::lit(MIN_SPAN);
    let (span_u, span_v) = ((umax - umin).max(min_span), (vmax - vmin).max(min_span));
    let inner = |n: usize| T::lit(n.saturating_sub(2 * WINDOW_MARGIN_TEXELS).max(1) as f64);
    let texel = (span_u / inner(width)).max(span_v / inner(height));
    let u0 = (umin + umax) / two - texel * T::lit(width as f64) / two;
    let v0 = (vmin + vmax) / two - texel * T::lit(height as f64) / two;
    let tiles_x = width.div_ceil(TILE);
    let tiles_y = height.div_ceil(TILE);
    Ok(DepthMap {
        width,
        height,
        frame,
        texel,
        u0,
        v0,
        tiles_x,
        slots: vec![NO_SLOT; tiles_x * tiles_y],
        masks: Vec::new(),
        depths: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(z: f64, half: f64) -> Vec<Triangle> {
        let p = |x: f64, y: f64| Vec3::new(x, y, z);
        vec![
            Triangle::new(p(-half, -half), p(half, -half), p(half, half)),
            Triangle::new(p(-half, -half), p(half, half), p(-half, half)),
        ]
    }

    fn footprint() -> Vec<Vec3> {
        vec![Vec3::new(-1.0, -1.0, 0.0), Vec3::new(1.0, 1.0, 0.0)]
    }

    const UP: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    #[test]
    fn no_occluders_is_infinite() {
        let m = build_depth_map::<f64>(&[], UP, &footprint(), [16, 16]).unwrap();
        for iy in 0..16 {
            for ix in 0..16 {
                assert_eq!(m.depth(ix, iy), Some(f64::INFINITY));
            }
        }
    }

    #[test]
    fn window_covers_footprint_with_margin() {
        let m = build_depth_map::<f64>(&[], UP, &footprint(), [36, 20]).unwrap();
        assert_eq!(m.texel_size(), 2.0 / 16.0);
        for p in footprint() {
            let q = m.frame().project(p);
            let (x, y) = m.texel_coords(q.x, q.y);
            assert!(
                (2.0..=34.0).contains(&x) && (2.0..=18.0).contains(&y),
                "{x} {y}"
            );
        }
    }

    #[test]
    fn covering_plane_gives_constant_depth() {
        let occ = square(5.0, 10.0);
        let m = build_depth_map(&occ, UP, &footprint(), [32, 32]).unwrap();
        for iy in 0..32 {
            for ix in 0..32 {
                assert!((m.depth(ix, iy).unwrap() - -5.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn nearest_of_two_quads_wins() {
        let mut occ = square(2.0, 0.5);
        occ.extend(square(4.0, 0.5));
        let m = build_depth_map(&occ, UP, &footprint(), [32, 32]).unwrap();
        let center = m.depth(16, 16).unwrap();
        assert!((center - -4.0).abs() < 1e-12);
        let mut order = square(4.0, 0.5);
        order.extend(square(2.0, 0.5));
        let m2 = build_depth_map(&order, UP, &footprint(), [32, 32]).unwrap();
        assert_eq!(m2.depth(16, 16), Some(center));
        assert_eq!(m.depth(0, 0), Some(f64::INFINITY));
    }

    #[test]
    fn sparse_map_agrees_with_full_map() {
        let occ = vec![
            Triangle::new(
                Vec3::new(-0.7, -0.4, 1.0),
                Vec3::new(0.6, -0.2, 1.5),
                Vec3::new(0.1, 0.9, 0.8),
            ),
            Triangle::new(
                Vec3::new(-2.0, 0.0, 3.0),
                Vec3::new(0.0, -2.0, 3.0),
                Vec3::new(0.3, 0.3, 2.0),
            ),
        ];
        let sun = Vec3::new(0.2, -0.3, 0.9).normalized().unwrap();
        let pts: Vec<Vec3> = (0..50)
            .map(|k| Vec3::new(-1.0 + 0.04 * k as f64, 0.9 - 0.035 * k as f64, 0.0))
            .collect();
        let full = build_depth_map(&occ, sun, &pts, [64, 48]).unwrap();
        let opts = DepthMapOptions {
            track: Some(&pts),
            ..Default::default()
        };
        let sparse = build_depth_map_with(&occ, sun, &pts, [64, 48], &opts).unwrap();
        let mut below = occ.clone();
        below.push(Triangle::new(
            Vec3::new(-3.0, -3.0, -1.0),
            Vec3::new(3.0, -3.0, -1.0),
            Vec3::new(0.0, 3.0, -1.0),
        ));
        let culled =
            build_depth_map_with(&below, sun, &pts, [64, 48], &DepthMapOptions::sparse(&pts))
                .unwrap();
        assert!(sparse.tracked_count() <= pts.len());
        for p in &pts {
            let q = full.frame().project(*p);
            let (ix, iy) = full.texel_at(q.x, q.y).unwrap();
            assert_eq!(sparse.depth(ix, iy), full.depth(ix, iy));
            let d = culled.depth(ix, iy).unwrap();
            assert_eq!(d < q.z, full.depth(ix, iy).unwrap() < q.z);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let fp = footprint();
        assert!(matches!(
            build_depth_map::<f64>(&[], UP, &fp, [0, 4]),
            Err(ShadowError::Resolution { .. })
        ));
        assert!(matches!(
            build_depth_map::<f64>(&[], UP * 2.0, &fp, [4, 4]),
            Err(ShadowError::SunDirection(_))
        ));
        assert!(matches!(
            build_depth_map::<f64>(&[], -UP, &fp, [4, 4]),
            Err(ShadowError::SunDirection(_))
        ));
        assert!(matches!(
            build_depth_map::<f64>(&[], UP, &[], [4, 4]),
            Err(ShadowError::EmptyFootprint)
        ));
    }

    #[test]
    fn works_in_single_precision() {
        let occ: Vec<Triangle<f32>> = square(5.0, 10.0)
            .iter()
            .map(|t| Triangle(t.0.map(|p| p.cast())))
            .collect();
        let fp: Vec<Vec3<f32>> = footprint().iter().map(|p| p.cast()).collect();
        let m = build_depth_map(&occ, Vec3::new(0.0f32, 0.0, 1.0), &fp, [16, 16]).unwrap();
        assert_eq!(m.depth(3, 7), Some(-5.0f32));
    }
}
