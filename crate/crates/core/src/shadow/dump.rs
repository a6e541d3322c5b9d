//! Debug dumps: depth map as 16-bit PGM, mask as CSV.

use std::io::{self, Write};

use super::depth_map::DepthMap;
use crate::num::Real;
use crate::scene::SamplePoint;

pub const MASK_HEADER: &str = "generator,module,cell,sub,shaded";

/// Gray value of texels with nothing drawn (and of untracked texels).
pub const PGM_EMPTY: u16 = u16::MAX;

/// Binary 16-bit PGM, top row first. Finite depths map linearly onto
/// `0..=65534` (near = dark); empty texels are white.
pub fn write_depth_pgm<T: Real, W: Write>(map: &DepthMap<T>, mut out: W) -> io::Result<()> {
    let (w, h) = (map.width(), map.height());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for iy in 0..h {
        for ix in 0..w {
            if let Some(d) = map
                .depth(ix, iy)
                .map(Real::as_f64)
                .filter(|d| d.is_finite())
            {
                lo = lo.min(d);
                hi = hi.max(d);
            }
        }
    }
    let range = if hi > lo { hi - lo } else { 1.0 };
    let top = f64::from(PGM_EMPTY - 1);
    write!(out, "P5\n{w} {h}\n{}\n", PGM_EMPTY)?;
    let mut row = Vec::with_capacity(2 * w);
    for iy in (0..h).rev() {
        row.clear();
        for ix in 0..w {
            let g = match map.depth(ix, iy).map(Real::as_f64) {
                Some(d) if d.is_finite() => ((d - lo) / range * top).round() as u16,
                _ => PGM_EMPTY,
            };
            row.extend_from_slice(&g.to_be_bytes());
        }
        out.write_all(&row)?;
    }
    Ok(())
}

/// One row per sample: `generator,module,cell,sub,shaded` with 0/1 flags.
pub fn write_mask_csv<T, W: Write>(
    generator: &str,
    samples: &[SamplePoint<T>],
    shaded: &[bool],
    out: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MASK_HEADER.split(','))?;
    for (s, &hit) in samples.iter().zip(shaded) {
        w.write_record([
            generator.to_string(),
            s.module.to_string(),
            s.cell.to_string(),
            s.sub.to_string(),
            u8::from(hit).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Triangle, Vec3};
    use crate::shadow::build_depth_map;

    #[test]
    fn pgm_layout() {
        let occ = [Triangle::new(
            Vec3::new(-9.0, -9.0, 1.0),
            Vec3::new(9.0, -9.0, 1.0),
            Vec3::new(0.0, 9.0, 1.0),
        )];
        let fp = [Vec3::new(-1.0, -1.0, 0.0), Vec3::new(1.0, 1.0, 0.0)];
        let map = build_depth_map(&occ, Vec3::unit_z(), &fp, [5, 3]).unwrap();
        let mut buf = Vec::new();
        write_depth_pgm(&map, &mut buf).unwrap();
        let header = b"P5\n5 3\n65535\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(buf.len(), header.len() + 5 * 3 * 2);
        let empty = build_depth_map::<f64>(&[], Vec3::unit_z(), &fp, [2, 2]).unwrap();
        let mut e = Vec::new();
        write_depth_pgm(&empty, &mut e).unwrap();
        assert!(e[b"P5\n2 2\n65535\n".len()..].iter().all(|&b| b == 0xff));
    }

    #[test]
    fn mask_csv_rows() {
        let s = |m, c, k| SamplePoint {
            position: Vec3::<f64>::zero(),
            module: m,
            cell: c,
            sub: k,
        };
        let mut buf = Vec::new();
        write_mask_csv("g1", &[s(0, 0, 0), s(0, 0, 1)], &[false, true], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "generator,module,cell,sub,shaded\ng1,0,0,0,0\ng1,0,0,1,1\n"
        );
    }
}
