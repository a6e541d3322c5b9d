//! Azimuth–zenith map of the mean effective shading factor.

use std::io::Write;

use serde::Serialize;

use super::InstantResult;

pub const DEFAULT_BIN_DEG: f64 = 2.0;

pub const HEATMAP_HEADER: [&str; 4] = [
    "azimuth_bin_deg",
    "zenith_bin_deg",
    "mean_effective_factor",
    "count",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeatmapBin {
    /// Lower bin edges (degrees).
    pub azimuth_deg: f64,
    pub zenith_deg: f64,
    pub mean_effective_factor: f64,
    pub count: usize,
}

/// Unweighted mean factor per bin over azimuth `[0, 360)` and zenith
/// `[0, 90)`. Empty bins read 0 with count 0.
#[derive(Clone, Debug, PartialEq)]
pub struct SunPathHeatmap {
    bin_deg: f64,
    azimuth_bins: usize,
    zenith_bins: usize,
    sums: Vec<f64>,
    counts: Vec<usize>,
}

impl SunPathHeatmap {
    pub fn new(bin_deg: f64) -> Self {
        assert!(
            bin_deg > 0.0 && bin_deg <= 90.0,
            "bin size {bin_deg} outside (0, 90]"
        );
        let azimuth_bins = (360.0 / bin_deg).ceil() as usize;
        let zenith_bins = (90.0 / bin_deg).ceil() as usize;
        let n = azimuth_bins * zenith_bins;
        Self {
            bin_deg,
            azimuth_bins,
            zenith_bins,
            sums: vec![0.0; n],
            counts: vec![0; n],
        }
    }

    pub fn bin_deg(&self) -> f64 {
        self.bin_deg
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.azimuth_bins, self.zenith_bins)
    }

    /// Bin indices of a daylight sun position.
    pub fn bin_of(&self, azimuth_deg: f64, zenith_deg: f64) -> Option<(usize, usize)> {
        if !(0.0..90.0).contains(&zenith_deg) || !azimuth_deg.is_finite() {
            return None;
        }
        let az = azimuth_deg.rem_euclid(360.0);
        let ia = ((az / self.bin_deg) as usize).min(self.azimuth_bins - 1);
        let iz = ((zenith_deg / self.bin_deg) as usize).min(self.zenith_bins - 1);
        Some((ia, iz))
    }

    pub fn add(&mut self, azimuth_deg: f64, zenith_deg: f64, factor: f64) {
        if let Some((ia, iz)) = self.bin_of(azimuth_deg, zenith_deg) {
            let k = ia * self.zenith_bins + iz;
            self.sums[k] += factor;
            self.counts[k] += 1;
        }
    }

    pub fn bin(&self, ia: usize, iz: usize) -> HeatmapBin {
        let k = ia * self.zenith_bins + iz;
        let count = self.counts[k];
        HeatmapBin {
            azimuth_deg: ia as f64 * self.bin_deg,
            zenith_deg: iz as f64 * self.bin_deg,
            mean_effective_factor: if count > 0 {
                self.sums[k] / count as f64
            } else {
                0.0
            },
            count,
        }
    }

    /// All bins, azimuth-major.
    pub fn bins(&self) -> impl Iterator<Item = HeatmapBin> + '_ {
        (0..self.azimuth_bins)
            .flat_map(move |ia| (0..self.zenith_bins).map(move |iz| self.bin(ia, iz)))
    }

    /// Sum of all factors accumulated in bins whose lower edges satisfy
    /// `region(azimuth, zenith)`.
    pub fn factor_mass(&self, region: impl Fn(f64, f64) -> bool) -> f64 {
        (0..self.azimuth_bins)
            .flat_map(|ia| (0..self.zenith_bins).map(move |iz| (ia, iz)))
            .filter(|&(ia, iz)| region(ia as f64 * self.bin_deg, iz as f64 * self.bin_deg))
            .map(|(ia, iz)| self.sums[ia * self.zenith_bins + iz])
            .sum()
    }

    pub fn total_count(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(HEATMAP_HEADER)?;
        for b in self.bins() {
            w.write_record([
                b.azimuth_deg.to_string(),
                b.zenith_deg.to_string(),
                b.mean_effective_factor.to_string(),
                b.count.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("heatmap is UTF-8")
    }
}

/// Accumulates every daylight result into its sun-position bin using the
/// scene-wide effective factor.
pub fn build_heatmap(results: &[InstantResult], bin_deg: f64) -> SunPathHeatmap {
    let mut map = SunPathHeatmap::new(bin_deg);
    for r in results.iter().filter(|r| r.is_daylight()) {
        map.add(
            r.sun.azimuth_deg,
            r.sun.zenith_deg,
            r.combined_effective_factor(),
        );
    }
    map
}
