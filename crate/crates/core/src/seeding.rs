//! Baseline seed selection: threshold-band candidate pools, random draws from
//! a pool, and histogram peaks.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::grow::Seed;
use crate::image::{Class, Image2D, Point};

/// Inclusive intensity interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Band {
    pub lo: u8,
    pub hi: u8,
}

impl Band {
    pub const fn new(lo: u8, hi: u8) -> Self {
        Band { lo, hi }
    }

    pub fn contains(&self, v: u8) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// One intensity band per tissue class, indexed CSF, GM, WM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdBands {
    bands: [Band; 3],
}

impl Default for ThresholdBands {
    /// Even tercile split of the 8-bit range.
    fn default() -> Self {
        ThresholdBands {
            bands: [Band::new(0, 84), Band::new(85, 169), Band::new(170, 255)],
        }
    }
}

impl ThresholdBands {
    /// Bands in CSF, GM, WM order; each needs `lo <= hi` and no two may overlap.
    pub fn new(bands: [Band; 3]) -> Result<Self> {
        for (class, band) in Class::TISSUES.into_iter().zip(bands) {
            if band.lo > band.hi {
                return Err(Error::InvalidBand {
                    class,
                    lo: band.lo,
                    hi: band.hi,
                });
            }
        }
        for i in 0..3 {
            for j in i + 1..3 {
                let (a, b) = (bands[i], bands[j]);
                if a.lo <= b.hi && b.lo <= a.hi {
                    return Err(Error::OverlappingBands {
                        first: Class::TISSUES[i],
                        second: Class::TISSUES[j],
                    });
                }
            }
        }
        Ok(ThresholdBands { bands })
    }

    /// Six bounds: CSF lo, hi, GM lo, hi, WM lo, hi.
    pub fn from_bounds(b: [u8; 6]) -> Result<Self> {
        Self::new([
            Band::new(b[0], b[1]),
            Band::new(b[2], b[3]),
            Band::new(b[4], b[5]),
        ])
    }

    pub fn bounds(&self) -> [u8; 6] {
        let [c, g, w] = self.bands;
        [c.lo, c.hi, g.lo, g.hi, w.lo, w.hi]
    }

    pub fn band(&self, class: Class) -> Option<Band> {
        class.tissue_index().map(|i| self.bands[i])
    }

    /// Class whose band holds `v`, if any.
    pub fn classify(&self, v: u8) -> Option<Class> {
        Class::TISSUES
            .into_iter()
            .zip(self.bands)
            .find(|(_, b)| b.contains(v))
            .map(|(c, _)| c)
    }
}

impl fmt::Display for ThresholdBands {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.bounds();
        write!(f, "{},{},{},{},{},{}", b[0], b[1], b[2], b[3], b[4], b[5])
    }
}

/// Candidate seed positions per tissue class, indexed CSF, GM, WM.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidatePool {
    lists: [Vec<Point>; 3],
}

impl CandidatePool {
    /// Every list must be non-empty.
    pub fn new(lists: [Vec<Point>; 3]) -> Result<Self> {
        for (class, list) in Class::TISSUES.into_iter().zip(&lists) {
            if list.is_empty() {
                return Err(Error::EmptyPool(class));
            }
        }
        Ok(CandidatePool { lists })
    }

    pub fn candidates(&self, class: Class) -> &[Point] {
        match class.tissue_index() {
            Some(i) => &self.lists[i],
            None => &[],
        }
    }

    pub(crate) fn by_index(&self, tissue: usize) -> &[Point] {
        &self.lists[tissue]
    }

    /// Number of distinct seed triples the pool can form.
    pub fn triple_count(&self) -> u128 {
        self.lists.iter().map(|l| l.len() as u128).product()
    }
}

/// Pool of all pixels whose intensity lies in each class band.
pub fn pool_from_thresholds(image: &Image2D, bands: &ThresholdBands) -> Result<CandidatePool> {
    let mut lists: [Vec<Point>; 3] = Default::default();
    let w = image.width();
    for (i, &v) in image.data().iter().enumerate() {
        if let Some(class) = bands.classify(v) {
            let t = class.tissue_index().expect("tissue class");
            lists[t].push(Point::new(i % w, i / w));
        }
    }
    CandidatePool::new(lists)
}

/// One uniformly drawn candidate per class, in CSF, GM, WM order.
pub fn random_seeds(pool: &CandidatePool, rng_seed: u64) -> [Seed; 3] {
    let mut rng = crate::seeded_rng(rng_seed);
    Class::TISSUES.map(|class| {
        let list = pool.candidates(class);
        Seed::new(class, list[draw_index(&mut rng, list.len())])
    })
}

pub(crate) fn draw_index<R: Rng>(rng: &mut R, len: usize) -> usize {
    rng.random_range(0..len as u64) as usize
}

/// Seeds at the three tallest peaks of the smoothed intensity histogram.
///
/// The 256-bin histogram is smoothed with a centered moving average of
/// `smoothing_window` bins (odd; truncated at the ends of the range). A peak
/// is a maximal run of equal bins that is strictly higher than both of its
/// neighbors; its position is the middle of the run. The three tallest peaks
/// (lower intensity first on ties) are assigned CSF, GM, WM from dark to
/// bright. Each seed is the first pixel in row-major order carrying the peak
/// intensity, or the closest intensity present (darker first on ties).
pub fn histogram_peak_seeds(image: &Image2D, smoothing_window: usize) -> Result<[Seed; 3]> {
    if smoothing_window == 0 || smoothing_window.is_multiple_of(2) {
        return Err(Error::InvalidConfig(
            "smoothing window must be an odd number of bins",
        ));
    }
    let mut hist = [0u64; 256];
    for &v in image.data() {
        hist[v as usize] += 1;
    }
    let smooth = smooth_histogram(&hist, smoothing_window);
    let mut peaks = find_peaks(&smooth);
    if peaks.len() < 3 {
        return Err(Error::InsufficientPeaks { found: peaks.len() });
    }
    // Tallest first; ties resolved towards the darker peak.
    peaks.sort_by(|&a, &b| smooth[b].total_cmp(&smooth[a]).then(a.cmp(&b)));
    peaks.truncate(3);
    peaks.sort_unstable();

    let mut seeds = [Seed::new(Class::Csf, Point::new(0, 0)); 3];
    for ((slot, class), peak) in seeds.iter_mut().zip(Class::TISSUES).zip(peaks) {
        let level = nearest_present(&hist, peak);
        let idx = image
            .data()
            .iter()
            .position(|&v| v as usize == level)
            .expect("intensity present");
        *slot = Seed::new(class, Point::new(idx % image.width(), idx / image.width()));
    }
    Ok(seeds)
}

fn smooth_histogram(hist: &[u64; 256], window: usize) -> [f64; 256] {
    let half = window / 2;
    let mut out = [0.0; 256];
    for (i, slot) in out.iter_mut().enumerate() {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(255);
        let sum: u64 = hist[lo..=hi].iter().sum();
        *slot = sum as f64 / (hi - lo + 1) as f64;
    }
    out
}

fn find_peaks(h: &[f64; 256]) -> Vec<usize> {
    let mut peaks = Vec::new();
    let mut i = 0;
    while i < 256 {
        let mut j = i;
        while j + 1 < 256 && h[j + 1] == h[i] {
            j += 1;
        }
        let left_lower = i == 0 || h[i - 1] < h[i];
        let right_lower = j == 255 || h[j + 1] < h[i];
        if h[i] > 0.0 && left_lower && right_lower {
            peaks.push((i + j) / 2);
        }
        i = j + 1;
    }
    peaks
}

fn nearest_present(hist: &[u64; 256], level: usize) -> usize {
    (0..256)
        .filter(|&v| hist[v] > 0)
        .min_by_key(|&v| (v.abs_diff(level), v))
        .expect("non-empty image")
}
