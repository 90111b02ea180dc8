//! Seeded region growing.
//!
//! A region starts from a single seed pixel. Pixels are visited breadth-first:
//! each dequeued pixel tests its neighbors (in [`Neighborhood::offsets`]
//! order) against the region's current statistics, and every accepted
//! neighbor updates the statistics before the next test. A rejected pixel is
//! not marked; it is tested again if another region pixel adjacent to it is
//! dequeued later.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::{ensure_same_dims, Class, Image2D, LabelMap, Point};
use crate::neighborhood::Neighborhood;
use crate::stats::{RegionStats, StatsMode};

/// Homogeneity test applied to every candidate pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthCriterion {
    k: f64,
    sigma_floor: f64,
    stats_mode: StatsMode,
}

impl Default for GrowthCriterion {
    fn default() -> Self {
        GrowthCriterion {
            k: 2.5,
            sigma_floor: 5.0,
            stats_mode: StatsMode::Exact,
        }
    }
}

impl GrowthCriterion {
    /// `k` scales the allowed deviation; `sigma_floor` is the smallest
    /// deviation used, so a fresh region (std 0) can still grow. Both must be
    /// finite and positive.
    pub fn new(k: f64, sigma_floor: f64, stats_mode: StatsMode) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidConfig("k must be a positive finite number"));
        }
        if !(sigma_floor.is_finite() && sigma_floor > 0.0) {
            return Err(Error::InvalidConfig(
                "sigma_floor must be a positive finite number",
            ));
        }
        Ok(GrowthCriterion {
            k,
            sigma_floor,
            stats_mode,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn sigma_floor(&self) -> f64 {
        self.sigma_floor
    }

    pub fn stats_mode(&self) -> StatsMode {
        self.stats_mode
    }

    /// `|intensity - mean| <= k * max(std, sigma_floor)`
    pub fn accepts(&self, stats: &RegionStats, intensity: u8) -> bool {
        let spread = if stats.std() > self.sigma_floor {
            stats.std()
        } else {
            self.sigma_floor
        };
        let diff = f64::from(intensity) - stats.mean();
        let diff = if diff < 0.0 { -diff } else { diff };
        diff <= self.k * spread
    }
}

/// Everything besides the image and seeds that determines a segmentation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthSettings {
    pub criterion: GrowthCriterion,
    pub neighborhood: Neighborhood,
    /// Order in which the three tissue regions are grown from a seed triple.
    pub class_order: [Class; 3],
}

impl GrowthSettings {
    pub const DEFAULT_CLASS_ORDER: [Class; 3] = [Class::Gm, Class::Wm, Class::Csf];

    pub fn new(criterion: GrowthCriterion, neighborhood: Neighborhood) -> Self {
        GrowthSettings {
            criterion,
            neighborhood,
            class_order: Self::DEFAULT_CLASS_ORDER,
        }
    }

    /// Checks that `class_order` is a permutation of the three tissues.
    pub fn validate(&self) -> Result<()> {
        let mut seen = [false; 3];
        for class in self.class_order {
            match class.tissue_index() {
                Some(i) if !seen[i] => seen[i] = true,
                _ => {
                    return Err(Error::InvalidConfig(
                        "class order must list csf, gm and wm once each",
                    ))
                }
            }
        }
        Ok(())
    }
}

impl Default for GrowthSettings {
    fn default() -> Self {
        Self::new(GrowthCriterion::default(), Neighborhood::default())
    }
}

/// Pixels still available to a growing region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimMask {
    width: usize,
    height: usize,
    free: Vec<bool>,
}

impl ClaimMask {
    /// Every pixel free.
    pub fn all_free(width: usize, height: usize) -> Self {
        ClaimMask {
            width,
            height,
            free: vec![true; width * height],
        }
    }

    /// Background pixels of `labels` are free; labelled pixels are claimed.
    pub fn from_labels(labels: &LabelMap) -> Self {
        ClaimMask {
            width: labels.width(),
            height: labels.height(),
            free: labels
                .labels()
                .iter()
                .map(|&c| c == Class::Background)
                .collect(),
        }
    }

    pub fn is_free(&self, p: Point) -> bool {
        p.x < self.width && p.y < self.height && self.free[p.y * self.width + p.x]
    }

    pub fn claim(&mut self, p: Point) {
        self.free[p.y * self.width + p.x] = false;
    }
}

/// Seed pixel tagged with the class its region will receive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed {
    pub class: Class,
    pub point: Point,
}

impl Seed {
    pub const fn new(class: Class, point: Point) -> Self {
        Seed { class, point }
    }
}

/// Result of growing one region.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    /// Accepted pixels, in acceptance order; the seed comes first.
    pub points: Vec<Point>,
    pub stats: RegionStats,
}

/// Grows a region from `seed` over the pixels that `claimable` leaves free.
pub fn grow_region(
    image: &Image2D,
    seed: Point,
    criterion: &GrowthCriterion,
    neighborhood: Neighborhood,
    claimable: &ClaimMask,
) -> Result<Region> {
    if claimable.width != image.width() || claimable.height != image.height() {
        return Err(Error::DimensionMismatch {
            left_width: image.width(),
            left_height: image.height(),
            right_width: claimable.width,
            right_height: claimable.height,
        });
    }
    if !image.contains(seed) {
        return Err(Error::SeedOutOfBounds {
            class: Class::Background,
            point: seed,
        });
    }
    if !claimable.is_free(seed) {
        return Err(Error::SeedRejected {
            class: Class::Background,
            point: seed,
        });
    }

    let width = image.width() as isize;
    let height = image.height() as isize;
    let pixels = image.data();
    let mode = criterion.stats_mode();

    let seed_idx = seed.y * image.width() + seed.x;
    let mut in_region = vec![false; pixels.len()];
    in_region[seed_idx] = true;
    let mut stats = RegionStats::seed(pixels[seed_idx]);
    let mut points = vec![seed];
    let mut queue = VecDeque::from([seed]);

    while let Some(p) = queue.pop_front() {
        for &(dx, dy) in neighborhood.offsets() {
            let nx = p.x as isize + dx;
            let ny = p.y as isize + dy;
            if nx < 0 || ny < 0 || nx >= width || ny >= height {
                continue;
            }
            let idx = (ny * width + nx) as usize;
            if in_region[idx] || !claimable.free[idx] {
                continue;
            }
            let value = pixels[idx];
            if criterion.accepts(&stats, value) {
                in_region[idx] = true;
                stats.push(value, mode);
                let q = Point::new(nx as usize, ny as usize);
                points.push(q);
                queue.push_back(q);
            }
        }
    }

    Ok(Region { points, stats })
}

/// Grows one region per seed, in list order. Each region can only claim
/// pixels no earlier region took; unclaimed pixels stay background.
pub fn segment(
    image: &Image2D,
    seeds: &[Seed],
    criterion: &GrowthCriterion,
    neighborhood: Neighborhood,
) -> Result<LabelMap> {
    for (i, seed) in seeds.iter().enumerate() {
        if seed.class == Class::Background {
            return Err(Error::InvalidClass(0));
        }
        if !image.contains(seed.point) {
            return Err(Error::SeedOutOfBounds {
                class: seed.class,
                point: seed.point,
            });
        }
        if seeds[..i].iter().any(|s| s.point == seed.point) {
            return Err(Error::DuplicateSeed { point: seed.point });
        }
    }

    let mut labels = LabelMap::background(image.width(), image.height())?;
    let mut claims = ClaimMask::all_free(image.width(), image.height());
    for seed in seeds {
        if !claims.is_free(seed.point) {
            return Err(Error::SeedRejected {
                class: seed.class,
                point: seed.point,
            });
        }
        let region = grow_region(image, seed.point, criterion, neighborhood, &claims)?;
        for &p in &region.points {
            claims.claim(p);
            labels.set(p, seed.class);
        }
    }
    Ok(labels)
}

/// [`segment`] with a seed triple given in tissue order (CSF, GM, WM), grown
/// in `settings.class_order`.
pub fn segment_triple(
    image: &Image2D,
    points: [Point; 3],
    settings: &GrowthSettings,
) -> Result<LabelMap> {
    let seeds = order_seeds(points, &settings.class_order);
    segment(image, &seeds, &settings.criterion, settings.neighborhood)
}

pub(crate) fn order_seeds(points: [Point; 3], order: &[Class; 3]) -> [Seed; 3] {
    order.map(|class| {
        let i = class
            .tissue_index()
            .expect("class order holds tissue classes");
        Seed::new(class, points[i])
    })
}

pub(crate) fn check_reference(image: &Image2D, reference: &LabelMap) -> Result<()> {
    ensure_same_dims(image, reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;
    use proptest::prelude::*;

    fn crit(k: f64, floor: f64) -> GrowthCriterion {
        GrowthCriterion::new(k, floor, StatsMode::Exact).unwrap()
    }

    // Plain flood fill: every pixel 4/8-connected to the seed through pixels
    // satisfying a fixed predicate.
    fn flood(
        image: &Image2D,
        seed: Point,
        nbhd: Neighborhood,
        ok: impl Fn(u8) -> bool,
    ) -> BTreeSet<Point> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![seed];
        seen.insert(seed);
        while let Some(p) = stack.pop() {
            for &(dx, dy) in nbhd.offsets() {
                let (x, y) = (p.x as isize + dx, p.y as isize + dy);
                if x < 0 || y < 0 || x >= image.width() as isize || y >= image.height() as isize {
                    continue;
                }
                let q = Point::new(x as usize, y as usize);
                if ok(image.get(q)) && seen.insert(q) {
                    stack.push(q);
                }
            }
        }
        seen
    }

    #[test]
    fn criterion_examples() {
        let c = crit(2.0, 5.0);
        let s = RegionStats::from_parts(1, 100.0, 0.0);
        assert!(c.accepts(&s, 109));
        assert!(c.accepts(&s, 110));
        assert!(!c.accepts(&s, 111));
        let c = crit(2.5, 1.0);
        assert!(!c.accepts(&RegionStats::from_parts(4, 9.0, 6.0), 25));
        assert!(c.accepts(&RegionStats::from_parts(4, 9.0, 6.0), 24));
    }

    #[test]
    fn criterion_rejects_bad_parameters() {
        assert!(GrowthCriterion::new(0.0, 5.0, StatsMode::Exact).is_err());
        assert!(GrowthCriterion::new(2.5, 0.0, StatsMode::Exact).is_err());
        assert!(GrowthCriterion::new(f64::NAN, 5.0, StatsMode::Exact).is_err());
    }

    #[test]
    fn uniform_image_is_one_region() {
        let img = Image2D::filled(8, 8, 93).unwrap();
        for nbhd in [Neighborhood::Four, Neighborhood::Eight] {
            let r = grow_region(
                &img,
                Point::new(3, 5),
                &crit(0.1, 0.1),
                nbhd,
                &ClaimMask::all_free(8, 8),
            )
            .unwrap();
            assert_eq!(r.points.len(), 64);
            assert_eq!(r.stats.std(), 0.0);
            assert_eq!(r.stats.mean(), 93.0);
        }
    }

    #[test]
    fn split_image_stops_at_edge() {
        let img = Image2D::from_fn(10, 6, |x, _| if x < 5 { 0 } else { 255 }).unwrap();
        let seed = Point::new(2, 3);
        let r = grow_region(
            &img,
            seed,
            &crit(2.0, 5.0),
            Neighborhood::Eight,
            &ClaimMask::all_free(10, 6),
        )
        .unwrap();
        let got: BTreeSet<Point> = r.points.iter().copied().collect();
        let expected = flood(&img, seed, Neighborhood::Eight, |v| v == 0);
        assert_eq!(got, expected);
        assert_eq!(got.len(), 30);
    }

    #[test]
    fn isolated_center_stays_alone() {
        let img = Image2D::from_fn(3, 3, |x, y| if (x, y) == (1, 1) { 100 } else { 200 }).unwrap();
        let r = grow_region(
            &img,
            Point::new(1, 1),
            &crit(2.0, 5.0),
            Neighborhood::Eight,
            &ClaimMask::all_free(3, 3),
        )
        .unwrap();
        assert_eq!(r.points, vec![Point::new(1, 1)]);
        assert_eq!(r.stats.count(), 1);
    }

    #[test]
    fn diagonal_neighborhood_skips_edge_neighbors() {
        // A plus sign of equal values is invisible to diagonal growth.
        let img = Image2D::from_fn(3, 3, |x, y| if x == 1 || y == 1 { 50 } else { 200 }).unwrap();
        let r = grow_region(
            &img,
            Point::new(1, 1),
            &crit(2.0, 5.0),
            Neighborhood::DiagonalFour,
            &ClaimMask::all_free(3, 3),
        )
        .unwrap();
        assert_eq!(r.points.len(), 1);
        let r = grow_region(
            &img,
            Point::new(1, 1),
            &crit(2.0, 5.0),
            Neighborhood::Four,
            &ClaimMask::all_free(3, 3),
        )
        .unwrap();
        assert_eq!(r.points.len(), 5);
    }

    #[test]
    fn neighbors_are_visited_in_fixed_order() {
        let img = Image2D::filled(3, 3, 10).unwrap();
        let r = grow_region(
            &img,
            Point::new(1, 1),
            &crit(1.0, 1.0),
            Neighborhood::Eight,
            &ClaimMask::all_free(3, 3),
        )
        .unwrap();
        let order: Vec<(usize, usize)> = r.points.iter().map(|p| (p.x, p.y)).collect();
        assert_eq!(
            order,
            vec![
                (1, 1),
                (1, 0),
                (1, 2),
                (0, 1),
                (2, 1),
                (0, 0),
                (2, 0),
                (0, 2),
                (2, 2)
            ]
        );
    }

    #[test]
    fn seed_errors() {
        let img = Image2D::filled(4, 4, 0).unwrap();
        let free = ClaimMask::all_free(4, 4);
        assert!(matches!(
            grow_region(
                &img,
                Point::new(4, 0),
                &crit(2.0, 5.0),
                Neighborhood::Eight,
                &free
            ),
            Err(Error::SeedOutOfBounds { .. })
        ));
        let mut claimed = free.clone();
        claimed.claim(Point::new(1, 1));
        assert!(matches!(
            grow_region(
                &img,
                Point::new(1, 1),
                &crit(2.0, 5.0),
                Neighborhood::Eight,
                &claimed
            ),
            Err(Error::SeedRejected { .. })
        ));
    }

    #[test]
    fn growth_respects_claims() {
        let img = Image2D::filled(5, 1, 10).unwrap();
        let mut claims = ClaimMask::all_free(5, 1);
        claims.claim(Point::new(2, 0));
        let r = grow_region(
            &img,
            Point::new(0, 0),
            &crit(2.0, 5.0),
            Neighborhood::Eight,
            &claims,
        )
        .unwrap();
        assert_eq!(r.points.len(), 2);
    }

    #[test]
    fn segment_three_blobs() {
        // Three uniform squares on a zero background.
        let blobs = [
            (Class::Csf, 2, 2, 40u8),
            (Class::Gm, 10, 3, 120),
            (Class::Wm, 5, 10, 220),
        ];
        let img = Image2D::from_fn(16, 16, |x, y| {
            for &(_, bx, by, v) in &blobs {
                if (bx..bx + 4).contains(&x) && (by..by + 4).contains(&y) {
                    return v;
                }
            }
            0
        })
        .unwrap();
        let seeds: Vec<Seed> = blobs
            .iter()
            .map(|&(c, x, y, _)| Seed::new(c, Point::new(x + 1, y + 2)))
            .collect();
        let labels = segment(
            &img,
            &seeds,
            &GrowthCriterion::default(),
            Neighborhood::Eight,
        )
        .unwrap();
        for &(class, bx, by, v) in &blobs {
            let expected = flood(&img, Point::new(bx, by), Neighborhood::Eight, |p| p == v);
            let got: BTreeSet<Point> = labels
                .iter()
                .filter(|&(_, c)| c == class)
                .map(|(p, _)| p)
                .collect();
            assert_eq!(got, expected);
        }
        assert_eq!(labels.count(Class::Background), 256 - 48);
    }

    #[test]
    fn segment_without_seeds_is_background() {
        let img = Image2D::filled(3, 2, 7).unwrap();
        let labels = segment(&img, &[], &GrowthCriterion::default(), Neighborhood::Eight).unwrap();
        assert_eq!(labels, LabelMap::background(3, 2).unwrap());
    }

    #[test]
    fn second_seed_in_claimed_field_is_rejected() {
        let img = Image2D::filled(6, 6, 80).unwrap();
        let seeds = [
            Seed::new(Class::Csf, Point::new(0, 0)),
            Seed::new(Class::Gm, Point::new(5, 5)),
        ];
        let err = segment(
            &img,
            &seeds,
            &GrowthCriterion::default(),
            Neighborhood::Eight,
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::SeedRejected {
                class: Class::Gm,
                point: Point::new(5, 5)
            }
        );
        let labels = segment(
            &img,
            &seeds[..1],
            &GrowthCriterion::default(),
            Neighborhood::Eight,
        )
        .unwrap();
        assert_eq!(labels.count(Class::Csf), 36);
    }

    #[test]
    fn duplicate_seed_positions_are_a_config_error() {
        let img = Image2D::filled(4, 4, 0).unwrap();
        let seeds = [
            Seed::new(Class::Csf, Point::new(1, 1)),
            Seed::new(Class::Wm, Point::new(1, 1)),
        ];
        assert_eq!(
            segment(
                &img,
                &seeds,
                &GrowthCriterion::default(),
                Neighborhood::Eight
            ),
            Err(Error::DuplicateSeed {
                point: Point::new(1, 1)
            })
        );
    }

    #[test]
    fn class_order_validation() {
        let mut s = GrowthSettings::default();
        assert!(s.validate().is_ok());
        s.class_order = [Class::Gm, Class::Gm, Class::Csf];
        assert!(s.validate().is_err());
    }

    fn small_image() -> impl Strategy<Value = Image2D> {
        (1usize..=8, 1usize..=8).prop_flat_map(|(w, h)| {
            proptest::collection::vec(prop_oneof![Just(0u8), Just(128u8), Just(255u8)], w * h)
                .prop_map(move |data| Image2D::new(w, h, data).unwrap())
        })
    }

    fn any_nbhd() -> impl Strategy<Value = Neighborhood> {
        prop_oneof![
            Just(Neighborhood::Four),
            Just(Neighborhood::DiagonalFour),
            Just(Neighborhood::Eight)
        ]
    }

    proptest! {
        #[test]
        fn region_is_connected_and_stats_match(
            img in small_image(),
            nbhd in any_nbhd(),
            sx in 0usize..8, sy in 0usize..8,
            k in 0.5f64..4.0, floor in 1.0f64..80.0,
        ) {
            let seed = Point::new(sx % img.width(), sy % img.height());
            let c = crit(k, floor);
            let r = grow_region(&img, seed, &c, nbhd, &ClaimMask::all_free(img.width(), img.height())).unwrap();
            let set: BTreeSet<Point> = r.points.iter().copied().collect();
            prop_assert_eq!(set.len(), r.points.len());
            // connected: flood fill restricted to the region reaches all of it
            let reach = {
                let mut seen = BTreeSet::from([seed]);
                let mut stack = vec![seed];
                while let Some(p) = stack.pop() {
                    for &(dx, dy) in nbhd.offsets() {
                        let (x, y) = (p.x as isize + dx, p.y as isize + dy);
                        if x < 0 || y < 0 { continue; }
                        let q = Point::new(x as usize, y as usize);
                        if set.contains(&q) && seen.insert(q) { stack.push(q); }
                    }
                }
                seen
            };
            prop_assert_eq!(&reach, &set);
            let vals: Vec<f64> = r.points.iter().map(|&p| f64::from(img.get(p))).collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let std = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            prop_assert!((r.stats.mean() - mean).abs() < 1e-9);
            prop_assert!((r.stats.std() - std).abs() < 1e-9);
        }

        #[test]
        fn segment_labels_are_disjoint_connected_regions(
            img in small_image(),
            nbhd in any_nbhd(),
            raw in proptest::collection::vec((0usize..64, 1u8..=3), 1..4),
        ) {
            let mut seeds: Vec<Seed> = Vec::new();
            for (i, c) in raw {
                let p = Point::new(i % img.width(), (i / img.width()) % img.height());
                if seeds.iter().all(|s| s.point != p && s.class != Class::from_code(c).unwrap()) {
                    seeds.push(Seed::new(Class::from_code(c).unwrap(), p));
                }
            }
            match segment(&img, &seeds, &GrowthCriterion::default(), nbhd) {
                Ok(labels) => {
                    for s in &seeds {
                        let members: BTreeSet<Point> =
                            labels.iter().filter(|&(_, c)| c == s.class).map(|(p, _)| p).collect();
                        prop_assert!(members.contains(&s.point));
                    }
                    let again = segment(&img, &seeds, &GrowthCriterion::default(), nbhd).unwrap();
                    prop_assert_eq!(labels, again);
                }
                Err(Error::SeedRejected { .. }) => {}
                Err(e) => prop_assert!(false, "unexpected error {e:?}"),
            }
        }
    }
}
