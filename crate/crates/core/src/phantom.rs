//! Synthetic brain-like test images with known labels.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::image::{Class, Image2D, LabelMap};

/// Layout of the three tissue classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Geometry {
    /// Nested ellipses around the image center: WM core, GM ring, CSF ring,
    /// background outside.
    #[default]
    Concentric,
    /// Three disjoint, non-touching ellipses, one per class.
    Blobs,
}

impl Geometry {
    pub fn name(self) -> &'static str {
        match self {
            Geometry::Concentric => "concentric",
            Geometry::Blobs => "blobs",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "concentric" => Some(Geometry::Concentric),
            "blobs" => Some(Geometry::Blobs),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhantomSpec {
    pub width: usize,
    pub height: usize,
    /// Mean intensity of CSF, GM, WM.
    pub class_means: [u8; 3],
    pub background: u8,
    /// Standard deviation of the additive Gaussian noise.
    pub noise_std: f64,
    pub geometry: Geometry,
    pub rng_seed: u64,
    /// Fail unless every pair of class means is at least `4 * noise_std` apart.
    pub require_separable: bool,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        PhantomSpec {
            width: 128,
            height: 128,
            class_means: [40, 120, 220],
            background: 0,
            noise_std: 0.0,
            geometry: Geometry::Concentric,
            rng_seed: 0,
            require_separable: false,
        }
    }
}

/// Generates an image and its ground-truth labels.
///
/// Labels come from the geometry; each pixel's intensity is its class mean
/// (or the background level) plus Gaussian noise, rounded and clamped to
/// `[0, 255]`. The same spec always yields the same pair.
pub fn generate(spec: &PhantomSpec) -> Result<(Image2D, LabelMap)> {
    if spec.width < 16 || spec.height < 16 {
        return Err(Error::PhantomTooSmall {
            width: spec.width,
            height: spec.height,
        });
    }
    if !(spec.noise_std.is_finite() && spec.noise_std >= 0.0) {
        return Err(Error::InvalidConfig(
            "noise_std must be finite and non-negative",
        ));
    }
    if spec.require_separable {
        let m = spec.class_means.map(f64::from);
        let gap = 4.0 * spec.noise_std;
        if (m[0] - m[1]).abs() < gap || (m[1] - m[2]).abs() < gap || (m[0] - m[2]).abs() < gap {
            return Err(Error::NotSeparable);
        }
    }

    let mut rng = crate::seeded_rng(spec.rng_seed);
    let labels = match spec.geometry {
        Geometry::Concentric => concentric(spec.width, spec.height, &mut rng),
        Geometry::Blobs => blobs(spec.width, spec.height, &mut rng)?,
    };
    let labels = LabelMap::new(spec.width, spec.height, labels)?;

    let min_pixels = labels.len().div_ceil(100);
    if Class::TISSUES.iter().any(|&c| labels.count(c) < min_pixels) {
        return Err(Error::PhantomTooSmall {
            width: spec.width,
            height: spec.height,
        });
    }

    let noise = if spec.noise_std > 0.0 {
        Some(Normal::new(0.0, spec.noise_std).map_err(|_| Error::InvalidConfig("noise_std"))?)
    } else {
        None
    };
    let data = labels
        .labels()
        .iter()
        .map(|&class| {
            let base = match class.tissue_index() {
                Some(i) => spec.class_means[i],
                None => spec.background,
            };
            match &noise {
                Some(n) => {
                    let v = libm::round(f64::from(base) + n.sample(&mut rng));
                    v.clamp(0.0, 255.0) as u8
                }
                None => base,
            }
        })
        .collect();
    let image = Image2D::new(spec.width, spec.height, data)?;
    Ok((image, labels))
}

// Relative radii (outer CSF boundary = 1) where WM and GM end.
const WM_RADIUS: f64 = 0.45;
const GM_RADIUS: f64 = 0.72;

fn concentric<R: Rng>(width: usize, height: usize, rng: &mut R) -> Vec<Class> {
    let (w, h) = (width as f64, height as f64);
    let cx = (w - 1.0) / 2.0 + rng.random_range(-1.0..=1.0) * w / 40.0;
    let cy = (h - 1.0) / 2.0 + rng.random_range(-1.0..=1.0) * h / 40.0;
    let ax = 0.42 * w * rng.random_range(0.92..=1.0);
    let ay = 0.42 * h * rng.random_range(0.92..=1.0);

    let mut labels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let dx = (x as f64 - cx) / ax;
            let dy = (y as f64 - cy) / ay;
            let r = libm::sqrt(dx * dx + dy * dy);
            labels.push(if r <= WM_RADIUS {
                Class::Wm
            } else if r <= GM_RADIUS {
                Class::Gm
            } else if r <= 1.0 {
                Class::Csf
            } else {
                Class::Background
            });
        }
    }
    labels
}

fn blobs<R: Rng>(width: usize, height: usize, rng: &mut R) -> Result<Vec<Class>> {
    let mut labels = vec![Class::Background; width * height];
    let short = width.min(height) as f64;
    for class in Class::TISSUES {
        let mut placed = false;
        for _ in 0..500 {
            let ax = short * rng.random_range(0.10..=0.18);
            let ay = short * rng.random_range(0.10..=0.18);
            let cx = rng.random_range(ax + 1.0..=width as f64 - 2.0 - ax);
            let cy = rng.random_range(ay + 1.0..=height as f64 - 2.0 - ay);
            let pixels = ellipse_pixels(width, height, cx, cy, ax, ay);
            if pixels
                .iter()
                .all(|&i| no_labelled_neighbor(&labels, width, height, i))
            {
                for i in pixels {
                    labels[i] = class;
                }
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::BlobPlacement);
        }
    }
    Ok(labels)
}

fn ellipse_pixels(width: usize, height: usize, cx: f64, cy: f64, ax: f64, ay: f64) -> Vec<usize> {
    let mut out = Vec::new();
    for y in 0..height {
        for x in 0..width {
            let dx = (x as f64 - cx) / ax;
            let dy = (y as f64 - cy) / ay;
            if dx * dx + dy * dy <= 1.0 {
                out.push(y * width + x);
            }
        }
    }
    out
}

// True when the pixel and its eight neighbors are all unlabelled.
fn no_labelled_neighbor(labels: &[Class], width: usize, height: usize, idx: usize) -> bool {
    let (x, y) = ((idx % width) as isize, (idx / width) as isize);
    for dy in -1..=1 {
        for dx in -1..=1 {
            let (nx, ny) = (x + dx, y + dy);
            let inside = nx >= 0 && ny >= 0 && (nx as usize) < width && (ny as usize) < height;
            if inside && labels[ny as usize * width + nx as usize] != Class::Background {
                return false;
            }
        }
    }
    true
}
