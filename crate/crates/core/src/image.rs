//! Grayscale rasters, label maps and pixel coordinates.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Pixel coordinate: `x` is the column, `y` the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    pub x: usize,
    pub y: usize,
}

impl Point {
    pub const fn new(x: usize, y: usize) -> Self {
        Point { x, y }
    }
}

/// Tissue class of a pixel. Codes follow the dark-to-bright intensity order
/// of the tissues: CSF < GM < WM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[repr(u8)]
pub enum Class {
    #[default]
    Background = 0,
    Csf = 1,
    Gm = 2,
    Wm = 3,
}

impl Class {
    /// The three tissue classes in code order.
    pub const TISSUES: [Class; 3] = [Class::Csf, Class::Gm, Class::Wm];

    pub const fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<Class> {
        match code {
            0 => Ok(Class::Background),
            1 => Ok(Class::Csf),
            2 => Ok(Class::Gm),
            3 => Ok(Class::Wm),
            other => Err(Error::InvalidClass(other)),
        }
    }

    /// Position of a tissue class in [`Class::TISSUES`], `None` for background.
    pub const fn tissue_index(self) -> Option<usize> {
        match self {
            Class::Background => None,
            Class::Csf => Some(0),
            Class::Gm => Some(1),
            Class::Wm => Some(2),
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Class::Background => "background",
            Class::Csf => "csf",
            Class::Gm => "gm",
            Class::Wm => "wm",
        }
    }

    /// Parses a class name (`csf`, `gm`, `wm`, case-insensitive) or a code `1`..`3`.
    pub fn parse_tissue(s: &str) -> Option<Class> {
        let s = s.trim();
        let class = if s.eq_ignore_ascii_case("csf") || s == "1" {
            Class::Csf
        } else if s.eq_ignore_ascii_case("gm") || s == "2" {
            Class::Gm
        } else if s.eq_ignore_ascii_case("wm") || s == "3" {
            Class::Wm
        } else {
            return None;
        };
        Some(class)
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyImage { width, height });
    }
    let expected = width * height;
    if len != expected {
        return Err(Error::BufferLength {
            expected,
            actual: len,
        });
    }
    Ok(())
}

/// 8-bit grayscale raster stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Image2D {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Image2D {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Image2D {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x < self.width && p.y < self.height
    }

    /// Intensity at `p`. Panics when `p` is out of bounds.
    pub fn get(&self, p: Point) -> u8 {
        assert!(
            self.contains(p),
            "point {:?} outside {}x{}",
            p,
            self.width,
            self.height
        );
        self.data[p.y * self.width + p.x]
    }

    pub fn same_dims<T: Dims>(&self, other: &T) -> Result<()> {
        ensure_same_dims(self, other)
    }
}

/// Anything with raster dimensions.
pub trait Dims {
    fn dims(&self) -> (usize, usize);
}

impl Dims for Image2D {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

impl Dims for LabelMap {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

pub(crate) fn ensure_same_dims(a: &impl Dims, b: &impl Dims) -> Result<()> {
    let (lw, lh) = a.dims();
    let (rw, rh) = b.dims();
    if (lw, lh) != (rw, rh) {
        return Err(Error::DimensionMismatch {
            left_width: lw,
            left_height: lh,
            right_width: rw,
            right_height: rh,
        });
    }
    Ok(())
}

/// Per-pixel class assignment, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<Class>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<Class>) -> Result<Self> {
        check_dims(width, height, labels.len())?;
        Ok(LabelMap {
            width,
            height,
            labels,
        })
    }

    /// All-background map.
    pub fn background(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![Class::Background; width * height])
    }

    /// Decodes raw class codes; any code above 3 is an error.
    pub fn from_codes(width: usize, height: usize, codes: &[u8]) -> Result<Self> {
        check_dims(width, height, codes.len())?;
        let labels = codes
            .iter()
            .map(|&c| Class::from_code(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(LabelMap {
            width,
            height,
            labels,
        })
    }

    /// Interprets pixel values of `image` as class codes.
    pub fn from_image(image: &Image2D) -> Result<Self> {
        Self::from_codes(image.width, image.height, &image.data)
    }

    /// Encodes the map as an image whose pixel values are the class codes.
    pub fn to_image(&self) -> Image2D {
        Image2D {
            width: self.width,
            height: self.height,
            data: self.labels.iter().map(|c| c.code()).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Class] {
        &self.labels
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x < self.width && p.y < self.height
    }

    pub fn get(&self, p: Point) -> Class {
        assert!(
            self.contains(p),
            "point {:?} outside {}x{}",
            p,
            self.width,
            self.height
        );
        self.labels[p.y * self.width + p.x]
    }

    pub fn set(&mut self, p: Point, class: Class) {
        assert!(
            self.contains(p),
            "point {:?} outside {}x{}",
            p,
            self.width,
            self.height
        );
        self.labels[p.y * self.width + p.x] = class;
    }

    /// Number of pixels labelled `class`.
    pub fn count(&self, class: Class) -> usize {
        self.labels.iter().filter(|&&c| c == class).count()
    }

    /// Row-major iterator over `(point, class)`.
    pub fn iter(&self) -> impl Iterator<Item = (Point, Class)> + '_ {
        let w = self.width;
        self.labels
            .iter()
            .enumerate()
            .map(move |(i, &c)| (Point::new(i % w, i / w), c))
    }
}

/// Binary mask of one tissue class: 1 where the label equals `class`, else 0.
pub fn mask_of_class(labels: &LabelMap, class: Class) -> Result<Image2D> {
    if class == Class::Background {
        return Err(Error::InvalidClass(class.code()));
    }
    Ok(Image2D {
        width: labels.width,
        height: labels.height,
        data: labels
            .labels
            .iter()
            .map(|&c| u8::from(c == class))
            .collect(),
    })
}
