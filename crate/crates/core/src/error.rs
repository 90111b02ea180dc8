use crate::image::{Class, Point};

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },

    #[error("pixel buffer holds {actual} values, expected {expected} for the stated dimensions")]
    BufferLength { expected: usize, actual: usize },

    #[error("invalid class code {0}: expected 1 (csf), 2 (gm) or 3 (wm)")]
    InvalidClass(u8),

    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("seed for {class} at ({x}, {y}) lies outside the image", x = point.x, y = point.y)]
    SeedOutOfBounds { class: Class, point: Point },

    #[error("seed for {class} at ({x}, {y}) rejected: pixel already claimed", x = point.x, y = point.y)]
    SeedRejected { class: Class, point: Point },

    #[error("duplicate seed position ({x}, {y})", x = point.x, y = point.y)]
    DuplicateSeed { point: Point },

    #[error("invalid threshold band for {class}: lo {lo} > hi {hi}")]
    InvalidBand { class: Class, lo: u8, hi: u8 },

    #[error("threshold bands for {first} and {second} overlap")]
    OverlappingBands { first: Class, second: Class },

    #[error("candidate pool for {0} is empty")]
    EmptyPool(Class),

    #[error("histogram has {found} local maxima, need 3")]
    InsufficientPeaks { found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("phantom of {width}x{height} is too small, need at least 16x16")]
    PhantomTooSmall { width: usize, height: usize },

    #[error("class means are not separated by at least 4 noise standard deviations")]
    NotSeparable,

    #[error("could not place disjoint blobs for all three classes")]
    BlobPlacement,
}
