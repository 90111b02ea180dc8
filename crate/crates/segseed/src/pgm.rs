//! Binary 8-bit PGM (`P5`, maxval 255) reading and writing.
//!
//! Label maps use the same format with pixel values equal to class codes.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use segseed_core::{Image2D, LabelMap};

/// Problems with the bytes of a PGM file.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("truncated header")]
    TruncatedHeader,
    #[error("bad magic number: expected P5")]
    BadMagic,
    #[error("invalid {0} in header")]
    InvalidField(&'static str),
    #[error("unsupported maxval {0}: only 255 is supported")]
    UnsupportedMaxval(u32),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("invalid raster: {0}")]
    Raster(#[from] segseed_core::Error),
}

#[derive(Debug, thiserror::Error)]
pub enum PgmError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
}

impl PgmError {
    pub fn path(&self) -> &Path {
        match self {
            PgmError::Io { path, .. } | PgmError::Format { path, .. } => path,
        }
    }
}

/// Parses a `P5` PGM held in memory. Comments (`#` to end of line) are
/// allowed between header fields; bytes after the pixel payload are ignored.
pub fn decode(bytes: &[u8]) -> Result<Image2D, FormatError> {
    let mut cursor = Header { bytes, pos: 0 };
    match bytes {
        [] | [_] => return Err(FormatError::TruncatedHeader),
        [b'P', b'5', ..] => cursor.pos = 2,
        _ => return Err(FormatError::BadMagic),
    }
    let width = cursor.field("width")?;
    let height = cursor.field("height")?;
    let maxval = cursor.field("maxval")?;
    if width == 0 {
        return Err(FormatError::InvalidField("width"));
    }
    if height == 0 {
        return Err(FormatError::InvalidField("height"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(FormatError::InvalidField("maxval"));
    }
    if maxval != 255 {
        return Err(FormatError::UnsupportedMaxval(maxval));
    }
    // exactly one whitespace byte separates maxval from the raster
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        Some(_) => return Err(FormatError::InvalidField("maxval")),
        None => return Err(FormatError::TruncatedHeader),
    }
    let (width, height) = (width as usize, height as usize);
    let expected = width * height;
    let payload = &bytes[cursor.pos..];
    if payload.len() < expected {
        return Err(FormatError::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    Ok(Image2D::new(width, height, payload[..expected].to_vec())?)
}

/// Serializes `image` as `P5\n<w> <h>\n255\n` followed by the raw bytes.
pub fn encode(image: &Image2D) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.data());
    out
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<Image2D, PgmError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| PgmError::Io {
        path: path.to_owned(),
        source,
    })?;
    decode(&bytes).map_err(|source| PgmError::Format {
        path: path.to_owned(),
        source,
    })
}

pub fn save_pgm(image: &Image2D, path: impl AsRef<Path>) -> Result<(), PgmError> {
    let path = path.as_ref();
    fs::write(path, encode(image)).map_err(|source| PgmError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Loads a label map; every pixel value must be a class code 0..=3.
pub fn load_labels(path: impl AsRef<Path>) -> Result<LabelMap, PgmError> {
    let path = path.as_ref();
    let image = load_pgm(path)?;
    LabelMap::from_image(&image).map_err(|e| PgmError::Format {
        path: path.to_owned(),
        source: FormatError::Raster(e),
    })
}

pub fn save_labels(labels: &LabelMap, path: impl AsRef<Path>) -> Result<(), PgmError> {
    save_pgm(&labels.to_image(), path)
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn field(&mut self, name: &'static str) -> Result<u32, FormatError> {
        let start = self.pos;
        self.skip_separators();
        if self.pos == start && start > 0 {
            // fields must be separated by whitespace
            return Err(FormatError::InvalidField(name));
        }
        let digits_start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if self.pos == digits_start {
            return match self.bytes.get(self.pos) {
                None => Err(FormatError::TruncatedHeader),
                Some(_) => Err(FormatError::InvalidField(name)),
            };
        }
        if self.pos == self.bytes.len() {
            return Err(FormatError::TruncatedHeader);
        }
        std::str::from_utf8(&self.bytes[digits_start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(FormatError::InvalidField(name))
    }
}
