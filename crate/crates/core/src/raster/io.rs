//! Binary PGM (P5) and the little-endian `SARF` float container.
//!
//! `SARF` layout, all integers little-endian:
//!
//! | offset | size | field                         |
//! |--------|------|-------------------------------|
//! | 0      | 4    | magic `b"SARF"`               |
//! | 4      | 4    | width (u32)                   |
//! | 8      | 4    | height (u32)                  |
//! | 12     | 4    | reserved, always 0            |
//! | 16     | 4·wh | IEEE-754 f32 pixels, row-major |

use std::fs;
use std::path::Path;

use super::Raster;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const SARF_MAGIC: &[u8; 4] = b"SARF";
pub const SARF_HEADER_LEN: usize = 16;

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn read_uint(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse { offset: start, message: format!("expected {what}") });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse { offset: start, message: format!("{what} out of range") })
    }
}

/// Decodes a binary PGM, scaling samples to `[0, 1]` by `maxval`.
pub fn decode_pgm<T: Real>(bytes: &[u8]) -> Result<Raster<T>> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        let found = String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned();
        return Err(Error::Parse { offset: 0, message: format!("expected magic P5, found {found:?}") });
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    let width = cur.read_uint("width")?;
    let height = cur.read_uint("height")?;
    let maxval_at = cur.pos;
    let maxval = cur.read_uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Parse { offset: maxval_at, message: "zero image dimension".into() });
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Parse { offset: maxval_at, message: format!("maxval {maxval} not in 1..=65535") });
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::Parse { offset: cur.pos, message: "missing whitespace after maxval".into() }),
    }
    let data = &bytes[cur.pos..];
    let n = width * height;
    let sample_bytes = if maxval > 255 { 2 } else { 1 };
    if data.len() < n * sample_bytes {
        return Err(Error::Length { expected: n, found: data.len() / sample_bytes });
    }
    let scale = T::lit(maxval as f64);
    let values = if sample_bytes == 1 {
        data[..n].iter().map(|&b| T::lit(b as f64) / scale).collect()
    } else {
        data[..2 * n].chunks_exact(2).map(|c| T::lit(u16::from_be_bytes([c[0], c[1]]) as f64) / scale).collect()
    };
    Ok(Raster::from_parts(width, height, values))
}

pub fn load_pgm<T: Real>(path: impl AsRef<Path>) -> Result<Raster<T>> {
    decode_pgm(&fs::read(path)?)
}

/// Encodes as P5 with maxval 255, writing `round(255 v)`.
pub fn encode_pgm<T: Real>(raster: &Raster<T>) -> Result<Vec<u8>> {
    let mut gray = Vec::with_capacity(raster.len());
    for (index, &v) in raster.values().iter().enumerate() {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(Error::Range { index, value: v.as_f64() });
        }
        gray.push((v.as_f64() * 255.0).round() as u8);
    }
    Ok(pgm_bytes(raster.width(), raster.height(), &gray))
}

pub fn save_pgm<T: Real>(raster: &Raster<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_pgm(raster)?)?;
    Ok(())
}

fn pgm_bytes(width: usize, height: usize, gray: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(gray);
    out
}

/// Writes already-quantized gray levels (label maps, previews).
pub fn save_pgm_bytes(width: usize, height: usize, gray: &[u8], path: impl AsRef<Path>) -> Result<()> {
    if gray.len() != width * height {
        return Err(Error::Length { expected: width * height, found: gray.len() });
    }
    fs::write(path, pgm_bytes(width, height, gray))?;
    Ok(())
}

pub fn encode_sarf<T: Real>(raster: &Raster<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(SARF_HEADER_LEN + 4 * raster.len());
    out.extend_from_slice(SARF_MAGIC);
    out.extend_from_slice(&(raster.width() as u32).to_le_bytes());
    out.extend_from_slice(&(raster.height() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for &v in raster.values() {
        out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
    }
    out
}

pub fn decode_sarf<T: Real>(bytes: &[u8]) -> Result<Raster<T>> {
    if bytes.len() < SARF_HEADER_LEN {
        return Err(Error::Parse { offset: bytes.len(), message: "truncated SARF header".into() });
    }
    if &bytes[..4] != SARF_MAGIC {
        return Err(Error::Parse { offset: 0, message: "bad SARF magic".into() });
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let (width, height) = (word(4), word(8));
    let payload = &bytes[SARF_HEADER_LEN..];
    let n = width * height;
    if payload.len() != 4 * n {
        return Err(Error::Length { expected: n, found: payload.len() / 4 });
    }
    let values = payload.chunks_exact(4).map(|c| T::lit(f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)).collect();
    Raster::new(width, height, values)
}

pub fn save_f32<T: Real>(raster: &Raster<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_sarf(raster))?;
    Ok(())
}

pub fn load_f32<T: Real>(path: impl AsRef<Path>) -> Result<Raster<T>> {
    decode_sarf(&fs::read(path)?)
}

/// Loads either format, dispatching on the file magic.
pub fn load_raster<T: Real>(path: impl AsRef<Path>) -> Result<Raster<T>> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(SARF_MAGIC) {
        decode_sarf(&bytes)
    } else {
        decode_pgm(&bytes)
    }
}
