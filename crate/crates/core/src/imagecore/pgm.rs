//! Binary PGM (P5) reader and writer.

use std::fs;
use std::path::Path;

use super::Image;
use crate::error::{parse_err, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Maxval {
    Eight,
    Sixteen,
}

impl Maxval {
    pub fn value(self) -> u32 {
        match self {
            Maxval::Eight => 255,
            Maxval::Sixteen => 65535,
        }
    }

    pub fn from_value(v: u32) -> Option<Self> {
        match v {
            255 => Some(Maxval::Eight),
            65535 => Some(Maxval::Sixteen),
            _ => None,
        }
    }

    fn bytes_per_sample(self) -> usize {
        match self {
            Maxval::Eight => 1,
            Maxval::Sixteen => 2,
        }
    }
}

struct HeaderReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.buf.len() {
            match self.buf[self.pos] {
                b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c => self.pos += 1,
                b'#' => {
                    while self.pos < self.buf.len() && self.buf[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.buf.len() && self.buf[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(parse_err(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.buf[start..self.pos])
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| parse_err(start, format!("{what} out of range")))
    }
}

/// Parse a P5 byte stream into an image with intensities in `[0, 1]`.
pub fn decode_pgm(buf: &[u8]) -> Result<Image> {
    if buf.len() < 2 || &buf[..2] != b"P5" {
        return Err(parse_err(0, "missing P5 magic"));
    }
    let mut rd = HeaderReader { buf, pos: 2 };
    let width = rd.number("width")? as usize;
    let height = rd.number("height")? as usize;
    let maxval_pos = rd.pos;
    let raw_maxval = rd.number("maxval")?;
    let maxval = Maxval::from_value(raw_maxval).ok_or(Error::UnsupportedMaxval(raw_maxval))?;
    if width == 0 || height == 0 {
        return Err(parse_err(maxval_pos, "zero image dimension"));
    }
    // exactly one whitespace byte separates the header from the raster
    match buf.get(rd.pos) {
        Some(c) if c.is_ascii_whitespace() => rd.pos += 1,
        _ => return Err(parse_err(rd.pos, "expected whitespace after maxval")),
    }
    let payload = &buf[rd.pos..];
    let needed = width * height * maxval.bytes_per_sample();
    if payload.len() < needed {
        return Err(parse_err(
            rd.pos + payload.len(),
            format!("truncated payload: expected {needed} bytes, found {}", payload.len()),
        ));
    }
    let scale = maxval.value() as f64;
    let data = match maxval {
        Maxval::Eight => payload[..needed].iter().map(|&b| b as f64 / scale).collect(),
        Maxval::Sixteen => payload[..needed]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / scale)
            .collect(),
    };
    Image::new(width, height, data)
}

#[inline]
fn quantize(v: f64, maxval: Maxval) -> u32 {
    // f64::round rounds half away from zero
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v * maxval.value() as f64).round() as u32
}

/// Encode an image as P5. Samples are clamped to `[0, 1]` and rounded half
/// away from zero.
pub fn encode_pgm(image: &Image, maxval: Maxval) -> Vec<u8> {
    let header = format!("P5\n{} {}\n{}\n", image.width(), image.height(), maxval.value());
    let mut out = Vec::with_capacity(header.len() + image.samples().len() * maxval.bytes_per_sample());
    out.extend_from_slice(header.as_bytes());
    for &v in image.samples() {
        let q = quantize(v, maxval);
        match maxval {
            Maxval::Eight => out.push(q as u8),
            Maxval::Sixteen => out.extend_from_slice(&(q as u16).to_be_bytes()),
        }
    }
    out
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<Image> {
    decode_pgm(&fs::read(path)?)
}

pub fn save_pgm(image: &Image, path: impl AsRef<Path>, maxval: Maxval) -> Result<()> {
    fs::write(path, encode_pgm(image, maxval))?;
    Ok(())
}
