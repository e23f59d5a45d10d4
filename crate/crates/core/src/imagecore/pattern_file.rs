//! NSP1 quadrant pattern files.
//!
//! Layout: the magic line `NSP1\n`, an ASCII line `width height meaning\n`
//! where meaning is `D` (code marks the discarded quadrant) or `K` (code marks
//! the kept quadrant), then `width * height` raw code bytes in row-major order.

use std::fs;
use std::path::Path;

use super::{CodeMeaning, QuadrantPattern};
use crate::error::{parse_err, Error, Result};

const MAGIC: &[u8] = b"NSP1\n";

pub fn encode_pattern(pattern: &QuadrantPattern) -> Vec<u8> {
    let mut out = MAGIC.to_vec();
    out.extend_from_slice(
        format!("{} {} {}\n", pattern.width(), pattern.height(), pattern.meaning().tag()).as_bytes(),
    );
    out.extend_from_slice(pattern.codes());
    out
}

pub fn decode_pattern(buf: &[u8]) -> Result<QuadrantPattern> {
    if !buf.starts_with(MAGIC) {
        return Err(Error::BadMagic);
    }
    let start = MAGIC.len();
    let eol = buf[start..]
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| parse_err(start, "unterminated dimension line"))?;
    let line = std::str::from_utf8(&buf[start..start + eol])
        .map_err(|_| parse_err(start, "dimension line is not ASCII"))?;
    let fields: Vec<&str> = line.split(' ').collect();
    if fields.len() != 3 {
        return Err(parse_err(start, "expected `width height meaning`"));
    }
    let width: usize = fields[0]
        .parse()
        .map_err(|_| parse_err(start, "bad width"))?;
    let height: usize = fields[1]
        .parse()
        .map_err(|_| parse_err(start, "bad height"))?;
    let meaning = CodeMeaning::from_tag(fields[2])
        .ok_or_else(|| parse_err(start, format!("bad meaning `{}`", fields[2])))?;
    let payload = &buf[start + eol + 1..];
    let expected = width * height;
    if payload.len() < expected {
        return Err(Error::TruncatedPattern {
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(Error::TrailingPattern {
            extra: payload.len() - expected,
        });
    }
    QuadrantPattern::new(width, height, meaning, payload.to_vec())
}

pub fn save_pattern(pattern: &QuadrantPattern, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_pattern(pattern))?;
    Ok(())
}

pub fn load_pattern(path: impl AsRef<Path>) -> Result<QuadrantPattern> {
    decode_pattern(&fs::read(path)?)
}
