use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::vision::GrayFrame;

/// Encode as binary PGM with the canonical header `P5\n{w} {h}\n255\n`.
pub fn encode_pgm(frame: &GrayFrame) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", frame.width, frame.height).into_bytes();
    out.extend_from_slice(&frame.data);
    out
}

/// Decode a binary 8-bit PGM. Header tokens may be separated by any
/// whitespace and interleaved with `#` comments.
pub fn decode_pgm(bytes: &[u8], name: &str) -> Result<GrayFrame> {
    let mut pos = 0;
    let mut tokens = Vec::with_capacity(4);
    while tokens.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::parse(name, 1, "truncated PGM header"));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if tokens[0] != "P5" {
        return Err(Error::parse(name, 1, format!("expected magic P5, found {:?}", tokens[0])));
    }
    let num = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::parse(name, 1, format!("bad {what} {s:?}")))
    };
    let (w, h, maxval) = (num(&tokens[1], "width")?, num(&tokens[2], "height")?, num(&tokens[3], "maxval")?);
    if maxval != 255 {
        return Err(Error::parse(name, 1, format!("only 8-bit PGM is supported, maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let need = w * h;
    let raster = bytes.get(pos..).unwrap_or_default();
    if raster.len() != need {
        return Err(Error::parse(
            name,
            1,
            format!("raster has {} bytes, expected {need} (byte offset {pos})", raster.len()),
        ));
    }
    GrayFrame::new(w, h, raster.to_vec())
}

pub fn read_pgm(path: &Path) -> Result<GrayFrame> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes, &path.display().to_string())
}

pub fn write_pgm(path: &Path, frame: &GrayFrame) -> Result<()> {
    fs::write(path, encode_pgm(frame)).map_err(|e| Error::io(path, e))
}

/// Raw concatenated frames with a `{width} {height}\n` sidecar.
pub fn read_raw_stream(raw: &Path, dims: &Path) -> Result<Vec<GrayFrame>> {
    let text = fs::read_to_string(dims).map_err(|e| Error::io(dims, e))?;
    let name = dims.display().to_string();
    let mut it = text.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        it.next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(&name, 1, format!("missing or bad {what}")))
    };
    let (w, h) = (next("width")?, next("height")?);
    if w == 0 || h == 0 {
        return Err(Error::parse(&name, 1, "zero frame dimension"));
    }
    let bytes = fs::read(raw).map_err(|e| Error::io(raw, e))?;
    if bytes.len() % (w * h) != 0 {
        return Err(Error::parse(
            raw.display().to_string(),
            1,
            format!("{} bytes is not a multiple of {w}x{h}", bytes.len()),
        ));
    }
    bytes
        .chunks(w * h)
        .enumerate()
        .map(|(i, c)| Ok(GrayFrame::new(w, h, c.to_vec())?.with_meta(i as u64, 0.0)))
        .collect()
}

pub fn write_raw_stream(raw: &Path, dims: &Path, frames: &[GrayFrame]) -> Result<()> {
    let Some(first) = frames.first() else {
        return Err(Error::InvalidInput("no frames to write".into()));
    };
    let mut bytes = Vec::with_capacity(frames.len() * first.data.len());
    for f in frames {
        if (f.width, f.height) != (first.width, first.height) {
            return Err(Error::InvalidInput("raw stream frames must share dimensions".into()));
        }
        bytes.extend_from_slice(&f.data);
    }
    fs::write(raw, bytes).map_err(|e| Error::io(raw, e))?;
    fs::write(dims, format!("{} {}\n", first.width, first.height)).map_err(|e| Error::io(dims, e))
}
