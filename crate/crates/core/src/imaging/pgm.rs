//! 8-bit binary PGM (P5) reading and writing.

use std::fs;
use std::path::Path;

use super::{BlobMask, ImageGrid};
use crate::error::{Error, Result};

pub fn encode(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Returns `(width, height, pixels)`.
pub fn decode(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let mut pos = 0usize;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        // Whitespace and comments between header tokens.
        while pos < bytes.len() {
            if bytes[pos].is_ascii_whitespace() {
                pos += 1;
            } else if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format {
                offset: pos as u64,
                message: "truncated PGM header".into(),
            });
        }
        fields.push((start, String::from_utf8_lossy(&bytes[start..pos]).into_owned()));
    }
    if fields[0].1 != "P5" {
        return Err(Error::Format {
            offset: 0,
            message: format!("expected P5 magic, found {:?}", fields[0].1),
        });
    }
    let parse = |(off, s): &(usize, String)| {
        s.parse::<usize>().map_err(|_| Error::Format {
            offset: *off as u64,
            message: format!("bad PGM header field {s:?}"),
        })
    };
    let width = parse(&fields[1])?;
    let height = parse(&fields[2])?;
    let maxval = parse(&fields[3])?;
    if maxval != 255 {
        return Err(Error::Format {
            offset: fields[3].0 as u64,
            message: format!("only 8-bit PGM is supported, maxval {maxval}"),
        });
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let needed = width * height;
    if bytes.len() < pos + needed {
        return Err(Error::Format {
            offset: bytes.len() as u64,
            message: format!("raster truncated: need {needed} bytes"),
        });
    }
    Ok((width, height, bytes[pos..pos + needed].to_vec()))
}

pub fn write_grid(path: &Path, grid: &ImageGrid) -> Result<()> {
    let bytes = encode(grid.width(), grid.height(), &grid.quantized_u8());
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_mask(path: &Path, mask: &BlobMask) -> Result<()> {
    let bytes = encode(mask.width(), mask.height(), &mask.to_u8());
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_grid(path: &Path) -> Result<ImageGrid> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (w, h, px) = decode(&bytes)?;
    ImageGrid::new(w, h, px.into_iter().map(f64::from).collect())
}

/// Any non-zero pixel is foreground.
pub fn read_mask(path: &Path) -> Result<BlobMask> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let (w, h, px) = decode(&bytes)?;
    BlobMask::new(w, h, px.into_iter().map(|v| v != 0).collect())
}
