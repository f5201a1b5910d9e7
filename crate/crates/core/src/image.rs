//! Netpbm export and import for masks and node fields.
//!
//! Images are written top row first, so the row with the largest `y` comes
//! first and pictures appear the right way up.

use std::fs;
use std::path::Path;

use crate::grid::{GridGeometry, GridHeader};
use crate::{Error, Result};

/// Plain PBM (`P1`); masked nodes are black.
pub fn mask_to_pbm(nx: usize, ny: usize, mask: &[bool]) -> String {
    let mut s = format!("P1\n{nx} {ny}\n");
    for j in (0..ny).rev() {
        let row: Vec<&str> = (0..nx).map(|i| if mask[j * nx + i] { "1" } else { "0" }).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

fn tokens(bytes: &[u8]) -> (Vec<String>, usize) {
    // Header tokens of a netpbm file, skipping comments; returns the offset
    // just past the single whitespace byte that ends the header.
    let mut out = Vec::new();
    let mut i = 0;
    let want = 3;
    while out.len() < want && i < bytes.len() {
        match bytes[i] {
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
                out.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
            }
        }
    }
    (out, i + 1)
}

/// Reads plain (`P1`) or raw (`P4`) PBM into `(nx, ny, mask)`.
pub fn pbm_to_mask(bytes: &[u8]) -> Result<(usize, usize, Vec<bool>)> {
    let (head, offset) = tokens(bytes);
    if head.len() < 3 {
        return Err(Error::Parse("truncated PBM header".into()));
    }
    let dim = |s: &str| s.parse::<usize>().map_err(|_| Error::Parse(format!("bad PBM dimension '{s}'")));
    let (nx, ny) = (dim(&head[1])?, dim(&head[2])?);
    let mut mask = vec![false; nx * ny];
    match head[0].as_str() {
        "P1" => {
            let bits: Vec<bool> = bytes[offset.min(bytes.len())..]
                .iter()
                .filter(|b| matches!(b, b'0' | b'1'))
                .map(|&b| b == b'1')
                .collect();
            if bits.len() < nx * ny {
                return Err(Error::Parse(format!("PBM has {} pixels, expected {}", bits.len(), nx * ny)));
            }
            for (k, &b) in bits.iter().take(nx * ny).enumerate() {
                let (row, i) = (k / nx, k % nx);
                mask[(ny - 1 - row) * nx + i] = b;
            }
        }
        "P4" => {
            let stride = nx.div_ceil(8);
            let data = bytes.get(offset..).unwrap_or(&[]);
            if data.len() < stride * ny {
                return Err(Error::Parse("raw PBM is truncated".into()));
            }
            for row in 0..ny {
                for i in 0..nx {
                    let byte = data[row * stride + i / 8];
                    mask[(ny - 1 - row) * nx + i] = byte & (0x80 >> (i % 8)) != 0;
                }
            }
        }
        other => return Err(Error::Parse(format!("not a PBM file (magic '{other}')"))),
    }
    Ok((nx, ny, mask))
}

/// Writes `<stem>.pbm` and `<stem>.json`.
pub fn save_geometry(g: &GridGeometry, stem: &Path) -> Result<()> {
    fs::write(stem.with_extension("pbm"), mask_to_pbm(g.nx(), g.ny(), g.mask()))?;
    fs::write(stem.with_extension("json"), serde_json::to_string_pretty(&g.header())?)?;
    Ok(())
}

/// Reads a mask bitmap and its JSON sidecar (same stem, `.json`).
pub fn load_geometry(pbm: &Path) -> Result<GridGeometry> {
    let header: GridHeader = serde_json::from_str(&fs::read_to_string(pbm.with_extension("json"))?)?;
    let (nx, ny, mask) = pbm_to_mask(&fs::read(pbm)?)?;
    if (nx, ny) != (header.nx, header.ny) {
        return Err(Error::Parse(format!(
            "bitmap is {nx}×{ny} but the header says {}×{}",
            header.nx, header.ny
        )));
    }
    GridGeometry::from_mask(nx, ny, header.h, (header.origin[0], header.origin[1]), mask)
}

/// Binary PGM (`P5`) from one gray level per node.
pub fn pgm(nx: usize, ny: usize, gray: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    for j in (0..ny).rev() {
        out.extend_from_slice(&gray[j * nx..(j + 1) * nx]);
    }
    out
}

/// Amplitude picture of a field given on the masked nodes in index order:
/// zero maps to mid gray, outside the mask is mid gray too.
pub fn amplitude_pgm(g: &GridGeometry, values: &[f64]) -> Vec<u8> {
    let peak = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut gray = vec![128u8; g.len()];
    for (&idx, &v) in g.nodes().iter().zip(values) {
        let t = if peak > 0.0 { v / peak } else { 0.0 };
        gray[idx] = (127.5 + 127.0 * t).round().clamp(0.0, 255.0) as u8;
    }
    pgm(g.nx(), g.ny(), &gray)
}
