//! Field files (`GLF2`, `GLFA`, `GLF3`) and CSV export.
//!
//! Layout after the 4-byte magic, little-endian: `u32 nx`, `u32 ny`,
//! (`u32 n3` for sector grids), `f64 d`, `f64 L`, `u8` symmetry code, then
//! `(u1, u2)` as `f64` pairs per node, x fastest. Sector files carry the fold
//! count in the symmetry code, so they are always tagged `Sector3D(ell)`.

use crate::error::{GlError, Result};
use crate::field::{Field2, SymmetryClass};
use crate::grid::{AxiGrid, Grid, SectorGrid3, StripGrid, DEFAULT_SECTOR_CAP};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

const MAX_NODES: u64 = 1 << 31;

/// Size in bytes of the header preceding the value array.
pub fn header_len(grid: &Grid) -> usize {
    match grid {
        Grid::Sector(_) => 4 + 12 + 16 + 1,
        _ => 4 + 8 + 16 + 1,
    }
}

/// Serializes a field to bytes.
pub fn encode_field(f: &Field2) -> Vec<u8> {
    let grid = f.grid();
    let mut out = Vec::with_capacity(header_len(grid) + 16 * f.len());
    let dims = grid.dims();
    let (magic, code): (&[u8; 4], u8) = match grid {
        Grid::Strip(_) => (b"GLF2", f.tag().map_or(0, |s| s.code())),
        Grid::Axi(_) => (b"GLFA", f.tag().map_or(0, |s| s.code())),
        Grid::Sector(g) => (b"GLF3", SymmetryClass::Sector3D(g.ell).code()),
    };
    out.extend_from_slice(magic);
    out.extend_from_slice(&(dims[0] as u32).to_le_bytes());
    out.extend_from_slice(&(dims[1] as u32).to_le_bytes());
    if let Grid::Sector(_) = grid {
        out.extend_from_slice(&(dims[2] as u32).to_le_bytes());
    }
    out.extend_from_slice(&grid.d().to_le_bytes());
    out.extend_from_slice(&grid.l().to_le_bytes());
    out.push(code);
    for v in f.values() {
        out.extend_from_slice(&v[0].to_le_bytes());
        out.extend_from_slice(&v[1].to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(GlError::BadFormat(format!(
                "truncated payload: need {} bytes at offset {}, have {}",
                n,
                self.pos,
                self.bytes.len()
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Parses one field record from the start of `bytes`; returns the field and
/// the number of bytes consumed.
pub fn decode_field(bytes: &[u8]) -> Result<(Field2, usize)> {
    let mut c = Cursor { bytes, pos: 0 };
    let magic = c.take(4).map_err(|_| GlError::BadFormat("bad magic".into()))?;
    let kind = match magic {
        b"GLF2" => 2,
        b"GLFA" => 1,
        b"GLF3" => 3,
        _ => return Err(GlError::BadFormat("bad magic".into())),
    };
    let nx = c.u32()? as u64;
    let ny = c.u32()? as u64;
    let n3 = if kind == 3 { c.u32()? as u64 } else { 1 };
    let nodes = nx.checked_mul(ny).and_then(|v| v.checked_mul(n3));
    let nodes = match nodes {
        Some(v) if v <= MAX_NODES => v as usize,
        _ => return Err(GlError::BadFormat(format!("dimension overflow: {nx} x {ny} x {n3}"))),
    };
    let d = c.f64()?;
    let l = c.f64()?;
    let code = c.take(1)?[0];
    let tag = SymmetryClass::from_code(code)?;
    let grid = match kind {
        2 => Grid::Strip(StripGrid::new(d, l, nx as usize, ny as usize)?),
        1 => Grid::Axi(AxiGrid::new(d, l, nx as usize, ny as usize)?),
        _ => {
            let ell = match tag {
                Some(SymmetryClass::Sector3D(ell)) => ell,
                _ => return Err(GlError::BadFormat("sector file without fold count".into())),
            };
            Grid::Sector(SectorGrid3::with_cap(
                d,
                l,
                ell,
                nx as usize,
                ny as usize,
                n3 as usize,
                DEFAULT_SECTOR_CAP.max(nodes),
            )?)
        }
    };
    let payload = c.take(16 * nodes)?;
    let values: Vec<[f64; 2]> = payload
        .chunks_exact(16)
        .map(|b| [f64::from_le_bytes(b[..8].try_into().unwrap()), f64::from_le_bytes(b[8..].try_into().unwrap())])
        .collect();
    let f = Field2::direction(grid, values)?.with_tag(tag);
    Ok((f, c.pos))
}

pub fn write_field(f: &Field2, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_field(f))?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<Field2> {
    let bytes = std::fs::read(path)?;
    let (f, used) = decode_field(&bytes)?;
    if used != bytes.len() {
        return Err(GlError::BadFormat(format!("{} trailing bytes after field", bytes.len() - used)));
    }
    Ok(f)
}

/// Writes a sequence of fields as concatenated records (a path file).
pub fn write_fields(fields: &[Field2], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    for f in fields {
        w.write_all(&encode_field(f))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_fields(path: impl AsRef<Path>) -> Result<Vec<Field2>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let (f, used) = decode_field(&bytes[pos..])?;
        out.push(f);
        pos += used;
    }
    Ok(out)
}

/// CSV text with header `x,y,u1,u2` (sector grids add a `z` column after `y`).
pub fn field_to_csv(f: &Field2) -> String {
    let grid = f.grid();
    let three = matches!(grid, Grid::Sector(_));
    let mut s = String::with_capacity(f.len() * 64);
    s.push_str(if three { "x,y,z,u1,u2\n" } else { "x,y,u1,u2\n" });
    for (n, v) in f.values().iter().enumerate() {
        let p = grid.position(n);
        if three {
            s.push_str(&format!("{:?},{:?},{:?},{:?},{:?}\n", p[0], p[1], p[2], v[0], v[1]));
        } else {
            s.push_str(&format!("{:?},{:?},{:?},{:?}\n", p[0], p[1], v[0], v[1]));
        }
    }
    s
}

pub fn write_csv(f: &Field2, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, field_to_csv(f))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_file_size() {
        let g = Grid::Strip(StripGrid::new(0.5, 2.0, 3, 3).unwrap());
        let f = Field2::direction(g, vec![[0.0; 2]; 9]).unwrap();
        let bytes = encode_field(&f);
        assert_eq!(bytes.len(), 29 + 3 * 3 * 2 * 8);
        let (back, used) = decode_field(&bytes).unwrap();
        assert_eq!(used, bytes.len());
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn distinct_errors() {
        let g = Grid::Strip(StripGrid::new(1.0, 4.0, 5, 3).unwrap());
        let bytes = encode_field(&Field2::constant(g, [0.0, 1.0]));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_field(&bad).unwrap_err().to_string().contains("bad magic"));
        assert!(decode_field(&bytes[..bytes.len() - 3]).unwrap_err().to_string().contains("truncated"));
        let mut huge = bytes.clone();
        huge[4..8].copy_from_slice(&u32::MAX.to_le_bytes());
        huge[8..12].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(decode_field(&huge).unwrap_err().to_string().contains("overflow"));
    }

    #[test]
    fn sector_round_trip() {
        let g = Grid::Sector(SectorGrid3::new(1.0, 4.0, 2, 5, 3, 4).unwrap());
        let f = Field2::from_fn(g, |p| [p[1] * 0.3, p[2] - 0.1]);
        let (back, _) = decode_field(&encode_field(&f)).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.grid(), f.grid());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = Grid::Strip(StripGrid::new(1.0, 4.0, 5, 3).unwrap());
        let csv = field_to_csv(&Field2::constant(g, [0.0, 1.0]));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,y,u1,u2");
        assert_eq!(lines.len(), 16);
    }
}
