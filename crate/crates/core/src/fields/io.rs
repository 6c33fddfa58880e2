//! The RSFF binary field format.
//!
//! Layout (little-endian): magic `RSFF`, `u32` version (1), `u32` d,
//! `u32` ncomp, `u32` dims[d], `f64` length[d], `f64` time, then
//! `ncomp × ∏dims` `f64` values, component-major then row-major.

use std::fs;
use std::path::Path;

use super::{Grid, ScalarField, VectorField};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"RSFF";
pub const VERSION: u32 = 1;

pub fn encode(field: &VectorField, time: f64) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(28 + 12 * grid.dim() + 8 * field.ncomp() * grid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(field.ncomp() as u32).to_le_bytes());
    for &n in grid.dims() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for &l in grid.length() {
        out.extend_from_slice(&l.to_le_bytes());
    }
    out.extend_from_slice(&time.to_le_bytes());
    for c in field.components() {
        for v in c.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Format(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<(VectorField, f64)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let d = r.u32()? as usize;
    let ncomp = r.u32()? as usize;
    if d == 0 || d > 16 || ncomp == 0 {
        return Err(Error::Format(format!(
            "implausible header d={d} ncomp={ncomp}"
        )));
    }
    let dims = (0..d)
        .map(|_| r.u32().map(|n| n as usize))
        .collect::<Result<Vec<_>>>()?;
    let length = (0..d).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let time = r.f64()?;
    let grid = Grid::new(dims, length)?;
    let mut comps = Vec::with_capacity(ncomp);
    for _ in 0..ncomp {
        let raw = r.take(8 * grid.len())?;
        let values = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        comps.push(ScalarField::new(grid.clone(), values)?);
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    Ok((VectorField::new(comps)?, time))
}

pub fn write(path: impl AsRef<Path>, field: &VectorField, time: f64) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(field, time)).map_err(|e| Error::io(path, e))
}

pub fn read(path: impl AsRef<Path>) -> Result<(VectorField, f64)> {
    let path = path.as_ref();
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout_is_bit_exact() {
        let g = Grid::new(vec![8, 9], vec![1.0, 2.0]).unwrap();
        let f = VectorField::new(vec![ScalarField::constant(&g, 1.5)]).unwrap();
        let bytes = encode(&f, 0.25);
        assert_eq!(&bytes[..4], b"RSFF");
        assert_eq!(&bytes[4..8], &1u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &2u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &1u32.to_le_bytes());
        assert_eq!(&bytes[16..20], &8u32.to_le_bytes());
        assert_eq!(&bytes[20..24], &9u32.to_le_bytes());
        assert_eq!(&bytes[24..32], &1.0f64.to_le_bytes());
        assert_eq!(&bytes[32..40], &2.0f64.to_le_bytes());
        assert_eq!(&bytes[40..48], &0.25f64.to_le_bytes());
        assert_eq!(bytes.len(), 48 + 8 * 72);
        assert_eq!(&bytes[48..56], &1.5f64.to_le_bytes());
    }

    #[test]
    fn rejects_corrupt_input() {
        let g = Grid::cube(1, 8).unwrap();
        let f = VectorField::new(vec![ScalarField::zeros(&g)]).unwrap();
        let mut bytes = encode(&f, 0.0);
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        bytes[0] = b'X';
        assert!(decode(&bytes).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(vals in proptest::collection::vec(-1e6f64..1e6, 128), t in -10.0f64..10.0) {
            let g = Grid::new(vec![8, 8], vec![1.0, 3.0]).unwrap();
            let f = VectorField::new(vec![
                ScalarField::new(g.clone(), vals[..64].to_vec()).unwrap(),
                ScalarField::new(g, vals[64..].to_vec()).unwrap(),
            ]).unwrap();
            let (back, time) = decode(&encode(&f, t)).unwrap();
            prop_assert_eq!(back, f);
            prop_assert_eq!(time, t);
        }
    }
}
