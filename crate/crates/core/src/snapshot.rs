//! Binary field snapshots.
//!
//! Layout (little endian): magic `STRF`, u32 version (1), f64 L, u64 N,
//! u8 representation (0 physical, 1 frequency), then N*N (re, im) f64 pairs
//! in row-major order (first index along x1).

use crate::{Error, Field, Grid, Repr, Result, C64};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"STRF";
const VERSION: u32 = 1;

pub fn write_field(w: &mut impl Write, f: &Field) -> Result<()> {
    let g = f.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&g.length().to_le_bytes())?;
    w.write_all(&(g.n() as u64).to_le_bytes())?;
    w.write_all(&[match f.repr() {
        Repr::Physical => 0u8,
        Repr::Frequency => 1u8,
    }])?;
    let mut buf = Vec::with_capacity(16 * g.len());
    for v in f.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_field(r: &mut impl Read) -> Result<Field> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    r.read_exact(&mut b8)?;
    let l = f64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    let repr = match tag[0] {
        0 => Repr::Physical,
        1 => Repr::Frequency,
        t => return Err(Error::Format(format!("unknown representation tag {t}"))),
    };
    let grid = Grid::new(l, n)?;
    let mut raw = vec![0u8; 16 * grid.len()];
    r.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(16)
        .map(|c| {
            C64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok(Field::from_values(grid, values, repr))
}

pub fn save(path: impl AsRef<Path>, f: &Field) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_field(&mut w, f)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Field> {
    read_field(&mut std::io::BufReader::new(std::fs::File::open(path)?))
}
