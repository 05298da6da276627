//! Binary world snapshots.
//!
//! Layout (little-endian): magic, rows and cols as `u64`, the five frame
//! parameters as `f64`, one byte per cell of road mask, the POI count and
//! records `(row u64, col u64, tag u8, charge f64)`, then the six tag fields
//! as `f64` in row-major order.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geo::GeoFrame;
use crate::world::{Cell, GridWorld, Poi, Tag};

const MAGIC: &[u8; 8] = b"TFWORLD1";

pub fn write_world<W: Write>(world: &GridWorld, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(world.rows() as u64).to_le_bytes())?;
    out.write_all(&(world.cols() as u64).to_le_bytes())?;
    let f = world.frame();
    for v in [f.ref_lat, f.ref_lon, f.x_min, f.y_max, f.cell_size_m] {
        out.write_all(&v.to_le_bytes())?;
    }
    let mask: Vec<u8> = world.road_mask().iter().map(|&b| u8::from(b)).collect();
    out.write_all(&mask)?;
    out.write_all(&(world.pois().len() as u64).to_le_bytes())?;
    for p in world.pois() {
        out.write_all(&(p.position.row as u64).to_le_bytes())?;
        out.write_all(&(p.position.col as u64).to_le_bytes())?;
        out.write_all(&[p.tag.index() as u8])?;
        out.write_all(&p.charge.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(world.rows() * world.cols() * 8);
    for field in world.tag_fields() {
        buf.clear();
        for v in field {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    out.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.inner.read_exact(&mut b).map_err(truncated)?;
        Ok(b)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::invalid("world file is truncated")
    } else {
        e.into()
    }
}

pub fn read_world<R: Read>(input: R) -> Result<GridWorld> {
    let mut r = Reader { inner: input };
    if &r.bytes::<8>()? != MAGIC {
        return Err(Error::invalid("not a world file"));
    }
    let rows = r.u64()? as usize;
    let cols = r.u64()? as usize;
    let n = rows
        .checked_mul(cols)
        .filter(|&n| n > 0 && n <= 1 << 32)
        .ok_or_else(|| Error::invalid(format!("bad world size {rows}x{cols}")))?;
    let frame = GeoFrame {
        ref_lat: r.f64()?,
        ref_lon: r.f64()?,
        x_min: r.f64()?,
        y_max: r.f64()?,
        cell_size_m: r.f64()?,
    };
    if !(frame.cell_size_m > 0.0) {
        return Err(Error::invalid("bad cell size in world file"));
    }
    let mut mask = vec![0u8; n];
    r.inner.read_exact(&mut mask).map_err(truncated)?;
    let road_mask: Vec<bool> = mask.iter().map(|&b| b != 0).collect();
    if !road_mask.iter().any(|&b| b) {
        return Err(Error::NoNavigableCells);
    }
    let count = r.u64()? as usize;
    let mut pois = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let row = r.u64()? as usize;
        let col = r.u64()? as usize;
        let [tag] = r.bytes::<1>()?;
        let charge = r.f64()?;
        let tag = *Tag::ALL
            .get(tag as usize)
            .ok_or_else(|| Error::invalid(format!("bad tag index {tag}")))?;
        if row >= rows || col >= cols {
            return Err(Error::invalid("POI outside the grid"));
        }
        pois.push(Poi {
            position: Cell::new(row, col),
            tag,
            charge,
        });
    }
    let mut fields: [Vec<f64>; 6] = Default::default();
    let mut raw = vec![0u8; n * 8];
    for field in fields.iter_mut() {
        r.inner.read_exact(&mut raw).map_err(truncated)?;
        *field = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
    }
    let mut rest = [0u8; 1];
    if r.inner.read(&mut rest)? != 0 {
        return Err(Error::invalid("trailing bytes after world data"));
    }
    Ok(GridWorld::from_raw_parts(rows, cols, road_mask, fields, pois, frame))
}

pub fn save_world(world: &GridWorld, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_world(world, std::io::BufWriter::new(file))
}

pub fn load_world(path: &Path) -> Result<GridWorld> {
    let file = std::fs::File::open(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    read_world(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{Fixture, FixtureParams};

    #[test]
    fn world_round_trips_exactly() {
        let f = Fixture::generate(FixtureParams { rows: 40, cols: 50, pois: 25, ..Default::default() });
        let (roads, pois) = f.to_geo(45.0, 9.0);
        let (w, _) = crate::geo::build_world(&roads, &pois, 10.0).unwrap();
        let mut buf = Vec::new();
        write_world(&w, &mut buf).unwrap();
        let back = read_world(&buf[..]).unwrap();
        assert_eq!(back, w);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.bin");
        save_world(&w, &path).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), buf);
        assert_eq!(load_world(&path).unwrap(), w);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let w = Fixture::generate(FixtureParams { rows: 20, cols: 20, pois: 5, ..Default::default() })
            .world()
            .unwrap();
        let mut buf = Vec::new();
        write_world(&w, &mut buf).unwrap();
        assert!(read_world(&buf[..buf.len() - 1]).is_err());
        let mut extra = buf.clone();
        extra.push(0);
        assert!(read_world(&extra[..]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_world(&bad[..]).is_err());
        assert!(read_world(&[][..]).is_err());
    }
}
