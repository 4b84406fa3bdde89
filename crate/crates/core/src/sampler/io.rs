//! CSV and binary point-set files.
//!
//! Binary layout (little endian): magic `SSPS`, `u32` version, `u32` d, `u64` count,
//! `u8` provenance tag with its parameters, seed master `u64`, `u32` path length and the
//! path words, then `count·d` coordinates as `f64`.

use super::{PointSet, Provenance};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::rng::SeedRecord;
use std::io::{BufRead, Read, Write};

const MAGIC: &[u8; 4] = b"SSPS";
const VERSION: u32 = 1;

pub fn write_csv<W: Write>(set: &PointSet, mut w: W) -> Result<()> {
    let names = ["x", "y", "z"];
    writeln!(w, "{}", names[..set.dim].join(","))?;
    for p in &set.points {
        let row: Vec<String> = p.coords().iter().map(|c| format!("{c:?}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R) -> Result<PointSet> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::invalid("empty point file"))??;
    let dim = header.split(',').count();
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let xs: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let xs = xs.map_err(|e| Error::invalid(format!("row {}: {e}", i + 2)))?;
        if xs.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: xs.len(),
            });
        }
        points.push(Point::new(&xs)?);
    }
    PointSet::explicit(dim, points)
}

fn put_f64s<W: Write>(w: &mut W, xs: &[f64]) -> Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_binary<W: Write>(set: &PointSet, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(set.dim as u32).to_le_bytes())?;
    w.write_all(&(set.points.len() as u64).to_le_bytes())?;
    match &set.provenance {
        Provenance::Poisson { lambda } => {
            w.write_all(&[1])?;
            put_f64s(&mut w, &[*lambda])?;
        }
        Provenance::Binomial { n } => {
            w.write_all(&[2])?;
            w.write_all(&n.to_le_bytes())?;
        }
        Provenance::Homogeneous { tau, lo, hi } => {
            w.write_all(&[3])?;
            put_f64s(&mut w, &[*tau])?;
            put_f64s(&mut w, lo)?;
            put_f64s(&mut w, hi)?;
        }
        Provenance::Explicit => w.write_all(&[0])?,
    }
    w.write_all(&set.seed.master.to_le_bytes())?;
    w.write_all(&(set.seed.path.len() as u32).to_le_bytes())?;
    for p in &set.seed.path {
        w.write_all(&p.to_le_bytes())?;
    }
    for p in &set.points {
        put_f64s(&mut w, p.coords())?;
    }
    Ok(())
}

fn get<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

fn get_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(get::<8, _>(r)?))
}

pub fn read_binary<R: Read>(mut r: R) -> Result<PointSet> {
    if &get::<4, _>(&mut r)? != MAGIC {
        return Err(Error::invalid("not a point-set file"));
    }
    let version = u32::from_le_bytes(get(&mut r)?);
    if version != VERSION {
        return Err(Error::invalid(format!("unsupported point-set version {version}")));
    }
    let dim = u32::from_le_bytes(get(&mut r)?) as usize;
    if !(1..=3).contains(&dim) {
        return Err(Error::invalid("bad dimension in point-set header"));
    }
    let count = u64::from_le_bytes(get(&mut r)?);
    let provenance = match get::<1, _>(&mut r)?[0] {
        0 => Provenance::Explicit,
        1 => Provenance::Poisson {
            lambda: get_f64(&mut r)?,
        },
        2 => Provenance::Binomial {
            n: u64::from_le_bytes(get(&mut r)?),
        },
        3 => {
            let tau = get_f64(&mut r)?;
            let lo = (0..dim).map(|_| get_f64(&mut r)).collect::<Result<_>>()?;
            let hi = (0..dim).map(|_| get_f64(&mut r)).collect::<Result<_>>()?;
            Provenance::Homogeneous { tau, lo, hi }
        }
        t => return Err(Error::invalid(format!("unknown provenance tag {t}"))),
    };
    let master = u64::from_le_bytes(get(&mut r)?);
    let plen = u32::from_le_bytes(get(&mut r)?) as usize;
    let path = (0..plen)
        .map(|_| Ok(u64::from_le_bytes(get(&mut r)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut points = Vec::with_capacity(count.min(1 << 24) as usize);
    let mut xs = [0.0; 3];
    for _ in 0..count {
        for x in xs.iter_mut().take(dim) {
            *x = get_f64(&mut r)?;
        }
        points.push(Point::new(&xs[..dim])?);
    }
    Ok(PointSet {
        dim,
        points,
        provenance,
        seed: SeedRecord { master, path },
    })
}

#[cfg(test)]
mod tests {
    use super::super::{sample_homogeneous, sample_poisson, Density};
    use super::*;
    use crate::geometry::Aabb;

    #[test]
    fn binary_round_trip() {
        let s = sample_poisson(200.0, &Density::uniform(3), &SeedRecord::new(1, &[4, 5])).unwrap();
        let mut buf = Vec::new();
        write_binary(&s, &mut buf).unwrap();
        assert_eq!(read_binary(&buf[..]).unwrap(), s);
        let h = sample_homogeneous(1.0, &Aabb::cube(2, 5.0), &SeedRecord::new(2, &[])).unwrap();
        let mut buf = Vec::new();
        write_binary(&h, &mut buf).unwrap();
        assert_eq!(read_binary(&buf[..]).unwrap(), h);
        assert!(read_binary(&b"XXXX"[..]).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let s = sample_poisson(100.0, &Density::uniform(2), &SeedRecord::new(3, &[])).unwrap();
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        let back = read_csv(&buf[..]).unwrap();
        assert_eq!(back.points, s.points);
    }
}
