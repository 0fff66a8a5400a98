//! Versioned CSV serialisation of a [`DragLut`].
//!
//! ```text
//! draglut,1
//! n_s,rho,c_d,seed,samples
//! 200,1000,1.05,42,20000
//! dx,dy,dz,area
//! 0,0,1,0.0441
//! ...
//! ```
//!
//! Floats are written in shortest round-trip form, so a reloaded table
//! answers queries bit-identically.

use std::io::{Read, Write};

use nalgebra::Vector3;

use super::{DirectionSet, DragLut};
use crate::error::{Error, Result};

pub const MAGIC: &str = "draglut";
pub const VERSION: u32 = 1;
const META_HEADER: [&str; 5] = ["n_s", "rho", "c_d", "seed", "samples"];
const ROW_HEADER: [&str; 4] = ["dx", "dy", "dz", "area"];

pub fn write_lut<W: Write>(lut: &DragLut, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    w.write_record([MAGIC, &VERSION.to_string()])?;
    w.write_record(META_HEADER)?;
    w.write_record([
        lut.directions().len().to_string(),
        lut.rho().to_string(),
        lut.c_d().to_string(),
        lut.seed().to_string(),
        lut.samples().to_string(),
    ])?;
    w.write_record(ROW_HEADER)?;
    for (d, a) in lut.directions().iter().zip(lut.frontal_areas()) {
        w.write_record([d.x.to_string(), d.y.to_string(), d.z.to_string(), a.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn lut_to_string(lut: &DragLut) -> Result<String> {
    let mut buf = Vec::new();
    write_lut(lut, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, what: &str) -> Result<T> {
    rec.get(i)
        .ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("malformed {what}")))
}

fn expect_exact(rec: Option<csv::StringRecord>, want: &[&str], what: &str) -> Result<()> {
    let rec = rec.ok_or_else(|| Error::Parse(format!("missing {what}")))?;
    if rec.len() != want.len() || rec.iter().zip(want).any(|(a, b)| a.trim() != *b) {
        return Err(Error::Parse(format!("unexpected {what}")));
    }
    Ok(())
}

/// Parse a table, validating the header, row count, unit directions and areas.
pub fn read_lut<R: Read>(input: R) -> Result<DragLut> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut records = r.records();
    let mut next = || -> Result<Option<csv::StringRecord>> { records.next().transpose().map_err(Error::from) };

    let magic = next()?.ok_or_else(|| Error::Parse("empty drag table".into()))?;
    if magic.len() != 2 || magic.get(0).map(str::trim) != Some(MAGIC) {
        return Err(Error::Parse("not a drag table (bad magic)".into()));
    }
    let version: u32 = field(&magic, 1, "version")?;
    if version != VERSION {
        return Err(Error::Parse(format!("unsupported drag table version {version}")));
    }
    expect_exact(next()?, &META_HEADER, "metadata header")?;
    let meta = next()?.ok_or_else(|| Error::Parse("missing metadata".into()))?;
    if meta.len() != META_HEADER.len() {
        return Err(Error::Parse("metadata row has wrong field count".into()));
    }
    let n_s: usize = field(&meta, 0, "n_s")?;
    let rho: f64 = field(&meta, 1, "rho")?;
    let c_d: f64 = field(&meta, 2, "c_d")?;
    let seed: u64 = field(&meta, 3, "seed")?;
    let samples: usize = field(&meta, 4, "samples")?;
    expect_exact(next()?, &ROW_HEADER, "row header")?;

    let mut dirs = Vec::with_capacity(n_s.min(1 << 20));
    let mut areas = Vec::with_capacity(n_s.min(1 << 20));
    while let Some(rec) = next()? {
        if rec.len() != 4 {
            return Err(Error::Parse(format!("row {} has {} fields", dirs.len(), rec.len())));
        }
        let d = Vector3::new(field(&rec, 0, "dx")?, field(&rec, 1, "dy")?, field(&rec, 2, "dz")?);
        let norm: f64 = d.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Parse(format!("row {} direction is not a unit vector", dirs.len())));
        }
        let a: f64 = field(&rec, 3, "area")?;
        dirs.push(d);
        areas.push(a);
        if dirs.len() > n_s {
            break;
        }
    }
    if dirs.len() != n_s {
        return Err(Error::Parse(format!("header declares {n_s} rows, found {}", dirs.len())));
    }
    let directions = DirectionSet::from_vectors(dirs).map_err(|e| Error::Parse(e.to_string()))?;
    DragLut::from_parts(directions, areas, rho, c_d, seed, samples).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_lut(text: &str) -> Result<DragLut> {
    read_lut(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydro::{build_drag_lut, DragLutConfig};
    use crate::vehicle::{Assembly, ModuleSpec};

    #[test]
    fn round_trip_is_bit_exact() {
        let a = Assembly::single(ModuleSpec::modcube());
        let lut = build_drag_lut(&a, &DragLutConfig { n_s: 25, samples: 1500, seed: 4, ..Default::default() }).unwrap();
        let text = lut_to_string(&lut).unwrap();
        assert!(text.starts_with("draglut,1\nn_s,rho,c_d,seed,samples\n25,1000,1.05,4,1500\n"));
        assert_eq!(parse_lut(&text).unwrap(), lut);
    }

    #[test]
    fn malformed_tables_rejected() {
        let good = "draglut,1\nn_s,rho,c_d,seed,samples\n1,1000,1,0,10\ndx,dy,dz,area\n0,0,1,0.5\n";
        assert!(parse_lut(good).is_ok());
        for bad in [
            "",
            "draglut,2\nn_s,rho,c_d,seed,samples\n1,1000,1,0,10\ndx,dy,dz,area\n0,0,1,0.5\n",
            "draglut,1\nn_s,rho,c_d,seed,samples\n2,1000,1,0,10\ndx,dy,dz,area\n0,0,1,0.5\n",
            "draglut,1\nn_s,rho,c_d,seed,samples\n1,1000,1,0,10\ndx,dy,dz,area\n0,0,2,0.5\n",
            "draglut,1\nn_s,rho,c_d,seed,samples\n1,1000,1,0,10\ndx,dy,dz,area\n0,0,1,-0.5\n",
            "draglut,1\nn_s,rho,c_d,seed,samples\n1,-1,1,0,10\ndx,dy,dz,area\n0,0,1,0.5\n",
            "draglut,1\nrho,n_s,c_d,seed,samples\n1,1000,1,0,10\ndx,dy,dz,area\n0,0,1,0.5\n",
        ] {
            assert!(matches!(parse_lut(bad), Err(Error::Parse(_)) | Err(Error::Csv(_))), "{bad:?}");
        }
    }
}
