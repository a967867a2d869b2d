//! Field serialization: node-ordered CSV with a grid header, or flat
//! little-endian binary.
//!
//! CSV layout:
//!
//! ```text
//! # <preamble lines>
//! # grid dimension=1 n1=33 n2=1 nt=65
//! k,i,j,t,x1,x2,value
//! 0,0,0,5e-1,0e0,0e0,1.25e0
//! ...
//! ```

use std::io::{BufRead, Read, Write};

use super::field::Field;
use super::grid::SpaceTimeGrid;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"CMFGFLD1";

fn grid_line(grid: &SpaceTimeGrid) -> String {
    let n = grid.n();
    format!(
        "grid dimension={} n1={} n2={} nt={}",
        grid.dimension(),
        n[0],
        n[1],
        grid.nt()
    )
}

pub fn write_csv<W: Write>(
    grid: &SpaceTimeGrid,
    field: &Field,
    preamble: &[String],
    mut out: W,
) -> Result<()> {
    for line in preamble {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "# {}", grid_line(grid))?;
    writeln!(out, "k,i,j,t,x1,x2,value")?;
    for k in 0..grid.nt() {
        let t = grid.time(k);
        for s in 0..grid.n_space() {
            let (i, j) = grid.space_ij(s);
            let x = grid.point(s);
            writeln!(
                out,
                "{k},{i},{j},{t:e},{:e},{:e},{:e}",
                x[0],
                x[1],
                field.at(grid, s, k)
            )?;
        }
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(grid: &SpaceTimeGrid, input: R) -> Result<Field> {
    let expected = grid_line(grid);
    let mut saw_grid = false;
    let mut values = Vec::with_capacity(grid.n_nodes());
    for line in input.lines() {
        let line = line?;
        if let Some(comment) = line.strip_prefix("# ") {
            if comment.starts_with("grid ") {
                if comment != expected {
                    return Err(Error::Config(format!(
                        "grid header `{comment}` does not match `{expected}`"
                    )));
                }
                saw_grid = true;
            }
            continue;
        }
        if line.starts_with('k') || line.is_empty() {
            continue;
        }
        let last = line.rsplit(',').next().unwrap_or_default();
        let v: f64 = last
            .parse()
            .map_err(|_| Error::Config(format!("bad value `{last}`")))?;
        values.push(v);
    }
    if !saw_grid {
        return Err(Error::Config("missing grid header".into()));
    }
    Field::from_vec(grid, values)
}

pub fn write_binary<W: Write>(grid: &SpaceTimeGrid, field: &Field, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(grid.dimension() as u32).to_le_bytes())?;
    let n = grid.n();
    for d in [n[0], n[1], grid.nt()] {
        out.write_all(&(d as u64).to_le_bytes())?;
    }
    for v in field.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(grid: &SpaceTimeGrid, mut input: R) -> Result<Field> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Config("not a field file".into()));
    }
    let mut b4 = [0u8; 4];
    input.read_exact(&mut b4)?;
    let mut dims = [0usize; 3];
    for d in &mut dims {
        let mut b8 = [0u8; 8];
        input.read_exact(&mut b8)?;
        *d = u64::from_le_bytes(b8) as usize;
    }
    let n = grid.n();
    if u32::from_le_bytes(b4) as usize != grid.dimension() || dims != [n[0], n[1], grid.nt()] {
        return Err(Error::Config(format!(
            "binary header {dims:?} does not match grid"
        )));
    }
    let mut values = Vec::with_capacity(grid.n_nodes());
    let mut b8 = [0u8; 8];
    for _ in 0..grid.n_nodes() {
        input.read_exact(&mut b8)?;
        values.push(f64::from_le_bytes(b8));
    }
    Field::from_vec(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::GridDims;
    use crate::geometry::{DomainSpec, Face, WeightConfig, WeightParams};
    use proptest::prelude::*;

    fn grid() -> SpaceTimeGrid {
        let spec = DomainSpec::rectangle(1.0, 2.0, &[Face::Left, Face::Bottom, Face::Top], 0.5);
        let cfg = WeightConfig::for_domain(&spec, &WeightParams::default()).unwrap();
        SpaceTimeGrid::new(&spec, GridDims::new_2d(4, 3, 5), &cfg).unwrap()
    }

    proptest! {
        #[test]
        fn csv_and_binary_round_trip(values in proptest::collection::vec(-1e300f64..1e300, 60)) {
            let g = grid();
            let f = Field::from_vec(&g, values).unwrap();
            let mut csv = Vec::new();
            write_csv(&g, &f, &["config-hash: abc".into()], &mut csv).unwrap();
            prop_assert_eq!(read_csv(&g, csv.as_slice()).unwrap(), f.clone());
            let mut bin = Vec::new();
            write_binary(&g, &f, &mut bin).unwrap();
            prop_assert_eq!(read_binary(&g, bin.as_slice()).unwrap(), f);
        }
    }

    #[test]
    fn mismatched_header_is_rejected() {
        let g = grid();
        let text = "# grid dimension=1 n1=4 n2=1 nt=5\nk,i,j,t,x1,x2,value\n";
        assert!(read_csv(&g, text.as_bytes()).is_err());
    }
}
