//! Flat binary and CSV encodings of grid fields.
//!
//! Binary layout: `n` as a little-endian `u64`, then row-major little-endian
//! `f64` values. Scalar fields carry `n²` values, vector fields `2n²` (the
//! `u₁` block followed by the `u₂` block). Square matrices (e.g. distance
//! matrices) use the same layout with `n` the number of rows.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::field::{FieldLike, ScalarField2D, VectorField2D};
use crate::grid::TorusGrid;

fn write_block<W: Write>(w: &mut W, n: usize, blocks: &[&[f64]]) -> Result<()> {
    w.write_all(&(n as u64).to_le_bytes())?;
    for b in blocks {
        for v in b.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_block<R: Read>(r: &mut R) -> Result<(usize, Vec<f64>)> {
    let mut header = [0u8; 8];
    r.read_exact(&mut header)?;
    let n = u64::from_le_bytes(header) as usize;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::InvalidInput(format!("trailing {} bytes", bytes.len() % 8)));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((n, values))
}

pub fn write_field<W: Write, F: FieldLike + ?Sized>(w: &mut W, field: &F) -> Result<()> {
    let comps = field.components();
    let blocks: Vec<&[f64]> = comps.iter().map(|c| c.values()).collect();
    write_block(w, field.grid().n(), &blocks)
}

pub fn read_scalar<R: Read>(r: &mut R) -> Result<ScalarField2D> {
    let (n, values) = read_block(r)?;
    let grid = TorusGrid::new(n)?;
    ScalarField2D::from_values(grid, values)
}

pub fn read_vector<R: Read>(r: &mut R) -> Result<VectorField2D> {
    let (n, mut values) = read_block(r)?;
    let grid = TorusGrid::new(n)?;
    if values.len() != 2 * grid.len() {
        return Err(Error::ShapeMismatch { expected: 2 * grid.len(), actual: values.len() });
    }
    let u2 = values.split_off(grid.len());
    VectorField2D::new(ScalarField2D::from_values(grid, values)?, ScalarField2D::from_values(grid, u2)?)
}

/// Writes an `n × n` row-major matrix in the field layout.
pub fn write_matrix<W: Write>(w: &mut W, n: usize, data: &[f64]) -> Result<()> {
    if data.len() != n * n {
        return Err(Error::ShapeMismatch { expected: n * n, actual: data.len() });
    }
    write_block(w, n, &[data])
}

pub fn read_matrix<R: Read>(r: &mut R) -> Result<(usize, Vec<f64>)> {
    let (n, values) = read_block(r)?;
    if values.len() != n * n {
        return Err(Error::ShapeMismatch { expected: n * n, actual: values.len() });
    }
    Ok((n, values))
}

/// CSV with columns `x1,x2,value` (scalar) or `x1,x2,u1,u2` (vector).
pub fn write_field_csv<W: Write, F: FieldLike + ?Sized>(w: W, field: &F) -> Result<()> {
    let grid = field.grid();
    let comps = field.components();
    let mut out = csv::Writer::from_writer(w);
    if comps.len() == 1 {
        out.write_record(["x1", "x2", "value"])?;
    } else {
        out.write_record(["x1", "x2", "u1", "u2"])?;
    }
    let n = grid.n();
    for i in 0..n {
        for j in 0..n {
            let mut row = vec![grid.coord(i).to_string(), grid.coord(j).to_string()];
            row.extend(comps.iter().map(|c| c.at(i, j).to_string()));
            out.write_record(&row)?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_layout_is_header_then_row_major() {
        let grid = TorusGrid::new(8).unwrap();
        let f = ScalarField2D::from_fn(grid, |x, y| x + 10.0 * y);
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        assert_eq!(buf.len(), 8 + 64 * 8);
        assert_eq!(&buf[..8], &8u64.to_le_bytes());
        let second = f64::from_le_bytes(buf[16..24].try_into().unwrap());
        assert_eq!(second, f.at(0, 1));
        assert_eq!(read_scalar(&mut buf.as_slice()).unwrap(), f);
    }

    #[test]
    fn vector_round_trip_and_shape_errors() {
        let grid = TorusGrid::new(8).unwrap();
        let u = VectorField2D::from_fn(grid, |x, y| (x.sin(), y.cos()));
        let mut buf = Vec::new();
        write_field(&mut buf, &u).unwrap();
        assert_eq!(read_vector(&mut buf.as_slice()).unwrap(), u);
        assert!(read_scalar(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn csv_has_one_row_per_point() {
        let grid = TorusGrid::new(8).unwrap();
        let f = ScalarField2D::constant(grid, 2.0);
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 65);
        assert!(text.starts_with("x1,x2,value\n0,0,2\n"));
    }
}
