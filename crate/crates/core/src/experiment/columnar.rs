//! Minimal little-endian columnar dump.
//!
//! Layout: magic `IRWCOL01`, `u32` column count, `u64` row count, then per
//! column a `u16` name length, the UTF-8 name, a `u8` type tag (0 = f64,
//! 1 = i64) and `rows` 8-byte values.

use std::io::{Read, Write};

use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"IRWCOL01";

#[derive(Clone, Debug, PartialEq)]
pub enum ColumnData {
    F64(Vec<f64>),
    I64(Vec<i64>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::F64(v) => v.len(),
            ColumnData::I64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn f64(name: &str, data: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            data: ColumnData::F64(data),
        }
    }

    pub fn i64(name: &str, data: Vec<i64>) -> Self {
        Self {
            name: name.into(),
            data: ColumnData::I64(data),
        }
    }
}

pub fn write_columnar<W: Write>(columns: &[Column], mut w: W) -> Result<()> {
    let rows = columns.first().map_or(0, |c| c.data.len());
    if columns.iter().any(|c| c.data.len() != rows) {
        return Err(Error::Degenerate("columns of unequal length".into()));
    }
    w.write_all(MAGIC)?;
    w.write_all(&(columns.len() as u32).to_le_bytes())?;
    w.write_all(&(rows as u64).to_le_bytes())?;
    for c in columns {
        let name = c.name.as_bytes();
        w.write_all(&(name.len() as u16).to_le_bytes())?;
        w.write_all(name)?;
        match &c.data {
            ColumnData::F64(v) => {
                w.write_all(&[0])?;
                for x in v {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
            ColumnData::I64(v) => {
                w.write_all(&[1])?;
                for x in v {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn read_columnar<R: Read>(mut r: R) -> Result<Vec<Column>> {
    if &take::<8, _>(&mut r)? != MAGIC {
        return Err(Error::Degenerate("not a columnar dump".into()));
    }
    let ncols = u32::from_le_bytes(take(&mut r)?) as usize;
    let rows = u64::from_le_bytes(take(&mut r)?) as usize;
    let mut out = Vec::with_capacity(ncols);
    for _ in 0..ncols {
        let len = u16::from_le_bytes(take(&mut r)?) as usize;
        let mut name = vec![0u8; len];
        r.read_exact(&mut name)?;
        let name = String::from_utf8(name)
            .map_err(|_| Error::Degenerate("column name is not UTF-8".into()))?;
        let data = match take::<1, _>(&mut r)?[0] {
            0 => ColumnData::F64(
                (0..rows)
                    .map(|_| take(&mut r).map(f64::from_le_bytes))
                    .collect::<Result<_>>()?,
            ),
            1 => ColumnData::I64(
                (0..rows)
                    .map(|_| take(&mut r).map(i64::from_le_bytes))
                    .collect::<Result<_>>()?,
            ),
            t => return Err(Error::Degenerate(format!("unknown column type {t}"))),
        };
        out.push(Column { name, data });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let cols = vec![
            Column::i64("replicate", vec![0, 1, 2]),
            Column::f64("value", vec![0.5, -1.25, f64::MAX]),
        ];
        let mut buf = Vec::new();
        write_columnar(&cols, &mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 8 + (2 + 9 + 1 + 24) + (2 + 5 + 1 + 24));
        assert_eq!(read_columnar(buf.as_slice()).unwrap(), cols);
        assert!(read_columnar(&b"garbage!"[..]).is_err());
    }

    #[test]
    fn ragged_columns_rejected() {
        let cols = vec![Column::i64("a", vec![1]), Column::f64("b", vec![])];
        assert!(write_columnar(&cols, Vec::new()).is_err());
    }
}
