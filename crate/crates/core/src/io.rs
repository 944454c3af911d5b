//! `BPR1` binary container and the `a+bi` CSV debugging form.
//!
//! Binary layout, all integers little-endian:
//!
//! ```text
//! "BPR1" | rows: u32 | cols: u32 | kind: u8 (0 vector, 1 dense, 2 krbd)
//! [krbd only] K: u32 | K × (m_i: u32, n_i: u32)
//! entries: f64 LE pairs (re, im), row-major; krbd blocks back to back
//! ```
//!
//! A vector is stored as a `len × 1` column.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::krbd::{BlockPartition, KrbdMatrix};
use crate::linalg::{ComplexVec, DenseMatrix, C64};

pub const MAGIC: &[u8; 4] = b"BPR1";

const KIND_VECTOR: u8 = 0;
const KIND_DENSE: u8 = 1;
const KIND_KRBD: u8 = 2;

#[derive(Clone, Debug, PartialEq)]
pub enum BprObject {
    Vector(ComplexVec),
    Dense(DenseMatrix),
    Krbd(KrbdMatrix),
}

fn to_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Format(format!("{what} {v} does not fit in u32")))
}

fn write_entries<W: Write>(w: &mut W, entries: &[C64]) -> Result<()> {
    for v in entries {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_bpr<W: Write>(w: &mut W, obj: &BprObject) -> Result<()> {
    w.write_all(MAGIC)?;
    match obj {
        BprObject::Vector(v) => {
            w.write_all(&to_u32(v.len(), "rows")?.to_le_bytes())?;
            w.write_all(&1u32.to_le_bytes())?;
            w.write_all(&[KIND_VECTOR])?;
            write_entries(w, v)
        }
        BprObject::Dense(m) => {
            w.write_all(&to_u32(m.rows(), "rows")?.to_le_bytes())?;
            w.write_all(&to_u32(m.cols(), "cols")?.to_le_bytes())?;
            w.write_all(&[KIND_DENSE])?;
            write_entries(w, m.data())
        }
        BprObject::Krbd(k) => {
            let p = k.partition();
            w.write_all(&to_u32(p.total_rows(), "rows")?.to_le_bytes())?;
            w.write_all(&to_u32(p.total_cols(), "cols")?.to_le_bytes())?;
            w.write_all(&[KIND_KRBD])?;
            w.write_all(&to_u32(k.num_blocks(), "block count")?.to_le_bytes())?;
            for (&m, &n) in p.row_sizes().iter().zip(p.col_sizes()) {
                w.write_all(&to_u32(m, "block rows")?.to_le_bytes())?;
                w.write_all(&to_u32(n, "block cols")?.to_le_bytes())?;
            }
            for block in k.blocks() {
                write_entries(w, block.data())?;
            }
            Ok(())
        }
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_entries<R: Read>(r: &mut R, count: usize) -> Result<Vec<C64>> {
    let mut out = Vec::with_capacity(count);
    let mut buf = [0u8; 16];
    for _ in 0..count {
        r.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf[..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(buf[8..].try_into().expect("8 bytes"));
        out.push(C64::new(re, im));
    }
    Ok(out)
}

pub fn read_bpr<R: Read>(r: &mut R) -> Result<BprObject> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let rows = read_u32(r)? as usize;
    let cols = read_u32(r)? as usize;
    let mut kind = [0u8; 1];
    r.read_exact(&mut kind)?;
    let obj = match kind[0] {
        KIND_VECTOR => {
            if cols != 1 {
                return Err(Error::Format(format!("vector with {cols} columns")));
            }
            BprObject::Vector(ComplexVec::new(read_entries(r, rows)?)?)
        }
        KIND_DENSE => BprObject::Dense(DenseMatrix::new(rows, cols, read_entries(r, rows * cols)?)?),
        KIND_KRBD => {
            let k = read_u32(r)? as usize;
            let mut row_sizes = Vec::with_capacity(k);
            let mut col_sizes = Vec::with_capacity(k);
            for _ in 0..k {
                row_sizes.push(read_u32(r)? as usize);
                col_sizes.push(read_u32(r)? as usize);
            }
            let partition = BlockPartition::new(row_sizes, col_sizes)?;
            if partition.total_rows() != rows || partition.total_cols() != cols {
                return Err(Error::Format("block headers disagree with matrix shape".into()));
            }
            let blocks = partition
                .row_sizes()
                .iter()
                .zip(partition.col_sizes())
                .map(|(&m, &n)| DenseMatrix::new(m, n, read_entries(r, m * n)?))
                .collect::<Result<Vec<_>>>()?;
            BprObject::Krbd(KrbdMatrix::from_blocks(blocks)?)
        }
        other => return Err(Error::Format(format!("unknown kind flag {other}"))),
    };
    Ok(obj)
}

pub fn save_bpr(path: impl AsRef<Path>, obj: &BprObject) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_bpr(&mut w, obj)?;
    w.flush()?;
    Ok(())
}

pub fn load_bpr(path: impl AsRef<Path>) -> Result<BprObject> {
    read_bpr(&mut BufReader::new(File::open(path)?))
}

/// Formats one entry as `a+bi` / `a-bi`, exact under round trip.
pub fn format_complex(v: C64) -> String {
    let sign = if v.im.is_sign_negative() { "" } else { "+" };
    format!("{:?}{sign}{:?}i", v.re, v.im)
}

pub fn parse_complex(s: &str) -> Result<C64> {
    let s = s.trim();
    let bad = || Error::Format(format!("cannot parse complex entry `{s}`"));
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re = body[..split].parse::<f64>().map_err(|_| bad())?;
    let im = body[split..]
        .trim_start_matches('+')
        .parse::<f64>()
        .map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

pub fn write_csv<W: Write>(w: &mut W, m: &DenseMatrix) -> Result<()> {
    for r in 0..m.rows() {
        let line: Vec<String> = m.row(r).iter().map(|v| format_complex(*v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R) -> Result<DenseMatrix> {
    let mut rows = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(line.split(',').map(parse_complex).collect::<Result<Vec<_>>>()?);
    }
    if rows.windows(2).any(|w| w[0].len() != w[1].len()) {
        return Err(Error::Format("ragged CSV rows".into()));
    }
    DenseMatrix::from_rows(&rows)
}
