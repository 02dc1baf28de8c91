//! Binary files: the `TTK1` container for trains and flat little-endian
//! `f64` dense data.
//!
//! Container layout (all integers and reals little-endian):
//!
//! | field | type |
//! |---|---|
//! | magic `TTK1` | 4 bytes |
//! | version = 1 | u8 |
//! | kind (0 vector, 1 operator, 2 block) | u8 |
//! | N | u32 |
//! | modes (`(I, J)` pairs for operators) | u64 each |
//! | ranks, N + 1 values | u64 each |
//! | block position and K (kind 2 only) | u32, u64 |
//! | cores in order, stored layout | f64 each |

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Result, TtError};
use crate::scalar::Scalar;
use crate::tt::{BlockTt, Core3, Core4, TtMatrix, TtVector};

pub const MAGIC: &[u8; 4] = b"TTK1";
pub const VERSION: u8 = 1;

/// Any train that fits in a container.
#[derive(Clone, Debug, PartialEq)]
pub enum Container<T> {
    Vector(TtVector<T>),
    Matrix(TtMatrix<T>),
    Block(BlockTt<T>),
}

impl<T: Scalar> Container<T> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Container::Vector(_) => "vector",
            Container::Matrix(_) => "matrix",
            Container::Block(_) => "block",
        }
    }

    pub fn ranks(&self) -> Vec<usize> {
        match self {
            Container::Vector(x) => x.ranks(),
            Container::Matrix(a) => a.ranks(),
            Container::Block(b) => b.ranks(),
        }
    }
}

fn put_u64(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u64).to_le_bytes());
}

fn put_u32(out: &mut Vec<u8>, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| TtError::Format(format!("{v} does not fit in u32")))?;
    out.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

fn put_reals<T: Scalar>(out: &mut Vec<u8>, data: &[T]) {
    for x in data {
        out.extend_from_slice(&x.as_f64().to_le_bytes());
    }
}

/// Serializes a container to bytes.
pub fn encode<T: Scalar>(c: &Container<T>) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    match c {
        Container::Vector(x) => {
            out.push(0);
            put_u32(&mut out, x.order())?;
            x.modes().into_iter().for_each(|m| put_u64(&mut out, m));
            x.ranks().into_iter().for_each(|r| put_u64(&mut out, r));
            x.cores().iter().for_each(|c| put_reals(&mut out, c.data()));
        }
        Container::Matrix(a) => {
            out.push(1);
            put_u32(&mut out, a.order())?;
            for c in a.cores() {
                put_u64(&mut out, c.rows());
                put_u64(&mut out, c.cols());
            }
            a.ranks().into_iter().for_each(|r| put_u64(&mut out, r));
            a.cores().iter().for_each(|c| put_reals(&mut out, c.data()));
        }
        Container::Block(b) => {
            out.push(2);
            put_u32(&mut out, b.order())?;
            b.modes().into_iter().for_each(|m| put_u64(&mut out, m));
            b.ranks().into_iter().for_each(|r| put_u64(&mut out, r));
            put_u32(&mut out, b.position())?;
            put_u64(&mut out, b.block_count());
            b.cores().iter().for_each(|c| put_reals(&mut out, c.data()));
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.buf.len());
        let Some(end) = end else {
            return Err(TtError::Format(format!("truncated while reading {what}")));
        };
        let s = &self.buf[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<usize> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    }

    fn u64(&mut self, what: &str) -> Result<usize> {
        let b = self.take(8, what)?;
        let v = u64::from_le_bytes(b.try_into().expect("8 bytes"));
        usize::try_from(v).map_err(|_| TtError::Format(format!("{what} {v} too large")))
    }

    fn positive(&mut self, what: &str) -> Result<usize> {
        let v = self.u64(what)?;
        if v == 0 {
            return Err(TtError::Format(format!("{what} must be positive")));
        }
        Ok(v)
    }

    fn reals<T: Scalar>(&mut self, n: usize, what: &str) -> Result<Vec<T>> {
        let bytes = n
            .checked_mul(8)
            .ok_or_else(|| TtError::Format(format!("{what} size overflows")))?;
        let b = self.take(bytes, what)?;
        Ok(b.chunks_exact(8)
            .map(|c| T::of(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
            .collect())
    }
}

fn core_len(dims: &[usize]) -> Result<usize> {
    dims.iter()
        .try_fold(1usize, |a, &d| a.checked_mul(d))
        .ok_or_else(|| TtError::Format("core size overflows".into()))
}

/// Parses a container; trailing bytes are an error.
pub fn decode<T: Scalar>(buf: &[u8]) -> Result<Container<T>> {
    let mut r = Reader { buf, at: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(TtError::Format("bad magic, expected TTK1".into()));
    }
    let version = r.u8("version")?;
    if version != VERSION {
        return Err(TtError::Format(format!("unsupported version {version}")));
    }
    let kind = r.u8("kind")?;
    if kind > 2 {
        return Err(TtError::Format(format!("unknown kind {kind}")));
    }
    let n = r.u32("order")?;
    if n == 0 {
        return Err(TtError::Format("order must be positive".into()));
    }
    let width = if kind == 1 { 2 } else { 1 };
    let mut modes = Vec::new();
    for _ in 0..n * width {
        modes.push(r.positive("mode size")?);
    }
    let mut ranks = Vec::new();
    for _ in 0..=n {
        ranks.push(r.positive("rank")?);
    }
    if ranks[0] != 1 || ranks[n] != 1 {
        return Err(TtError::Format("boundary ranks must be 1".into()));
    }
    let c = match kind {
        0 => {
            let mut cores = Vec::with_capacity(n);
            for k in 0..n {
                let len = core_len(&[ranks[k], modes[k], ranks[k + 1]])?;
                cores.push(Core3::new(ranks[k], modes[k], ranks[k + 1], r.reals(len, "core")?)?);
            }
            Container::Vector(TtVector::from_cores(cores)?)
        }
        1 => {
            let mut cores = Vec::with_capacity(n);
            for k in 0..n {
                let (i, j) = (modes[2 * k], modes[2 * k + 1]);
                let len = core_len(&[ranks[k], i, j, ranks[k + 1]])?;
                cores.push(Core4::new(ranks[k], i, j, ranks[k + 1], r.reals(len, "core")?)?);
            }
            Container::Matrix(TtMatrix::from_cores(cores)?)
        }
        _ => {
            let pos = r.u32("block position")?;
            let kk = r.positive("block count")?;
            if pos >= n {
                return Err(TtError::Format(format!("block position {pos} out of range for {n} cores")));
            }
            let mut cores = Vec::with_capacity(n);
            for k in 0..n {
                let m = if k == pos {
                    modes[k]
                        .checked_mul(kk)
                        .ok_or_else(|| TtError::Format("block core size overflows".into()))?
                } else {
                    modes[k]
                };
                let len = core_len(&[ranks[k], m, ranks[k + 1]])?;
                cores.push(Core3::new(ranks[k], m, ranks[k + 1], r.reals(len, "core")?)?);
            }
            Container::Block(BlockTt::from_parts(cores, pos, kk)?)
        }
    };
    if r.at != buf.len() {
        return Err(TtError::Format(format!("{} trailing bytes", buf.len() - r.at)));
    }
    Ok(c)
}

pub fn save<T: Scalar>(path: impl AsRef<Path>, c: &Container<T>) -> Result<()> {
    let bytes = encode(c)?;
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

pub fn load<T: Scalar>(path: impl AsRef<Path>) -> Result<Container<T>> {
    decode(&fs::read(path)?)
}

/// Reads a flat little-endian `f64` file.
pub fn read_raw(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(TtError::Format(format!(
            "raw file length {} is not a multiple of 8",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}

pub fn write_raw(path: impl AsRef<Path>, data: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(data.len() * 8);
    for x in data {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}
