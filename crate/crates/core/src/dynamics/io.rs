//! Grid export. CSV rows are `t,t_prime,re,im`. The binary dump is
//! little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 8 | magic `b"SPSGRID1"` |
//! | 4 | kind code (u32, 1 = G1, 2 = G2) |
//! | 8 | n (u64) |
//! | 8 | t_start (f64) |
//! | 8 | dt (f64) |
//! | 16·n² | entries row-major as (re, im) f64 pairs |

use std::io::{Read, Write};

use super::correlation::{CorrelationGrid, CorrelationKind};
use super::grid::TimeGrid;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

pub const MAGIC: &[u8; 8] = b"SPSGRID1";

fn io_err(e: std::io::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn write_grid_csv<W: Write>(g: &CorrelationGrid, mut out: W) -> Result<()> {
    writeln!(out, "t,t_prime,re,im").map_err(io_err)?;
    let times = g.grid().times();
    for (i, t) in times.iter().enumerate() {
        for (j, tp) in times.iter().enumerate() {
            let z = g.at(i, j);
            writeln!(out, "{t:e},{tp:e},{:e},{:e}", z.re, z.im).map_err(io_err)?;
        }
    }
    Ok(())
}

pub fn write_grid_binary<W: Write>(g: &CorrelationGrid, mut out: W) -> Result<()> {
    let n = g.len();
    let mut buf = Vec::with_capacity(36 + 16 * n * n);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&g.kind().code().to_le_bytes());
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    buf.extend_from_slice(&g.grid().t_start().to_le_bytes());
    buf.extend_from_slice(&g.grid().dt().to_le_bytes());
    for i in 0..n {
        for j in 0..n {
            let z = g.at(i, j);
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out.write_all(&buf).map_err(io_err)
}

pub fn read_grid_binary<R: Read>(mut input: R) -> Result<CorrelationGrid> {
    let mut header = [0u8; 36];
    input.read_exact(&mut header).map_err(io_err)?;
    if &header[..8] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let word = |a: usize| -> [u8; 8] { header[a..a + 8].try_into().unwrap() };
    let code = u32::from_le_bytes(header[8..12].try_into().unwrap());
    let kind = CorrelationKind::from_code(code).ok_or_else(|| Error::Format(format!("unknown kind {code}")))?;
    let n = u64::from_le_bytes(word(12)) as usize;
    let t_start = f64::from_le_bytes(word(20));
    let dt = f64::from_le_bytes(word(28));
    if n < TimeGrid::MIN_POINTS || n > 1 << 16 {
        return Err(Error::Format(format!("implausible grid size {n}")));
    }
    let grid = TimeGrid::new(t_start, t_start + dt * (n - 1) as f64, n)?;
    let mut body = vec![0u8; 16 * n * n];
    input.read_exact(&mut body).map_err(io_err)?;
    let f = |k: usize| f64::from_le_bytes(body[8 * k..8 * k + 8].try_into().unwrap());
    let values = CMatrix::from_fn(n, n, |i, j| {
        let k = 2 * (i * n + j);
        C64::new(f(k), f(k + 1))
    });
    CorrelationGrid::new(grid, values, kind)
}
