//! Versioned text format for ground-state profiles.
//!
//! ```text
//! # zklab radial profile
//! version=1
//! d=2
//! p=2e0
//! c=1e0
//! rmax=5e1
//! n=4096
//! ode_residual_norm=...
//! tail_rate=...
//! newton_iters=5
//! r value deriv
//! ...
//! ```
//! Floats are written in shortest round-trip exponent form so reading back
//! is bit-exact.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{CoreError, Result};
use crate::ground_state::GroundState;
use crate::grid::{RadialGrid, RadialProfile};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "# zklab radial profile";

pub fn write_ground_state<W: Write>(mut out: W, q: &GroundState) -> Result<()> {
    let g = q.grid();
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "version={FORMAT_VERSION}")?;
    writeln!(out, "d={}", q.d)?;
    writeln!(out, "p={:e}", q.p)?;
    writeln!(out, "c={:e}", q.c)?;
    writeln!(out, "rmax={:e}", g.rmax())?;
    writeln!(out, "n={}", g.n())?;
    writeln!(out, "ode_residual_norm={:e}", q.ode_residual_norm)?;
    writeln!(out, "tail_rate={:e}", q.tail_rate)?;
    writeln!(out, "newton_iters={}", q.newton_iters)?;
    writeln!(out, "r value deriv")?;
    for ((r, v), dv) in g.nodes().iter().zip(q.values()).zip(q.derivs()) {
        writeln!(out, "{r:e} {v:e} {dv:e}")?;
    }
    Ok(())
}

pub fn to_string(q: &GroundState) -> String {
    let mut buf = Vec::new();
    write_ground_state(&mut buf, q).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn save(path: &Path, q: &GroundState) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_ground_state(&mut w, q)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<GroundState> {
    let f = std::fs::File::open(path)?;
    read_ground_state(std::io::BufReader::new(f))
}

fn parse_err(line: usize, msg: impl Into<String>) -> CoreError {
    CoreError::Parse {
        line,
        msg: msg.into(),
    }
}

fn header<T: std::str::FromStr>(lines: &[(usize, String)], idx: usize, key: &str) -> Result<T> {
    let (no, text) = lines
        .get(idx)
        .ok_or_else(|| parse_err(idx + 1, format!("missing header `{key}`")))?;
    let value = text
        .strip_prefix(key)
        .and_then(|s| s.strip_prefix('='))
        .ok_or_else(|| parse_err(*no, format!("expected `{key}=`, found `{text}`")))?;
    value
        .trim()
        .parse()
        .map_err(|_| parse_err(*no, format!("bad value for `{key}`: `{value}`")))
}

pub fn read_ground_state<R: BufRead>(input: R) -> Result<GroundState> {
    let lines: Vec<(usize, String)> = input
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|s| (i + 1, s)))
        .collect::<std::io::Result<_>>()?;
    match lines.first() {
        Some((_, l)) if l == MAGIC => {}
        _ => return Err(parse_err(1, "missing profile magic line")),
    }
    let version: u32 = header(&lines, 1, "version")?;
    if version != FORMAT_VERSION {
        return Err(parse_err(2, format!("unsupported version {version}")));
    }
    let d: usize = header(&lines, 2, "d")?;
    let p: f64 = header(&lines, 3, "p")?;
    let c: f64 = header(&lines, 4, "c")?;
    let rmax: f64 = header(&lines, 5, "rmax")?;
    let n: usize = header(&lines, 6, "n")?;
    let ode_residual_norm: f64 = header(&lines, 7, "ode_residual_norm")?;
    let tail_rate: f64 = header(&lines, 8, "tail_rate")?;
    let newton_iters: usize = header(&lines, 9, "newton_iters")?;
    match lines.get(10) {
        Some((_, l)) if l == "r value deriv" => {}
        _ => return Err(parse_err(11, "missing column line `r value deriv`")),
    }
    let body = &lines[11..];
    if body.len() != n {
        return Err(parse_err(12, format!("expected {n} data rows, found {}", body.len())));
    }
    let grid = RadialGrid::new(rmax, n).map_err(|e| parse_err(6, e.to_string()))?;
    let mut values = Vec::with_capacity(n);
    let mut derivs = Vec::with_capacity(n);
    for ((no, text), &r_grid) in body.iter().zip(grid.nodes()) {
        let cols: Vec<f64> = text
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(*no, e.to_string()))?;
        if cols.len() != 3 {
            return Err(parse_err(*no, format!("expected 3 columns, found {}", cols.len())));
        }
        if cols[0].to_bits() != r_grid.to_bits() {
            return Err(parse_err(*no, format!("node {} does not match the grid ({r_grid:e})", cols[0])));
        }
        values.push(cols[1]);
        derivs.push(cols[2]);
    }
    let profile = RadialProfile::new(grid, values, derivs).map_err(|e| parse_err(12, e.to_string()))?;
    Ok(GroundState {
        d,
        p,
        c,
        profile,
        ode_residual_norm,
        tail_rate,
        newton_iters,
    })
}
