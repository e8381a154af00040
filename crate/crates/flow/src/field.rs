//! Periodic boxes, sampled fields and the binary snapshot format.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};

/// Periodic rectangle `[0, l1) × [0, l2)` with `n1 × n2` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Box2D {
    pub l1: f64,
    pub l2: f64,
    pub n1: usize,
    pub n2: usize,
}

impl Box2D {
    pub fn new(l1: f64, l2: f64, n1: usize, n2: usize) -> Result<Self> {
        if !(l1 > 0.0 && l2 > 0.0 && l1.is_finite() && l2.is_finite()) {
            return Err(FlowError::InvalidParams(format!("box sides must be positive, got {l1} x {l2}")));
        }
        for n in [n1, n2] {
            if n < 64 || !n.is_power_of_two() {
                return Err(FlowError::InvalidParams(format!(
                    "grid sizes must be powers of two >= 64, got {n1} x {n2}"
                )));
            }
        }
        Ok(Self { l1, l2, n1, n2 })
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn h1(&self) -> f64 {
        self.l1 / self.n1 as f64
    }

    pub fn h2(&self) -> f64 {
        self.l2 / self.n2 as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.h1() * self.h2()
    }

    pub fn x1(&self, i: usize) -> f64 {
        i as f64 * self.h1()
    }

    pub fn x2(&self, j: usize) -> f64 {
        j as f64 * self.h2()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }
}

/// Wraps `x` into `[-l/2, l/2)`.
pub fn min_image(x: f64, l: f64) -> f64 {
    x - l * (x / l + 0.5).floor()
}

/// Real field on a [`Box2D`], row-major: `values[i * n2 + j]` sits at
/// `(i l1 / n1, j l2 / n2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Field2D {
    pub bx: Box2D,
    pub values: Vec<f64>,
}

impl Field2D {
    pub fn new(bx: Box2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != bx.len() {
            return Err(FlowError::InvalidParams(format!(
                "field has {} values for a {} x {} grid",
                values.len(),
                bx.n1,
                bx.n2
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FlowError::InvalidParams("field has non-finite values".into()));
        }
        Ok(Self { bx, values })
    }

    pub fn zeros(bx: Box2D) -> Self {
        Self {
            bx,
            values: vec![0.0; bx.len()],
        }
    }

    pub fn from_fn(bx: Box2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(bx.len());
        for i in 0..bx.n1 {
            for j in 0..bx.n2 {
                values.push(f(bx.x1(i), bx.x2(j)));
            }
        }
        Self { bx, values }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Periodic-grid quadrature `∫ f dx` (mean times area).
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.bx.cell_area()
    }

    pub fn dot(&self, other: &Field2D) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.bx.cell_area()
    }

    pub fn axpy(&self, a: f64, other: &Field2D) -> Field2D {
        Field2D {
            bx: self.bx,
            values: self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> Field2D {
        Field2D {
            bx: self.bx,
            values: self.values.iter().map(|x| a * x).collect(),
        }
    }

    /// Node with the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        let k = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
            .0;
        (k / self.bx.n2, k % self.bx.n2)
    }
}

const SNAPSHOT_MAGIC: &[u8; 8] = b"ZKSNAP01";

/// Header `(magic, l1, l2, n1, n2, t)` followed by the row-major values,
/// all little-endian 64-bit.
pub fn write_snapshot<W: Write>(mut out: W, u: &Field2D, t: f64) -> Result<()> {
    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&u.bx.l1.to_le_bytes())?;
    out.write_all(&u.bx.l2.to_le_bytes())?;
    out.write_all(&(u.bx.n1 as u64).to_le_bytes())?;
    out.write_all(&(u.bx.n2 as u64).to_le_bytes())?;
    out.write_all(&t.to_le_bytes())?;
    for v in &u.values {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut input: R) -> Result<(Field2D, f64)> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(FlowError::Io("not a snapshot file".into()));
    }
    let mut word = [0u8; 8];
    let mut next = |input: &mut R| -> Result<[u8; 8]> {
        input.read_exact(&mut word)?;
        Ok(word)
    };
    let l1 = f64::from_le_bytes(next(&mut input)?);
    let l2 = f64::from_le_bytes(next(&mut input)?);
    let n1 = u64::from_le_bytes(next(&mut input)?) as usize;
    let n2 = u64::from_le_bytes(next(&mut input)?) as usize;
    let t = f64::from_le_bytes(next(&mut input)?);
    let bx = Box2D::new(l1, l2, n1, n2)?;
    let mut values = Vec::with_capacity(bx.len());
    for _ in 0..bx.len() {
        values.push(f64::from_le_bytes(next(&mut input)?));
    }
    Ok((Field2D::new(bx, values)?, t))
}
