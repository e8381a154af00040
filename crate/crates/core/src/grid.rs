//! Uniform radial grids, sampled radial functions and their quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
pub use crate::stencil::Parity;
use crate::stencil::RadialStencil;

/// Smallest node count accepted by the boundary-value solver.
pub const MIN_NODES: usize = 64;

/// Uniform nodes `r_i = i * rmax / (n - 1)` on `[0, rmax]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    rmax: f64,
    nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn new(rmax: f64, n: usize) -> Result<Self> {
        if !(rmax.is_finite() && rmax > 0.0) {
            return Err(CoreError::InvalidInput(format!("rmax must be positive, got {rmax}")));
        }
        if n < MIN_NODES {
            return Err(CoreError::InvalidInput(format!(
                "radial grid needs at least {MIN_NODES} nodes, got {n}"
            )));
        }
        let h = rmax / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        nodes[n - 1] = rmax;
        Ok(Self { rmax, nodes })
    }

    pub fn rmax(&self) -> f64 {
        self.rmax
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn h(&self) -> f64 {
        self.rmax / (self.nodes.len() - 1) as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn stencil(&self) -> RadialStencil {
        RadialStencil::new(self.n(), self.h())
    }

    /// Composite quadrature weights (4-point panel rule, exact for cubics).
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let n = self.n();
        let mut w = vec![0.0; n];
        for (start, coeffs) in panel_weights(n) {
            for (k, c) in coeffs.iter().enumerate() {
                w[start + k] += c;
            }
        }
        let s = self.h() / 24.0;
        w.iter_mut().for_each(|v| *v *= s);
        w
    }

    /// Running integral `F(r_i) = ∫_0^{r_i} f dr` built panel by panel.
    pub fn cumulative_integral(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.n());
        let s = self.h() / 24.0;
        let mut out = Vec::with_capacity(f.len());
        let mut acc = 0.0;
        out.push(0.0);
        for (start, coeffs) in panel_weights(self.n()) {
            let piece: f64 = coeffs.iter().zip(&f[start..]).map(|(c, v)| c * v).sum();
            acc += s * piece;
            out.push(acc);
        }
        out
    }
}

/// Per-interval quadrature stencils `(first column, weights * 24/h)`.
fn panel_weights(n: usize) -> impl Iterator<Item = (usize, [f64; 4])> {
    (0..n - 1).map(move |i| {
        if i == 0 {
            (0, [9.0, 19.0, -5.0, 1.0])
        } else if i == n - 2 {
            (n - 4, [1.0, -5.0, 19.0, 9.0])
        } else {
            (i - 1, [-1.0, 13.0, 13.0, -1.0])
        }
    })
}

/// A radial function with its derivative sampled on a [`RadialGrid`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
}

impl RadialProfile {
    pub fn new(grid: RadialGrid, values: Vec<f64>, derivs: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() || derivs.len() != grid.n() {
            return Err(CoreError::InvalidInput(format!(
                "profile arrays ({}, {}) do not match grid size {}",
                values.len(),
                derivs.len(),
                grid.n()
            )));
        }
        if values.iter().chain(&derivs).any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidInput("profile has non-finite entries".into()));
        }
        Ok(Self {
            grid,
            values,
            derivs,
        })
    }

    /// Builds a profile whose derivative comes from the solver stencil.
    pub fn from_values(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        let derivs = grid.stencil().first_derivative(&values);
        Self::new(grid, values, derivs)
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    /// Value at arbitrary `r ∈ [0, rmax]` (degree-7 local interpolation,
    /// even extension through the origin).
    pub fn value_at(&self, r: f64) -> f64 {
        lagrange_sample(&self.values, self.grid.h(), Parity::Even, r)
    }

    /// Derivative at arbitrary `r ∈ [0, rmax]`.
    pub fn deriv_at(&self, r: f64) -> f64 {
        lagrange_sample(&self.derivs, self.grid.h(), Parity::Odd, r)
    }

    /// Cubic Hermite interpolation from `(values, derivs)`; returns `(f, f')`.
    pub fn hermite_at(&self, r: f64) -> (f64, f64) {
        let h = self.grid.h();
        let n = self.n();
        let r = r.abs();
        let j = ((r / h).floor() as usize).min(n - 2);
        let t = (r - j as f64 * h) / h;
        let (f0, f1) = (self.values[j], self.values[j + 1]);
        let (d0, d1) = (self.derivs[j] * h, self.derivs[j + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let value = h00 * f0 + h10 * d0 + h01 * f1 + h11 * d1;
        let dh00 = 6.0 * t2 - 6.0 * t;
        let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
        let dh01 = -6.0 * t2 + 6.0 * t;
        let dh11 = 3.0 * t2 - 2.0 * t;
        let deriv = (dh00 * f0 + dh10 * d0 + dh01 * f1 + dh11 * d1) / h;
        (value, deriv)
    }
}

/// `∫_0^{rmax} f(r) r^k dr` with the composite 4th-order rule.
pub fn radial_quadrature(f: &RadialProfile, weight_power: u32) -> f64 {
    integrate_weighted(&f.grid, &f.values, weight_power)
}

/// Same as [`radial_quadrature`] for a bare sample array on `grid`.
pub fn integrate_weighted(grid: &RadialGrid, values: &[f64], weight_power: u32) -> f64 {
    assert_eq!(values.len(), grid.n());
    let w = grid.quadrature_weights();
    grid.nodes()
        .iter()
        .zip(values)
        .zip(&w)
        .map(|((r, v), wi)| wi * v * r.powi(weight_power as i32))
        .sum()
}

/// Surface area of the unit sphere in `R^d` (2 for `d = 1`).
pub fn sphere_area(d: usize) -> f64 {
    use std::f64::consts::PI;
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => {
            // 2 π^{d/2} / Γ(d/2) via the recursion S_d = 2π/(d-2) S_{d-2}.
            2.0 * PI / (d as f64 - 2.0) * sphere_area(d - 2)
        }
    }
}

const STENCIL_WIDTH: usize = 8;

/// Local degree-7 Lagrange interpolation on a uniform grid starting at 0.
fn lagrange_sample(values: &[f64], h: f64, parity: Parity, r: f64) -> f64 {
    let n = values.len();
    let sign = if r < 0.0 && parity == Parity::Odd { -1.0 } else { 1.0 };
    let r = r.abs();
    let x = r / h;
    let j = x.floor() as i64;
    let half = (STENCIL_WIDTH / 2) as i64;
    let mut first = j - half + 1;
    let last_allowed = n as i64 - STENCIL_WIDTH as i64;
    if first > last_allowed {
        first = last_allowed;
    }
    // Exact node hit.
    if (x - x.round()).abs() < 1e-14 && (x.round() as usize) < n {
        return sign * values[x.round() as usize];
    }
    let mut acc = 0.0;
    for a in 0..STENCIL_WIDTH as i64 {
        let ia = first + a;
        let mut w = 1.0;
        for b in 0..STENCIL_WIDTH as i64 {
            if a != b {
                let ib = first + b;
                w *= (x - ib as f64) / (ia - ib) as f64;
            }
        }
        let v = if ia < 0 {
            let mirrored = values[(-ia) as usize];
            match parity {
                Parity::Even => mirrored,
                Parity::Odd => -mirrored,
            }
        } else {
            values[ia as usize]
        };
        acc += w * v;
    }
    sign * acc
}
