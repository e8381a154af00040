//! Cut-off weights for the localized functionals.
//!
//! * `ψ_L(y) = (2/π) arctan(e^{y/L})`, a smooth step from 0 to 1.
//! * `φ`: even, `C²`, equal to 1 on `[0, 1]` and to `e^{-x}` on `[2, ∞)`,
//!   joined on `[1, 2]` by `exp(-s)` with `s` a sextic.
//! * `varphi(x) = ∫₀ˣ φ`, odd, with `varphi_A(x) = A varphi(x / A)` and
//!   `varphi_A' = φ(x / A)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// `ψ_L` with `L = scale`.
    Psi,
    /// `φ_A(y) = φ(y / A)`, the derivative of `varphi_A`.
    PhiPrime,
    /// `varphi_A(y) = A varphi(y / A)`.
    Varphi,
}

/// Weight evaluated at `x1 + angle · x2 - offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub kind: WeightKind,
    pub scale: f64,
    pub offset: f64,
    /// Coefficient of `x2`, `tan θ` for an oblique weight.
    pub angle: f64,
}

impl WeightParams {
    pub fn new(kind: WeightKind, scale: f64) -> Result<Self> {
        let w = Self {
            kind,
            scale,
            offset: 0.0,
            angle: 0.0,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.offset.is_finite() && self.angle.is_finite()) {
            return Err(FlowError::InvalidParams("weight parameters must be finite".into()));
        }
        match self.kind {
            WeightKind::Psi if self.scale < 4.0 => Err(FlowError::InvalidParams(format!(
                "psi weights need scale >= 4, got {}",
                self.scale
            ))),
            _ if self.scale <= 0.0 => Err(FlowError::InvalidParams(format!(
                "weight scale must be positive, got {}",
                self.scale
            ))),
            _ => Ok(()),
        }
    }

    pub fn argument(&self, x1: f64, x2: f64) -> f64 {
        x1 + self.angle * x2 - self.offset
    }
}

pub fn weight_eval(w: &WeightParams, y: f64) -> f64 {
    match w.kind {
        WeightKind::Psi => psi(w.scale, y),
        WeightKind::PhiPrime => phi(y / w.scale),
        WeightKind::Varphi => w.scale * varphi(y / w.scale),
    }
}

/// Derivative of [`weight_eval`] in `y`.
pub fn weight_deriv(w: &WeightParams, y: f64) -> f64 {
    match w.kind {
        WeightKind::Psi => psi_deriv(w.scale, y),
        WeightKind::PhiPrime => phi_deriv(y / w.scale) / w.scale,
        WeightKind::Varphi => phi(y / w.scale),
    }
}

pub fn psi(l: f64, y: f64) -> f64 {
    2.0 / PI * (y / l).exp().atan()
}

pub fn psi_deriv(l: f64, y: f64) -> f64 {
    1.0 / (PI * l * (y / l).cosh())
}

pub fn psi_third_deriv(l: f64, y: f64) -> f64 {
    let s = y / l;
    let sech = 1.0 / s.cosh();
    let tanh = s.tanh();
    -(sech.powi(3) - sech * tanh * tanh) / (PI * l.powi(3))
}

/// Exponent of the bridge: `φ(1 + t) = exp(-s(t))` on `t ∈ [0, 1]` with
/// `s` the quintic Hermite interpolant of `(0, 0, 0)` at `t = 0` and
/// `(2, 1, 0)` at `t = 1`, plus `10 t³(1 - t)³`. The extra term keeps
/// `x - ln 3 <= s <= x`, i.e. `e^{-x} <= φ <= 3e^{-x}`.
const BRIDGE: [f64; 7] = [0.0, 0.0, 0.0, 16.0 + 10.0, -23.0 - 30.0, 9.0 + 30.0, -10.0];

fn poly(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

fn bridge_exponent(t: f64) -> f64 {
    poly(&BRIDGE, t)
}

fn bridge_exponent_deriv(t: f64) -> f64 {
    let d: Vec<f64> = (1..BRIDGE.len()).map(|k| k as f64 * BRIDGE[k]).collect();
    poly(&d, t)
}

const GAUSS_POINTS: usize = 16;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GAUSS_POINTS;
        (0..n)
            .map(|i| {
                let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=n {
                        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    })
}

fn panel(a: f64, b: f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    gauss_legendre()
        .iter()
        .map(|&(x, w)| w * (-bridge_exponent(mid + half * x)).exp())
        .sum::<f64>()
        * half
}

/// `∫₀ᵗ exp(-s)`, two Gauss panels.
fn bridge_integral(t: f64) -> f64 {
    panel(0.0, 0.5 * t) + panel(0.5 * t, t)
}

fn bridge_total() -> f64 {
    static TOTAL: OnceLock<f64> = OnceLock::new();
    *TOTAL.get_or_init(|| bridge_integral(1.0))
}

pub fn phi(x: f64) -> f64 {
    let x = x.abs();
    if x <= 1.0 {
        1.0
    } else if x < 2.0 {
        (-bridge_exponent(x - 1.0)).exp()
    } else {
        (-x).exp()
    }
}

pub fn phi_deriv(x: f64) -> f64 {
    let s = x.signum();
    let a = x.abs();
    if a <= 1.0 {
        0.0
    } else if a < 2.0 {
        -s * bridge_exponent_deriv(a - 1.0) * (-bridge_exponent(a - 1.0)).exp()
    } else {
        -s * (-a).exp()
    }
}

pub fn varphi(x: f64) -> f64 {
    let s = x.signum();
    let a = x.abs();
    let v = if a <= 1.0 {
        a
    } else if a < 2.0 {
        1.0 + bridge_integral(a - 1.0)
    } else {
        1.0 + bridge_total() + (-2.0_f64).exp() - (-a).exp()
    };
    s * v
}
