//! Plane-wave dispersion of the linear ZK flow and its cone geometry.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveVector {
    pub k1: f64,
    pub k2: f64,
}

impl WaveVector {
    pub fn new(k1: f64, k2: f64) -> Self {
        Self { k1, k2 }
    }
}

/// `ω(k) = -(k1³ + k1 k2²)` for `u = exp(i(k·x - ωt))`.
pub fn omega(k: WaveVector) -> f64 {
    -(k.k1.powi(3) + k.k1 * k.k2 * k.k2)
}

pub fn group_velocity(k: WaveVector) -> (f64, f64) {
    (-(3.0 * k.k1 * k.k1 + k.k2 * k.k2), -2.0 * k.k1 * k.k2)
}

/// `tan θ` of the group velocity measured from the `x2` axis, as a function
/// of `r = |k1| / |k2|`: `(3r² + 1) / (2r)`.
pub fn group_tan(r: f64) -> f64 {
    (3.0 * r * r + 1.0) / (2.0 * r)
}

/// Infimum over wave vectors of the angle between the group velocity and
/// the `x2` axis. Golden-section search on `log r`.
pub fn min_group_angle() -> f64 {
    let f = |s: f64| group_tan(s.exp());
    let (mut a, mut b) = (-8.0_f64, 8.0_f64);
    let g = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-12 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    f(0.5 * (a + b)).atan()
}

/// Analytic minimizer of [`group_tan`].
pub fn min_group_ratio() -> f64 {
    1.0 / 3.0_f64.sqrt()
}

/// `K(k) = 3k1² - k2²`, vanishing on the cone `|k2| = √3 |k1|`.
pub fn ckz_symbol(k: WaveVector) -> f64 {
    3.0 * k.k1 * k.k1 - k.k2 * k.k2
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn omega_values() {
        assert_eq!(omega(WaveVector::new(1.0, 0.0)), -1.0);
        assert_eq!(omega(WaveVector::new(0.0, 5.0)), 0.0);
        assert_eq!(omega(WaveVector::new(2.0, 1.0)), -10.0);
    }

    #[test]
    fn group_velocity_values() {
        assert_eq!(group_velocity(WaveVector::new(1.0, 1.0)), (-4.0, -2.0));
        assert_eq!(group_velocity(WaveVector::new(1.0, -1.0)), (-4.0, 2.0));
    }

    #[test]
    fn cone_angle() {
        assert!((min_group_angle() - PI / 3.0).abs() < 1e-9);
        assert!((group_tan(min_group_ratio()) - 3.0_f64.sqrt()).abs() < 1e-15);
        assert_eq!(group_tan(1.0), 2.0);
        assert_eq!(ckz_symbol(WaveVector::new(1.0, 0.0)), 3.0);
        assert_eq!(ckz_symbol(WaveVector::new(0.0, 1.0)), -1.0);
        assert!(ckz_symbol(WaveVector::new(1.0, 3.0_f64.sqrt())).abs() < 1e-15);
    }
}
