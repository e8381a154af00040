//! Two-dimensional FFT on a periodic box: wavenumbers, derivatives, the
//! 2/3 dealiasing mask and sub-grid shifts.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::field::{Box2D, Field2D};

pub type Spectrum = Vec<Complex64>;

pub struct Spectral2D {
    pub bx: Box2D,
    /// Wavenumbers along `x1`; index `n1/2` holds the Nyquist value `-π n1/l1`.
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    /// `k1` with the Nyquist entry zeroed, for odd derivatives.
    pub k1_odd: Vec<f64>,
    pub k2_odd: Vec<f64>,
    mask1: Vec<bool>,
    mask2: Vec<bool>,
    fwd1: Arc<dyn Fft<f64>>,
    inv1: Arc<dyn Fft<f64>>,
    fwd2: Arc<dyn Fft<f64>>,
    inv2: Arc<dyn Fft<f64>>,
}

fn wavenumbers(n: usize, l: f64) -> (Vec<f64>, Vec<f64>, Vec<bool>) {
    let scale = 2.0 * PI / l;
    let mut k = Vec::with_capacity(n);
    let mut k_odd = Vec::with_capacity(n);
    let mut mask = Vec::with_capacity(n);
    for i in 0..n {
        let m = if i < n / 2 { i as i64 } else { i as i64 - n as i64 };
        k.push(scale * m as f64);
        k_odd.push(if i == n / 2 { 0.0 } else { scale * m as f64 });
        mask.push(3 * m.unsigned_abs() < n as u64);
    }
    (k, k_odd, mask)
}

impl Spectral2D {
    pub fn new(bx: Box2D) -> Self {
        let (k1, k1_odd, mask1) = wavenumbers(bx.n1, bx.l1);
        let (k2, k2_odd, mask2) = wavenumbers(bx.n2, bx.l2);
        let mut planner = FftPlanner::new();
        Self {
            bx,
            k1,
            k2,
            k1_odd,
            k2_odd,
            mask1,
            mask2,
            fwd1: planner.plan_fft_forward(bx.n1),
            inv1: planner.plan_fft_inverse(bx.n1),
            fwd2: planner.plan_fft_forward(bx.n2),
            inv2: planner.plan_fft_inverse(bx.n2),
        }
    }

    pub fn len(&self) -> usize {
        self.bx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bx.is_empty()
    }

    /// `(k1, k2)` of flat spectral index `idx`.
    pub fn k_at(&self, idx: usize) -> (f64, f64) {
        (self.k1[idx / self.bx.n2], self.k2[idx % self.bx.n2])
    }

    pub fn in_dealias_band(&self, idx: usize) -> bool {
        self.mask1[idx / self.bx.n2] && self.mask2[idx % self.bx.n2]
    }

    fn transform(&self, data: &mut [Complex64], along2: &Arc<dyn Fft<f64>>, along1: &Arc<dyn Fft<f64>>) {
        let (n1, n2) = (self.bx.n1, self.bx.n2);
        along2.process(data);
        let mut t = vec![Complex64::new(0.0, 0.0); n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                t[j * n1 + i] = data[i * n2 + j];
            }
        }
        along1.process(&mut t);
        for j in 0..n2 {
            for i in 0..n1 {
                data[i * n2 + j] = t[j * n1 + i];
            }
        }
    }

    pub fn forward_real(&self, values: &[f64]) -> Spectrum {
        let mut data: Spectrum = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.fwd2, &self.fwd1);
        data
    }

    pub fn forward(&self, u: &Field2D) -> Spectrum {
        self.forward_real(&u.values)
    }

    /// Inverse transform, keeping the real part.
    pub fn inverse_real(&self, spec: &[Complex64]) -> Vec<f64> {
        let mut data = spec.to_vec();
        self.transform(&mut data, &self.inv2, &self.inv1);
        let norm = 1.0 / self.len() as f64;
        data.iter().map(|z| z.re * norm).collect()
    }

    pub fn inverse(&self, spec: &[Complex64]) -> Field2D {
        Field2D {
            bx: self.bx,
            values: self.inverse_real(spec),
        }
    }

    pub fn dealias(&self, spec: &mut [Complex64]) {
        for (idx, z) in spec.iter_mut().enumerate() {
            if !self.in_dealias_band(idx) {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Multiplies by a symbol `m(k1, k2)`.
    pub fn apply_symbol(&self, spec: &[Complex64], m: impl Fn(f64, f64) -> Complex64) -> Spectrum {
        spec.iter()
            .enumerate()
            .map(|(idx, z)| {
                let (i, j) = (idx / self.bx.n2, idx % self.bx.n2);
                z * m(self.k1[i], self.k2[j])
            })
            .collect()
    }

    fn apply_indexed(&self, spec: &[Complex64], m: impl Fn(usize, usize) -> Complex64) -> Spectrum {
        spec.iter()
            .enumerate()
            .map(|(idx, z)| z * m(idx / self.bx.n2, idx % self.bx.n2))
            .collect()
    }

    pub fn d1_spec(&self, spec: &[Complex64]) -> Spectrum {
        self.apply_indexed(spec, |i, _| Complex64::new(0.0, self.k1_odd[i]))
    }

    pub fn d2_spec(&self, spec: &[Complex64]) -> Spectrum {
        self.apply_indexed(spec, |_, j| Complex64::new(0.0, self.k2_odd[j]))
    }

    pub fn laplacian_spec(&self, spec: &[Complex64]) -> Spectrum {
        self.apply_indexed(spec, |i, j| Complex64::new(-(self.k1[i].powi(2) + self.k2[j].powi(2)), 0.0))
    }

    pub fn d1(&self, u: &Field2D) -> Field2D {
        self.inverse(&self.d1_spec(&self.forward(u)))
    }

    pub fn d2(&self, u: &Field2D) -> Field2D {
        self.inverse(&self.d2_spec(&self.forward(u)))
    }

    pub fn gradient(&self, u: &Field2D) -> (Field2D, Field2D) {
        let s = self.forward(u);
        (self.inverse(&self.d1_spec(&s)), self.inverse(&self.d2_spec(&s)))
    }

    pub fn laplacian(&self, u: &Field2D) -> Field2D {
        self.inverse(&self.laplacian_spec(&self.forward(u)))
    }

    /// Spectrum of `u(· + rho)`. The Nyquist modes carry no phase so the
    /// result stays real.
    pub fn shift_spec(&self, spec: &[Complex64], rho: (f64, f64)) -> Spectrum {
        self.apply_indexed(spec, |i, j| {
            Complex64::from_polar(1.0, self.k1_odd[i] * rho.0 + self.k2_odd[j] * rho.1)
        })
    }

    pub fn shift(&self, u: &Field2D, rho: (f64, f64)) -> Field2D {
        self.inverse(&self.shift_spec(&self.forward(u), rho))
    }

    /// `∫ |∇u|² + u²`, square-rooted.
    pub fn h1_norm(&self, u: &Field2D) -> f64 {
        let (g1, g2) = self.gradient(u);
        (u.dot(u) + g1.dot(&g1) + g2.dot(&g2)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx() -> Box2D {
        Box2D::new(2.0 * PI, 4.0 * PI, 64, 128).unwrap()
    }

    #[test]
    fn round_trip() {
        let s = Spectral2D::new(bx());
        let u = Field2D::from_fn(bx(), |x, y| (x).sin() * (0.5 * y).cos() + 0.3);
        let v = s.inverse(&s.forward(&u));
        for (a, b) in u.values.iter().zip(&v.values) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn derivatives_of_trig_modes() {
        let s = Spectral2D::new(bx());
        let u = Field2D::from_fn(bx(), |x, y| (3.0 * x).sin() * (1.5 * y).cos());
        let (g1, g2) = s.gradient(&u);
        let lap = s.laplacian(&u);
        let bx = bx();
        for i in (0..bx.n1).step_by(7) {
            for j in (0..bx.n2).step_by(5) {
                let (x, y) = (bx.x1(i), bx.x2(j));
                let k = bx.index(i, j);
                assert!((g1.values[k] - 3.0 * (3.0 * x).cos() * (1.5 * y).cos()).abs() < 1e-11);
                assert!((g2.values[k] + 1.5 * (3.0 * x).sin() * (1.5 * y).sin()).abs() < 1e-11);
                assert!((lap.values[k] + 11.25 * u.values[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn shift_moves_profile() {
        let b = Box2D::new(20.0, 20.0, 128, 128).unwrap();
        let s = Spectral2D::new(b);
        let g = |x: f64, y: f64| (-(x - 10.0).powi(2) - (y - 10.0).powi(2)).exp();
        let u = Field2D::from_fn(b, g);
        let v = s.shift(&u, (0.37, -1.2));
        let w = Field2D::from_fn(b, |x, y| g(x + 0.37, y - 1.2));
        for (a, b) in v.values.iter().zip(&w.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dealias_band_is_two_thirds() {
        let s = Spectral2D::new(bx());
        let kept = (0..s.len()).filter(|&i| s.in_dealias_band(i)).count();
        // |m| <= 21 of 64 and |m| <= 42 of 128.
        assert_eq!(kept, 43 * 85);
    }
}
