//! Symmetric tridiagonal eigen-tools: Sturm counts, bisection and inverse
//! iteration.

use crate::error::{CoreError, Result};

#[derive(Clone, Debug)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len());
        Self { diag, off }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Number of eigenvalues strictly below `sigma` (signs of the `LDLᵀ`
    /// pivots of `T - sigma I`).
    pub fn count_below(&self, sigma: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.n() {
            let coupling = if i == 0 { 0.0 } else { self.off[i - 1].powi(2) / d };
            d = self.diag[i] - sigma - coupling;
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut rad = 0.0;
            if i > 0 {
                rad += self.off[i - 1].abs();
            }
            if i + 1 < n {
                rad += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - rad);
            hi = hi.max(self.diag[i] + rad);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by Sturm bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.n());
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs()).max(1.0);
        while hi - lo > 4.0 * f64::EPSILON * scale {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn solve_shifted(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        // Thomas algorithm; exact zero pivots are nudged off zero.
        let n = self.n();
        let guard = f64::EPSILON * self.diag.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let mut cp = vec![0.0; n];
        let mut x = vec![0.0; n];
        for i in 0..n {
            let (sub, prev_c, prev_x) = if i == 0 {
                (0.0, 0.0, 0.0)
            } else {
                (self.off[i - 1], cp[i - 1], x[i - 1])
            };
            let mut m = self.diag[i] - sigma - sub * prev_c;
            if m.abs() < guard {
                m = guard.copysign(m);
            }
            if i + 1 < n {
                cp[i] = self.off[i] / m;
            }
            x[i] = (b[i] - sub * prev_x) / m;
        }
        for i in (0..n - 1).rev() {
            x[i] -= cp[i] * x[i + 1];
        }
        x
    }

    /// Eigenpair for the eigenvalue nearest `shift` by inverse iteration.
    /// The vector has unit Euclidean norm.
    pub fn inverse_iteration(&self, shift: f64, tol: f64, max_iters: usize) -> Result<(f64, Vec<f64>)> {
        let n = self.n();
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * ((i * 7919) % 13) as f64).collect();
        normalize(&mut v);
        let mut lambda = shift;
        for _ in 0..max_iters {
            let mut w = self.solve_shifted(shift, &v);
            normalize(&mut w);
            let tw = self.matvec(&w);
            lambda = dot(&w, &tw);
            let res = tw
                .iter()
                .zip(&w)
                .map(|(a, b)| (a - lambda * b).powi(2))
                .sum::<f64>()
                .sqrt();
            v = w;
            if res <= tol {
                return Ok((lambda, v));
            }
        }
        Err(CoreError::EigFailure(format!(
            "inverse iteration near {shift:e} did not reach residual {tol:e} (last eigenvalue estimate {lambda:e})"
        )))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let s = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= s);
}
