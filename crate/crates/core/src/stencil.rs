//! Fourth-order finite-difference stencils on a uniform radial grid.
//!
//! Rows near `r = 0` fold the even reflection `f(-r) = f(r)` into the
//! stencil; rows at the outer end use one-sided stencils.

/// Finite-difference weights for derivatives `0..=max_order` at `x0` using
/// nodes `xs` (Fornberg's recursion). Result is indexed `[order][node]`.
pub fn fornberg_weights(x0: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// First and second derivative weights for one grid row over the columns
/// `start..start + d1.len()`.
#[derive(Clone, Debug)]
pub struct StencilRow {
    pub start: usize,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl StencilRow {
    pub fn apply_d1(&self, f: &[f64]) -> f64 {
        self.d1
            .iter()
            .zip(&f[self.start..])
            .map(|(w, v)| w * v)
            .sum()
    }

    pub fn apply_d2(&self, f: &[f64]) -> f64 {
        self.d2
            .iter()
            .zip(&f[self.start..])
            .map(|(w, v)| w * v)
            .sum()
    }
}

/// Reflection symmetry of a radial sample about `r = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Per-row derivative stencils for a function of given parity sampled at
/// `r_i = i h`.
#[derive(Clone, Debug)]
pub struct RadialStencil {
    h: f64,
    rows: Vec<StencilRow>,
}

/// Sub- and super-diagonal counts of any operator assembled from these rows.
pub const LOWER_BAND: usize = 5;
pub const UPPER_BAND: usize = 2;

impl RadialStencil {
    pub fn new(n: usize, h: f64) -> Self {
        Self::with_parity(n, h, Parity::Even)
    }

    pub fn with_parity(n: usize, h: f64, parity: Parity) -> Self {
        assert!(n >= 8, "stencil needs at least 8 nodes");
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let offsets: Vec<i64> = if i + 2 < n {
                (-2..=2).collect()
            } else if i + 2 == n {
                (-4..=1).collect()
            } else {
                (-5..=0).collect()
            };
            let xs: Vec<f64> = offsets.iter().map(|&o| o as f64 * h).collect();
            let w = fornberg_weights(0.0, &xs, 2);
            // Fold reflected (negative) columns onto their mirror images.
            let cols: Vec<usize> = offsets
                .iter()
                .map(|&o| (i as i64 + o).unsigned_abs() as usize)
                .collect();
            let start = *cols.iter().min().unwrap();
            let end = *cols.iter().max().unwrap() + 1;
            let mut d1 = vec![0.0; end - start];
            let mut d2 = vec![0.0; end - start];
            for (k, (&col, &o)) in cols.iter().zip(&offsets).enumerate() {
                let sign = if parity == Parity::Odd && (i as i64 + o) < 0 { -1.0 } else { 1.0 };
                d1[col - start] += sign * w[1][k];
                d2[col - start] += sign * w[2][k];
            }
            if i == 0 {
                // Exactly zero by symmetry.
                let vanishing = if parity == Parity::Even { &mut d1 } else { &mut d2 };
                vanishing.iter_mut().for_each(|v| *v = 0.0);
            }
            rows.push(StencilRow { start, d1, d2 });
        }
        Self { h, rows }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &StencilRow {
        &self.rows[i]
    }

    pub fn first_derivative(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.rows.len());
        self.rows.iter().map(|r| r.apply_d1(f)).collect()
    }

    pub fn second_derivative(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.rows.len());
        self.rows.iter().map(|r| r.apply_d2(f)).collect()
    }
}
