//! Banded matrices with an LU factorization using partial pivoting.
//!
//! Rows are stored as contiguous windows `[start, start + vals.len())` so that
//! row interchanges are plain swaps and fill-in simply widens a window.

use crate::error::{CoreError, Result};

#[derive(Clone, Debug)]
struct Row {
    start: usize,
    vals: Vec<f64>,
}

impl Row {
    fn end(&self) -> usize {
        self.start + self.vals.len()
    }

    fn get(&self, col: usize) -> f64 {
        if col < self.start || col >= self.end() {
            0.0
        } else {
            self.vals[col - self.start]
        }
    }

    fn extend_to(&mut self, end: usize) {
        if end > self.end() {
            self.vals.resize(end - self.start, 0.0);
        }
    }
}

/// Square matrix with `kl` sub-diagonals and `ku` super-diagonals.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    rows: Vec<Row>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let start = i.saturating_sub(kl);
                let end = (i + ku + 1).min(n);
                Row {
                    start,
                    vals: vec![0.0; end - start],
                }
            })
            .collect();
        Self { n, kl, ku, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i].get(j)
    }

    /// Adds `v` to entry `(i, j)`. Panics if `(i, j)` lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let row = &mut self.rows[i];
        assert!(
            j >= row.start && j < row.end(),
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        row.vals[j - row.start] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        self.rows
            .iter()
            .map(|row| {
                row.vals
                    .iter()
                    .zip(&x[row.start..row.end()])
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Gaussian elimination with partial pivoting restricted to the band.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let scale = self
            .rows
            .iter()
            .flat_map(|r| r.vals.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        let tiny = scale * f64::EPSILON * (n as f64);

        let mut pivots = Vec::with_capacity(n);
        let mut lower = vec![0.0; n * kl];

        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let (mut p, mut best) = (k, self.rows[k].get(k).abs());
            for i in k + 1..=last {
                let v = self.rows[i].get(k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(CoreError::SingularSystem { row: k });
            }
            self.rows.swap(k, p);
            pivots.push(p);

            let pivot_row = self.rows[k].clone();
            let akk = pivot_row.get(k);
            for i in k + 1..=last {
                let aik = self.rows[i].get(k);
                if aik == 0.0 {
                    continue;
                }
                let l = aik / akk;
                lower[k * kl + (i - k - 1)] = l;
                let row = &mut self.rows[i];
                row.extend_to(pivot_row.end());
                for j in k..pivot_row.end() {
                    row.vals[j - row.start] -= l * pivot_row.vals[j - pivot_row.start];
                }
            }
        }

        Ok(BandLu {
            n,
            kl,
            upper: self.rows,
            lower,
            pivots,
        })
    }
}

/// Factorization produced by [`BandMatrix::factor`].
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    upper: Vec<Row>,
    lower: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let n = self.n;
        let mut b = rhs.to_vec();
        for k in 0..n {
            b.swap(k, self.pivots[k]);
            let bk = b[k];
            let last = (k + self.kl).min(n - 1);
            for i in k + 1..=last {
                b[i] -= self.lower[k * self.kl + (i - k - 1)] * bk;
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let row = &self.upper[k];
            let mut s = b[k];
            for j in k + 1..row.end() {
                s -= row.vals[j - row.start] * x[j];
            }
            x[k] = s / row.get(k);
        }
        x
    }
}

/// Solves `A x = b` for a banded `A`.
pub fn solve_banded(a: BandMatrix, b: &[f64]) -> Result<Vec<f64>> {
    Ok(a.factor()?.solve(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(a: &BandMatrix) -> Vec<Vec<f64>> {
        (0..a.n())
            .map(|i| (0..a.n()).map(|j| a.get(i, j)).collect())
            .collect()
    }

    #[test]
    fn solves_system_that_needs_pivoting() {
        // Zero on the leading diagonal forces a row interchange.
        let n = 9;
        let mut a = BandMatrix::zeros(n, 2, 1);
        for i in 0..n {
            if i > 0 {
                a.add(i, i - 1, 1.0 + i as f64);
            }
            if i > 1 {
                a.add(i, i - 2, -0.5);
            }
            if i + 1 < n {
                a.add(i, i + 1, 2.0);
            }
            a.add(i, i, if i % 3 == 0 { 0.0 } else { 3.0 });
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 0.1).collect();
        let b = a.matvec(&x_true);
        let full = dense(&a);
        let x = solve_banded(a, &b).unwrap();
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).abs() < 1e-12, "{xi} vs {ti}");
        }
        // Residual against the dense copy.
        for i in 0..n {
            let r: f64 = (0..n).map(|j| full[i][j] * x[j]).sum::<f64>() - b[i];
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut a = BandMatrix::zeros(4, 1, 1);
        for i in 0..4 {
            a.add(i, i, 1.0);
        }
        // Duplicate the last two rows.
        a.add(3, 2, 1.0);
        a.add(2, 3, 1.0);
        let err = a.factor().unwrap_err();
        assert!(matches!(err, CoreError::SingularSystem { .. }));
    }
}
