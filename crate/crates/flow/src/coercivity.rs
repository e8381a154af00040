//! Minimum of `H_A(v, v) / N_A(v)` with
//! `H_A(v, v) = ∫ φ_A (|∇v|² + v² - pQ^{p-1} v²)` and
//! `N_A(v) = ∫ φ_A (|∇v|² + v²)`, `φ_A(x) = φ(x1 / A)`, over fields
//! orthogonal to a chosen set of soliton modes.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use zklab_core::{lambda_q, GroundState};

use crate::error::{FlowError, Result};
use crate::evolve::{sample_periodic_radial, soliton_gradient};
use crate::field::{min_image, Box2D, Field2D};
use crate::spectral::Spectral2D;
use crate::weights::phi;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    /// Orthogonal to `ΛQ`, `∂1Q` and `∂2Q`.
    Full,
    /// Orthogonal to `∂1Q` and `∂2Q` only.
    TranslationsOnly,
    None,
}

/// Discretized pencil `(H, N)` on the periodic grid with the soliton at
/// the origin.
pub struct WeightedForm {
    sp: Spectral2D,
    weight: Vec<f64>,
    /// `φ_A (1 - p Q^{p-1})`.
    reaction: Vec<f64>,
    /// Euclidean-orthonormal constraint vectors.
    constraints: Vec<Vec<f64>>,
    precond: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

impl WeightedForm {
    pub fn new(q: &GroundState, a: f64, bx: Box2D, projection: Projection) -> Result<Self> {
        if q.d != 2 || q.c != 1.0 {
            return Err(FlowError::InvalidParams(format!(
                "coercivity needs a planar profile at c = 1, got d = {}, c = {}",
                q.d, q.c
            )));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(FlowError::InvalidParams(format!("weight scale A must be positive, got {a}")));
        }
        let sp = Spectral2D::new(bx);
        let qf = sample_periodic_radial(bx, (0.0, 0.0), |r| q.soliton_value(1.0, r));
        let mut weight = Vec::with_capacity(bx.len());
        for i in 0..bx.n1 {
            let w = phi(min_image(bx.x1(i), bx.l1) / a);
            weight.extend(std::iter::repeat_n(w, bx.n2));
        }
        let reaction = weight
            .iter()
            .zip(&qf.values)
            .map(|(w, qv)| w * (1.0 - q.p * qv.abs().powf(q.p - 1.0)))
            .collect();
        let mut raw: Vec<Vec<f64>> = Vec::new();
        if projection == Projection::Full {
            let lq = lambda_q(q);
            let rmax = lq.grid.rmax();
            let f = sample_periodic_radial(bx, (0.0, 0.0), |r| if r <= rmax { lq.value_at(r) } else { 0.0 });
            raw.push(f.values);
        }
        if projection != Projection::None {
            let (g1, g2) = soliton_gradient(q, 1.0, (0.0, 0.0), bx);
            raw.push(g1.values);
            raw.push(g2.values);
        }
        let mut constraints: Vec<Vec<f64>> = Vec::new();
        for mut v in raw {
            for e in &constraints {
                let s = dot(&v, e);
                axpy(&mut v, -s, e);
            }
            let n = dot(&v, &v).sqrt();
            v.iter_mut().for_each(|x| *x /= n);
            constraints.push(v);
        }
        let precond = (0..sp.len())
            .map(|idx| {
                let (k1, k2) = sp.k_at(idx);
                1.0 / (1.0 + k1 * k1 + k2 * k2)
            })
            .collect();
        Ok(Self {
            sp,
            weight,
            reaction,
            constraints,
            precond,
        })
    }

    pub fn len(&self) -> usize {
        self.weight.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight.is_empty()
    }

    pub fn project(&self, v: &mut [f64]) {
        for e in &self.constraints {
            let s = dot(v, e);
            axpy(v, -s, e);
        }
    }

    /// `(Hv, Nv)`, both symmetric in the Euclidean product.
    pub fn apply(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let sp = &self.sp;
        let vh = sp.forward_real(v);
        let mut g1 = sp.inverse_real(&sp.d1_spec(&vh));
        let mut g2 = sp.inverse_real(&sp.d2_spec(&vh));
        g1.iter_mut().zip(&self.weight).for_each(|(g, w)| *g *= w);
        g2.iter_mut().zip(&self.weight).for_each(|(g, w)| *g *= w);
        let div: Vec<Complex64> = sp
            .d1_spec(&sp.forward_real(&g1))
            .iter()
            .zip(sp.d2_spec(&sp.forward_real(&g2)))
            .map(|(a, b)| a + b)
            .collect();
        let grad = sp.inverse_real(&div);
        let h = (0..v.len()).map(|k| -grad[k] + self.reaction[k] * v[k]).collect();
        let n = (0..v.len()).map(|k| -grad[k] + self.weight[k] * v[k]).collect();
        (h, n)
    }

    pub fn rayleigh_quotient(&self, v: &[f64]) -> f64 {
        let (h, n) = self.apply(v);
        dot(v, &h) / dot(v, &n)
    }

    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        let sp = &self.sp;
        let s: Vec<Complex64> = sp.forward_real(r).iter().zip(&self.precond).map(|(z, p)| z * p).collect();
        let mut w = sp.inverse_real(&s);
        self.project(&mut w);
        w
    }
}

const LOBPCG_TOL: f64 = 1e-7;
const LOBPCG_MAX_ITERS: usize = 2000;

struct Block {
    x: Vec<Vec<f64>>,
    ax: Vec<Vec<f64>>,
    bx: Vec<Vec<f64>>,
}

/// Rayleigh–Ritz on span(`s`): returns the lowest `k` Ritz values and the
/// coefficient matrix (columns B-orthonormal).
fn rayleigh_ritz(s: &Block, k: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let m = s.x.len();
    let mut ga = DMatrix::zeros(m, m);
    let mut gb = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let a = 0.5 * (dot(&s.x[i], &s.ax[j]) + dot(&s.x[j], &s.ax[i]));
            let b = 0.5 * (dot(&s.x[i], &s.bx[j]) + dot(&s.x[j], &s.bx[i]));
            ga[(i, j)] = a;
            ga[(j, i)] = a;
            gb[(i, j)] = b;
            gb[(j, i)] = b;
        }
    }
    // Whiten the Gram matrix of B, dropping numerically dependent directions.
    let eb = SymmetricEigen::new(gb);
    let top = eb.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let keep: Vec<usize> = (0..m).filter(|&i| eb.eigenvalues[i] > 1e-12 * top).collect();
    if keep.len() < k {
        return Err(FlowError::EigFailure(format!(
            "search space collapsed to {} directions for {k} modes",
            keep.len()
        )));
    }
    let mut t = DMatrix::zeros(m, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let s = 1.0 / eb.eigenvalues[i].sqrt();
        for r in 0..m {
            t[(r, c)] = eb.eigenvectors[(r, i)] * s;
        }
    }
    let reduced = t.transpose() * ga * &t;
    let reduced = 0.5 * (&reduced + reduced.transpose());
    let ea = SymmetricEigen::new(reduced);
    let mut order: Vec<usize> = (0..keep.len()).collect();
    order.sort_by(|&a, &b| ea.eigenvalues[a].total_cmp(&ea.eigenvalues[b]));
    let vals = order[..k].iter().map(|&i| ea.eigenvalues[i]).collect();
    let mut y = DMatrix::zeros(keep.len(), k);
    for (c, &i) in order[..k].iter().enumerate() {
        y.set_column(c, &ea.eigenvectors.column(i));
    }
    Ok((vals, t * y))
}

fn combine(vs: &[Vec<f64>], coeffs: &DMatrix<f64>, rows: std::ops::Range<usize>, col: usize) -> Vec<f64> {
    let mut out = vec![0.0; vs[0].len()];
    for r in rows {
        let c = coeffs[(r, col)];
        if c != 0.0 {
            axpy(&mut out, c, &vs[r]);
        }
    }
    out
}

fn normalize_columns(b: &mut Block) {
    for i in 0..b.x.len() {
        let s = dot(&b.x[i], &b.bx[i]).max(f64::MIN_POSITIVE).sqrt().recip();
        for v in [&mut b.x[i], &mut b.ax[i], &mut b.bx[i]] {
            v.iter_mut().for_each(|x| *x *= s);
        }
    }
}

/// Lowest `k` eigenvalues of the pencil on the constrained subspace by
/// locally optimal block preconditioned conjugate gradients.
pub fn lowest_modes(form: &WeightedForm, k: usize, seed: u64) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if k == 0 {
        return Err(FlowError::InvalidParams("k_modes must be >= 1".into()));
    }
    let n = form.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x0 = Block {
        x: Vec::new(),
        ax: Vec::new(),
        bx: Vec::new(),
    };
    for _ in 0..k {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        v = form.precondition(&v);
        let (a, b) = form.apply(&v);
        x0.x.push(v);
        x0.ax.push(a);
        x0.bx.push(b);
    }
    normalize_columns(&mut x0);
    let (mut lambda, c) = rayleigh_ritz(&x0, k)?;
    let mut x = Block {
        x: (0..k).map(|j| combine(&x0.x, &c, 0..k, j)).collect(),
        ax: (0..k).map(|j| combine(&x0.ax, &c, 0..k, j)).collect(),
        bx: (0..k).map(|j| combine(&x0.bx, &c, 0..k, j)).collect(),
    };
    let mut p: Option<Block> = None;
    for _ in 0..LOBPCG_MAX_ITERS {
        let mut w = Block {
            x: Vec::new(),
            ax: Vec::new(),
            bx: Vec::new(),
        };
        let mut converged = true;
        for j in 0..k {
            let mut r = x.ax[j].clone();
            axpy(&mut r, -lambda[j], &x.bx[j]);
            form.project(&mut r);
            let scale = dot(&x.bx[j], &x.bx[j]).sqrt() * lambda[j].abs().max(1.0);
            if dot(&r, &r).sqrt() > LOBPCG_TOL * scale {
                converged = false;
            }
            let wv = form.precondition(&r);
            let (a, b) = form.apply(&wv);
            w.x.push(wv);
            w.ax.push(a);
            w.bx.push(b);
        }
        if converged {
            return Ok((lambda, x.x));
        }
        normalize_columns(&mut w);
        let mut s = Block {
            x: x.x.clone(),
            ax: x.ax.clone(),
            bx: x.bx.clone(),
        };
        for blk in [Some(&w), p.as_ref()].into_iter().flatten() {
            s.x.extend(blk.x.iter().cloned());
            s.ax.extend(blk.ax.iter().cloned());
            s.bx.extend(blk.bx.iter().cloned());
        }
        let m = s.x.len();
        let (vals, c) = rayleigh_ritz(&s, k)?;
        let pick = |vs: &Vec<Vec<f64>>, rows: std::ops::Range<usize>| -> Vec<Vec<f64>> {
            (0..k).map(|j| combine(vs, &c, rows.clone(), j)).collect()
        };
        let mut pn = Block {
            x: pick(&s.x, k..m),
            ax: pick(&s.ax, k..m),
            bx: pick(&s.bx, k..m),
        };
        normalize_columns(&mut pn);
        x = Block {
            x: pick(&s.x, 0..m),
            ax: pick(&s.ax, 0..m),
            bx: pick(&s.bx, 0..m),
        };
        lambda = vals;
        p = Some(pn);
    }
    Err(FlowError::EigFailure(format!(
        "LOBPCG did not converge in {LOBPCG_MAX_ITERS} iterations (lowest estimate {:e})",
        lambda[0]
    )))
}

/// Minimum generalized Rayleigh quotient over fields orthogonal to `ΛQ`,
/// `∂1Q` and `∂2Q`, from a block of `k_modes` iterates.
pub fn coercivity_min_rayleigh(q: &GroundState, a: f64, bx: Box2D, k_modes: usize) -> Result<f64> {
    coercivity_min_rayleigh_with(q, a, bx, k_modes, Projection::Full)
}

pub fn coercivity_min_rayleigh_with(
    q: &GroundState,
    a: f64,
    bx: Box2D,
    k_modes: usize,
    projection: Projection,
) -> Result<f64> {
    let form = WeightedForm::new(q, a, bx, projection)?;
    Ok(lowest_modes(&form, k_modes, 0x5eed)?.0[0])
}

/// Quotient at a given field after applying `projection`.
pub fn projected_quotient(q: &GroundState, a: f64, v: &Field2D, projection: Projection) -> Result<f64> {
    let form = WeightedForm::new(q, a, v.bx, projection)?;
    let mut w = v.values.clone();
    form.project(&mut w);
    Ok(form.rayleigh_quotient(&w))
}
