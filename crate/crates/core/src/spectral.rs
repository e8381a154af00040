//! The linearized problem `𝓛W = ΛQ`, the spectral quantity ν, negative
//! eigenvalue census and the sign-change search in `p`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::eigen::SymTridiagonal;
use crate::error::{CoreError, Result};
use crate::ground_state::{
    ground_robin, lambda_q, solve_ground_state, GroundState, RadialOperator, SolverConfig,
};
use crate::grid::{integrate_weighted, RadialProfile};

/// Solution of `𝓛W = ΛQ` on the ground state's grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearizedSolve {
    pub ground: GroundState,
    pub lambda_q: RadialProfile,
    pub w: RadialProfile,
    pub lin_residual_norm: f64,
    /// Fitted rate of `W r^{-(5-d)/2}` on the outer quarter of the grid.
    pub w_tail_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta {
    pub rmax: f64,
    pub n: usize,
    pub newton_iters: usize,
    pub ode_residual: f64,
    pub lin_residual: f64,
    pub q0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralScanRecord {
    pub d: usize,
    pub p: f64,
    /// `∫ ΛQ W r^{d-1} dr` without the sphere-area factor.
    pub nu: f64,
    pub neg_eigs: usize,
    pub lambda0: f64,
    pub solver_meta: SolverMeta,
}

/// Robin coefficient for `W ~ r^{(5-d)/2} e^{-r}`.
pub fn w_robin(d: usize, rmax: f64) -> f64 {
    (d as f64 - 5.0 + 2.0 * rmax) / (2.0 * rmax)
}

/// `p Q^{p-1}` at the grid nodes.
pub fn linearized_potential(q: &GroundState) -> Vec<f64> {
    q.values().iter().map(|v| q.p * v.abs().powf(q.p - 1.0)).collect()
}

/// `𝓛f = -f'' - (d-1)/r f' + c f - p Q^{p-1} f` at every node, using the
/// solver stencils (no boundary row).
pub fn apply_linearized(q: &GroundState, f: &[f64]) -> Vec<f64> {
    let stencil = q.grid().stencil();
    let pot = linearized_potential(q);
    RadialOperator {
        stencil: &stencil,
        nodes: q.grid().nodes(),
        dim: q.d as f64,
        shift: q.c,
        potential: Some(&pot),
        robin: None,
    }
    .apply(f)
}

/// Sup-norm of `𝓛ΛQ + Q` over the nodes.
pub fn lambda_q_residual(q: &GroundState) -> f64 {
    let lq = lambda_q(q);
    apply_linearized(q, &lq.values)
        .iter()
        .zip(q.values())
        .fold(0.0_f64, |m, (a, b)| m.max((a + b).abs()))
}

pub fn solve_w(q: &GroundState, config: &SolverConfig) -> Result<LinearizedSolve> {
    if q.c != 1.0 {
        return Err(CoreError::InvalidInput(format!("solve_w needs c = 1, got {}", q.c)));
    }
    let grid = q.grid();
    let stencil = grid.stencil();
    let pot = linearized_potential(q);
    let op = RadialOperator {
        stencil: &stencil,
        nodes: grid.nodes(),
        dim: q.d as f64,
        shift: 1.0,
        potential: Some(&pot),
        robin: Some(w_robin(q.d, grid.rmax())),
    };
    let lq = lambda_q(q);
    let mut rhs = lq.values.clone();
    *rhs.last_mut().unwrap() = 0.0;
    let w = op.matrix().factor()?.solve(&rhs);
    let lin_residual_norm = op
        .apply(&w)
        .iter()
        .zip(&rhs)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    if !(lin_residual_norm <= config.abs_tol) {
        return Err(CoreError::NonConvergence {
            iters: 1,
            residual: lin_residual_norm,
        });
    }
    let w_tail_rate = fit_w_tail(q, &w);
    let w = RadialProfile::from_values(grid.clone(), w)?;
    Ok(LinearizedSolve {
        ground: q.clone(),
        lambda_q: lq,
        w,
        lin_residual_norm,
        w_tail_rate,
    })
}

fn fit_w_tail(q: &GroundState, w: &[f64]) -> f64 {
    // W r^{-(5-d)/2} ~ e^{-r}; reuse the ground-state fit with the matching
    // power: (d' - 1)/2 = -(5 - d)/2 gives d' = d - 4.
    let n = w.len();
    let half = (5.0 - q.d as f64) / 2.0;
    let pts: Vec<(f64, f64)> = q.grid().nodes()[3 * n / 4..]
        .iter()
        .zip(&w[3 * n / 4..])
        .filter(|(r, v)| v.abs() > 0.0 && **r > 0.0)
        .map(|(&r, &v)| (r, v.abs().ln() - half * r.ln()))
        .filter(|(_, y)| y.is_finite())
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    -sxy / sxx
}

impl LinearizedSolve {
    /// `∫ ΛQ W r^{d-1} dr` by composite quadrature.
    pub fn nu(&self) -> f64 {
        let prod: Vec<f64> = self
            .lambda_q
            .values
            .iter()
            .zip(&self.w.values)
            .map(|(a, b)| a * b)
            .collect();
        integrate_weighted(&self.w.grid, &prod, self.ground.d as u32 - 1)
    }

    /// Running solution of `ν' = ΛQ W r^{d-1}`, `ν(0) = 0`.
    pub fn nu_profile(&self) -> Vec<f64> {
        let dm1 = self.ground.d as i32 - 1;
        let integrand: Vec<f64> = self
            .w
            .grid
            .nodes()
            .iter()
            .zip(self.lambda_q.values.iter().zip(&self.w.values))
            .map(|(r, (a, b))| a * b * r.powi(dm1))
            .collect();
        self.w.grid.cumulative_integral(&integrand)
    }
}

/// Second-order finite-volume form of the radial `𝓛` with the Q-Robin
/// boundary, symmetrized by the cell masses. Returns the matrix and the
/// masses.
fn symmetric_linearized(q: &GroundState) -> (SymTridiagonal, Vec<f64>) {
    let grid = q.grid();
    let n = grid.n();
    let h = grid.h();
    let d = q.d as i32;
    let nodes = grid.nodes();
    let pot = linearized_potential(q);
    let ball = |r: f64| r.powi(d) / d as f64;
    let mass: Vec<f64> = (0..n)
        .map(|i| {
            let lo = if i == 0 { 0.0 } else { nodes[i] - 0.5 * h };
            let hi = if i + 1 == n { nodes[i] } else { nodes[i] + 0.5 * h };
            ball(hi) - ball(lo)
        })
        .collect();
    let flux: Vec<f64> = (0..n - 1).map(|i| (nodes[i] + 0.5 * h).powi(d - 1) / h).collect();
    let mut diag: Vec<f64> = (0..n).map(|i| (q.c - pot[i]) * mass[i]).collect();
    for (i, f) in flux.iter().enumerate() {
        diag[i] += f;
        diag[i + 1] += f;
    }
    diag[n - 1] += grid.rmax().powi(d - 1) * ground_robin(q.d, q.c, grid.rmax());
    let inv_sqrt: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let diag = diag.iter().zip(&inv_sqrt).map(|(a, s)| a * s * s).collect();
    let off = flux
        .iter()
        .enumerate()
        .map(|(i, f)| -f * inv_sqrt[i] * inv_sqrt[i + 1])
        .collect();
    (SymTridiagonal::new(diag, off), mass)
}

/// Negative eigenvalue count of the radial `𝓛`, the lowest eigenvalue and
/// its eigenfunction (unit `∫χ² r^{d-1} dr`, positive at the origin).
pub fn negative_eig_count(q: &GroundState) -> Result<(usize, f64, RadialProfile)> {
    let (t, mass) = symmetric_linearized(q);
    let count = t.count_below(0.0);
    let l0 = t.eigenvalue(0);
    let gap = t.eigenvalue(1) - l0;
    let shift = l0 - 1e-6 * gap;
    let (lambda0, y) = t.inverse_iteration(shift, 1e-10, 100)?;
    let sign = if y[0] < 0.0 { -1.0 } else { 1.0 };
    let chi: Vec<f64> = y.iter().zip(&mass).map(|(v, m)| sign * v / m.sqrt()).collect();
    let chi = RadialProfile::from_values(q.grid().clone(), chi)?;
    Ok((count, lambda0, chi))
}

/// Residual `‖𝓛χ - λχ‖` of an eigenpair in the symmetric finite-volume
/// discretization (weighted Euclidean norm).
pub fn eigen_residual(q: &GroundState, lambda: f64, chi: &RadialProfile) -> f64 {
    let (t, mass) = symmetric_linearized(q);
    let y: Vec<f64> = chi.values.iter().zip(&mass).map(|(v, m)| v * m.sqrt()).collect();
    let ty = t.matvec(&y);
    ty.iter()
        .zip(&y)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn nu_value(d: usize, p: f64, config: &SolverConfig) -> Result<SpectralScanRecord> {
    let q = solve_ground_state(d, p, config)?;
    let lin = solve_w(&q, config)?;
    let nu = lin.nu();
    let (neg_eigs, lambda0, _) = negative_eig_count(&q)?;
    Ok(SpectralScanRecord {
        d,
        p,
        nu,
        neg_eigs,
        lambda0,
        solver_meta: SolverMeta {
            rmax: config.rmax,
            n: config.n,
            newton_iters: q.newton_iters,
            ode_residual: q.ode_residual_norm,
            lin_residual: lin.lin_residual_norm,
            q0: q.values()[0],
        },
    })
}

/// ν at `p`, retrying once at `p + 1e-6` if the linear solve is singular.
fn nu_with_retry(d: usize, p: f64, config: &SolverConfig) -> Result<f64> {
    match nu_value(d, p, config) {
        Ok(rec) => Ok(rec.nu),
        Err(CoreError::SingularSystem { .. }) => nu_value(d, p + 1e-6, config).map(|rec| rec.nu),
        Err(e) => Err(e),
    }
}

/// Bisection for the sign change of `p ↦ ν(d, p)` inside `bracket`.
pub fn find_crossing(d: usize, bracket: (f64, f64), tol: f64, config: &SolverConfig) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || !(tol > 0.0) {
        return Err(CoreError::InvalidInput(format!(
            "bad bracket ({lo}, {hi}) or tolerance {tol}"
        )));
    }
    let mut nu_lo = nu_with_retry(d, lo, config)?;
    let nu_hi = nu_with_retry(d, hi, config)?;
    if nu_lo * nu_hi >= 0.0 {
        return Err(CoreError::BadBracket { lo, hi, nu_lo, nu_hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let nu_mid = nu_with_retry(d, mid, config)?;
        if nu_mid == 0.0 {
            return Ok(mid);
        }
        if nu_mid.signum() == nu_lo.signum() {
            lo = mid;
            nu_lo = nu_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub const SCAN_HEADER: &str = "d,p,nu,neg_eigs,lambda0,rmax,n";

/// Writes scan records sorted by `(d, p)`.
pub fn write_scan_csv<W: Write>(mut out: W, records: &[SpectralScanRecord]) -> Result<()> {
    let mut sorted: Vec<&SpectralScanRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.d.cmp(&b.d).then(a.p.total_cmp(&b.p)));
    writeln!(out, "{SCAN_HEADER}")?;
    for r in sorted {
        writeln!(
            out,
            "{},{:e},{:e},{},{:e},{:e},{}",
            r.d, r.p, r.nu, r.neg_eigs, r.lambda0, r.solver_meta.rmax, r.solver_meta.n
        )?;
    }
    Ok(())
}
