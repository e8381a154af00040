//! Radial ground states of `-ΔQ + Q - Q^p = 0` and the objects derived from
//! them (scaling generator, rescaled solitons).

use serde::{Deserialize, Serialize};

use crate::banded::BandMatrix;
use crate::error::{CoreError, Result};
use crate::grid::{RadialGrid, RadialProfile};
use crate::stencil::{RadialStencil, LOWER_BAND, UPPER_BAND};

/// Numerical settings shared by the radial solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rmax: f64,
    pub n: usize,
    /// Sup-norm target for the discrete ODE residual.
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    /// Residual bound for the linear (W) solve.
    pub abs_tol: f64,
    /// Relative Newton step size regarded as stagnation.
    pub rel_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rmax: 50.0,
            n: 4096,
            newton_tol: 1e-10,
            newton_max_iters: 60,
            abs_tol: 1e-8,
            rel_tol: 1e-10,
        }
    }
}

impl SolverConfig {
    pub fn with_grid(rmax: f64, n: usize) -> Self {
        Self {
            rmax,
            n,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rmax >= 20.0 && self.rmax.is_finite()) {
            return Err(CoreError::InvalidConfig(format!("rmax must be >= 20, got {}", self.rmax)));
        }
        if self.n < crate::grid::MIN_NODES {
            return Err(CoreError::InvalidConfig(format!("n must be >= 64, got {}", self.n)));
        }
        if !(self.newton_tol > 0.0) || !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(CoreError::InvalidConfig("tolerances must be positive".into()));
        }
        if self.newton_max_iters == 0 {
            return Err(CoreError::InvalidConfig("newton_max_iters must be positive".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.rmax, self.n)
    }
}

/// Solved ground state `Q_c` for dimension `d` and power `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub d: usize,
    pub p: f64,
    pub c: f64,
    pub profile: RadialProfile,
    pub ode_residual_norm: f64,
    /// Exponential decay rate fitted on the outer quarter of the grid.
    pub tail_rate: f64,
    pub newton_iters: usize,
}

/// `|x|^{p-1} x`, the odd extension of `x^p`.
#[inline]
pub fn signed_pow(x: f64, p: f64) -> f64 {
    x.abs().powf(p - 1.0) * x
}

/// Robin coefficient for a profile decaying like `r^{-(d-1)/2} e^{-sqrt(c) r}`.
pub fn ground_robin(d: usize, c: f64, rmax: f64) -> f64 {
    c.sqrt() + (d as f64 - 1.0) / (2.0 * rmax)
}

/// Discretization of `-u'' - (d-1)/r u' + shift u - V u`. With `robin =
/// Some(kappa)` the last row is replaced by `u'(rmax) + kappa u(rmax)`.
pub(crate) struct RadialOperator<'a> {
    pub stencil: &'a RadialStencil,
    pub nodes: &'a [f64],
    /// Dimension; fractional values are used for continuation.
    pub dim: f64,
    pub shift: f64,
    pub potential: Option<&'a [f64]>,
    pub robin: Option<f64>,
}

impl RadialOperator<'_> {
    fn laplacian_row(&self, i: usize, u: &[f64]) -> f64 {
        let row = self.stencil.row(i);
        let dm1 = self.dim - 1.0;
        if i == 0 {
            // (d-1) u'/r -> (d-1) u''(0)
            self.dim * row.apply_d2(u)
        } else {
            row.apply_d2(u) + dm1 / self.nodes[i] * row.apply_d1(u)
        }
    }

    fn interior_rows(&self) -> usize {
        self.nodes.len() - usize::from(self.robin.is_some())
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let mut out = vec![0.0; n];
        for i in 0..self.interior_rows() {
            let v = self.potential.map_or(0.0, |pot| pot[i]);
            out[i] = -self.laplacian_row(i, u) + (self.shift - v) * u[i];
        }
        if let Some(kappa) = self.robin {
            out[n - 1] = self.stencil.row(n - 1).apply_d1(u) + kappa * u[n - 1];
        }
        out
    }

    pub fn matrix(&self) -> BandMatrix {
        let n = self.nodes.len();
        let mut a = BandMatrix::zeros(n, LOWER_BAND, UPPER_BAND);
        let dm1 = self.dim - 1.0;
        for i in 0..self.interior_rows() {
            let row = self.stencil.row(i);
            for k in 0..row.d2.len() {
                let j = row.start + k;
                let w = if i == 0 {
                    -self.dim * row.d2[k]
                } else {
                    -row.d2[k] - dm1 / self.nodes[i] * row.d1[k]
                };
                a.add(i, j, w);
            }
            let v = self.potential.map_or(0.0, |pot| pot[i]);
            a.add(i, i, self.shift - v);
        }
        if let Some(kappa) = self.robin {
            let row = self.stencil.row(n - 1);
            for k in 0..row.d1.len() {
                a.add(n - 1, row.start + k, row.d1[k]);
            }
            a.add(n - 1, n - 1, kappa);
        }
        a
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct GroundProblem<'a> {
    op: RadialOperator<'a>,
    p: f64,
}

impl GroundProblem<'_> {
    fn residual(&self, q: &[f64]) -> Vec<f64> {
        let mut f = self.op.apply(q);
        let n = q.len();
        for i in 0..n - 1 {
            f[i] -= signed_pow(q[i], self.p);
        }
        f
    }

    fn jacobian(&self, q: &[f64]) -> BandMatrix {
        let mut a = self.op.matrix();
        for i in 0..q.len() - 1 {
            a.add(i, i, -self.p * q[i].abs().powf(self.p - 1.0));
        }
        a
    }
}

/// The `d = 1` soliton profile for power `p`, used as the Newton seed.
pub fn sech_profile(p: f64, r: f64) -> f64 {
    let amp = ((p + 1.0) / 2.0).powf(1.0 / (p - 1.0));
    amp * (1.0 / ((p - 1.0) * r / 2.0).cosh()).powf(2.0 / (p - 1.0))
}

fn validate_regime(d: usize, p: f64) -> Result<()> {
    if !(1..=3).contains(&d) {
        return Err(CoreError::InvalidInput(format!("dimension must be 1, 2 or 3, got {d}")));
    }
    if !(p.is_finite() && p > 1.0) {
        return Err(CoreError::InvalidInput(format!("power must exceed 1, got {p}")));
    }
    if d == 3 && p >= 5.0 {
        return Err(CoreError::InvalidInput(format!(
            "p = {p} is not below the d = 3 critical Sobolev power 5"
        )));
    }
    Ok(())
}

/// Seed amplitudes tried in turn; larger seeds avoid collapse onto `Q = 0`
/// in higher dimension where `Q(0)` exceeds the one-dimensional peak.
const SEED_SCALES: [f64; 3] = [1.0, 1.6, 2.4];

/// Solves the radial ground-state problem at `c = 1`.
///
/// Scaled sech seeds are tried first. If none lands on a positive decreasing
/// solution, the dimension is continued from the exact `d = 1` profile.
pub fn solve_ground_state(d: usize, p: f64, config: &SolverConfig) -> Result<GroundState> {
    validate_regime(d, p)?;
    config.validate()?;
    let grid = config.grid()?;
    let stencil = grid.stencil();
    let sech: Vec<f64> = grid.nodes().iter().map(|&r| sech_profile(p, r)).collect();

    let first = (d - 1).min(SEED_SCALES.len() - 1);
    let mut last_err = None;
    for &scale in &SEED_SCALES[first..] {
        let seed = sech.iter().map(|v| scale * v).collect();
        match newton(&grid, &stencil, d as f64, p, seed, config) {
            Ok(sol) if is_shaped(&sol.0) => return finish(&grid, d, p, sol),
            Ok(_) => {}
            Err(e @ (CoreError::TrivialCollapse { .. } | CoreError::NonConvergence { .. })) => {
                last_err = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    if d > 1 {
        if let Some(sol) = continue_in_dimension(&grid, &stencil, d, p, sech, config) {
            return finish(&grid, d, p, sol);
        }
    }
    Err(last_err.unwrap_or(CoreError::NonConvergence {
        iters: config.newton_max_iters,
        residual: f64::NAN,
    }))
}

fn is_shaped(q: &[f64]) -> bool {
    q.iter().all(|&x| x > 0.0) && q.windows(2).all(|w| w[1] < w[0])
}

fn continue_in_dimension(
    grid: &RadialGrid,
    stencil: &RadialStencil,
    d: usize,
    p: f64,
    mut q: Vec<f64>,
    config: &SolverConfig,
) -> Option<(Vec<f64>, f64, usize)> {
    let target = d as f64;
    let mut dim = 1.0_f64;
    let mut step = 0.25;
    let mut total = 0;
    loop {
        let next = (dim + step).min(target);
        match newton(grid, stencil, next, p, q.clone(), config) {
            Ok((sol, res, iters)) if is_shaped(&sol) => {
                total += iters;
                q = sol;
                dim = next;
                if dim == target {
                    return Some((q, res, total));
                }
            }
            _ => {
                step *= 0.5;
                if step < 1.0 / 256.0 {
                    return None;
                }
            }
        }
    }
}

fn finish(grid: &RadialGrid, d: usize, p: f64, sol: (Vec<f64>, f64, usize)) -> Result<GroundState> {
    let (q, residual, iters) = sol;
    let tail_rate = fit_tail_rate(grid, &q, d);
    let profile = RadialProfile::from_values(grid.clone(), q)?;
    Ok(GroundState {
        d,
        p,
        c: 1.0,
        profile,
        ode_residual_norm: residual,
        tail_rate,
        newton_iters: iters,
    })
}

/// Damped Newton on the discrete ODE in (possibly fractional) dimension
/// `dim`. Returns the iterate, its residual and the iteration count.
fn newton(
    grid: &RadialGrid,
    stencil: &RadialStencil,
    dim: f64,
    p: f64,
    mut q: Vec<f64>,
    config: &SolverConfig,
) -> Result<(Vec<f64>, f64, usize)> {
    let problem = GroundProblem {
        op: RadialOperator {
            stencil,
            nodes: grid.nodes(),
            dim,
            shift: 1.0,
            potential: None,
            robin: Some(1.0 + (dim - 1.0) / (2.0 * grid.rmax())),
        },
        p,
    };

    let mut f = problem.residual(&q);
    let mut fnorm = sup_norm(&f);
    let mut iters = 0;
    while fnorm > config.newton_tol {
        if iters == config.newton_max_iters {
            return Err(CoreError::NonConvergence {
                iters,
                residual: fnorm,
            });
        }
        iters += 1;
        let step = problem.jacobian(&q).factor()?.solve(&f);
        let step_norm = sup_norm(&step);

        // Damped update: halve up to 8 times while the residual grows.
        let mut lambda = 1.0;
        let mut trial: Vec<f64> = Vec::new();
        let mut trial_f = Vec::new();
        let mut trial_norm = f64::INFINITY;
        for halving in 0..=8 {
            trial = q.iter().zip(&step).map(|(a, s)| a - lambda * s).collect();
            trial_f = problem.residual(&trial);
            trial_norm = sup_norm(&trial_f);
            if trial_norm < fnorm || halving == 8 {
                break;
            }
            lambda *= 0.5;
        }
        q = trial;
        f = trial_f;
        fnorm = trial_norm;

        let amplitude = sup_norm(&q);
        if amplitude < 1e-6 {
            return Err(CoreError::TrivialCollapse { amplitude });
        }
        // Rounding floor: a full step that no longer moves the iterate.
        if lambda == 1.0 && step_norm <= config.rel_tol * amplitude && fnorm <= 10.0 * config.newton_tol {
            break;
        }
    }

    let amplitude = sup_norm(&q);
    if amplitude < 1e-6 {
        return Err(CoreError::TrivialCollapse { amplitude });
    }
    if q[0] < 0.0 {
        // Converged to -Q; the ground state is the positive branch.
        q.iter_mut().for_each(|v| *v = -*v);
    }
    Ok((q, fnorm, iters))
}

/// Least-squares slope of `log(f r^{(d-1)/2})` over the last quarter of the grid.
pub fn fit_tail_rate(grid: &RadialGrid, values: &[f64], d: usize) -> f64 {
    let n = grid.n();
    let half_dm1 = (d as f64 - 1.0) / 2.0;
    let pts: Vec<(f64, f64)> = grid.nodes()[3 * n / 4..]
        .iter()
        .zip(&values[3 * n / 4..])
        .filter(|(r, v)| **v > 0.0 && **r > 0.0)
        .map(|(&r, &v)| (r, v.ln() + half_dm1 * r.ln()))
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

impl GroundState {
    pub fn grid(&self) -> &RadialGrid {
        &self.profile.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.profile.values
    }

    pub fn derivs(&self) -> &[f64] {
        &self.profile.derivs
    }

    /// `Q''` from the ODE itself, `-(d-1)/r Q' + c Q - Q^p`.
    pub fn second_derivs(&self) -> Vec<f64> {
        let dm1 = self.d as f64 - 1.0;
        self.grid()
            .nodes()
            .iter()
            .zip(self.values())
            .zip(self.derivs())
            .map(|((&r, &q), &dq)| {
                let reaction = self.c * q - signed_pow(q, self.p);
                if r == 0.0 {
                    reaction / self.d as f64
                } else {
                    reaction - dm1 / r * dq
                }
            })
            .collect()
    }

    /// `Q(r)` for any `r >= 0`; beyond `rmax` the fitted tail is used.
    pub fn value_at(&self, r: f64) -> f64 {
        let r = r.abs();
        let rmax = self.grid().rmax();
        if r <= rmax {
            self.profile.value_at(r)
        } else {
            self.tail(r)
        }
    }

    fn tail(&self, r: f64) -> f64 {
        let rmax = self.grid().rmax();
        let qmax = *self.values().last().unwrap();
        let rate = if self.tail_rate.is_finite() {
            self.tail_rate
        } else {
            self.c.sqrt()
        };
        qmax * (rmax / r).powf((self.d as f64 - 1.0) / 2.0) * (-rate * (r - rmax)).exp()
    }

    fn tail_deriv(&self, r: f64) -> f64 {
        let rate = if self.tail_rate.is_finite() {
            self.tail_rate
        } else {
            self.c.sqrt()
        };
        -(rate + (self.d as f64 - 1.0) / (2.0 * r)) * self.tail(r)
    }

    /// Value of the rescaled soliton `Q_c(r)` built from this profile.
    pub fn soliton_value(&self, c: f64, r: f64) -> f64 {
        let ratio = c / self.c;
        ratio.powf(1.0 / (self.p - 1.0)) * self.value_at(ratio.sqrt() * r)
    }

    /// Radial derivative of `Q_c` at `r`.
    pub fn soliton_deriv(&self, c: f64, r: f64) -> f64 {
        let ratio = c / self.c;
        let s = ratio.sqrt();
        let x = (s * r).abs();
        let d = if x <= self.grid().rmax() {
            self.profile.deriv_at(x)
        } else {
            self.tail_deriv(x)
        };
        ratio.powf(1.0 / (self.p - 1.0)) * s * d * r.signum()
    }

    /// Mass-normalizing constant `∫ Q^2 r^{d-1} dr` on the grid.
    pub fn radial_mass(&self) -> f64 {
        let sq: Vec<f64> = self.values().iter().map(|v| v * v).collect();
        crate::grid::integrate_weighted(self.grid(), &sq, self.d as u32 - 1)
    }

    /// Positive at every node and strictly decreasing for `r > 0`.
    pub fn is_ground_state_shaped(&self) -> bool {
        let v = self.values();
        v.iter().all(|&x| x > 0.0) && v.windows(2).all(|w| w[1] < w[0])
    }
}

/// Scaling generator `ΛQ = (d/dc) Q_c`, i.e. `Q/(p-1) + r Q'/2` at `c = 1`.
pub fn lambda_q(q: &GroundState) -> RadialProfile {
    let inv = 1.0 / (q.p - 1.0);
    let qpp = q.second_derivs();
    let nodes = q.grid().nodes();
    let values = nodes
        .iter()
        .zip(q.values())
        .zip(q.derivs())
        .map(|((&r, &v), &dv)| (inv * v + 0.5 * r * dv) / q.c)
        .collect();
    let derivs = nodes
        .iter()
        .zip(q.derivs())
        .zip(&qpp)
        .map(|((&r, &dv), &ddv)| ((inv + 0.5) * dv + 0.5 * r * ddv) / q.c)
        .collect();
    RadialProfile {
        grid: q.grid().clone(),
        values,
        derivs,
    }
}

/// `Q_c(r) = c^{1/(p-1)} Q(sqrt(c) r)` resampled on the same grid by cubic
/// Hermite interpolation; points mapped beyond `rmax` use the fitted tail.
pub fn rescale_profile(q: &GroundState, c: f64) -> Result<GroundState> {
    if !(c.is_finite() && c > 0.0) {
        return Err(CoreError::InvalidInput(format!("speed must be positive, got {c}")));
    }
    if c == q.c {
        return Ok(q.clone());
    }
    let ratio = c / q.c;
    let s = ratio.sqrt();
    let amp = ratio.powf(1.0 / (q.p - 1.0));
    let rmax = q.grid().rmax();
    let (values, derivs): (Vec<f64>, Vec<f64>) = q
        .grid()
        .nodes()
        .iter()
        .map(|&r| {
            let x = s * r;
            let (v, dv) = if x <= rmax {
                q.profile.hermite_at(x)
            } else {
                (q.tail(x), q.tail_deriv(x))
            };
            (amp * v, amp * s * dv)
        })
        .unzip();
    let profile = RadialProfile::new(q.grid().clone(), values, derivs)?;
    Ok(GroundState {
        d: q.d,
        p: q.p,
        c,
        profile,
        // Residual carried through the exact scaling map.
        ode_residual_norm: q.ode_residual_norm * ratio.powf(q.p / (q.p - 1.0)),
        tail_rate: q.tail_rate * s,
        newton_iters: q.newton_iters,
    })
}
