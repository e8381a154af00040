//! Modulation fitting and the localized mass/energy functionals.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use zklab_core::GroundState;

use crate::error::{FlowError, Result};
use crate::evolve::{sample_periodic_radial, soliton_gradient};
use crate::field::{min_image, Field2D};
use crate::spectral::Spectral2D;
use crate::weights::psi;

/// Soliton parameters with `η = u(· + ρ) - Q_c` orthogonal to `∂1Q_c`,
/// `∂2Q_c` and `Q_c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationState {
    pub t: f64,
    pub c: f64,
    pub rho1: f64,
    pub rho2: f64,
    /// `(∫η∂1Q_c, ∫η∂2Q_c, ∫ηQ_c)`.
    pub ortho_residuals: [f64; 3],
    pub eta_h1: f64,
}

impl ModulationState {
    pub fn rho(&self) -> (f64, f64) {
        (self.rho1, self.rho2)
    }

    pub fn guess(t: f64, c: f64, rho: (f64, f64)) -> Self {
        Self {
            t,
            c,
            rho1: rho.0,
            rho2: rho.1,
            ortho_residuals: [f64::NAN; 3],
            eta_h1: f64::NAN,
        }
    }
}

const FIT_MAX_ITERS: usize = 50;

/// Fits are accepted only with `c` within this fraction of the guess.
const SPEED_BAND: f64 = 0.5;

struct SolitonFields {
    q: Field2D,
    g1: Field2D,
    g2: Field2D,
}

impl SolitonFields {
    fn new(q: &GroundState, c: f64, u: &Field2D) -> Self {
        let bx = u.bx;
        let qf = sample_periodic_radial(bx, (0.0, 0.0), |r| q.soliton_value(c, r));
        let (g1, g2) = soliton_gradient(q, c, (0.0, 0.0), bx);
        Self { q: qf, g1, g2 }
    }

    fn residuals(&self, shifted: &Field2D) -> Vector3<f64> {
        let eta = shifted.axpy(-1.0, &self.q);
        Vector3::new(eta.dot(&self.g1), eta.dot(&self.g2), eta.dot(&self.q))
    }
}

/// Newton iteration on `(c, ρ1, ρ2)` with a central-difference Jacobian,
/// until every orthogonality residual is at most `tol`. Iterates with `c`
/// outside `guess.c · [0.5, 1.5]` count as divergence.
pub fn fit_modulation(u: &Field2D, q: &GroundState, guess: &ModulationState, tol: f64) -> Result<ModulationState> {
    if q.d != 2 {
        return Err(FlowError::InvalidParams(format!("soliton profile must be planar, got d = {}", q.d)));
    }
    if !(guess.c > 0.0 && guess.rho1.is_finite() && guess.rho2.is_finite()) {
        return Err(FlowError::InvalidParams("modulation guess must have c > 0 and finite rho".into()));
    }
    let sp = Spectral2D::new(u.bx);
    let uhat = sp.forward(u);
    let shifted = |rho: (f64, f64)| sp.inverse(&sp.shift_spec(&uhat, rho));
    let (mut c, mut rho) = (guess.c, guess.rho());
    let mut residual = f64::INFINITY;
    for iter in 0..FIT_MAX_ITERS {
        let base = SolitonFields::new(q, c, u);
        let us = shifted(rho);
        let g = base.residuals(&us);
        residual = g.amax();
        if residual <= tol {
            let eta = us.axpy(-1.0, &base.q);
            return Ok(ModulationState {
                t: guess.t,
                c,
                rho1: rho.0,
                rho2: rho.1,
                ortho_residuals: [g[0], g[1], g[2]],
                eta_h1: sp.h1_norm(&eta),
            });
        }
        let hc = 1e-5 * c;
        let hr = 1e-5;
        let dc = (SolitonFields::new(q, c + hc, u).residuals(&us) - SolitonFields::new(q, c - hc, u).residuals(&us))
            / (2.0 * hc);
        let d1 = (base.residuals(&shifted((rho.0 + hr, rho.1))) - base.residuals(&shifted((rho.0 - hr, rho.1))))
            / (2.0 * hr);
        let d2 = (base.residuals(&shifted((rho.0, rho.1 + hr))) - base.residuals(&shifted((rho.0, rho.1 - hr))))
            / (2.0 * hr);
        let jac = Matrix3::from_columns(&[dc, d1, d2]);
        let delta = jac
            .lu()
            .solve(&(-g))
            .ok_or(FlowError::FitDiverged { iters: iter, residual })?;
        // Keep each update to a fraction of the soliton width.
        let cap = (0.5 / delta[0].abs() * c).min(1.0 / delta[1].hypot(delta[2]) * c.sqrt().recip()).min(1.0);
        c += cap * delta[0];
        rho = (rho.0 + cap * delta[1], rho.1 + cap * delta[2]);
        let in_band = (c - guess.c).abs() <= SPEED_BAND * guess.c;
        if !(in_band && c.is_finite() && rho.0.is_finite() && rho.1.is_finite()) {
            return Err(FlowError::FitDiverged { iters: iter + 1, residual });
        }
    }
    Err(FlowError::FitDiverged {
        iters: FIT_MAX_ITERS,
        residual,
    })
}

pub fn write_modulation_csv<W: Write>(mut out: W, states: &[ModulationState]) -> Result<()> {
    writeln!(out, "t,c,rho1,rho2,res1,res2,res3,eta_h1")?;
    for s in states {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            s.t, s.c, s.rho1, s.rho2, s.ortho_residuals[0], s.ortho_residuals[1], s.ortho_residuals[2], s.eta_h1
        )?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    I,
    J,
    Oblique,
}

impl ProbeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProbeKind::I => "I",
            ProbeKind::J => "J",
            ProbeKind::Oblique => "oblique",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicitySample {
    pub t: f64,
    pub value: f64,
    pub y0: f64,
    pub t0: f64,
    pub theta: f64,
    pub kind: ProbeKind,
}

pub fn write_probe_csv<W: Write>(mut out: W, samples: &[MonotonicitySample]) -> Result<()> {
    writeln!(out, "t,value,y0,t0,theta,kind")?;
    for s in samples {
        writeln!(out, "{:e},{:e},{:e},{:e},{:e},{}", s.t, s.value, s.y0, s.t0, s.theta, s.kind.as_str())?;
    }
    Ok(())
}

/// Frame weight `ψ_M(x̃1 + tan θ x̃2 + (t0 - t)/2 - y0)`, where `x̃` is the
/// position relative to `ρ(t0)` wrapped into the box.
fn frame_weight(u: &Field2D, anchor: &ModulationState, t: f64, y0: f64, m: f64, tan: f64) -> Vec<f64> {
    let bx = u.bx;
    let mut w = Vec::with_capacity(bx.len());
    let shift = 0.5 * (anchor.t - t) - y0;
    for i in 0..bx.n1 {
        let y1 = min_image(bx.x1(i) - anchor.rho1, bx.l1) + shift;
        for j in 0..bx.n2 {
            let y2 = min_image(bx.x2(j) - anchor.rho2, bx.l2);
            w.push(psi(m, y1 + tan * y2));
        }
    }
    w
}

fn check_scale(m: f64) -> Result<()> {
    if !(m >= 4.0 && m.is_finite()) {
        return Err(FlowError::InvalidParams(format!("weight scale must be >= 4, got {m}")));
    }
    Ok(())
}

fn oblique_tan(theta: f64) -> Result<f64> {
    if !(theta.abs() < PI / 3.0) {
        return Err(FlowError::AngleOutOfRange { theta });
    }
    Ok(theta.tan())
}

/// `I_{y0,t0}(t) = ∫ u² ψ_M(x1 - ρ1(t0) + (t0 - t)/2 - y0)`, with `anchor`
/// the modulation state at `t0`.
pub fn localized_mass_i(u: &Field2D, anchor: &ModulationState, t: f64, y0: f64, m: f64) -> Result<MonotonicitySample> {
    check_scale(m)?;
    let value = weighted_square(u, &frame_weight(u, anchor, t, y0, m, 0.0));
    Ok(sample(anchor, t, y0, 0.0, value, ProbeKind::I))
}

fn sample(anchor: &ModulationState, t: f64, y0: f64, theta: f64, value: f64, kind: ProbeKind) -> MonotonicitySample {
    MonotonicitySample {
        t,
        value,
        y0,
        t0: anchor.t,
        theta,
        kind,
    }
}

/// The oblique variant of [`localized_mass_i`], with weight argument
/// `x1 + tan θ x2`. The `x2` offset is taken relative to `ρ2(t0)`.
pub fn oblique_mass(
    u: &Field2D,
    anchor: &ModulationState,
    t: f64,
    y0: f64,
    m: f64,
    theta: f64,
) -> Result<MonotonicitySample> {
    check_scale(m)?;
    let tan = oblique_tan(theta)?;
    let value = weighted_square(u, &frame_weight(u, anchor, t, y0, m, tan));
    Ok(sample(anchor, t, y0, theta, value, ProbeKind::Oblique))
}

/// `J_{y0,t0}(t) = ∫ (|∇u|² - ⅔u³) ψ_M(...)` with the weight of
/// [`localized_mass_i`].
pub fn localized_energy_j(
    u: &Field2D,
    sp: &Spectral2D,
    anchor: &ModulationState,
    t: f64,
    y0: f64,
    m: f64,
) -> Result<MonotonicitySample> {
    check_scale(m)?;
    let w = frame_weight(u, anchor, t, y0, m, 0.0);
    let (g1, g2) = sp.gradient(u);
    let s: f64 = (0..w.len())
        .map(|k| {
            let v = u.values[k];
            (g1.values[k].powi(2) + g2.values[k].powi(2) - 2.0 / 3.0 * v * v * v) * w[k]
        })
        .sum();
    Ok(sample(anchor, t, y0, 0.0, s * u.bx.cell_area(), ProbeKind::J))
}

fn weighted_square(u: &Field2D, w: &[f64]) -> f64 {
    u.values.iter().zip(w).map(|(v, w)| v * v * w).sum::<f64>() * u.bx.cell_area()
}

/// Partition masses of an ordered train `0 < c_1 < ... < c_N`:
/// `M_1 = ½∫u²` and `M_j = ½∫u² ψ_A(x1 - x_j - σ_j t)` for `j >= 2`, where
/// `σ_j = (c_j + c_{j-1}) / 2` and `x_j = interfaces0[j - 2]` is the
/// interface position at `t = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionMasses {
    /// `M_1, ..., M_N`.
    pub masses: Vec<f64>,
    /// `d_j = Σ_{k >= j} c_k`, the value `M_j / M_0` approaches for a
    /// decoupled train of solitons with these speeds.
    pub d: Vec<f64>,
}

pub fn partition_masses(
    u: &Field2D,
    speeds: &[f64],
    interfaces0: &[f64],
    t: f64,
    a: f64,
) -> Result<PartitionMasses> {
    check_scale(a)?;
    if speeds.is_empty() || interfaces0.len() + 1 != speeds.len() {
        return Err(FlowError::InvalidParams(format!(
            "{} speeds need {} interfaces, got {}",
            speeds.len(),
            speeds.len().saturating_sub(1),
            interfaces0.len()
        )));
    }
    if !(speeds[0] > 0.0) || speeds.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(FlowError::InvalidParams("speeds must be positive and strictly increasing".into()));
    }
    let bx = u.bx;
    let mut out = vec![0.5 * u.dot(u)];
    for j in 1..speeds.len() {
        let sigma = 0.5 * (speeds[j] + speeds[j - 1]);
        let center = interfaces0[j - 1] + sigma * t;
        let mut s = 0.0;
        for i in 0..bx.n1 {
            let w = psi(a, min_image(bx.x1(i) - center, bx.l1));
            let row = &u.values[i * bx.n2..(i + 1) * bx.n2];
            s += w * row.iter().map(|v| v * v).sum::<f64>();
        }
        out.push(0.5 * s * bx.cell_area());
    }
    Ok(PartitionMasses {
        masses: out,
        d: tail_speed_sums(speeds),
    })
}

/// `d_j = Σ_{k >= j} c_k`, the value `M_j / M_0` approaches for a
/// decoupled train.
pub fn tail_speed_sums(speeds: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = speeds
        .iter()
        .rev()
        .map(|c| {
            acc += c;
            acc
        })
        .collect();
    out.reverse();
    out
}

/// True if `|((c_k - c_j)t, 0) + ρ^k - ρ^j| >= l` for all `t >= 0` and
/// `j != k`, with `speeds` increasing.
pub fn is_decoupled(speeds: &[f64], positions: &[(f64, f64)], l: f64) -> bool {
    for j in 0..speeds.len() {
        for k in 0..speeds.len() {
            if j == k {
                continue;
            }
            let dc = speeds[k] - speeds[j];
            let (dx, dy) = (positions[k].0 - positions[j].0, positions[k].1 - positions[j].1);
            // Closest approach of the line (dx + dc t, dy) over t >= 0.
            let t_star = if dc != 0.0 { (-dx / dc).max(0.0) } else { 0.0 };
            if (dx + dc * t_star).hypot(dy) < l {
                return false;
            }
        }
    }
    true
}

/// Fits one modulation state per frame, seeding each fit with the
/// previous one advanced by `c Δt`.
pub fn track_modulation(
    frames: &[(f64, Field2D)],
    q: &GroundState,
    first: &ModulationState,
    tol: f64,
) -> Result<Vec<ModulationState>> {
    let mut out: Vec<ModulationState> = Vec::with_capacity(frames.len());
    for (t, u) in frames {
        let seed = match out.last() {
            Some(prev) => ModulationState::guess(*t, prev.c, (prev.rho1 + prev.c * (t - prev.t), prev.rho2)),
            None => ModulationState { t: *t, ..*first },
        };
        out.push(fit_modulation(u, q, &seed, tol)?);
    }
    Ok(out)
}
