//! Time integration of `u_t = -∂1(Δu + u²)` and of its linearization about
//! a travelling soliton, written in the co-moving frame as `η_t = ∂1 𝓛η`.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use zklab_core::GroundState;

use crate::error::{FlowError, Result};
use crate::field::{min_image, write_snapshot, Box2D, Field2D};
use crate::spectral::{Spectral2D, Spectrum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Exponential time differencing RK4 with contour-integral coefficients.
    Etdrk4,
    /// Second-order semi-implicit BDF, implicit in the dispersive term.
    ImexBdf2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveParams {
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    /// Observers run every `output_every` steps, plus at the start and end.
    pub output_every: usize,
    pub scheme: Scheme,
}

impl EvolveParams {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            dealias: true,
            output_every: 1,
            scheme: Scheme::Etdrk4,
        }
    }

    fn step_count(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(FlowError::InvalidParams(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(FlowError::InvalidParams(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if self.output_every == 0 {
            return Err(FlowError::InvalidParams("output_every must be >= 1".into()));
        }
        let steps = (self.t_end / self.dt).round();
        if (steps * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(self.dt) {
            return Err(FlowError::InvalidParams(format!(
                "t_end {} is not a whole number of steps of {}",
                self.t_end, self.dt
            )));
        }
        Ok(steps as usize)
    }
}

/// Callback run on output steps.
pub trait Observer {
    fn observe(&mut self, t: f64, u: &Field2D);
}

impl<F: FnMut(f64, &Field2D)> Observer for F {
    fn observe(&mut self, t: f64, u: &Field2D) {
        self(t, u)
    }
}

/// Keeps every observed frame in memory.
#[derive(Default, Debug, Clone)]
pub struct SnapshotRecorder {
    pub frames: Vec<(f64, Field2D)>,
}

impl Observer for SnapshotRecorder {
    fn observe(&mut self, t: f64, u: &Field2D) {
        self.frames.push((t, u.clone()));
    }
}

impl SnapshotRecorder {
    /// Writes `snap_00000.bin`, `snap_00001.bin`, ... into `dir`.
    pub fn write_all(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for (k, (t, u)) in self.frames.iter().enumerate() {
            let path = dir.join(format!("snap_{k:05}.bin"));
            let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
            write_snapshot(&mut w, u, *t)?;
            w.flush()?;
            paths.push(path);
        }
        Ok(paths)
    }
}

/// Records a scalar functional of the state.
pub struct ScalarSeries<F: FnMut(&Field2D) -> f64> {
    pub f: F,
    pub samples: Vec<(f64, f64)>,
}

impl<F: FnMut(&Field2D) -> f64> ScalarSeries<F> {
    pub fn new(f: F) -> Self {
        Self { f, samples: Vec::new() }
    }
}

impl<F: FnMut(&Field2D) -> f64> Observer for ScalarSeries<F> {
    fn observe(&mut self, t: f64, u: &Field2D) {
        let v = (self.f)(u);
        self.samples.push((t, v));
    }
}

pub fn write_series_csv<W: Write>(mut out: W, samples: &[(f64, f64)]) -> Result<()> {
    writeln!(out, "t,value")?;
    for (t, v) in samples {
        writeln!(out, "{t:e},{v:e}")?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub final_state: Field2D,
    pub t_final: f64,
    pub steps: usize,
    pub output_times: Vec<f64>,
}

/// `∫ u²`.
pub fn mass(u: &Field2D) -> f64 {
    u.dot(u)
}

/// `∫ ½|∇u|² - |u|^{p-1}u^2 / (p + 1)`.
pub fn energy(u: &Field2D, p: f64) -> f64 {
    energy_with(u, p, &Spectral2D::new(u.bx))
}

pub fn energy_with(u: &Field2D, p: f64, sp: &Spectral2D) -> f64 {
    let (g1, g2) = sp.gradient(u);
    let power: f64 = if p == 2.0 {
        u.values.iter().map(|v| v * v * v).sum::<f64>()
    } else {
        u.values.iter().map(|v| v.abs().powf(p) * v).sum::<f64>()
    };
    0.5 * (g1.dot(&g1) + g2.dot(&g2)) - power * u.bx.cell_area() / (p + 1.0)
}

fn check_planar(q: &GroundState) -> Result<()> {
    if q.d != 2 {
        return Err(FlowError::InvalidParams(format!("soliton profile must be planar, got d = {}", q.d)));
    }
    Ok(())
}

/// Sums `f(|x - center + (a l1, b l2)|)` over the 3×3 nearest periodic
/// images.
pub fn sample_periodic_radial(bx: Box2D, center: (f64, f64), f: impl Fn(f64) -> f64) -> Field2D {
    Field2D::from_fn(bx, |x1, x2| {
        let y1 = min_image(x1 - center.0, bx.l1);
        let y2 = min_image(x2 - center.1, bx.l2);
        let mut s = 0.0;
        for a in -1..=1 {
            for b in -1..=1 {
                let z1 = y1 + a as f64 * bx.l1;
                let z2 = y2 + b as f64 * bx.l2;
                s += f(z1.hypot(z2));
            }
        }
        s
    })
}

/// Periodized `∂1 Q_c` and `∂2 Q_c` centred at `center`.
pub fn soliton_gradient(q: &GroundState, c: f64, center: (f64, f64), bx: Box2D) -> (Field2D, Field2D) {
    let mut g1 = Field2D::zeros(bx);
    let mut g2 = Field2D::zeros(bx);
    for i in 0..bx.n1 {
        for j in 0..bx.n2 {
            let y1 = min_image(bx.x1(i) - center.0, bx.l1);
            let y2 = min_image(bx.x2(j) - center.1, bx.l2);
            let (mut s1, mut s2) = (0.0, 0.0);
            for a in -1..=1 {
                for b in -1..=1 {
                    let z1 = y1 + a as f64 * bx.l1;
                    let z2 = y2 + b as f64 * bx.l2;
                    let r = z1.hypot(z2);
                    if r > 0.0 {
                        let dq = q.soliton_deriv(c, r);
                        s1 += dq * z1 / r;
                        s2 += dq * z2 / r;
                    }
                }
            }
            let k = bx.index(i, j);
            g1.values[k] = s1;
            g2.values[k] = s2;
        }
    }
    (g1, g2)
}

/// `Q_c(x - rho)` sampled on the box. Fails when the soliton does not fit.
pub fn init_soliton_field(bx: Box2D, q: &GroundState, c: f64, center: (f64, f64)) -> Result<Field2D> {
    check_planar(q)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(FlowError::InvalidParams(format!("speed must be positive, got {c}")));
    }
    let half = 0.5 * bx.l1.min(bx.l2);
    let ratio = q.soliton_value(c, half) / q.soliton_value(c, 0.0);
    if ratio > 1e-8 {
        return Err(FlowError::BoxTooSmall { ratio });
    }
    Ok(sample_periodic_radial(bx, center, |r| q.soliton_value(c, r)))
}

enum Nonlinearity {
    Square,
    Potential(Vec<f64>),
}

struct Problem {
    sp: Spectral2D,
    linear: Vec<Complex64>,
    nonlinearity: Nonlinearity,
    dealias: bool,
}

impl Problem {
    /// Returns `N(v)` and `sup|u|` for `u` the physical field of `v`.
    fn nonlinear(&self, v: &[Complex64]) -> (Spectrum, f64) {
        let u = self.sp.inverse_real(v);
        let sup = u.iter().fold(0.0_f64, |m, x| if x.is_finite() { m.max(x.abs()) } else { f64::INFINITY });
        let w: Vec<f64> = match &self.nonlinearity {
            Nonlinearity::Square => u.iter().map(|x| x * x).collect(),
            Nonlinearity::Potential(pot) => u.iter().zip(pot).map(|(x, p)| x * p).collect(),
        };
        let mut nw = self.sp.d1_spec(&self.sp.forward_real(&w));
        nw.iter_mut().for_each(|z| *z = -*z);
        if self.dealias {
            self.sp.dealias(&mut nw);
        }
        (nw, sup)
    }

    fn max_k1(&self) -> f64 {
        (0..self.sp.bx.n1)
            .filter(|&i| !self.dealias || 3 * i.min(self.sp.bx.n1 - i) < self.sp.bx.n1)
            .map(|i| self.sp.k1_odd[i].abs())
            .fold(0.0, f64::max)
    }

    fn max_linear_rate(&self) -> f64 {
        self.linear.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// Contour-averaged ETDRK4 coefficients for one step size.
struct EtdCoeffs {
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
}

const CONTOUR_POINTS: usize = 32;

impl EtdCoeffs {
    fn new(linear: &[Complex64], h: f64) -> Self {
        let roots: Vec<Complex64> = (1..=CONTOUR_POINTS)
            .map(|j| Complex64::from_polar(1.0, PI * (j as f64 - 0.5) / CONTOUR_POINTS as f64 * 2.0))
            .collect();
        let m = CONTOUR_POINTS as f64;
        let n = linear.len();
        let mut c = Self {
            e: Vec::with_capacity(n),
            e2: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            f1: Vec::with_capacity(n),
            f2: Vec::with_capacity(n),
            f3: Vec::with_capacity(n),
        };
        for &l in linear {
            let z = l * h;
            c.e.push(z.exp());
            c.e2.push((z * 0.5).exp());
            let (mut q, mut f1, mut f2, mut f3) = (Complex64::default(), Complex64::default(), Complex64::default(), Complex64::default());
            for &root in &roots {
                let r = z + root;
                let er = r.exp();
                let r3 = r * r * r;
                q += ((r * 0.5).exp() - 1.0) / r;
                f1 += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
                f2 += (2.0 + r + er * (r - 2.0)) / r3;
                f3 += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
            }
            c.q.push(q * (h / m));
            c.f1.push(f1 * (h / m));
            c.f2.push(f2 * (h / m));
            c.f3.push(f3 * (h / m));
        }
        c
    }
}

enum Stepper {
    Etd(EtdCoeffs),
    Imex { prev: Option<(Spectrum, Spectrum)> },
}

struct Integrator {
    problem: Problem,
    stepper: Stepper,
    h: f64,
    v: Spectrum,
    /// Blow-up threshold on `sup|u|`.
    limit: f64,
    initial_sup: f64,
}

impl Integrator {
    fn new(problem: Problem, params: &EvolveParams, u0: &Field2D, advection: f64) -> Result<Self> {
        let h = params.dt;
        let bound = match params.scheme {
            Scheme::ImexBdf2 => 0.5 / problem.max_linear_rate().max(f64::MIN_POSITIVE),
            Scheme::Etdrk4 => 2.0 / (advection * problem.max_k1()).max(f64::MIN_POSITIVE),
        };
        if h > bound {
            return Err(FlowError::StepTooLarge { dt: h, bound });
        }
        let stepper = match params.scheme {
            Scheme::Etdrk4 => Stepper::Etd(EtdCoeffs::new(&problem.linear, h)),
            Scheme::ImexBdf2 => Stepper::Imex { prev: None },
        };
        let initial_sup = u0.sup_norm();
        let v = problem.sp.forward(u0);
        Ok(Self {
            problem,
            stepper,
            h,
            v,
            limit: 1e3 * initial_sup,
            initial_sup,
        })
    }

    fn check(&self, sup: f64, t: f64) -> Result<()> {
        if !sup.is_finite() || sup > self.limit {
            return Err(FlowError::BlowupDetected {
                t,
                sup,
                initial: self.initial_sup,
            });
        }
        Ok(())
    }

    fn advance(&mut self, t: f64) -> Result<()> {
        let h = self.h;
        let (nv, sup) = self.problem.nonlinear(&self.v);
        self.check(sup, t)?;
        let next: Spectrum = match &mut self.stepper {
            Stepper::Etd(c) => {
                let v = &self.v;
                let a: Spectrum = (0..v.len()).map(|k| c.e2[k] * v[k] + c.q[k] * nv[k]).collect();
                let (na, _) = self.problem.nonlinear(&a);
                let b: Spectrum = (0..v.len()).map(|k| c.e2[k] * v[k] + c.q[k] * na[k]).collect();
                let (nb, _) = self.problem.nonlinear(&b);
                let cc: Spectrum = (0..v.len())
                    .map(|k| c.e2[k] * a[k] + c.q[k] * (nb[k] * 2.0 - nv[k]))
                    .collect();
                let (nc, _) = self.problem.nonlinear(&cc);
                (0..v.len())
                    .map(|k| c.e[k] * v[k] + c.f1[k] * nv[k] + c.f2[k] * (na[k] + nb[k]) * 2.0 + c.f3[k] * nc[k])
                    .collect()
            }
            Stepper::Imex { prev } => {
                let lin = &self.problem.linear;
                let v = &self.v;
                let out: Spectrum = match prev {
                    None => (0..v.len()).map(|k| (v[k] + nv[k] * h) / (1.0 - lin[k] * h)).collect(),
                    Some((vp, np)) => (0..v.len())
                        .map(|k| (v[k] * 4.0 - vp[k] + (nv[k] * 2.0 - np[k]) * (2.0 * h)) / (3.0 - lin[k] * (2.0 * h)))
                        .collect(),
                };
                *prev = Some((v.clone(), nv));
                out
            }
        };
        self.v = next;
        Ok(())
    }

    fn state(&self) -> Field2D {
        self.problem.sp.inverse(&self.v)
    }
}

fn run(
    mut integ: Integrator,
    u0: &Field2D,
    params: &EvolveParams,
    steps: usize,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    let mut output_times = Vec::new();
    let emit = |t: f64, integ: &Integrator, times: &mut Vec<f64>, observers: &mut [&mut dyn Observer]| {
        if !observers.is_empty() {
            let u = integ.state();
            for o in observers.iter_mut() {
                o.observe(t, &u);
            }
        }
        times.push(t);
    };
    emit(0.0, &integ, &mut output_times, observers);
    if steps == 0 {
        return Ok(Trajectory {
            final_state: u0.clone(),
            t_final: 0.0,
            steps: 0,
            output_times,
        });
    }
    for n in 0..steps {
        integ.advance(n as f64 * params.dt)?;
        let done = n + 1;
        if done % params.output_every == 0 || done == steps {
            emit(done as f64 * params.dt, &integ, &mut output_times, observers);
        }
    }
    let final_state = integ.state();
    let sup = final_state.values.iter().fold(0.0_f64, |m, x| if x.is_finite() { m.max(x.abs()) } else { f64::INFINITY });
    integ.check(sup, steps as f64 * params.dt)?;
    Ok(Trajectory {
        final_state,
        t_final: steps as f64 * params.dt,
        steps,
        output_times,
    })
}

/// Multiplier of the dispersive term: `û_t = i k1 |k|² û`, i.e. `-iω(k)`.
pub fn zk_linear_symbol(sp: &Spectral2D) -> Vec<Complex64> {
    let bx = sp.bx;
    (0..sp.len())
        .map(|idx| {
            let (i, j) = (idx / bx.n2, idx % bx.n2);
            let k2 = sp.k1[i].powi(2) + sp.k2[j].powi(2);
            Complex64::new(0.0, sp.k1_odd[i] * k2)
        })
        .collect()
}

/// Exact flow of `u_t = -∂1Δu` over time `t`.
pub fn linear_propagate(u: &Field2D, t: f64) -> Field2D {
    let sp = Spectral2D::new(u.bx);
    let lin = zk_linear_symbol(&sp);
    let v: Spectrum = sp.forward(u).iter().zip(&lin).map(|(z, l)| z * (l * t).exp()).collect();
    sp.inverse(&v)
}

fn zk_problem(bx: Box2D, dealias: bool) -> Problem {
    let sp = Spectral2D::new(bx);
    let linear = zk_linear_symbol(&sp);
    Problem {
        sp,
        linear,
        nonlinearity: Nonlinearity::Square,
        dealias,
    }
}

/// Evolves ZK from `u0` to `params.t_end`.
pub fn evolve(u0: &Field2D, params: &EvolveParams, observers: &mut [&mut dyn Observer]) -> Result<Trajectory> {
    let steps = params.step_count()?;
    let problem = zk_problem(u0.bx, params.dealias);
    let integ = Integrator::new(problem, params, u0, 2.0 * u0.sup_norm())?;
    run(integ, u0, params, steps, observers)
}

/// One step of size `dt`; the other settings come from `params`.
pub fn step(u: &Field2D, dt: f64, params: &EvolveParams) -> Result<Field2D> {
    let one = EvolveParams {
        dt,
        t_end: dt,
        output_every: 1,
        ..*params
    };
    Ok(evolve(u, &one, &mut [])?.final_state)
}

/// Evolves `η_t = ∂1(-Δη + c0 η - p Q^{p-1} η)`, the linearization about
/// the soliton `background` (sampled `Q_{c0}`) in its co-moving frame.
pub fn linearized_evolve(
    eta0: &Field2D,
    background: &Field2D,
    c0: f64,
    p: f64,
    params: &EvolveParams,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    if eta0.bx != background.bx {
        return Err(FlowError::InvalidParams("perturbation and background live on different boxes".into()));
    }
    let steps = params.step_count()?;
    let bx = eta0.bx;
    let sp = Spectral2D::new(bx);
    let linear = (0..sp.len())
        .map(|idx| {
            let (i, j) = (idx / bx.n2, idx % bx.n2);
            let k2 = sp.k1[i].powi(2) + sp.k2[j].powi(2);
            Complex64::new(0.0, sp.k1_odd[i] * (k2 + c0))
        })
        .collect();
    let pot: Vec<f64> = background.values.iter().map(|q| p * q.abs().powf(p - 1.0)).collect();
    let advection = pot.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-12);
    let problem = Problem {
        sp,
        linear,
        nonlinearity: Nonlinearity::Potential(pot),
        dealias: params.dealias,
    };
    let integ = Integrator::new(problem, params, eta0, advection)?;
    run(integ, eta0, params, steps, observers)
}

/// Largest `dt` the preflight accepts for ZK from `u0`.
pub fn max_stable_dt(u0: &Field2D, scheme: Scheme, dealias: bool) -> f64 {
    let problem = zk_problem(u0.bx, dealias);
    match scheme {
        Scheme::ImexBdf2 => 0.5 / problem.max_linear_rate(),
        Scheme::Etdrk4 => 2.0 / (2.0 * u0.sup_norm() * problem.max_k1()),
    }
}
