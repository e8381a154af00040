//! Experiment descriptions: the TOML schema and its validation into a
//! fully resolved [`Experiment`].

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use zklab_core::SolverConfig;
use zklab_flow::{Box2D, EvolveParams, Scheme};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Groundstate,
    SpectralScan,
    Crossing,
    Identities,
    Dispersion,
    EvolveSoliton,
    EvolveLinearized,
    EvolveMultisoliton,
    ProbeSuite,
    Coercivity,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Groundstate => "groundstate",
            Kind::SpectralScan => "spectral-scan",
            Kind::Crossing => "crossing",
            Kind::Identities => "identities",
            Kind::Dispersion => "dispersion",
            Kind::EvolveSoliton => "evolve-soliton",
            Kind::EvolveLinearized => "evolve-linearized",
            Kind::EvolveMultisoliton => "evolve-multisoliton",
            Kind::ProbeSuite => "probe-suite",
            Kind::Coercivity => "coercivity",
        }
    }

    /// Parameter keys the kind reads. Anything else is rejected.
    fn keys(&self) -> &'static [&'static str] {
        match self {
            Kind::Groundstate => &["d", "p", "rmax", "n"],
            Kind::SpectralScan => &["d", "p_grid", "rmax", "n"],
            Kind::Crossing => &["d", "bracket", "tol", "rmax", "n"],
            Kind::Identities => &["d", "p", "tol", "rmax", "n"],
            Kind::Dispersion => &["samples"],
            Kind::EvolveSoliton => &[
                "c", "center", "box", "grid", "dt", "t_end", "output_every", "scheme", "dealias", "tol", "rmax", "n",
            ],
            Kind::EvolveLinearized => &["box", "grid", "dt", "t_end", "output_every", "M", "rmax", "n"],
            Kind::EvolveMultisoliton => &[
                "c", "L", "eps", "A", "box", "grid", "dt", "t_end", "output_every", "scheme", "tol", "rmax", "n",
            ],
            Kind::ProbeSuite => &[
                "M", "y0", "theta", "eps", "box", "grid", "dt", "t_end", "output_every", "tol", "rmax", "n",
            ],
            Kind::Coercivity => &["A", "box", "grid", "k", "seed", "rmax", "n"],
        }
    }
}

/// A scalar or a list in the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<OneOrMany<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// `[start, stop, step]`, one triple per dimension or a single shared one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<OneOrMany<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<OneOrMany<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<OneOrMany<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rmax: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub box_size: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dealias: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<OneOrMany<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<OneOrMany<f64>>,
    #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub parameters: Parameters,
}

impl ExperimentConfig {
    pub fn new(kind: Kind, parameters: Parameters) -> Self {
        Self {
            kind,
            output_dir: None,
            parameters,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("bad config: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Canonical text form; the output directory is left out so that the
    /// same experiment hashes the same wherever it is written.
    pub fn to_toml(&self) -> String {
        let canon = ExperimentConfig {
            output_dir: None,
            ..self.clone()
        };
        toml::to_string(&canon).expect("config serializes")
    }

    pub fn validate(&self) -> Result<Experiment> {
        Experiment::resolve(self)
    }
}

/// Settings of a time-dependent run.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowSetup {
    pub bx: Box2D,
    pub params: EvolveParams,
    pub solver: SolverConfig,
    pub tol: f64,
}

/// A validated experiment with every parameter filled in.
#[derive(Clone, Debug, PartialEq)]
pub enum Experiment {
    Groundstate {
        d: usize,
        p: f64,
        solver: SolverConfig,
    },
    SpectralScan {
        points: Vec<(usize, Vec<f64>)>,
        solver: SolverConfig,
    },
    Crossing {
        targets: Vec<(usize, (f64, f64))>,
        tol: f64,
        solver: SolverConfig,
    },
    Identities {
        d: usize,
        p: f64,
        tol: f64,
        solver: SolverConfig,
    },
    Dispersion {
        samples: usize,
    },
    EvolveSoliton {
        c: f64,
        center: (f64, f64),
        flow: FlowSetup,
    },
    EvolveLinearized {
        m: f64,
        flow: FlowSetup,
    },
    EvolveMultisoliton {
        speeds: Vec<f64>,
        l: f64,
        eps: f64,
        a: f64,
        flow: FlowSetup,
    },
    ProbeSuite {
        m: f64,
        y0: Vec<f64>,
        theta: Vec<f64>,
        eps: f64,
        flow: FlowSetup,
    },
    Coercivity {
        a: f64,
        bx: Box2D,
        k: usize,
        seed: u64,
        solver: SolverConfig,
    },
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(format!("`{name}` must be positive and finite, got {v}")))
    }
}

fn check_dim(d: usize) -> Result<usize> {
    if (1..=3).contains(&d) {
        Ok(d)
    } else {
        Err(bad(format!("`d` must be 1, 2 or 3, got {d}")))
    }
}

fn check_power(d: usize, p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(bad(format!("`p` must be > 1, got {p}")));
    }
    if d == 3 && p >= 5.0 {
        return Err(bad(format!("`p` must be < 5 for d = 3, got {p}")));
    }
    Ok(p)
}

fn present_keys(p: &Parameters) -> Vec<String> {
    match serde_json::to_value(p) {
        Ok(serde_json::Value::Object(map)) => map.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

fn p_grid(triple: [f64; 3]) -> Result<Vec<f64>> {
    let [start, stop, step] = triple;
    if !(start.is_finite() && stop >= start && step > 0.0 && step.is_finite()) {
        return Err(bad(format!("`p_grid` needs start <= stop and step > 0, got {triple:?}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 10_000 {
        return Err(bad("`p_grid` has more than 10000 points"));
    }
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

impl Experiment {
    pub fn resolve(cfg: &ExperimentConfig) -> Result<Experiment> {
        let p = &cfg.parameters;
        let allowed = cfg.kind.keys();
        for key in present_keys(p) {
            if !allowed.contains(&key.as_str()) {
                return Err(bad(format!("key `{key}` is not used by kind {}", cfg.kind.as_str())));
            }
        }

        let solver = {
            let mut s = SolverConfig::default();
            if let Some(r) = p.rmax {
                s.rmax = r;
            }
            if let Some(n) = p.n {
                s.n = n;
            }
            s.validate().map_err(|e| bad(e.to_string()))?;
            s
        };
        let dims = || -> Result<Vec<usize>> {
            let d = p.d.as_ref().ok_or_else(|| bad("`d` is required"))?.to_vec();
            if d.is_empty() {
                return Err(bad("`d` must not be empty"));
            }
            d.into_iter().map(check_dim).collect()
        };
        let single_dim = || -> Result<usize> {
            match dims()?.as_slice() {
                [d] => Ok(*d),
                _ => Err(bad(format!("kind {} takes a single `d`", cfg.kind.as_str()))),
            }
        };
        let power = |d: usize| -> Result<f64> { check_power(d, p.p.ok_or_else(|| bad("`p` is required"))?) };
        let per_dim = |n: usize, len: usize, name: &str| -> Result<()> {
            if len == 1 || len == n {
                Ok(())
            } else {
                Err(bad(format!("`{name}` needs 1 or {n} entries, got {len}")))
            }
        };

        Ok(match cfg.kind {
            Kind::Groundstate => {
                let d = single_dim()?;
                Experiment::Groundstate {
                    d,
                    p: power(d)?,
                    solver,
                }
            }
            Kind::SpectralScan => {
                let ds = dims()?;
                let grids = p.p_grid.as_ref().ok_or_else(|| bad("`p_grid` is required"))?.to_vec();
                per_dim(ds.len(), grids.len(), "p_grid")?;
                let mut points = Vec::new();
                for (k, &d) in ds.iter().enumerate() {
                    let ps = p_grid(grids[k.min(grids.len() - 1)])?;
                    for &x in &ps {
                        check_power(d, x)?;
                    }
                    points.push((d, ps));
                }
                Experiment::SpectralScan { points, solver }
            }
            Kind::Crossing => {
                let ds = dims()?;
                let brackets = p.bracket.as_ref().ok_or_else(|| bad("`bracket` is required"))?.to_vec();
                per_dim(ds.len(), brackets.len(), "bracket")?;
                let mut targets = Vec::new();
                for (k, &d) in ds.iter().enumerate() {
                    let [lo, hi] = brackets[k.min(brackets.len() - 1)];
                    check_power(d, lo)?;
                    check_power(d, hi)?;
                    if !(lo < hi) {
                        return Err(bad(format!("`bracket` needs lo < hi, got [{lo}, {hi}]")));
                    }
                    targets.push((d, (lo, hi)));
                }
                Experiment::Crossing {
                    targets,
                    tol: positive("tol", p.tol.unwrap_or(1e-4))?,
                    solver,
                }
            }
            Kind::Identities => {
                let d = single_dim()?;
                Experiment::Identities {
                    d,
                    p: power(d)?,
                    tol: positive("tol", p.tol.unwrap_or(1e-5))?,
                    solver,
                }
            }
            Kind::Dispersion => {
                let samples = p.samples.unwrap_or(65);
                if samples < 2 {
                    return Err(bad("`samples` must be >= 2"));
                }
                Experiment::Dispersion { samples }
            }
            Kind::EvolveSoliton => {
                let flow = flow_setup(p, solver, true)?;
                let c = match p.c.as_ref().map(|c| c.to_vec()).as_deref() {
                    None => 1.0,
                    Some([c]) => positive("c", *c)?,
                    Some(_) => return Err(bad("evolve-soliton takes a single `c`")),
                };
                let center = match p.center {
                    Some([x1, x2]) if x1.is_finite() && x2.is_finite() => (x1, x2),
                    Some(c) => return Err(bad(format!("`center` must be finite, got {c:?}"))),
                    None => (0.5 * flow.bx.l1, 0.5 * flow.bx.l2),
                };
                Experiment::EvolveSoliton { c, center, flow }
            }
            Kind::EvolveLinearized => {
                let mut flow = flow_setup(p, solver, false)?;
                flow.params.dealias = false;
                Experiment::EvolveLinearized {
                    m: weight_scale(p.m.unwrap_or(4.0), "M")?,
                    flow,
                }
            }
            Kind::EvolveMultisoliton => {
                let flow = flow_setup(p, solver, true)?;
                let speeds = p.c.as_ref().ok_or_else(|| bad("`c` is required"))?.to_vec();
                if speeds.len() < 2 {
                    return Err(bad("evolve-multisoliton needs at least two speeds"));
                }
                for &c in &speeds {
                    positive("c", c)?;
                }
                if speeds.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(bad("`c` must be strictly increasing"));
                }
                let l = positive("L", p.l.ok_or_else(|| bad("`L` is required"))?)?;
                if (speeds.len() - 1) as f64 * l >= flow.bx.l1 {
                    return Err(bad(format!("{} solitons {l} apart do not fit in a box of length {}", speeds.len(), flow.bx.l1)));
                }
                Experiment::EvolveMultisoliton {
                    speeds,
                    l,
                    eps: nonnegative("eps", p.eps.unwrap_or(1e-2))?,
                    a: weight_scale(p.a.unwrap_or(4.0), "A")?,
                    flow,
                }
            }
            Kind::ProbeSuite => {
                let flow = flow_setup(p, solver, true)?;
                let y0 = p.y0.as_ref().map(|v| v.to_vec()).unwrap_or_else(|| vec![5.0, 10.0, 15.0, 20.0]);
                if y0.is_empty() || y0.iter().any(|y| !y.is_finite()) {
                    return Err(bad("`y0` must be a non-empty list of finite offsets"));
                }
                let theta = p.theta.as_ref().map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0]);
                for &th in &theta {
                    if !(th.abs() < PI / 3.0) {
                        return Err(bad(format!("`theta` must satisfy |theta| < pi/3, got {th}")));
                    }
                }
                Experiment::ProbeSuite {
                    m: weight_scale(p.m.unwrap_or(8.0), "M")?,
                    y0,
                    theta,
                    eps: nonnegative("eps", p.eps.unwrap_or(1e-2))?,
                    flow,
                }
            }
            Kind::Coercivity => {
                let bx = make_box(p)?;
                let k = p.k.unwrap_or(4);
                if k == 0 {
                    return Err(bad("`k` must be >= 1"));
                }
                Experiment::Coercivity {
                    a: positive("A", p.a.ok_or_else(|| bad("`A` is required"))?)?,
                    bx,
                    k,
                    seed: p.seed.unwrap_or(0x5eed),
                    solver,
                }
            }
        })
    }
}

fn nonnegative(name: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(format!("`{name}` must be >= 0, got {v}")))
    }
}

fn weight_scale(v: f64, name: &str) -> Result<f64> {
    if v >= 4.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(format!("`{name}` must be >= 4, got {v}")))
    }
}

fn make_box(p: &Parameters) -> Result<Box2D> {
    let [l1, l2] = p.box_size.unwrap_or([40.0, 40.0]);
    let [n1, n2] = p.grid.unwrap_or([128, 128]);
    Box2D::new(l1, l2, n1, n2).map_err(|e| bad(e.to_string()))
}

fn flow_setup(p: &Parameters, solver: SolverConfig, default_dealias: bool) -> Result<FlowSetup> {
    let bx = make_box(p)?;
    let dt = positive("dt", p.dt.unwrap_or(0.005))?;
    let t_end = nonnegative("t_end", p.t_end.unwrap_or(10.0))?;
    let steps = (t_end / dt).round();
    if (steps * dt - t_end).abs() > 1e-9 * t_end.max(dt) {
        return Err(bad(format!("`t_end` {t_end} is not a whole number of steps of {dt}")));
    }
    let output_every = p.output_every.unwrap_or_else(|| ((1.0 / dt).round() as usize).max(1));
    if output_every == 0 {
        return Err(bad("`output_every` must be >= 1"));
    }
    Ok(FlowSetup {
        bx,
        params: EvolveParams {
            dt,
            t_end,
            dealias: p.dealias.unwrap_or(default_dealias),
            output_every,
            scheme: p.scheme.unwrap_or(Scheme::Etdrk4),
        },
        solver,
        tol: positive("tol", p.tol.unwrap_or(1e-10))?,
    })
}
