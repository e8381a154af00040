//! Frozen experiment configurations, one per acceptance criterion.

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const PRESETS: &[(&str, &str)] = &[
    ("appendix-a-d2", "spectral value nu(d=2, p=2) at rmax = 50"),
    ("crossings", "zero crossings of nu in p for d = 1, 2, 3"),
    ("census", "negative eigenvalue count over subcritical scans"),
    ("identities-d2", "identity audit of the planar cubic ground state"),
    ("oracle-d1", "one-dimensional ground state against the sech^2 profile"),
    ("cone-angle", "minimal group-velocity angle of the linear flow"),
    ("conservation", "single soliton run, mass, energy and speed"),
    ("linear-liouville", "linearized flow about the soliton"),
    ("monotonicity", "localized mass and energy on a perturbed soliton"),
    ("coercivity", "weighted bilinear form with and without projections"),
    ("modulation", "modulation fit of an exactly sampled soliton"),
    ("nsoliton-2", "two decoupled solitons with speeds 1 and 2"),
];

fn body(name: &str) -> Option<&'static str> {
    Some(match name {
        "appendix-a-d2" => {
            r#"
kind = "spectral-scan"
[parameters]
d = 2
p_grid = [2.0, 2.0, 0.05]
rmax = 50.0
n = 4096
"#
        }
        "crossings" => {
            r#"
kind = "crossing"
[parameters]
d = [1, 2, 3]
bracket = [[2.6, 3.2], [2.0, 2.3], [1.7, 1.95]]
tol = 1e-4
"#
        }
        "census" => {
            r#"
kind = "spectral-scan"
[parameters]
d = [1, 2, 3]
p_grid = [[1.8, 3.4, 0.1], [1.8, 2.6, 0.05], [1.6, 2.2, 0.05]]
"#
        }
        "identities-d2" => {
            r#"
kind = "identities"
[parameters]
d = 2
p = 2.0
tol = 1e-5
"#
        }
        "oracle-d1" => {
            r#"
kind = "groundstate"
[parameters]
d = 1
p = 2.0
"#
        }
        "cone-angle" => {
            r#"
kind = "dispersion"
[parameters]
samples = 65
"#
        }
        "conservation" => {
            r#"
kind = "evolve-soliton"
[parameters]
c = 1.0
box = [40.0, 40.0]
grid = [128, 128]
dt = 0.005
t_end = 10.0
output_every = 200
"#
        }
        "linear-liouville" => {
            r#"
kind = "evolve-linearized"
[parameters]
box = [80.0, 40.0]
grid = [256, 128]
dt = 0.002
t_end = 5.0
output_every = 250
M = 4.0
"#
        }
        "monotonicity" => {
            r#"
kind = "probe-suite"
[parameters]
M = 8.0
y0 = [5.0, 10.0, 15.0, 20.0]
theta = [0.0, 0.5235987755982988, 0.7853981633974483]
eps = 1e-2
box = [80.0, 40.0]
grid = [256, 128]
dt = 0.005
t_end = 10.0
output_every = 100
"#
        }
        "coercivity" => {
            r#"
kind = "coercivity"
[parameters]
A = 10.0
box = [30.0, 30.0]
grid = [64, 64]
k = 4
seed = 24301
"#
        }
        "modulation" => {
            r#"
kind = "evolve-soliton"
[parameters]
c = 1.3
center = [17.3, 21.1]
box = [40.0, 40.0]
grid = [128, 128]
dt = 0.005
t_end = 0.0
"#
        }
        "nsoliton-2" => {
            r#"
kind = "evolve-multisoliton"
[parameters]
c = [1.0, 2.0]
L = 15.0
eps = 1e-2
A = 4.0
box = [80.0, 40.0]
grid = [256, 128]
dt = 0.005
t_end = 10.0
output_every = 100
"#
        }
        _ => return None,
    })
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let text = body(name).ok_or_else(|| CliError::UnknownPreset(name.to_string()))?;
    ExperimentConfig::from_toml(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for (name, _) in PRESETS {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(preset("nope"), Err(CliError::UnknownPreset(_))));
    }
}
