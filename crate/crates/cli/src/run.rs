//! Execution of validated experiments. Artifacts are assembled in memory
//! and only written once the whole run has succeeded.

use std::f64::consts::PI;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use zklab_core::dispersion::{ckz_symbol, group_tan, min_group_angle, min_group_ratio, WaveVector};
use zklab_core::identities::{audit_identities, AuditScope};
use zklab_core::spectral::write_scan_csv;
use zklab_core::{find_crossing, nu_value, profile_io, solve_ground_state, GroundState, SolverConfig};
use zklab_flow::coercivity::{lowest_modes, WeightedForm};
use zklab_flow::evolve::write_series_csv;
use zklab_flow::probes::{is_decoupled, track_modulation, write_modulation_csv, write_probe_csv};
use zklab_flow::weights::psi;
use zklab_flow::{
    energy_with, evolve, fit_modulation, init_soliton_field, linearized_evolve, localized_energy_j, localized_mass_i,
    mass, oblique_mass, partition_masses, write_snapshot, Box2D, Field2D, FlowError, ModulationState,
    MonotonicitySample, Projection, SnapshotRecorder, Spectral2D,
};

use crate::config::{Experiment, ExperimentConfig, FlowSetup};
use crate::error::{CliError, Result};
use crate::manifest::{Artifact, Manifest};

/// Outcome of a run: the summary (also written as `summary.json`) and the
/// manifest of everything written.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub kind: String,
    pub summary: Value,
    pub manifest: Manifest,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; `None` lets the pool decide.
    pub threads: Option<usize>,
}

/// Validates `config`, runs it and writes the artifacts to `output_dir`.
pub fn run(config: &ExperimentConfig, output_dir: &Path, opts: RunOptions) -> Result<RunReport> {
    let exp = config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let (summary, mut artifacts) = pool.install(|| execute(&exp))?;
    let summary = json!({ "kind": config.kind.as_str(), "results": summary });
    artifacts.insert(0, Artifact::text("config.toml", config.to_toml()));
    artifacts.push(Artifact::text("summary.json", pretty(&summary)));
    let manifest = Manifest::write(output_dir, artifacts)?;
    Ok(RunReport {
        kind: config.kind.as_str().to_string(),
        summary,
        manifest,
    })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("json serializes")
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::result::Result<(), FlowError>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn execute(exp: &Experiment) -> Result<(Value, Vec<Artifact>)> {
    match exp {
        Experiment::Groundstate { d, p, solver } => groundstate(*d, *p, solver),
        Experiment::SpectralScan { points, solver } => spectral_scan(points, solver),
        Experiment::Crossing { targets, tol, solver } => crossing(targets, *tol, solver),
        Experiment::Identities { d, p, tol, solver } => identities(*d, *p, *tol, solver),
        Experiment::Dispersion { samples } => dispersion(*samples),
        Experiment::EvolveSoliton { c, center, flow } => evolve_soliton(*c, *center, flow),
        Experiment::EvolveLinearized { m, flow } => evolve_linearized(*m, flow),
        Experiment::EvolveMultisoliton { speeds, l, eps, a, flow } => evolve_multisoliton(speeds, *l, *eps, *a, flow),
        Experiment::ProbeSuite { m, y0, theta, eps, flow } => probe_suite(*m, y0, theta, *eps, flow),
        Experiment::Coercivity { a, bx, k, seed, solver } => coercivity(*a, *bx, *k, *seed, solver),
    }
}

fn groundstate(d: usize, p: f64, solver: &SolverConfig) -> Result<(Value, Vec<Artifact>)> {
    let q = solve_ground_state(d, p, solver)?;
    let summary = json!({
        "d": d,
        "p": p,
        "c": q.c,
        "rmax": solver.rmax,
        "n": solver.n,
        "q0": q.values()[0],
        "radial_mass": q.radial_mass(),
        "ode_residual_norm": q.ode_residual_norm,
        "tail_rate": q.tail_rate,
        "newton_iters": q.newton_iters,
        "ground_state_shaped": q.is_ground_state_shaped(),
    });
    Ok((summary, vec![Artifact::text("profile.txt", profile_io::to_string(&q))]))
}

fn spectral_scan(points: &[(usize, Vec<f64>)], solver: &SolverConfig) -> Result<(Value, Vec<Artifact>)> {
    let jobs: Vec<(usize, f64)> = points.iter().flat_map(|(d, ps)| ps.iter().map(move |&p| (*d, p))).collect();
    let records = jobs
        .par_iter()
        .map(|&(d, p)| nu_value(d, p, solver))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut csv = Vec::new();
    write_scan_csv(&mut csv, &records)?;
    let summary = json!({ "records": to_value(&records) });
    Ok((summary, vec![Artifact::bytes("scan.csv", csv)]))
}

fn crossing(targets: &[(usize, (f64, f64))], tol: f64, solver: &SolverConfig) -> Result<(Value, Vec<Artifact>)> {
    let found = targets
        .par_iter()
        .map(|&(d, bracket)| find_crossing(d, bracket, tol, solver).map(|p| (d, bracket, p)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut csv = String::from("d,lo,hi,p_star\n");
    let mut rows = Vec::new();
    for (d, (lo, hi), p) in &found {
        csv.push_str(&format!("{d},{lo:e},{hi:e},{p:e}\n"));
        rows.push(json!({ "d": d, "bracket": [lo, hi], "p_star": p }));
    }
    Ok((json!({ "tol": tol, "crossings": rows }), vec![Artifact::text("crossings.csv", csv)]))
}

fn identities(d: usize, p: f64, tol: f64, solver: &SolverConfig) -> Result<(Value, Vec<Artifact>)> {
    let q = solve_ground_state(d, p, solver)?;
    let scope = if d == 2 && p == 2.0 { AuditScope::Full } else { AuditScope::General };
    let report = audit_identities(&q, tol, scope)?;
    let summary = json!({ "all_pass": report.all_pass(), "report": to_value(&report) });
    Ok((summary.clone(), vec![Artifact::text("identities.json", pretty(&summary))]))
}

fn dispersion(samples: usize) -> Result<(Value, Vec<Artifact>)> {
    let angle = min_group_angle();
    let mut csv = String::from("ratio,tan_angle,angle\n");
    for i in 0..samples {
        let r = 10f64.powf(-2.0 + 4.0 * i as f64 / (samples - 1) as f64);
        let t = group_tan(r);
        csv.push_str(&format!("{r:e},{t:e},{:e}\n", t.atan()));
    }
    let summary = json!({
        "min_group_angle": angle,
        "pi_over_3": PI / 3.0,
        "angle_error": angle - PI / 3.0,
        "min_group_ratio": min_group_ratio(),
        "ckz_on_cone": ckz_symbol(WaveVector::new(1.0, 3f64.sqrt())),
    });
    Ok((summary, vec![Artifact::text("group_angle.csv", csv)]))
}

fn planar(solver: &SolverConfig) -> Result<GroundState> {
    Ok(solve_ground_state(2, 2.0, solver)?)
}

/// Wraps a center into the box so that the periodic sampling sees it.
fn wrap(bx: Box2D, center: (f64, f64)) -> (f64, f64) {
    (center.0.rem_euclid(bx.l1), center.1.rem_euclid(bx.l2))
}

fn record(u0: &Field2D, flow: &FlowSetup) -> Result<SnapshotRecorder> {
    let mut rec = SnapshotRecorder::default();
    evolve(u0, &flow.params, &mut [&mut rec])?;
    Ok(rec)
}

fn snapshot_bytes(u: &Field2D, t: f64) -> Result<Vec<u8>> {
    csv_bytes(|b| write_snapshot(b, u, t))
}

fn evolve_soliton(c: f64, center: (f64, f64), flow: &FlowSetup) -> Result<(Value, Vec<Artifact>)> {
    let q = planar(&flow.solver)?;
    let bx = flow.bx;
    let sp = Spectral2D::new(bx);
    let u0 = init_soliton_field(bx, &q, c, center)?;

    // Recovery of the planted parameters from a displaced guess.
    let guess = ModulationState::guess(0.0, 1.05 * c, (center.0 + 0.3, center.1 - 0.2));
    let fit = fit_modulation(&u0, &q, &guess, flow.tol)?;
    let refit = fit_modulation(&u0, &q, &fit, flow.tol)?;
    let idempotence = (refit.c - fit.c).abs().max((refit.rho1 - fit.rho1).abs()).max((refit.rho2 - fit.rho2).abs());

    let rec = record(&u0, flow)?;
    let mods = track_modulation(&rec.frames, &q, &fit, flow.tol)?;
    let (m0, e0) = (mass(&u0), energy_with(&u0, 2.0, &sp));
    let mut series = String::from("t,mass,energy,c,rho1,rho2\n");
    let (mut dm, mut de) = (0.0_f64, 0.0_f64);
    for ((t, u), m) in rec.frames.iter().zip(&mods) {
        let (mt, et) = (mass(u), energy_with(u, 2.0, &sp));
        dm = dm.max((mt - m0).abs() / m0);
        de = de.max((et - e0).abs() / e0.abs());
        series.push_str(&format!("{t:e},{mt:e},{et:e},{:e},{:e},{:e}\n", m.c, m.rho1, m.rho2));
    }
    // Displacement over every pair of frames 5 time units apart.
    let mut window_error = 0.0_f64;
    for a in &mods {
        if let Some(b) = mods.iter().find(|b| (b.t - a.t - 5.0).abs() < 1e-9) {
            window_error = window_error.max((b.rho1 - a.rho1 - 5.0 * c).abs());
        }
    }
    let last = mods.last().expect("at least one frame");
    let speed = if last.t > 0.0 { (last.rho1 - mods[0].rho1) / last.t } else { f64::NAN };

    let (tf, uf) = rec.frames.last().expect("at least one frame");
    let summary = json!({
        "c": c,
        "center": [center.0, center.1],
        "h1": bx.h1(),
        "mass0": m0,
        "energy0": e0,
        "energy_mass_ratio0": e0 / m0,
        "max_rel_mass_drift": dm,
        "max_rel_energy_drift": de,
        "mean_speed": speed,
        "max_window5_displacement_error": window_error,
        "max_speed_drift": mods.iter().map(|m| (m.c - c).abs()).fold(0.0, f64::max),
        "planted_fit": {
            "c": fit.c,
            "rho": [fit.rho1, fit.rho2],
            "c_error": (fit.c - c).abs(),
            "rho_error": (fit.rho1 - center.0).abs().max((fit.rho2 - center.1).abs()),
            "residuals": fit.ortho_residuals,
            "idempotence": idempotence,
        },
    });
    let artifacts = vec![
        Artifact::text("series.csv", series),
        Artifact::bytes("modulation.csv", csv_bytes(|b| write_modulation_csv(b, &mods))?),
        Artifact::bytes("final.bin", snapshot_bytes(uf, *tf)?),
    ];
    Ok((summary, artifacts))
}

/// Removes the components along `basis` (Gram–Schmidt in `L²`).
fn orthogonalize(v: &Field2D, basis: &[Field2D]) -> Field2D {
    let mut ortho: Vec<Field2D> = Vec::new();
    for b in basis {
        let mut e = b.clone();
        for o in &ortho {
            e = e.axpy(-e.dot(o) / o.dot(o), o);
        }
        ortho.push(e);
    }
    let mut out = v.clone();
    for o in &ortho {
        out = out.axpy(-out.dot(o) / o.dot(o), o);
    }
    out
}

fn gaussian(bx: Box2D, center: (f64, f64), width: f64) -> Field2D {
    Field2D::from_fn(bx, |x, y| (-((x - center.0).powi(2) + (y - center.1).powi(2)) / (2.0 * width * width)).exp())
}

fn rel_sup(a: &Field2D, b: &Field2D) -> f64 {
    a.axpy(-1.0, b).sup_norm() / b.sup_norm()
}

fn evolve_linearized(m: f64, flow: &FlowSetup) -> Result<(Value, Vec<Artifact>)> {
    let q = planar(&flow.solver)?;
    let bx = flow.bx;
    let sp = Spectral2D::new(bx);
    let center = (0.5 * bx.l1, 0.5 * bx.l2);
    let bg = init_soliton_field(bx, &q, 1.0, center)?;
    let (g1, g2) = sp.gradient(&bg);
    let generic = orthogonalize(&gaussian(bx, (center.0 + 0.5, center.1 - 0.5), 1.0), &[g1.clone(), g2.clone(), bg.clone()]);

    let runs: Vec<Vec<(f64, f64)>> = [(0usize, &g1), (1, &g2), (2, &generic)]
        .par_iter()
        .map(|&(k, eta0)| -> Result<Vec<(f64, f64)>> {
            let mut out = Vec::new();
            let mut obs = |t: f64, u: &Field2D| {
                let v = if k < 2 {
                    rel_sup(u, eta0)
                } else {
                    let w: f64 = (0..bx.len())
                        .map(|idx| u.values[idx].powi(2) * psi(m, bx.x1(idx / bx.n2) - center.0))
                        .sum();
                    w * bx.cell_area()
                };
                out.push((t, v));
            };
            linearized_evolve(eta0, &bg, 1.0, 2.0, &flow.params, &mut [&mut obs])?;
            Ok(out)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut csv = String::from("t,drift_d1,drift_d2,weighted_mass\n");
    for i in 0..runs[0].len() {
        csv.push_str(&format!("{:e},{:e},{:e},{:e}\n", runs[0][i].0, runs[0][i].1, runs[1][i].1, runs[2][i].1));
    }
    let worst = |r: &[(f64, f64)]| r.iter().map(|x| x.1).fold(0.0, f64::max);
    let weighted: Vec<f64> = runs[2].iter().map(|x| x.1).collect();
    let summary = json!({
        "c0": 1.0,
        "M": m,
        "max_drift_d1": worst(&runs[0]),
        "max_drift_d2": worst(&runs[1]),
        "weighted_mass": weighted,
        "weighted_mass_strictly_decreasing": weighted.windows(2).all(|w| w[1] < w[0]),
    });
    Ok((summary, vec![Artifact::text("linearized.csv", csv)]))
}

fn h1_scaled(sp: &Spectral2D, f: &Field2D, size: f64) -> Field2D {
    let norm = sp.h1_norm(f);
    if norm == 0.0 {
        f.clone()
    } else {
        f.scaled(size / norm)
    }
}

fn evolve_multisoliton(speeds: &[f64], l: f64, eps: f64, a: f64, flow: &FlowSetup) -> Result<(Value, Vec<Artifact>)> {
    let q = planar(&flow.solver)?;
    let bx = flow.bx;
    let sp = Spectral2D::new(bx);
    let x2 = 0.5 * bx.l2;
    let positions: Vec<(f64, f64)> = (0..speeds.len()).map(|j| (0.25 * bx.l1 + j as f64 * l, x2)).collect();
    let mut u0 = Field2D::zeros(bx);
    for (c, pos) in speeds.iter().zip(&positions) {
        u0 = u0.axpy(1.0, &init_soliton_field(bx, &q, *c, *pos)?);
    }
    let gap = 0.5 * (positions[0].0 + positions[1].0);
    u0 = u0.axpy(1.0, &h1_scaled(&sp, &gaussian(bx, (gap - 0.5, x2 + 1.0), 1.0), eps));
    let interfaces: Vec<f64> = positions.windows(2).map(|w| 0.5 * (w[0].0 + w[1].0)).collect();

    let rec = record(&u0, flow)?;
    let tracks = speeds
        .par_iter()
        .zip(&positions)
        .map(|(c, pos)| track_modulation(&rec.frames, &q, &ModulationState::guess(0.0, *c, *pos), flow.tol))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let mut distances = Vec::with_capacity(rec.frames.len());
    let mut partition_csv = String::from("t");
    for j in 0..speeds.len() {
        partition_csv.push_str(&format!(",M{}", j + 1));
    }
    partition_csv.push('\n');
    let mut partitions = Vec::new();
    for (k, (t, u)) in rec.frames.iter().enumerate() {
        let mut sum = Field2D::zeros(bx);
        for track in &tracks {
            let s = &track[k];
            sum = sum.axpy(1.0, &init_soliton_field(bx, &q, s.c, wrap(bx, s.rho()))?);
        }
        distances.push((*t, sp.h1_norm(&u.axpy(-1.0, &sum))));
        let pm = partition_masses(u, speeds, &interfaces, *t, a)?;
        partition_csv.push_str(&format!("{t:e}"));
        for m in &pm.masses {
            partition_csv.push_str(&format!(",{m:e}"));
        }
        partition_csv.push('\n');
        partitions.push(pm);
    }
    let d0 = distances[0].1;
    let dmax = distances.iter().map(|d| d.1).fold(0.0, f64::max);
    let drift: Vec<f64> = tracks
        .iter()
        .map(|tr| tr.iter().map(|s| (s.c - tr[0].c).abs() / tr[0].c).fold(0.0, f64::max))
        .collect();
    let m0 = partitions[0].masses[0];
    let summary = json!({
        "speeds": speeds,
        "L": l,
        "positions": positions.iter().map(|p| [p.0, p.1]).collect::<Vec<_>>(),
        "decoupled": is_decoupled(speeds, &positions, l),
        "eps": eps,
        "fitted_initial_speeds": tracks.iter().map(|tr| tr[0].c).collect::<Vec<_>>(),
        "max_rel_speed_drift": drift,
        "h1_distance_initial": d0,
        "h1_distance_max": dmax,
        "h1_distance_ratio": dmax / d0,
        "tail_speed_sums": partitions[0].d,
        "partition_over_mass_final": partitions.last().expect("frames").masses.iter().map(|m| m / m0).collect::<Vec<_>>(),
    });
    let mut dist_csv = Vec::new();
    write_series_csv(&mut dist_csv, &distances)?;
    let mut artifacts = vec![
        Artifact::bytes("h1_distance.csv", dist_csv),
        Artifact::text("partition.csv", partition_csv),
    ];
    for (j, tr) in tracks.iter().enumerate() {
        artifacts.push(Artifact::bytes(format!("modulation_{}.csv", j + 1), csv_bytes(|b| write_modulation_csv(b, tr))?));
    }
    Ok((summary, artifacts))
}

/// Largest `F(t0) - F(t)` over `t <= t0`, clamped at zero.
fn positive_defect(samples: &[MonotonicitySample]) -> f64 {
    let mut worst = 0.0_f64;
    for s0 in samples.iter().filter(|s| s.t == s.t0) {
        for s in samples.iter().filter(|s| s.t0 == s0.t0 && s.t <= s0.t0) {
            worst = worst.max(s0.value - s.value);
        }
    }
    worst
}

/// Least-squares slope of `ln D` against `y0`, negated. `NaN` when some
/// defect is not positive.
fn decay_rate(y0: &[f64], d: &[f64]) -> f64 {
    if d.iter().any(|v| !(*v > 0.0)) || y0.len() < 2 {
        return f64::NAN;
    }
    let n = y0.len() as f64;
    let my = y0.iter().sum::<f64>() / n;
    let ml = d.iter().map(|v| v.ln()).sum::<f64>() / n;
    let num: f64 = y0.iter().zip(d).map(|(y, v)| (y - my) * (v.ln() - ml)).sum();
    let den: f64 = y0.iter().map(|y| (y - my).powi(2)).sum();
    -num / den
}

fn probe_suite(m: f64, y0s: &[f64], thetas: &[f64], eps: f64, flow: &FlowSetup) -> Result<(Value, Vec<Artifact>)> {
    let q = planar(&flow.solver)?;
    let bx = flow.bx;
    let sp = Spectral2D::new(bx);
    let center = (0.25 * bx.l1, 0.5 * bx.l2);
    let sol = init_soliton_field(bx, &q, 1.0, center)?;
    let (a1, a2) = (center.0 + 1.0, center.1 + 0.5);
    let pert = Field2D::from_fn(bx, |x, y| (x - a1) * (-((x - a1).powi(2) + (y - a2).powi(2)) / 2.0).exp());
    let u0 = sol.axpy(1.0, &h1_scaled(&sp, &pert, eps));

    let rec = record(&u0, flow)?;
    let mods = track_modulation(&rec.frames, &q, &ModulationState::guess(0.0, 1.0, center), flow.tol)?;

    // (kind label, theta) for every probe family.
    let mut families: Vec<(&str, Option<f64>)> = vec![("I", None)];
    families.extend(thetas.iter().map(|&th| ("oblique", Some(th))));
    families.push(("J", None));

    let jobs: Vec<(usize, f64)> = (0..families.len()).flat_map(|f| y0s.iter().map(move |&y| (f, y))).collect();
    let sampled = jobs
        .par_iter()
        .map(|&(f, y0)| -> Result<Vec<MonotonicitySample>> {
            let mut out = Vec::new();
            for (k0, anchor) in mods.iter().enumerate() {
                for (t, u) in &rec.frames[..=k0] {
                    out.push(match families[f] {
                        ("I", _) => localized_mass_i(u, anchor, *t, y0, m)?,
                        ("J", _) => localized_energy_j(u, &sp, anchor, *t, y0, m)?,
                        (_, th) => oblique_mass(u, anchor, *t, y0, m, th.unwrap_or(0.0))?,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut all = Vec::new();
    let mut family_reports = Vec::new();
    for (f, (label, theta)) in families.iter().enumerate() {
        let defects: Vec<f64> = (0..y0s.len()).map(|i| positive_defect(&sampled[f * y0s.len() + i])).collect();
        family_reports.push(json!({
            "kind": label,
            "theta": theta,
            "defects": defects,
            "decay_rate": decay_rate(y0s, &defects),
        }));
        for i in 0..y0s.len() {
            all.extend_from_slice(&sampled[f * y0s.len() + i]);
        }
    }

    let refused = matches!(
        oblique_mass(&rec.frames[0].1, &mods[0], 0.0, y0s[0], m, PI / 3.0),
        Err(FlowError::AngleOutOfRange { .. })
    );
    let mut k_ratio = 0.0_f64;
    for w in mods.windows(2) {
        let dt = w[1].t - w[0].t;
        let drift = ((w[1].rho1 - w[0].rho1) / dt - 0.5 * (w[0].c + w[1].c)).abs() + ((w[1].rho2 - w[0].rho2) / dt).abs();
        k_ratio = k_ratio.max(drift / w[1].eta_h1);
    }
    let summary = json!({
        "M": m,
        "y0": y0s,
        "eps": eps,
        "families": family_reports,
        "predicted_rate": 1.0 / m,
        "refuses_pi_over_3": refused,
        "max_speed_drift": mods.iter().map(|s| (s.c - 1.0).abs()).fold(0.0, f64::max),
        "modulation_drift_over_eta": k_ratio,
    });
    let artifacts = vec![
        Artifact::bytes("probes.csv", csv_bytes(|b| write_probe_csv(b, &all))?),
        Artifact::bytes("modulation.csv", csv_bytes(|b| write_modulation_csv(b, &mods))?),
    ];
    Ok((summary, artifacts))
}

fn coercivity(a: f64, bx: Box2D, k: usize, seed: u64, solver: &SolverConfig) -> Result<(Value, Vec<Artifact>)> {
    let q = planar(solver)?;
    let modes = [Projection::Full, Projection::TranslationsOnly, Projection::None]
        .par_iter()
        .map(|&proj| -> Result<Vec<f64>> {
            let form = WeightedForm::new(&q, a, bx, proj)?;
            Ok(lowest_modes(&form, k, seed)?.0)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let summary = json!({
        "A": a,
        "box": [bx.l1, bx.l2],
        "grid": [bx.n1, bx.n2],
        "k": k,
        "projected_min": modes[0][0],
        "translations_only_min": modes[1][0],
        "unprojected_min": modes[2][0],
        "projected_modes": modes[0],
        "translations_only_modes": modes[1],
        "unprojected_modes": modes[2],
    });
    let mut csv = String::from("projection,index,value\n");
    for (name, vals) in ["full", "translations_only", "none"].iter().zip(&modes) {
        for (i, v) in vals.iter().enumerate() {
            csv.push_str(&format!("{name},{i},{v:e}\n"));
        }
    }
    Ok((summary, vec![Artifact::text("coercivity.csv", csv)]))
}
