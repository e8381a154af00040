//! Acceptance suite: one preset per criterion, run through the same code
//! path as `zklab preset <name>`, one PASS/FAIL line each.

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use serde_json::Value;
use zklab::{preset, run, RunOptions};
use zklab_core::grid::integrate_weighted;
use zklab_core::{lambda_q, profile_io, radial_quadrature, rescale_profile};

type Check = Result<(bool, String), String>;

fn results(name: &str, dir: &Path) -> Result<Value, String> {
    let cfg = preset(name).map_err(|e| e.to_string())?;
    let report = run(&cfg, &dir.join(name), RunOptions::default()).map_err(|e| format!("{}: {e}", e.class()))?;
    Ok(report.summary["results"].clone())
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn nums(v: &Value) -> Vec<f64> {
    v.as_array().map(|a| a.iter().map(num).collect()).unwrap_or_default()
}

fn spectral_value(dir: &Path) -> Check {
    let r = results("appendix-a-d2", dir)?;
    let nu = num(&r["records"][0]["nu"]);
    Ok(((nu + 0.476741).abs() <= 1e-3, format!("nu(2, 2) = {nu:.6}, expected -0.476741 +- 1e-3")))
}

fn crossings(dir: &Path) -> Check {
    let r = results("crossings", dir)?;
    let expected = [(1, 2.8899), (2, 2.1491), (3, 1.8333)];
    let rows = r["crossings"].as_array().cloned().unwrap_or_default();
    let mut ok = rows.len() == expected.len();
    let mut parts = Vec::new();
    for (row, (d, want)) in rows.iter().zip(expected) {
        let p = num(&row["p_star"]);
        ok &= row["d"].as_u64() == Some(d) && (p - want).abs() <= 0.01;
        parts.push(format!("d={d}: {p:.4} (want {want})"));
    }
    Ok((ok, parts.join(", ")))
}

fn census(dir: &Path) -> Check {
    let r = results("census", dir)?;
    let recs = r["records"].as_array().cloned().unwrap_or_default();
    let bad: Vec<String> = recs
        .iter()
        .filter(|x| x["neg_eigs"].as_u64() != Some(1))
        .map(|x| format!("(d={}, p={:.2})", x["d"], num(&x["p"])))
        .collect();
    // Sign change of nu on the d = 2 scan, for the record.
    let d2: Vec<(f64, f64)> = recs
        .iter()
        .filter(|x| x["d"].as_u64() == Some(2))
        .map(|x| (num(&x["p"]), num(&x["nu"])))
        .collect();
    let flip = d2.windows(2).find(|w| w[0].1 < 0.0 && w[1].1 > 0.0).map(|w| (w[0].0, w[1].0));
    Ok((
        !recs.is_empty() && bad.is_empty(),
        format!(
            "{} scan points, one negative eigenvalue at all but {:?}; d=2 sign change in {:?}",
            recs.len(),
            bad,
            flip
        ),
    ))
}

fn identity_suite(dir: &Path) -> Check {
    let r = results("identities-d2", dir)?;
    let items = r["report"]["items"].as_array().cloned().unwrap_or_default();
    let item = |name: &str| items.iter().find(|i| i["name"] == name).cloned().unwrap_or(Value::Null);
    let ratio = item("d_energy_mass_ratio");
    let pairing = item("e_q_lambda_q");
    let mass = num(&item("b_mass_cubic")["lhs"]);
    let c22 = num(&pairing["rhs"]) / mass;
    let worst = items.iter().map(|i| num(&i["rel_err"])).fold(0.0, f64::max);
    let ok = items.len() == 6
        && r["all_pass"] == true
        && ratio["pass"] == true
        && pairing["pass"] == true
        && (c22 - 0.5).abs() < 1e-12
        && worst <= 1e-5;
    Ok((
        ok,
        format!(
            "{} items, worst rel err {worst:.1e}, H0/M0 = {:.8}, int Q LQ / int Q^2 = {:.8}",
            items.len(),
            num(&ratio["lhs"]),
            num(&pairing["lhs"]) / mass
        ),
    ))
}

fn one_d_oracle(dir: &Path) -> Check {
    results("oracle-d1", dir)?;
    let q = profile_io::load(&dir.join("oracle-d1").join("profile.txt")).map_err(|e| e.to_string())?;
    let sech_q = |r: f64| 1.5 / (r / 2.0).cosh().powi(2);
    let sech_dq = |r: f64| -1.5 * (r / 2.0).tanh() / (r / 2.0).cosh().powi(2);
    let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { (a - b).abs() / b.abs() };
    let mut worst: f64 = 0.0;
    let mut note = |name: &str, e: f64, at: &mut Vec<String>| {
        worst = worst.max(e);
        if e > 1e-6 {
            at.push(format!("{name}: {e:.1e}"));
        }
    };
    let mut failures = Vec::new();
    let lq = lambda_q(&q);
    let q2 = rescale_profile(&q, 2.0).map_err(|e| e.to_string())?;
    for &r in &[0.0, 0.3, 1.0, 2.0, 2.5, 5.0, 10.0, 17.3] {
        note(&format!("Q({r})"), rel(q.value_at(r), sech_q(r)), &mut failures);
        if r > 0.0 {
            note(&format!("Q'({r})"), rel(q.profile.deriv_at(r), sech_dq(r)), &mut failures);
        }
        note(&format!("LQ({r})"), rel(lq.value_at(r), sech_q(r) + 0.5 * r * sech_dq(r)), &mut failures);
        note(&format!("Q_2({r})"), rel(q2.value_at(r), 2.0 * sech_q(2f64.sqrt() * r)), &mut failures);
        note(&format!("soliton_value({r})"), rel(q.soliton_value(3.0, r), 3.0 * sech_q(3f64.sqrt() * r)), &mut failures);
    }
    let grid = q.grid().clone();
    let cube: Vec<f64> = q.values().iter().map(|v| v.powi(3)).collect();
    let grad: Vec<f64> = q.derivs().iter().map(|v| v * v).collect();
    note("int Q", rel(radial_quadrature(&q.profile, 0), 3.0), &mut failures);
    note("int Q^2", rel(q.radial_mass(), 3.0), &mut failures);
    note("int Q^3", rel(integrate_weighted(&grid, &cube, 0), 18.0 / 5.0), &mut failures);
    note("int Q'^2", rel(integrate_weighted(&grid, &grad, 0), 3.0 / 5.0), &mut failures);
    Ok((failures.is_empty(), format!("worst relative error {worst:.1e} {failures:?}")))
}

fn cone_angle(dir: &Path) -> Check {
    let r = results("cone-angle", dir)?;
    let angle = num(&r["min_group_angle"]);
    let k = num(&r["ckz_on_cone"]);
    Ok((
        (angle - PI / 3.0).abs() <= 1e-9 && k.abs() <= 16.0 * f64::EPSILON,
        format!("min angle - pi/3 = {:.1e}, K(1, sqrt 3) = {k:.1e}", angle - PI / 3.0),
    ))
}

fn conservation(dir: &Path) -> Check {
    let r = results("conservation", dir)?;
    let (dm, dh) = (num(&r["max_rel_mass_drift"]), num(&r["max_rel_energy_drift"]));
    let (err, h) = (num(&r["max_window5_displacement_error"]), num(&r["h1"]));
    Ok((
        dm <= 1e-8 && dh <= 1e-6 && err <= h,
        format!("dM/M = {dm:.1e}, dH/H = {dh:.1e}, 5-unit displacement error {err:.1e} (h = {h})"),
    ))
}

fn linear_liouville(dir: &Path) -> Check {
    let r = results("linear-liouville", dir)?;
    let (a, b) = (num(&r["max_drift_d1"]), num(&r["max_drift_d2"]));
    let w = nums(&r["weighted_mass"]);
    Ok((
        a <= 1e-6 && b <= 1e-6,
        format!(
            "translation modes drift {a:.1e}, {b:.1e}; generic weighted mass {:.3e} -> {:.3e}, strictly decreasing: {} (recorded)",
            w.first().copied().unwrap_or(f64::NAN),
            w.last().copied().unwrap_or(f64::NAN),
            r["weighted_mass_strictly_decreasing"]
        ),
    ))
}

fn monotonicity(dir: &Path) -> Check {
    let r = results("monotonicity", dir)?;
    let m = num(&r["M"]);
    let y0 = nums(&r["y0"]);
    let mut ok = r["refuses_pi_over_3"] == true;
    let mut parts = Vec::new();
    let mut seen = (false, false, Vec::new());
    for fam in r["families"].as_array().cloned().unwrap_or_default() {
        let d = nums(&fam["defects"]);
        let kind = fam["kind"].as_str().unwrap_or("?").to_string();
        match kind.as_str() {
            "I" => seen.0 = true,
            "J" => seen.1 = true,
            _ => seen.2.push(num(&fam["theta"])),
        }
        // D(y0 + dy) within a factor 3 of D(y0) e^{-dy/M}, i.e. halving per M ln 2.
        let mut fam_ok = d.len() == y0.len();
        let mut ratios = Vec::new();
        for i in 1..d.len() {
            let f = (-(y0[i] - y0[i - 1]) / m).exp();
            fam_ok &= d[i] <= 3.0 * f * d[i - 1] && d[i] >= f / 3.0 * d[i - 1];
            if d[i - 1] > 0.0 {
                ratios.push(format!("{:.3}", d[i] / d[i - 1]));
            }
        }
        ok &= fam_ok;
        let label = match kind.as_str() {
            "oblique" => format!("oblique {:.4}", num(&fam["theta"])),
            _ => kind.clone(),
        };
        if d.iter().all(|x| *x == 0.0) {
            parts.push(format!("{label}: defects identically 0"));
        } else {
            parts.push(format!("{label}: ratios {}", ratios.join("/")));
        }
    }
    let thetas_ok = [0.0, PI / 6.0, PI / 4.0].iter().all(|t| seen.2.iter().any(|s| (s - t).abs() < 1e-12));
    ok &= seen.0 && seen.1 && thetas_ok;
    Ok((
        ok,
        format!(
            "expected ratio {:.3}; {}; pi/3 refused: {}",
            (-5.0 / m).exp(),
            parts.join("; "),
            r["refuses_pi_over_3"]
        ),
    ))
}

fn coercivity(dir: &Path) -> Check {
    let r = results("coercivity", dir)?;
    let (proj, unproj) = (num(&r["projected_min"]), num(&r["unprojected_min"]));
    Ok((
        proj > 0.0 && unproj < 0.0,
        format!("A = {}: projected min {proj:.4}, unprojected min {unproj:.4}", num(&r["A"])),
    ))
}

fn modulation(dir: &Path) -> Check {
    let r = results("modulation", dir)?;
    let fit = &r["planted_fit"];
    let (c, rho, idem) = (num(&fit["c_error"]), num(&fit["rho_error"]), num(&fit["idempotence"]));
    Ok((
        c <= 1e-8 && rho <= 1e-8 && idem <= 1e-8,
        format!("|dc| = {c:.1e}, |drho| = {rho:.1e}, refit change {idem:.1e}"),
    ))
}

fn two_solitons(dir: &Path) -> Check {
    let r = results("nsoliton-2", dir)?;
    let drift = nums(&r["max_rel_speed_drift"]);
    let ratio = num(&r["h1_distance_ratio"]);
    let ok = r["decoupled"] == true && drift.len() == 2 && drift.iter().all(|d| *d <= 1e-2) && ratio < 5.0;
    Ok((
        ok,
        format!(
            "decoupled: {}, speed drift {:?}, sup H1 distance / initial = {ratio:.3}",
            r["decoupled"],
            drift.iter().map(|d| format!("{d:.1e}")).collect::<Vec<_>>()
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn(&Path) -> Check); 12] = [
        ("spectral value", spectral_value),
        ("zero crossings", crossings),
        ("negative eigenvalue census", census),
        ("identity suite", identity_suite),
        ("one-dimensional oracle", one_d_oracle),
        ("dispersion geometry", cone_angle),
        ("evolver conservation", conservation),
        ("linearized flow", linear_liouville),
        ("monotonicity scaling", monotonicity),
        ("coercivity gate", coercivity),
        ("modulation fixed point", modulation),
        ("two-soliton stability", two_solitons),
    ];
    // Filter arguments from `cargo test` are ignored; the suite always runs whole.
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("cannot create scratch directory: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match check(dir.path()) {
            Ok(x) => x,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {name}: {detail} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
