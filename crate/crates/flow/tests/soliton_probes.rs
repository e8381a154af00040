mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;
use zklab_core::lambda_q;
use zklab_flow::coercivity::projected_quotient;
use zklab_flow::evolve::{sample_periodic_radial, soliton_gradient};
use zklab_flow::probes::{is_decoupled, tail_speed_sums, track_modulation, write_modulation_csv, write_probe_csv};
use zklab_flow::weights::{phi, phi_deriv, psi, psi_deriv, psi_third_deriv, varphi};
use zklab_flow::{
    coercivity_min_rayleigh, coercivity_min_rayleigh_with, energy, evolve, fit_modulation, init_soliton_field,
    localized_energy_j, localized_mass_i, mass, min_image, oblique_mass, partition_masses, weight_deriv, weight_eval,
    Box2D, EvolveParams, Field2D, FlowError, ModulationState, Projection, SnapshotRecorder, Spectral2D, WeightKind,
    WeightParams,
};

#[test]
fn psi_properties() {
    for l in [4.0, 8.0, 13.0] {
        assert_eq!(psi(l, 0.0), 0.5);
        let mut prev = 0.0;
        for k in -400..=400 {
            let y = k as f64 * 0.1;
            let v = psi(l, y);
            assert!(v > prev || y < -30.0 * l / 4.0);
            prev = v;
            assert!((psi(l, -y) - (1.0 - v)).abs() < 1e-15);
            assert!(psi_third_deriv(l, y).abs() <= psi_deriv(l, y) / (l * l) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn phi_properties() {
    for k in 0..=1000 {
        let x = k as f64 * 0.01;
        let v = phi(x);
        assert!(v > 0.0 && v <= 1.0);
        assert!(v >= (-x).exp() * (1.0 - 1e-14) && v <= 3.0 * (-x).exp());
        assert_eq!(phi(-x), v);
        assert!(phi_deriv(x) <= 0.0);
    }
    // C² at the joins: the gap between second differences on either side
    // closes linearly with the stencil size.
    for x0 in [1.0, 2.0] {
        let gap = |h: f64| {
            let d2 = |x: f64| (phi(x + h) - 2.0 * phi(x) + phi(x - h)) / (h * h);
            (d2(x0 - 2.0 * h) - d2(x0 + 2.0 * h)).abs()
        };
        let (g1, g2) = (gap(2e-4), gap(1e-4));
        assert!(g2 < 0.6 * g1 && g2 < 0.1, "{g1} {g2}");
    }
}

#[test]
fn varphi_properties() {
    for a in [1.0, 4.0, 10.0] {
        let w = WeightParams::new(WeightKind::Varphi, a).unwrap();
        for k in -500..=500 {
            let x = k as f64 * 0.05 * a;
            let v = weight_eval(&w, x);
            if x.abs() <= a {
                assert!((v - x).abs() < 1e-12 * a);
            }
            assert!(v.abs() <= 3.0 * a);
            assert_eq!(weight_eval(&w, -x), -v);
        }
    }
    // Quadrature of φ from 0 to large x.
    let n = 200_000;
    let xmax = 30.0;
    let h = xmax / n as f64;
    let simpson: f64 = (0..=n)
        .map(|i| {
            let c = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            c * phi(i as f64 * h)
        })
        .sum::<f64>()
        * h
        / 3.0;
    assert!((simpson - varphi(xmax)).abs() < 1e-10);
}

#[test]
fn weight_params_validation() {
    assert!(WeightParams::new(WeightKind::Psi, 3.9).is_err());
    assert!(WeightParams::new(WeightKind::Psi, 4.0).is_ok());
    assert!(WeightParams::new(WeightKind::PhiPrime, 0.5).is_ok());
    assert!(WeightParams::new(WeightKind::Varphi, -1.0).is_err());
    let mut w = WeightParams::new(WeightKind::Psi, 8.0).unwrap();
    w.angle = 1.0;
    w.offset = 2.0;
    assert_eq!(w.argument(3.0, 4.0), 5.0);
}

proptest! {
    #[test]
    fn derivatives_match_differences(kind in 0usize..3, scale in 4.0f64..20.0, y in -60.0f64..60.0) {
        let kind = [WeightKind::Psi, WeightKind::PhiPrime, WeightKind::Varphi][kind];
        let w = WeightParams::new(kind, scale).unwrap();
        let h = 1e-5 * scale;
        let fd = (weight_eval(&w, y + h) - weight_eval(&w, y - h)) / (2.0 * h);
        prop_assert!((fd - weight_deriv(&w, y)).abs() < 1e-7);
    }
}

fn fit_box() -> Box2D {
    square(40.0, 128)
}

#[test]
fn fit_recovers_planted_parameters() {
    let q = planar();
    let bx = fit_box();
    for (c, r1, r2) in [(1.0, 10.3, 20.7), (1.7, 3.21, 35.0), (1.2, 0.0, 0.0)] {
        let u = init_soliton_field(bx, q, c, (r1, r2)).unwrap();
        let guess = ModulationState::guess(0.0, 1.1 * c, (r1 + 0.4, r2 - 0.3));
        let m = fit_modulation(&u, q, &guess, 1e-10).unwrap();
        assert!((m.c - c).abs() < 1e-8);
        assert!(min_image(m.rho1 - r1, bx.l1).abs() < 1e-8);
        assert!(min_image(m.rho2 - r2, bx.l2).abs() < 1e-8);
        assert!(m.ortho_residuals.iter().all(|r| r.abs() <= 1e-10));
        // Idempotent.
        let again = fit_modulation(&u, q, &m, 1e-10).unwrap();
        assert!((again.c - m.c).abs() < 1e-10);
        assert!((again.rho1 - m.rho1).abs() < 1e-10 && (again.rho2 - m.rho2).abs() < 1e-10);
    }
}

/// Orthogonality residuals by direct sampling at `(c, ρ)`, without
/// spectral shifts.
fn direct_residuals(u: &Field2D, c: f64, rho: (f64, f64)) -> [f64; 3] {
    let q = planar();
    let qc = sample_periodic_radial(u.bx, rho, |r| q.soliton_value(c, r));
    let (g1, g2) = soliton_gradient(q, c, rho, u.bx);
    let eta = u.axpy(-1.0, &qc);
    [eta.dot(&g1), eta.dot(&g2), eta.dot(&qc)]
}

#[test]
fn fit_of_perturbed_soliton_matches_grid_search() {
    let q = planar();
    let bx = fit_box();
    let sp = Spectral2D::new(bx);
    let sol = init_soliton_field(bx, q, 1.0, (0.0, 0.0)).unwrap();
    let pert = Field2D::from_fn(bx, |x, y| {
        let (x, y) = (min_image(x, bx.l1), min_image(y, bx.l2));
        (-(x - 0.7).powi(2) / 3.0 - (y + 0.4).powi(2) / 2.0).exp() * (1.0 + 0.5 * x)
    });
    let u = sol.axpy(1.0, &h1_scaled(&sp, &pert, 1e-3));
    let m = fit_modulation(&u, q, &ModulationState::guess(0.0, 1.0, (0.0, 0.0)), 1e-12).unwrap();
    assert!((m.c - 1.0).abs() < 1e-2 && m.rho1.abs() < 1e-2 && m.rho2.abs() < 1e-2);
    // Brute-force search for the smallest residual vector on a lattice
    // around the fit.
    let step = 2.5e-4;
    let mut best = (f64::INFINITY, (0, 0, 0));
    for a in -3i32..=3 {
        for b in -3i32..=3 {
            for d in -3i32..=3 {
                let r = direct_residuals(
                    &u,
                    m.c + a as f64 * step,
                    (m.rho1 + b as f64 * step, m.rho2 + d as f64 * step),
                );
                let norm = r.iter().map(|x| x * x).sum::<f64>();
                if norm < best.0 {
                    best = (norm, (a, b, d));
                }
            }
        }
    }
    assert_eq!(best.1, (0, 0, 0));
    let at_fit = direct_residuals(&u, m.c, (m.rho1, m.rho2));
    assert!(at_fit.iter().all(|r| r.abs() < 1e-9), "{at_fit:?}");
}

#[test]
fn fit_far_from_soliton_diverges() {
    let q = planar();
    let bx = fit_box();
    let u = bump(bx, (20.0, 20.0), 1.0).scaled(-3.0);
    let r = fit_modulation(&u, q, &ModulationState::guess(0.0, 1.0, (20.0, 20.0)), 1e-10);
    assert!(matches!(r, Err(FlowError::FitDiverged { .. })), "{r:?}");
    assert!(fit_modulation(&u, q, &ModulationState::guess(0.0, -1.0, (0.0, 0.0)), 1e-10).is_err());
}

#[test]
fn localized_functional_examples() {
    let q = planar();
    let bx = Box2D::new(80.0, 40.0, 256, 128).unwrap();
    let sp = Spectral2D::new(bx);
    let u = init_soliton_field(bx, q, 1.0, (30.0, 20.0)).unwrap();
    let anchor = fit_modulation(&u, q, &ModulationState::guess(2.0, 1.0, (30.0, 20.0)), 1e-10).unwrap();
    let total = mass(&u);
    // The weight tail (2/π) e^{y/M} bounds the far-offset value.
    let tail = |y0: f64, m: f64| 2.0 / PI * (-y0 / m).exp();
    let far = localized_mass_i(&u, &anchor, anchor.t, 30.0, 4.0).unwrap();
    assert!(far.value < 1.1 * tail(30.0, 4.0) * total);
    assert_eq!((far.y0, far.t0, far.theta), (30.0, 2.0, 0.0));
    let farther = localized_mass_i(&u, &anchor, anchor.t, 60.0, 4.0).unwrap();
    assert!(farther.value < 1e-6 * total);
    let half = localized_mass_i(&u, &anchor, anchor.t, 1e-9, 8.0).unwrap();
    assert!((half.value / total - 0.5).abs() < 0.02 * 0.5);
    let h = energy(&u, 2.0);
    let (g1, g2) = sp.gradient(&u);
    let scale = g1.dot(&g1) + g2.dot(&g2) + 2.0 / 3.0 * u.values.iter().map(|v| v.abs().powi(3)).sum::<f64>() * bx.cell_area();
    let j = localized_energy_j(&u, &sp, &anchor, anchor.t, 30.0, 4.0).unwrap();
    assert!(j.value.abs() <= 1.1 * tail(30.0, 4.0) * scale);
    let j = localized_energy_j(&u, &sp, &anchor, anchor.t, 60.0, 4.0).unwrap();
    assert!(j.value.abs() <= 1e-6 * h.abs());
    let zero = localized_energy_j(&Field2D::zeros(bx), &sp, &anchor, 0.0, 5.0, 8.0).unwrap();
    assert_eq!(zero.value, 0.0);
    for y0 in [0.5, 5.0, 12.0] {
        for t in [0.0, 1.5] {
            let a = localized_mass_i(&u, &anchor, t, y0, 8.0).unwrap();
            let b = oblique_mass(&u, &anchor, t, y0, 8.0, 0.0).unwrap();
            assert_eq!(a.value.to_bits(), b.value.to_bits());
        }
    }
    for theta in [PI / 3.0, -PI / 3.0, 1.2] {
        assert!(matches!(
            oblique_mass(&u, &anchor, 0.0, 5.0, 8.0, theta),
            Err(FlowError::AngleOutOfRange { .. })
        ));
    }
    assert!(localized_mass_i(&u, &anchor, 0.0, 5.0, 3.0).is_err());
}

fn positive_defect(values: &[(f64, f64)]) -> f64 {
    values.iter().map(|&(v0, v)| v0 - v).fold(0.0, f64::max)
}

/// Least-squares slope of `ln D` against `y0`, negated.
fn decay_rate(y0: &[f64], d: &[f64]) -> f64 {
    let n = y0.len() as f64;
    let my = y0.iter().sum::<f64>() / n;
    let ml = d.iter().map(|v| v.ln()).sum::<f64>() / n;
    let num: f64 = y0.iter().zip(d).map(|(y, v)| (y - my) * (v.ln() - ml)).sum();
    let den: f64 = y0.iter().map(|y| (y - my).powi(2)).sum();
    -num / den
}

#[test]
fn monotonicity_defects_decay_with_offset() {
    let q = planar();
    let bx = Box2D::new(80.0, 40.0, 256, 128).unwrap();
    let sp = Spectral2D::new(bx);
    let sol = init_soliton_field(bx, q, 1.0, (20.0, 20.0)).unwrap();
    let pert = bump(bx, (21.0, 20.5), 1.0);
    let pert = Field2D::from_fn(bx, |x, _| x - 21.0)
        .values
        .iter()
        .zip(&pert.values)
        .map(|(a, b)| a * b)
        .collect();
    let pert = Field2D::new(bx, pert).unwrap();
    let u0 = sol.axpy(1.0, &h1_scaled(&sp, &pert, 1e-2));
    let mut rec = SnapshotRecorder::default();
    let mut p = EvolveParams::new(0.005, 4.0);
    p.output_every = 100;
    evolve(&u0, &p, &mut [&mut rec]).unwrap();
    let mods = track_modulation(&rec.frames, q, &ModulationState::guess(0.0, 1.0, (20.0, 20.0)), 1e-10).unwrap();
    assert!(mods.iter().all(|m| (m.c - 1.0).abs() < 0.5));

    // |ρ1' - c| + |ρ2'| against the η norm along the track.
    let mut k_ratio = 0.0_f64;
    for w in mods.windows(2) {
        let dt = w[1].t - w[0].t;
        let drift = ((w[1].rho1 - w[0].rho1) / dt - 0.5 * (w[0].c + w[1].c)).abs() + ((w[1].rho2 - w[0].rho2) / dt).abs();
        k_ratio = k_ratio.max(drift / w[1].eta_h1);
    }
    assert!(k_ratio.is_finite());

    let m = 8.0;
    let y0s = [5.0, 10.0, 15.0, 20.0];
    for theta in [None, Some(0.0), Some(PI / 6.0), Some(PI / 4.0)] {
        let mut defects = Vec::new();
        for &y0 in &y0s {
            let mut pairs = Vec::new();
            for (k0, anchor) in mods.iter().enumerate() {
                let eval = |k: usize| {
                    let (t, u) = &rec.frames[k];
                    match theta {
                        None => localized_mass_i(u, anchor, *t, y0, m).unwrap().value,
                        Some(th) => oblique_mass(u, anchor, *t, y0, m, th).unwrap().value,
                    }
                };
                let v0 = eval(k0);
                pairs.extend((0..k0).map(|k| (v0, eval(k))));
            }
            defects.push(positive_defect(&pairs));
        }
        let rate = decay_rate(&y0s, &defects);
        assert!(rate > 1.0 / (3.0 * m) && rate < 3.0 / m, "theta {theta:?}: {defects:?}");
    }

    // J only gains weight from the soliton core as t approaches t0.
    for &y0 in &y0s {
        let mut pairs = Vec::new();
        for (k0, anchor) in mods.iter().enumerate() {
            let (t0, u0) = &rec.frames[k0];
            let v0 = localized_energy_j(u0, &sp, anchor, *t0, y0, m).unwrap().value;
            for (t, u) in &rec.frames[..k0] {
                pairs.push((v0, localized_energy_j(u, &sp, anchor, *t, y0, m).unwrap().value));
            }
        }
        assert!(positive_defect(&pairs) <= 1e-12);
    }
}

#[test]
fn probe_csv_layouts() {
    let s = zklab_flow::MonotonicitySample {
        t: 1.0,
        value: 0.25,
        y0: 5.0,
        t0: 2.0,
        theta: 0.0,
        kind: zklab_flow::ProbeKind::Oblique,
    };
    let mut out = Vec::new();
    write_probe_csv(&mut out, &[s]).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "t,value,y0,t0,theta,kind\n1e0,2.5e-1,5e0,2e0,0e0,oblique\n");
    let mut m = ModulationState::guess(0.5, 1.0, (2.0, -1.0));
    m.ortho_residuals = [1e-12, 0.0, -2e-12];
    m.eta_h1 = 3e-3;
    let mut out = Vec::new();
    write_modulation_csv(&mut out, &[m]).unwrap();
    assert_eq!(
        String::from_utf8(out).unwrap(),
        "t,c,rho1,rho2,res1,res2,res3,eta_h1\n5e-1,1e0,2e0,-1e0,1e-12,0e0,-2e-12,3e-3\n"
    );
}

#[test]
fn partition_of_single_soliton() {
    let q = planar();
    let bx = fit_box();
    let u = init_soliton_field(bx, q, 1.0, (20.0, 20.0)).unwrap();
    let pm = partition_masses(&u, &[1.0], &[], 3.0, 4.0).unwrap();
    assert_eq!(pm.masses, vec![0.5 * mass(&u)]);
    assert_eq!(pm.d, vec![1.0]);
}

#[test]
fn partition_isolates_fast_soliton() {
    let q = planar();
    let bx = Box2D::new(80.0, 40.0, 256, 128).unwrap();
    let t = 2.0;
    let (c1, c2) = (1.0, 2.0);
    let interface = 10.0 + 1.5 * t;
    let slow = init_soliton_field(bx, q, c1, (interface - 15.0, 20.0)).unwrap();
    let fast = init_soliton_field(bx, q, c2, (interface + 15.0, 20.0)).unwrap();
    let u = slow.axpy(1.0, &fast);
    let pm = partition_masses(&u, &[c1, c2], &[10.0], t, 4.0).unwrap();
    let fast_half = 0.5 * c2 * 2.0 * PI * q.radial_mass();
    assert!((pm.masses[1] - fast_half).abs() < 0.01 * fast_half);
    assert_eq!(pm.d, vec![3.0, 2.0]);
    assert!(partition_masses(&u, &[2.0, 1.0], &[10.0], t, 4.0).is_err());
    assert!(partition_masses(&u, &[1.0, 2.0], &[], t, 4.0).is_err());
}

#[test]
fn partition_defect_shrinks_with_separation() {
    // Travelling-wave sum: each soliton translated exactly by c_j t.
    let q = planar();
    let bx = Box2D::new(120.0, 40.0, 256, 64).unwrap();
    let defect = |l: f64| {
        let field = |t: f64| {
            init_soliton_field(bx, q, 1.0, (20.0 + t, 20.0))
                .unwrap()
                .axpy(1.0, &init_soliton_field(bx, q, 2.0, (20.0 + l + 2.0 * t, 20.0)).unwrap())
        };
        let mj = |t: f64| partition_masses(&field(t), &[1.0, 2.0], &[20.0 + 0.5 * l], t, 4.0).unwrap().masses[1];
        let m0 = mj(0.0);
        [2.0, 4.0, 6.0].iter().map(|&t| mj(t) - m0).fold(0.0_f64, f64::max)
    };
    let d = [defect(10.0), defect(16.0), defect(22.0)];
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
}

#[test]
fn decoupling_condition() {
    assert!(is_decoupled(&[1.0, 2.0], &[(0.0, 0.0), (15.0, 0.0)], 15.0));
    assert!(!is_decoupled(&[1.0, 2.0], &[(15.0, 0.0), (0.0, 0.0)], 15.0));
    assert!(is_decoupled(&[1.0, 2.0], &[(15.0, 0.0), (0.0, 16.0)], 15.0));
    assert_eq!(tail_speed_sums(&[0.5, 1.0, 2.0]), vec![3.5, 3.0, 2.0]);
}

fn coercivity_box() -> Box2D {
    square(30.0, 64)
}

#[test]
fn coercivity_gate() {
    let q = planar();
    let bx = coercivity_box();
    let lam = coercivity_min_rayleigh(q, 10.0, bx, 4).unwrap();
    assert!(lam > 0.1, "{lam}");
    let free = coercivity_min_rayleigh_with(q, 10.0, bx, 4, Projection::None).unwrap();
    assert!(free < 0.0);
    // ΛQ is orthogonal to both translations; without its own constraint the
    // quotient at ΛQ lies below the projected minimum.
    let lq = lambda_q(q);
    let rmax = lq.grid.rmax();
    let v = sample_periodic_radial(bx, (0.0, 0.0), |r| if r <= rmax { lq.value_at(r) } else { 0.0 });
    let trial = projected_quotient(q, 10.0, &v, Projection::TranslationsOnly).unwrap();
    assert!(trial <= lam);
    assert!(trial < 0.0);
}

#[test]
fn coercivity_is_monotone_in_block_size() {
    let q = planar();
    let bx = coercivity_box();
    let vals: Vec<f64> = [1, 2, 4, 6]
        .iter()
        .map(|&k| coercivity_min_rayleigh(q, 10.0, bx, k).unwrap())
        .collect();
    for w in vals.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "{vals:?}");
    }
    assert!((vals[3] - vals[2]).abs() < 1e-7);
}

#[test]
fn coercivity_rejects_bad_inputs() {
    let q = planar();
    assert!(coercivity_min_rayleigh(q, 10.0, coercivity_box(), 0).is_err());
    assert!(coercivity_min_rayleigh(q, -1.0, coercivity_box(), 2).is_err());
}
