#![allow(dead_code)]

use zklab_core::{solve_ground_state, GroundState, SolverConfig};

pub fn ground(d: usize, p: f64) -> GroundState {
    solve_ground_state(d, p, &SolverConfig::default()).expect("ground state")
}

/// Closed-form `d = 1`, `p = 2` soliton `(3/2) sech²(r/2)`.
pub fn sech_q(r: f64) -> f64 {
    1.5 / (r / 2.0).cosh().powi(2)
}

pub fn sech_dq(r: f64) -> f64 {
    -1.5 * (r / 2.0).tanh() / (r / 2.0).cosh().powi(2)
}

/// Shooting for `Q(0)`: RK4 outward from a small-r series, bisecting on the
/// amplitude between solutions that cross zero (too large) and those that
/// turn back up (too small).
pub fn shooting_q0(d: usize, p: f64, lo: f64, hi: f64) -> f64 {
    let rhs = |r: f64, q: f64, dq: f64| -> f64 { q - q.abs().powf(p - 1.0) * q - (d as f64 - 1.0) / r * dq };
    let classify = |a: f64| -> bool {
        // true when the trajectory overshoots (crosses zero)
        let h = 1e-3;
        let r0 = 1e-4;
        let q2 = (a - a.powf(p)) / (2.0 * d as f64);
        let (mut r, mut q, mut dq) = (r0, a + q2 * r0 * r0, 2.0 * q2 * r0);
        while r < 40.0 {
            let k1 = (dq, rhs(r, q, dq));
            let k2 = (dq + 0.5 * h * k1.1, rhs(r + 0.5 * h, q + 0.5 * h * k1.0, dq + 0.5 * h * k1.1));
            let k3 = (dq + 0.5 * h * k2.1, rhs(r + 0.5 * h, q + 0.5 * h * k2.0, dq + 0.5 * h * k2.1));
            let k4 = (dq + h * k3.1, rhs(r + h, q + h * k3.0, dq + h * k3.1));
            q += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            dq += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            r += h;
            if q < 0.0 {
                return true;
            }
            if dq > 0.0 {
                return false;
            }
        }
        q < 0.0
    };
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if classify(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Second-order centered finite differences for `𝓛W = f` on `n` nodes of
/// `[0, rmax]`, ghost-node Robin closure, Thomas solve.
pub fn fd2_linear_solve(d: usize, rmax: f64, n: usize, pot: &dyn Fn(f64) -> f64, f: &dyn Fn(f64) -> f64, kappa: f64) -> Vec<f64> {
    let h = rmax / (n - 1) as f64;
    let dm1 = d as f64 - 1.0;
    let mut sub = vec![0.0; n];
    let mut dia = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        let r = i as f64 * h;
        dia[i] = 2.0 / (h * h) + 1.0 - pot(r);
        b[i] = f(r);
        if i == 0 {
            // even reflection and (d-1)/r u' -> (d-1) u''
            dia[0] = 2.0 * d as f64 / (h * h) + 1.0 - pot(0.0);
            sup[0] = -2.0 * d as f64 / (h * h);
        } else if i == n - 1 {
            // ghost u_{n} = u_{n-2} - 2 h kappa u_{n-1}
            let lo = -1.0 / (h * h) + dm1 / r / (2.0 * h);
            let hi = -1.0 / (h * h) - dm1 / r / (2.0 * h);
            sub[i] = lo + hi;
            dia[i] += hi * (-2.0 * h * kappa);
        } else {
            sub[i] = -1.0 / (h * h) + dm1 / r / (2.0 * h);
            sup[i] = -1.0 / (h * h) - dm1 / r / (2.0 * h);
        }
    }
    let mut cp = vec![0.0; n];
    let mut x = vec![0.0; n];
    for i in 0..n {
        let m = if i == 0 { dia[0] } else { dia[i] - sub[i] * cp[i - 1] };
        cp[i] = sup[i] / m;
        x[i] = (b[i] - if i == 0 { 0.0 } else { sub[i] * x[i - 1] }) / m;
    }
    for i in (0..n - 1).rev() {
        x[i] -= cp[i] * x[i + 1];
    }
    x
}
