//! Integral identities satisfied by the ground state.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::ground_state::{lambda_q, GroundState};
use crate::grid::{integrate_weighted, sphere_area};
use crate::spectral::{apply_linearized, lambda_q_residual};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityItem {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    pub pass: bool,
}

impl IdentityItem {
    fn new(name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let rel_err = (lhs - rhs).abs() / rhs.abs().max(1e-30);
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            rel_err,
            pass: rel_err <= tol,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuditScope {
    /// Items valid for every `(d, p)`.
    General,
    /// General items plus the cubic two-dimensional ones.
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub d: usize,
    pub p: f64,
    pub c: f64,
    pub tol: f64,
    pub items: Vec<IdentityItem>,
    /// Sup-norm of `𝓛ΛQ + Q` at the nodes.
    pub lambda_q_residual: f64,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    pub fn item(&self, name: &str) -> Option<&IdentityItem> {
        self.items.iter().find(|i| i.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.items).expect("report serializes")
    }
}

pub const DEFAULT_TOL: f64 = 1e-5;

/// Integrals over `R^d` of the ground state, from radial quadrature.
struct Moments {
    mass: f64,
    grad: f64,
    power: f64,
    cubic: f64,
    q_lambda_q: f64,
    weak_lambda_q: f64,
}

fn moments(q: &GroundState) -> Moments {
    let grid = q.grid();
    let k = q.d as u32 - 1;
    let area = sphere_area(q.d);
    let integrate = |f: &dyn Fn(usize) -> f64| {
        let vals: Vec<f64> = (0..grid.n()).map(f).collect();
        area * integrate_weighted(grid, &vals, k)
    };
    let v = q.values();
    let dv = q.derivs();
    let lq = lambda_q(q);
    let l_lq = apply_linearized(q, &lq.values);
    Moments {
        mass: integrate(&|i| v[i] * v[i]),
        grad: integrate(&|i| dv[i] * dv[i]),
        power: integrate(&|i| v[i].abs().powf(q.p + 1.0)),
        cubic: integrate(&|i| v[i].powi(3)),
        q_lambda_q: integrate(&|i| v[i] * lq.values[i]),
        weak_lambda_q: -integrate(&|i| l_lq[i] * v[i]),
    }
}

/// Evaluates the identity items for `q`. `Full` additionally checks the
/// items specific to `d = 2`, `p = 2`, `c = 1`.
pub fn audit_identities(q: &GroundState, tol: f64, scope: AuditScope) -> Result<IdentityReport> {
    if scope == AuditScope::Full && !(q.d == 2 && q.p == 2.0 && q.c == 1.0) {
        return Err(CoreError::WrongRegime {
            d: q.d,
            p: q.p,
            c: q.c,
        });
    }
    let m = moments(q);
    let c_pd = 1.0 / (q.p - 1.0) - q.d as f64 / 4.0;
    let mut items = vec![IdentityItem::new(
        "a_energy",
        m.grad + q.c * m.mass,
        m.power,
        tol,
    )];
    if scope == AuditScope::Full {
        let h0 = 0.5 * m.grad - m.cubic / 3.0;
        let m0 = 0.5 * m.mass;
        items.push(IdentityItem::new("b_mass_cubic", m.mass, 2.0 / 3.0 * m.cubic, tol));
        items.push(IdentityItem::new("c_gradient_split", 0.5 * m.grad, 0.25 * m.mass, tol));
        items.push(IdentityItem::new("d_energy_mass_ratio", h0 / m0, -0.5, tol));
    }
    items.push(IdentityItem::new("e_q_lambda_q", m.q_lambda_q, c_pd * m.mass / q.c, tol));
    items.push(IdentityItem::new("f_l_lambda_q", m.weak_lambda_q, m.mass, tol));
    Ok(IdentityReport {
        d: q.d,
        p: q.p,
        c: q.c,
        tol,
        items,
        lambda_q_residual: lambda_q_residual(q),
    })
}
