#![allow(dead_code)]

use std::sync::OnceLock;

use zklab_core::{solve_ground_state, GroundState, SolverConfig};
use zklab_flow::{Box2D, Field2D, Spectral2D};

pub fn planar() -> &'static GroundState {
    static Q: OnceLock<GroundState> = OnceLock::new();
    Q.get_or_init(|| solve_ground_state(2, 2.0, &SolverConfig::default()).unwrap())
}

pub fn square(l: f64, n: usize) -> Box2D {
    Box2D::new(l, l, n, n).unwrap()
}

pub fn rel_sup(a: &Field2D, b: &Field2D) -> f64 {
    a.axpy(-1.0, b).sup_norm() / b.sup_norm()
}

/// Removes the components along `basis` (Gram–Schmidt in `L²`).
pub fn orthogonalize(v: &Field2D, basis: &[Field2D]) -> Field2D {
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

pub fn bump(bx: Box2D, center: (f64, f64), width: f64) -> Field2D {
    Field2D::from_fn(bx, |x, y| (-((x - center.0).powi(2) + (y - center.1).powi(2)) / (2.0 * width * width)).exp())
}

pub fn h1_scaled(sp: &Spectral2D, f: &Field2D, size: f64) -> Field2D {
    f.scaled(size / sp.h1_norm(f))
}
