//! Radial ground states, spectral diagnostics and identity checks for the
//! generalized Zakharov-Kuznetsov soliton problem.

pub mod banded;
pub mod dispersion;
pub mod eigen;
pub mod error;
pub mod ground_state;
pub mod grid;
pub mod identities;
pub mod profile_io;
pub mod spectral;
pub mod stencil;

pub use error::{CoreError, Result};
pub use ground_state::{lambda_q, rescale_profile, solve_ground_state, GroundState, SolverConfig};
pub use grid::{radial_quadrature, sphere_area, RadialGrid, RadialProfile};
pub use identities::{audit_identities, AuditScope, IdentityReport};
pub use spectral::{find_crossing, negative_eig_count, nu_value, solve_w, LinearizedSolve, SpectralScanRecord};
