//! Pseudo-spectral evolution of the two-dimensional ZK equation on a
//! periodic box, and the localized functionals used to probe soliton
//! stability.

pub mod coercivity;
pub mod error;
pub mod evolve;
pub mod field;
pub mod probes;
pub mod spectral;
pub mod weights;

pub use error::{FlowError, Result};
pub use field::{min_image, read_snapshot, write_snapshot, Box2D, Field2D};
pub use spectral::Spectral2D;
pub use evolve::{
    energy, energy_with, evolve, init_soliton_field, linear_propagate, linearized_evolve, mass, step, EvolveParams, Observer, Scheme,
    SnapshotRecorder, Trajectory,
};
pub use weights::{weight_deriv, weight_eval, WeightKind, WeightParams};
pub use probes::{
    fit_modulation, localized_energy_j, localized_mass_i, oblique_mass, partition_masses, ModulationState, PartitionMasses,
    MonotonicitySample, ProbeKind,
};
pub use coercivity::{coercivity_min_rayleigh, coercivity_min_rayleigh_with, Projection};
