//! Projections of high-dimensional random vectors onto random `k`-frames and
//! their bounded-Lipschitz distance to a Gaussian.
//!
//! * [`stiefel`]: Haar-random orthonormal frames.
//! * [`distributions`]: sources with known moment parameters.
//! * [`bl_distance`]: exact empirical BL distances, certified lattice
//!   brackets and the cross-polytope witness.
//! * [`triangulation`]: center-cone cube triangulations and PL functions.
//! * [`bounds`]: closed-form bound evaluators.
//! * [`experiments`]: seeded, reproducible experiment runs.

pub mod bl_distance;
pub mod bounds;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod flow;
pub(crate) mod linalg;
pub mod measure;
pub mod rng;
pub mod stiefel;
pub mod triangulation;

pub use bl_distance::{bl_certified, bl_empirical_gaussian, bl_lp, witness_lower_bound, BLCertificate};
pub use bounds::BoundConstants;
pub use distributions::{make_source, SourceKind, VectorSource};
pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, ExperimentKind, TrialRecord};
pub use measure::EmpiricalMeasure;
pub use stiefel::{haar_sample, StiefelFrame};
pub use triangulation::{
    build_lattice, triangulate_cube, CubeTriangulation, PLFunction, SupplementedLattice,
};
