//! Subspace migration for small sound-soft cracks.
//!
//! The crate covers the whole chain from synthetic far-field data to imaging:
//!
//! - [`scene`]: incident/observation arrays on an arc of the unit circle, crack
//!   configurations and search grids.
//! - [`forward`]: the multi-static response (MSR) matrix from the small-crack
//!   asymptotic far-field formula, with optional complex Gaussian noise.
//! - [`spectral`]: complex SVD of the MSR matrix and signal-subspace selection.
//! - [`imaging`]: steering vectors, single- and multi-frequency subspace
//!   migration maps, and their Bessel closed forms.
//! - [`bessel`]: integer-order Bessel functions of the first kind and the arc
//!   integral / Jacobi–Anger machinery used as analytic oracles.
//! - [`verify`]: decay fits, oracle comparisons and peak metrics.
//! - [`io`]: CSV, PGM and JSON writers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
mod error;
pub mod forward;
pub mod imaging;
pub mod io;
pub mod quadrature;
pub mod scene;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use forward::{add_noise, assemble_msr, assemble_msr_with_observations, far_field_entry, MsrMatrix};
pub use imaging::{
    analytic_multi, analytic_single, image_multi, image_single, steering_vector, ImagingMap, MapKind, SteeringVector,
};
pub use scene::{
    make_direction_set, observation_directions, three_crack_scene, Crack, CrackScene, DirectionSet, SearchGrid, Vec2,
};
pub use spectral::{estimate_signal_dimension, svd, SingularSystem};
pub use verify::{DecayReport, QualityMetrics};

pub use num_complex::Complex64;
