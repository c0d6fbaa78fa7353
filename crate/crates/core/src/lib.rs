//! Nonlocal continuity equations on co-evolving weighted graphs.
//!
//! The crate integrates the coupled system
//!
//! ```text
//! ∂ₜ rᵢ = −Σⱼ Φ(rᵢ, rⱼ; V[r]ᵢⱼ) ηᵢⱼ mⱼ
//! ∂ₜ ηᵢⱼ = ω[r]ᵢⱼ − ηᵢⱼ
//! ```
//!
//! on a weighted point cloud, pushes atomic measures along the associated
//! characteristics, and measures distances between the resulting
//! disintegrations.

// Comparisons such as `!(x > 0.0)` are written that way so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod fields;
pub mod graph;
pub mod graph_ce;
pub mod interpolation;
pub mod metrics;
pub mod oracle;
pub mod scenario;

pub use bounds::{constants_of, BoundsLedger};
pub use error::{Error, Result};
pub use fields::{
    monotonicity_suite, omega_eval, velocity_from_alpha, velocity_from_kernel, AlphaKind, AlphaProfile,
    InteractionKernelSpec, OmegaKernel, OmegaKind, OmegaSpec, VelocitySpec,
};
pub use graph::{adjointness_defect, nonlocal_divergence, nonlocal_gradient, BaseMeasure, EdgeField, Symmetry, VertexDensity};
pub use interpolation::{admissibility_suite, Admissibility, AdmissibilityReport, FluxInterpolation};
pub use dynamics::{integrate, rhs, CoupledState, IntegrateOptions, Model, Scheme, Trajectory};
pub use graph_ce::{advect, AtomicDisintegration};
pub use metrics::{l2mu_d2, wasserstein_1d, AtomSet1D};
