//! Two-stage reconstruction of a medium contrast from near-field scattering
//! data: direct sampling locates the scatterers, then a mixed L1/H1
//! regularized inversion, solved by a semi-smooth Newton primal-dual active
//! set method, sharpens the estimate on the detected subdomain.
//!
//! The forward model is the induced-current integral equation discretized
//! with the mid-point rule on a uniform mesh.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod forward;
pub mod grid;
pub mod inversion;
pub mod io;
pub mod linalg;
pub mod quadrature;
pub mod sampling;
pub mod special;

pub use error::{Error, Result};
pub use forward::{
    add_noise, scattered_field, simulate, solve_induced_current, total_field_on, ForwardSystem,
    MeasurementSet, SolverOptions,
};
pub use grid::{
    incident_field, make_receivers_circle, make_receivers_cube, rasterize, Aabb, ComplexField,
    IncidentWave, Point, Primitive, RealField, ReceiverGeometry, ReceiverSet, ScattererSpec,
    SubdomainMask, UniformGrid,
};
pub use inversion::{
    build_linearized, complementarity_residual, objective, ssn_solve, LaplacianOperator,
    LinearizedOperator, MixedRegConfig, NewtonState, SsnDiagnostics, SsnResult, StopRule,
};
pub use num_complex::Complex64;
pub use sampling::{
    combine_indices, extract_support, find_peaks, index_phi, initial_guess, IndexField, Peak,
    SupportMode,
};
pub use special::{bessel_j0, bessel_y0, green, green_diag, hankel1_0, Dim};
