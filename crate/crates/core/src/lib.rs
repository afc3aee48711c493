//! Balanced metrics on holomorphic vector bundles over P1 and P2.
//!
//! An inner product `H` on the space of global sections induces a fiber
//! metric `FS(H)`; integrating that metric gives back an inner product
//! `Hilb(FS(H))`. The composite `T = Hilb ∘ FS` has the balanced metrics as
//! its fixed points (up to scale), and iterating it from any starting point
//! converges whenever a balanced metric exists and the bundle is simple.
//!
//! Modules:
//! * [`geometry`]: quadrature for the Fubini–Study volume form.
//! * [`sections`]: built-in bundles and their section bases.
//! * [`form`]: Gram matrices, normalization, geodesics.
//! * [`maps`]: `FS`, `Hilb`, `T`, the Bergman kernel and the functionals.
//! * [`iteration`]: the fixed-point driver and its diagnostics.
//! * [`gieseker`]: the Gieseker point and Kempf–Ness profiles.
//! * [`oracle`]: exact moments and closed-form fixed points.

// Checks are written as `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod form;
pub mod geometry;
pub mod gieseker;
pub mod iteration;
pub mod maps;
pub mod oracle;
pub mod sections;

pub use error::{Error, Result};
pub use form::{geodesic, CMatrix, FiberMetricField, GeodesicSpec, HermitianForm};
pub use geometry::{build_quadrature, Manifold, QuadratureScheme};
pub use maps::Problem;
pub use sections::{build_sections, BundleId, SectionBasis};
