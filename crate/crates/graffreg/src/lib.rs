//! Registration of 3D lines, planes, and general k-dimensional affine
//! subspaces by minimizing geodesic distance on the affine Grassmannian.
//!
//! Lines and planes are represented as elements of Graff(k, n): an
//! orthonormal basis for the linear part plus the unique displacement
//! vector orthogonal to it. Embedding Graff(k, n) into Gr(k+1, n+1)
//! turns proximity between affine subspaces into an ordinary Grassmann
//! distance (root-sum-square of principal angles), which is agnostic to
//! the sign and anchor ambiguities that plague vector parameterizations.
//!
//! On top of that representation the crate provides:
//!
//! * [`subspace`] — the manifold core: embeddings, principal angles,
//!   Grassmann distance, and the SE(n) group action on affine subspaces.
//! * [`cost`] — per-correspondence rotation and translation residuals for
//!   line-line, line-plane, and plane-plane pairs, and the total
//!   registration objective they sum to.
//! * [`solver`] — globally optimal branch-and-bound search: inlier-set
//!   maximization over SO(3), translation search over a Euclidean cube,
//!   Levenberg-Marquardt refinement, and correspondence-free matching.
//! * [`synth`] — synthetic scene generation, outlier injection, a
//!   camera back-projection protocol for pose-from-lines problems, and
//!   rotation/translation error metrics with a benchmark harness.
//! * [`curve`] — curve-length analysis for 2D lines: the length of a
//!   straight parameter-space interpolation mapped onto the manifold,
//!   compared against the analytic geodesic distance.
//! * [`io`] — JSON feature/correspondence/result file formats.
//! * [`cli`] — the `graffreg` command-line driver (`register`, `bench`,
//!   `curve`).
//!
//! The `examples/` directory contains one runnable example per
//! capability; start with `align_lines`.

pub mod cli;
pub mod cost;
pub mod curve;
pub mod error;
pub mod io;
pub mod solver;
pub mod subspace;
pub mod synth;

pub use cost::{rotation_residual, total_cost, translation_residual};
pub use cost::{CostBreakdown, FeatureKind, FeaturePair};
pub use error::{Error, Result};
pub use solver::{
    find_correspondences, refine_lm, register_correspondence_free,
    register_with_correspondences, rotation_bnb, rotation_bnb_free, translation_bnb,
    RegistrationResult, SolverConfig,
};
pub use subspace::{
    canonical_displacement, grassmann_distance, orthonormalize, principal_angles,
    projection_matrix, AffineSubspace, EmbeddedBasis, RigidTransform,
};
