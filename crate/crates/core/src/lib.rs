//! Cheeger-constant lower bounds for geodesically convex domains in
//! constant-curvature model spaces (Euclidean space and spheres), together
//! with the independent brute-force oracles used to sanity-check every bound
//! at desk scale.
//!
//! The crate is organized around the pipeline
//!
//! ```text
//! geometry  ->  domains  ->  sampler  ->  chords  ->  bounds
//!                                \------------------>  oracle
//! ```
//!
//! * [`geometry`] — metric formulas and comparison triangles for the model
//!   spaces `M_kappa`, `kappa >= 0`.
//! * [`domains`] — convex domains (half-space polytopes, geodesic balls and
//!   intersections) with membership and geodesic exit-time oracles.
//! * [`sampler`] — seeded uniform sampling and the distance statistics
//!   `E_x`, `S_x`, `R_x = E_x + 2 S_x`.
//! * [`chords`] — the longest-centered-chord functional `theta` by direction
//!   search and its closed-form comparison bound in curved space.
//! * [`bounds`] — every Cheeger lower bound exposed by the library, each
//!   with a fully traced constant chain.
//! * [`oracle`] — brute-force upper bounds on the Cheeger constant (exact
//!   needle solver, 2-D cut-family search, grid sweep cuts) used as the
//!   other side of every sandwich test.
//!
//! All sampling is deterministic given a seed, and parallel and serial runs
//! produce bit-identical results.

pub mod bounds;
pub mod chords;
pub mod domains;
pub mod error;
pub mod geometry;
mod linalg;
mod lp;
pub mod oracle;
pub mod sampler;

pub use error::{Error, Result};
pub use geometry::{ModelSpace, Point, TangentVector};
