//! Desk-scale numerical toolkit for weighted model geometries: constructs
//! flat, warped-product, and cylinder ambients with smooth weights, builds
//! closed hypersurfaces with full curvature data, flows normal rays, and
//! verifies a family of Willmore-type, Heintze–Karcher, and isoperimetric
//! inequalities together with their monotone quantities and equality cases.

pub mod ambient;
pub mod comparison;
pub mod error;
pub mod functionals;
pub mod hypersurface;
pub mod ode;
pub mod quad;
pub mod reilly;
pub mod scene;
pub mod specfn;
pub mod volume;

pub use error::{Error, Result};
