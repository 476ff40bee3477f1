//! Universal families of simple closed curves on punctured spheres, edges on
//! polygons, and the small-genus extensions.
//!
//! Modules:
//!
//! - [`curve_model`]: wiggle codes for curves on the lined-up punctured plane,
//!   their exact disjointness decision, and conversion to dual trees.
//! - [`type_census`]: enumeration and canonical forms of decomposition types.
//! - [`labelled_sphere`]: the family of all wiggle codes and tree recognition.
//! - [`unlabelled_sphere`]: cyclic-interval families and pants-type coverage.
//! - [`polygon`]: chord graphs, triangle/cycle counting, triangulation classes.
//! - [`genus`]: cut systems, counting bounds, genus-1 and genus-2 families.

pub mod curve_model;
pub mod error;
pub mod genus;
pub mod labelled_sphere;
pub mod polygon;
pub mod type_census;
pub mod unlabelled_sphere;

pub use error::{Error, Result};
