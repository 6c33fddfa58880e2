//! Exterior calculus on periodic grids and the Lie-invariant vorticity
//! decomposition of real Schur flows.
//!
//! The crate is organised bottom-up:
//!
//! * [`fields`] – periodic grids, sampled fields, finite differences,
//!   interpolation, closed-form test fields and the RSFF file format.
//! * [`exterior`] – differential forms over sampled or analytic coefficients:
//!   wedge, exterior derivative, interior product, two Lie derivatives and
//!   pullback by a discrete map.
//! * [`rsf`] – decomposition plans, component vorticities, the real Schur
//!   zero pattern, D/A splitting and canonical rotation planes.
//! * [`solver`] – barotropic RSF dynamics in a periodic 3D box.
//! * [`verify`] – flow maps, pullback errors, PDE residuals, identity suites
//!   and convergence studies.
//! * [`render`] – banded PPM slice images.

pub mod error;
pub mod exterior;
pub mod fields;
pub mod render;
pub mod rsf;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
