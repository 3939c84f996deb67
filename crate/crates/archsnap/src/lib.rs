//! Delayed switching of shallow bistable arches.
//!
//! The crate models a clamped-clamped shallow arch with a Rayleigh-Ritz basis
//! of column buckling modes, locates the saddle-node fold of its static
//! force-displacement curve, reduces the dynamics near the fold to a scalar
//! normal form, and predicts how long the arch lingers near the fold before
//! snapping through. Numerical integration of the mode equations is included
//! to check the predictions.
//!
//! ```
//! use archsnap::arch::{LoadProgram, NondimArch};
//! use archsnap::{analytic, statics};
//!
//! let arch = NondimArch::single_mode(6.0, 100.0, 1.0).unwrap();
//! let cp = statics::critical_point(&arch).unwrap();
//! let load = LoadProgram::static_offset(1e-2).unwrap();
//! let pred = analytic::predict(&arch, &cp, &load, true).unwrap();
//! assert!(pred.tau_inf > 0.0);
//! ```

#![no_std]

extern crate alloc;

pub mod analytic;
pub mod arch;
pub mod dynamics;
mod error;
pub mod linalg;
pub mod ode;
pub mod roots;
pub mod specfun;
pub mod statics;

pub use error::{Error, Result};
