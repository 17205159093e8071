//! Verification toolkit for a family of three-outcome, two-setting Bell
//! inequalities: sum-of-squares certificates, classical bounds, and
//! self-testing of the maximally entangled two-qutrit state.

pub mod belloperator;
pub mod bellparams;
pub mod cmatrix;
pub mod error;
pub mod localpolytope;
pub mod observables;
pub mod selftest;

pub use belloperator::{build_w, Realization};
pub use bellparams::{family_point, BellParameters, ConstraintReport};
pub use cmatrix::{CMatrix, C64};
pub use error::{Error, Result};
pub use observables::{t3, Kappa, Observable};
pub use selftest::{certify, CertificationReport};
