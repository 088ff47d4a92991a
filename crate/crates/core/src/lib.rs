//! Conjugate-point certification for Lorentzian tori carrying a Killing field.
//!
//! The metric model is `2 dx dy + f(x) dy^2` on ribbon charts, where `f` is a
//! smooth periodic profile given in closed form. The library builds the profile's
//! band geometry, integrates non-null geodesics tangent to the Killing field,
//! solves the Jacobi equation along them, and certifies presence or absence of
//! conjugate points via sign certificates (the Z-functions), cross-validated by
//! a brute-force Jacobi-zero oracle.

// `!(x > 0.0)` style guards are used throughout to reject NaN alongside the
// out-of-range values; `partial_cmp` would obscure that intent.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certifier;
pub mod charts;
pub mod conditions;
pub mod config;
pub mod error;
pub mod expr;
pub mod geodesic;
pub mod jacobi;
pub mod numerics;
pub mod profile;
pub mod report;

pub use error::Error;
