//! Shared numerical kernels: root refinement, adaptive quadrature, and an
//! embedded Runge-Kutta integrator with dense output.

pub mod ode;
pub mod quad;
pub mod root;
