//! Pseudospectral variational solver for the Schrödinger–Bopp–Podolsky–Proca
//! system on the flat 3-torus,
//!
//! ```text
//! -ε²Δu + u + φu = |u|^{p-2}u,      -Δφ + a²Δ²φ + φ = 4πu²,
//! ```
//!
//! with `4 < p < 6` and `0 < a < ½`. The crate covers the periodic grid and
//! its spectral operators, the limit ground state on ℝ³, the electrostatic
//! solve, the energy and its Nehari projection, a projected Sobolev-gradient
//! solver, and diagnostics for concentrated (peaked) solutions.

pub mod analysis;
pub mod bopp_podolsky;
pub mod error;
pub mod grid;
pub mod ground_state;
pub mod nehari;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{Multiplier, Products, ScalarField, Spectrum, TorusGrid, TorusPoint};
pub use ground_state::{find_ground_state, limit_energy, RadialProfile};
pub use nehari::{Functional, NehariProjection, SystemParams};
pub use solver::{SolveReport, SolverOptions};

