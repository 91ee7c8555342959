use thiserror::Error;

use crate::grid::ScalarField;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// Two fields were combined that live on different grids.
    #[error("fields live on different grids")]
    GridMismatch,

    /// A Fourier symbol evaluated to a non-finite value on an attainable mode.
    #[error("multiplier symbol is not finite at |k|^2 = {s}")]
    NonFiniteSymbol { s: f64 },

    /// The radial integrator could not continue.
    #[error("radial integration failed at r = {r} (u = {u}, u' = {du}): {reason}")]
    Integration {
        r: f64,
        u: f64,
        du: f64,
        reason: &'static str,
    },

    /// No shooting bracket around the ground-state value.
    #[error("no shooting bracket found in [{lo}, {hi}] for p = {p}")]
    Bracket { p: f64, lo: f64, hi: f64 },

    /// The Nehari projection needs a field with a nonzero positive part.
    #[error("Nehari projection undefined: positive part vanishes")]
    ProjectionUndefined,

    /// The Nehari scale exists but lies outside the searched range.
    #[error("Nehari scale outside [1e-6, 1e6] (A={a:e}, B={b:e}, C={c:e})")]
    ScaleOutOfRange { a: f64, b: f64, c: f64 },

    /// A reduced formula was used on a field that is not on the Nehari set.
    #[error("field is off the Nehari set (relative residual {relative_residual:e})")]
    OffNehari { relative_residual: f64 },

    /// Armijo backtracking could not find a descent step.
    #[error("line search failed at iteration {iteration} (step {step:e}, grad norm {grad_norm:e})")]
    NonDescent {
        iteration: usize,
        step: f64,
        grad_norm: f64,
        last: Box<ScalarField>,
    },

    /// Weighted circular mean has no direction on some axis.
    #[error("barycenter undefined on axis {axis} (resultant/mass = {ratio:e})")]
    BarycenterUndefined { axis: usize, ratio: f64 },

    /// Malformed serialized data.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
