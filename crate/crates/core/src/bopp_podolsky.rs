//! Electrostatic potential of the Bopp–Podolsky–Proca equation
//! `-Δφ + a²Δ²φ + φ = 4πu²` and the maps built on it:
//! `Φ(u) = φ_u`, its first and second derivatives, and
//! `G(u) = ∫ u² φ_u` with `G'(u)[h] = 4∫ φ_u u h`.
//!
//! On the torus the operator is diagonal in Fourier space with symbol
//! `1 + |k|² + a²|k|⁴ ≥ 1`, so each solve is one multiplier application.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Multiplier, Products, ScalarField, TorusGrid};

/// Fourier symbol of `-Δ + a²Δ² + 1`.
pub fn operator_symbol(a: f64, s: f64) -> f64 {
    1.0 + s + a * a * s * s
}

pub(crate) fn check_a(a: f64) -> Result<()> {
    if a > 0.0 && a < 0.5 {
        Ok(())
    } else {
        Err(Error::param("a", format!("must lie in (0, 1/2), got {a}")))
    }
}

/// Solver for one grid and one value of `a`, with the inverse symbol cached.
#[derive(Clone)]
pub struct BoppPodolsky {
    a: f64,
    products: Products,
    inverse: Multiplier,
}

impl BoppPodolsky {
    pub fn new(grid: &TorusGrid, a: f64, products: Products) -> Result<Self> {
        check_a(a)?;
        let inverse = Multiplier::new(grid, |s| 1.0 / operator_symbol(a, s))?;
        Ok(BoppPodolsky {
            a,
            products,
            inverse,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn products(&self) -> Products {
        self.products
    }

    /// Solve with right-hand side `c · u·h`.
    fn solve_rhs(&self, u: &ScalarField, h: &ScalarField, c: f64) -> Result<ScalarField> {
        let rhs = u.product(h, self.products)?.scale(c);
        rhs.apply_multiplier(&self.inverse)
    }

    /// `φ_u`, the solution with right-hand side `4πu²`.
    pub fn solve_phi(&self, u: &ScalarField) -> Result<ScalarField> {
        self.solve_rhs(u, u, 4.0 * PI)
    }

    /// `Φ'(u)[h]`: right-hand side `8π u h`.
    pub fn d_phi(&self, u: &ScalarField, h: &ScalarField) -> Result<ScalarField> {
        self.solve_rhs(u, h, 8.0 * PI)
    }

    /// `Φ''[h, k]`: right-hand side `8π h k` (independent of `u`).
    pub fn d2_phi(&self, h: &ScalarField, k: &ScalarField) -> Result<ScalarField> {
        self.solve_rhs(h, k, 8.0 * PI)
    }

    /// `G(u) = ∫ u² φ_u`.
    pub fn g(&self, u: &ScalarField) -> Result<f64> {
        let phi = self.solve_phi(u)?;
        self.g_with_phi(u, &phi)
    }

    /// `G(u)` reusing an already computed `φ_u`.
    pub fn g_with_phi(&self, u: &ScalarField, phi: &ScalarField) -> Result<f64> {
        u.product(u, self.products)?.dot(phi)
    }

    /// `G'(u)[h] = 4 ∫ φ_u u h`.
    pub fn d_g(&self, u: &ScalarField, h: &ScalarField) -> Result<f64> {
        let phi = self.solve_phi(u)?;
        Ok(4.0 * u.product(h, self.products)?.dot(&phi)?)
    }

    /// `‖φ‖²_{H²} = ∫ a²|Δφ|² + |∇φ|² + φ²`, evaluated spectrally.
    pub fn h2_norm_sq(&self, phi: &ScalarField) -> f64 {
        h2_norm_sq(phi, self.a)
    }

    /// Relative spectral residual of `φ` in its own equation.
    pub fn residual(&self, u: &ScalarField, phi: &ScalarField) -> Result<f64> {
        let a = self.a;
        let applied = phi
            .apply_multiplier(&Multiplier::new(phi.grid(), |s| operator_symbol(a, s))?)?;
        let rhs = u.product(u, self.products)?.scale(4.0 * PI);
        let diff = applied.sub(&rhs)?;
        let den = rhs.dot(&rhs)?.sqrt();
        Ok(if den > 0.0 {
            diff.dot(&diff)?.sqrt() / den
        } else {
            diff.dot(&diff)?.sqrt()
        })
    }
}

/// `φ_u` for pointwise products.
pub fn solve_phi(u: &ScalarField, a: f64) -> Result<ScalarField> {
    BoppPodolsky::new(u.grid(), a, Products::Pointwise)?.solve_phi(u)
}

/// `Φ'(u)[h]`.
pub fn d_phi(u: &ScalarField, h: &ScalarField, a: f64) -> Result<ScalarField> {
    BoppPodolsky::new(u.grid(), a, Products::Pointwise)?.d_phi(u, h)
}

/// `Φ''[h, k]`.
pub fn d2_phi(h: &ScalarField, k: &ScalarField, a: f64) -> Result<ScalarField> {
    BoppPodolsky::new(h.grid(), a, Products::Pointwise)?.d2_phi(h, k)
}

/// `G(u) = ∫ u² φ_u`.
pub fn g(u: &ScalarField, a: f64) -> Result<f64> {
    BoppPodolsky::new(u.grid(), a, Products::Pointwise)?.g(u)
}

/// `G'(u)[h] = 4∫ φ_u u h`.
pub fn d_g(u: &ScalarField, h: &ScalarField, a: f64) -> Result<f64> {
    BoppPodolsky::new(u.grid(), a, Products::Pointwise)?.d_g(u, h)
}

/// `‖φ‖²_{H²}` with weight `a²|k|⁴ + |k|² + 1`.
pub fn h2_norm_sq(phi: &ScalarField, a: f64) -> f64 {
    phi.spectrum().weighted_power(|s| operator_symbol(a, s))
}
