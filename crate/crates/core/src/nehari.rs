//! Energy functional `J_ε`, Nehari residual `N_ε = J'_ε(u)[u]`, projection of
//! a ray onto the Nehari set, and the Sobolev gradient of `J_ε`.

use serde::Serialize;

use crate::bopp_podolsky::{check_a, BoppPodolsky};
use crate::error::{Error, Result};
use crate::grid::{Multiplier, Products, ScalarField, TorusGrid};
use crate::scalar::safeguarded_newton;

const PROJECTION_RTOL: f64 = 1e-12;
const PROJECTION_BRACKET: (f64, f64) = (1e-6, 1e6);
/// Relative Nehari residual accepted by [`Functional::energy_on_nehari`].
pub const ON_NEHARI_TOL: f64 = 1e-8;

/// Coefficients `(p, a, ε)` of the system plus the product mode used for
/// the quadratic and cubic nonlinear terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    pub p: f64,
    pub a: f64,
    pub epsilon: f64,
    #[serde(skip)]
    pub products: Products,
}

impl SystemParams {
    pub fn new(p: f64, a: f64, epsilon: f64) -> Result<Self> {
        if !(p > 4.0 && p < 6.0) {
            return Err(Error::param("p", format!("must lie in (4, 6), got {p}")));
        }
        check_a(a)?;
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::param("epsilon", format!("must be positive, got {epsilon}")));
        }
        Ok(SystemParams {
            p,
            a,
            epsilon,
            products: Products::Pointwise,
        })
    }

    pub fn with_products(mut self, products: Products) -> Self {
        self.products = products;
        self
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<Self> {
        Ok(SystemParams::new(self.p, self.a, epsilon)?.with_products(self.products))
    }
}

/// The three scalars that fix `J_ε` along the ray `t ↦ t·u`:
/// `A = ‖u‖²_ε`, `B = G(u)/ε³`, `C = |u⁺|ᵖ_{p,ε}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl RayCoefficients {
    pub fn energy(&self, p: f64) -> f64 {
        0.5 * self.a + 0.25 * self.b - self.c / p
    }

    pub fn nehari_residual(&self) -> f64 {
        self.a + self.b - self.c
    }

    /// Coefficients of `t·u`.
    pub fn scaled(&self, t: f64, p: f64) -> Self {
        RayCoefficients {
            a: self.a * t * t,
            b: self.b * t.powi(4),
            c: self.c * t.powf(p),
        }
    }
}

/// Unique positive root of `A t² + B t⁴ = C tᵖ` for `A, C > 0`, `B ≥ 0`, `p > 4`.
pub fn nehari_scale(a: f64, b: f64, c: f64, p: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::ProjectionUndefined);
    }
    if !(a > 0.0 && b >= 0.0 && p > 4.0) {
        return Err(Error::param("ray coefficients", format!("need A > 0, B ≥ 0, p > 4; got A={a}, B={b}, p={p}")));
    }
    let g = |t: f64| {
        let tp = c * t.powf(p - 4.0);
        (a + b * t * t - tp * t * t, 2.0 * b * t - (p - 2.0) * tp * t)
    };
    let (lo, hi) = PROJECTION_BRACKET;
    if g(hi).0 > 0.0 || g(lo).0 < 0.0 {
        return Err(Error::ScaleOutOfRange { a, b, c });
    }
    // Start Newton from the root of the dominant balance A = C t^{p-2}.
    let guess = (a / c).powf(1.0 / (p - 2.0)).clamp(lo, hi);
    let (g_guess, _) = g(guess);
    let (lo, hi) = if g_guess > 0.0 { (guess, hi) } else { (lo, guess) };
    safeguarded_newton(g, lo, hi, PROJECTION_RTOL).ok_or(Error::ProjectionUndefined)
}

/// Result of projecting `u` onto the Nehari set along its ray.
#[derive(Debug, Clone)]
pub struct NehariProjection {
    pub t: f64,
    pub field: ScalarField,
    pub energy: f64,
    pub nehari_residual: f64,
    pub(crate) coefficients: RayCoefficients,
    pub(crate) phi: ScalarField,
}

impl NehariProjection {
    pub fn coefficients(&self) -> RayCoefficients {
        self.coefficients
    }

    /// Potential `φ` of the projected field.
    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }
}

/// `J_ε` and its companions bound to one grid, with multipliers cached.
#[derive(Clone)]
pub struct Functional {
    params: SystemParams,
    bp: BoppPodolsky,
    riesz: Multiplier,
}

impl Functional {
    pub fn new(grid: &TorusGrid, params: SystemParams) -> Result<Self> {
        let params = SystemParams::new(params.p, params.a, params.epsilon)?.with_products(params.products);
        let e2 = params.epsilon * params.epsilon;
        Ok(Functional {
            params,
            bp: BoppPodolsky::new(grid, params.a, params.products)?,
            riesz: Multiplier::new(grid, |s| 1.0 / (1.0 + e2 * s))?,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn grid(&self) -> &TorusGrid {
        self.riesz.grid()
    }

    pub fn bopp_podolsky(&self) -> &BoppPodolsky {
        &self.bp
    }

    pub fn solve_phi(&self, u: &ScalarField) -> Result<ScalarField> {
        self.bp.solve_phi(u)
    }

    fn coefficients_with_phi(&self, u: &ScalarField, phi: &ScalarField) -> Result<RayCoefficients> {
        let eps = self.params.epsilon;
        Ok(RayCoefficients {
            a: u.norm_eps_sq(eps)?,
            b: self.bp.g_with_phi(u, phi)? / eps.powi(3),
            c: u.positive_part().lp_power_eps(self.params.p, eps),
        })
    }

    pub fn coefficients(&self, u: &ScalarField) -> Result<RayCoefficients> {
        let phi = self.bp.solve_phi(u)?;
        self.coefficients_with_phi(u, &phi)
    }

    pub fn energy(&self, u: &ScalarField) -> Result<f64> {
        Ok(self.coefficients(u)?.energy(self.params.p))
    }

    pub fn nehari_residual(&self, u: &ScalarField) -> Result<f64> {
        Ok(self.coefficients(u)?.nehari_residual())
    }

    pub fn project(&self, u: &ScalarField) -> Result<NehariProjection> {
        let phi = self.bp.solve_phi(u)?;
        let k = self.coefficients_with_phi(u, &phi)?;
        if !(k.c > 0.0) {
            return Err(Error::ProjectionUndefined);
        }
        let p = self.params.p;
        let t = nehari_scale(k.a, k.b, k.c, p)?;
        let scaled = k.scaled(t, p);
        Ok(NehariProjection {
            t,
            field: u.scale(t),
            energy: scaled.energy(p),
            nehari_residual: scaled.nehari_residual(),
            coefficients: scaled,
            phi: phi.scale(t * t),
        })
    }

    /// Riesz representative of `J'_ε(u)` in `⟨·,·⟩_ε`.
    pub fn grad(&self, u: &ScalarField) -> Result<ScalarField> {
        let phi = self.bp.solve_phi(u)?;
        self.grad_with_phi(u, &phi)
    }

    pub(crate) fn grad_with_phi(&self, u: &ScalarField, phi: &ScalarField) -> Result<ScalarField> {
        // ε³/(1+ε²s) applied to (1/ε³)((1+ε²s)u + φu − (u⁺)^{p−1}) splits into
        // u plus the smoothed nonlinear part.
        let pm1 = self.params.p - 1.0;
        let nonlinear = phi
            .product(u, self.params.products)?
            .zip_map(u, |fu, v| fu - v.max(0.0).powf(pm1))?;
        u.add(&nonlinear.apply_multiplier(&self.riesz)?)
    }

    /// `⟨f, g⟩_ε = (1/ε)∫∇f·∇g + (1/ε³)∫fg`.
    pub fn inner(&self, f: &ScalarField, g: &ScalarField) -> Result<f64> {
        inner_eps(f, g, self.params.epsilon)
    }

    /// Relative L² residual of `-ε²Δu + u + φ_u u - (u⁺)^{p-1}`, normalised
    /// by `‖-ε²Δu + u‖₂`.
    pub fn pde_residual(&self, u: &ScalarField) -> Result<f64> {
        let phi = self.bp.solve_phi(u)?;
        self.pde_residual_with_phi(u, &phi)
    }

    pub(crate) fn pde_residual_with_phi(&self, u: &ScalarField, phi: &ScalarField) -> Result<f64> {
        let e2 = self.params.epsilon.powi(2);
        let linear = u.axpy(-e2, &u.laplacian())?;
        let pm1 = self.params.p - 1.0;
        let r = phi
            .product(u, self.params.products)?
            .zip_map(u, |fu, v| fu - v.max(0.0).powf(pm1))?
            .add(&linear)?;
        let den = linear.dot(&linear)?.sqrt();
        let num = r.dot(&r)?.sqrt();
        Ok(if den > 0.0 { num / den } else { num })
    }

    /// Reduced form `(½ − 1/p)‖u‖²_ε + (¼ − 1/p)G(u)/ε³`, valid on the Nehari set.
    pub fn energy_on_nehari(&self, u: &ScalarField) -> Result<f64> {
        let k = self.coefficients(u)?;
        let rel = k.nehari_residual().abs() / k.a.max(f64::MIN_POSITIVE);
        if !(rel <= ON_NEHARI_TOL) {
            return Err(Error::OffNehari {
                relative_residual: rel,
            });
        }
        Ok(reduced_energy(k, self.params.p))
    }
}

pub(crate) fn reduced_energy(k: RayCoefficients, p: f64) -> f64 {
    (0.5 - 1.0 / p) * k.a + (0.25 - 1.0 / p) * k.b
}

pub fn inner_eps(f: &ScalarField, g: &ScalarField, epsilon: f64) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(f.spectrum()
        .weighted_inner(&g.spectrum(), |s| s / epsilon + 1.0 / epsilon.powi(3)))
}

pub fn energy(u: &ScalarField, params: &SystemParams) -> Result<f64> {
    Functional::new(u.grid(), *params)?.energy(u)
}

pub fn nehari_residual(u: &ScalarField, params: &SystemParams) -> Result<f64> {
    Functional::new(u.grid(), *params)?.nehari_residual(u)
}

pub fn project_nehari(u: &ScalarField, params: &SystemParams) -> Result<NehariProjection> {
    Functional::new(u.grid(), *params)?.project(u)
}

pub fn grad(u: &ScalarField, params: &SystemParams) -> Result<ScalarField> {
    Functional::new(u.grid(), *params)?.grad(u)
}

pub fn energy_on_nehari(u: &ScalarField, params: &SystemParams) -> Result<f64> {
    Functional::new(u.grid(), *params)?.energy_on_nehari(u)
}
