//! Peaked trial functions and diagnostics of concentrated solutions.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::bopp_podolsky::solve_phi;
use crate::error::{Error, Result};
use crate::grid::{ScalarField, TorusGrid, TorusPoint};
use crate::ground_state::RadialProfile;
use crate::nehari::{Functional, NehariProjection, SystemParams};
use crate::scalar::bisect;

/// Placement of a peak `U(d/ε)·χ_r(d)` on a torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakSpec {
    pub center: TorusPoint,
    pub epsilon: f64,
    pub cutoff_radius: f64,
}

impl PeakSpec {
    pub fn new(grid: &TorusGrid, center: TorusPoint, epsilon: f64, cutoff_radius: f64) -> Result<Self> {
        let half = 0.5 * grid.period_length();
        if !(cutoff_radius > 0.0 && cutoff_radius <= half * (1.0 + 1e-12)) {
            return Err(Error::param(
                "cutoff_radius",
                format!("must lie in (0, L/2 = {half}], got {cutoff_radius}"),
            ));
        }
        if !(epsilon > 0.0 && epsilon <= 0.25 * cutoff_radius * (1.0 + 1e-12)) {
            return Err(Error::param(
                "epsilon",
                format!("must lie in (0, r/4 = {}], got {epsilon}", 0.25 * cutoff_radius),
            ));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("center", "coordinates must be finite"));
        }
        Ok(PeakSpec {
            center: grid.wrap(&center),
            epsilon,
            cutoff_radius,
        })
    }

    /// Peak with [`standard_cutoff_radius`].
    pub fn standard(grid: &TorusGrid, center: TorusPoint, epsilon: f64) -> Result<Self> {
        PeakSpec::new(grid, center, epsilon, standard_cutoff_radius(grid.period_length(), epsilon))
    }
}

/// `L/4`, widened to `4ε` when the peak would not fit, and capped at `L/2`.
pub fn standard_cutoff_radius(period_length: f64, epsilon: f64) -> f64 {
    (0.25 * period_length).max(4.0 * epsilon).min(0.5 * period_length)
}

/// Lipschitz cutoff: 1 on `[0, r/2]`, linear down to 0 on `[r/2, r]`.
pub fn cutoff(d: f64, r: f64) -> f64 {
    if d <= 0.5 * r {
        1.0
    } else if d >= r {
        0.0
    } else {
        2.0 - 2.0 * d / r
    }
}

/// Samples `W_{ξ,ε}(x) = U(d_T(x,ξ)/ε)·χ_r(d_T(x,ξ))`.
pub fn build_peak(grid: &TorusGrid, spec: &PeakSpec, profile: &RadialProfile) -> Result<ScalarField> {
    let spec = PeakSpec::new(grid, spec.center, spec.epsilon, spec.cutoff_radius)?;
    let r = spec.cutoff_radius;
    Ok(ScalarField::from_fn(grid, |x| {
        let d = grid.distance(&x, &spec.center);
        let chi = cutoff(d, r);
        if chi == 0.0 {
            0.0
        } else {
            profile.evaluate(d / spec.epsilon) * chi
        }
    }))
}

/// `Ψ_ε(ξ)`: the peak at `ξ` projected onto the Nehari set.
pub fn psi_map(
    grid: &TorusGrid,
    xi: TorusPoint,
    params: &SystemParams,
    profile: &RadialProfile,
    cutoff_radius: f64,
) -> Result<NehariProjection> {
    let spec = PeakSpec::new(grid, xi, params.epsilon, cutoff_radius)?;
    let w = build_peak(grid, &spec, profile)?;
    Functional::new(grid, *params)?.project(&w)
}

/// Per-axis circular mean weighted by `(u⁺)ᵖ`.
pub fn barycenter(u: &ScalarField, p: f64) -> Result<TorusPoint> {
    let grid = u.grid();
    let n = grid.n_per_axis();
    let l = grid.period_length();
    let phase: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(1.0, 2.0 * PI * i as f64 / n as f64))
        .collect();
    let mut sums = [Complex64::new(0.0, 0.0); 3];
    let mut mass = 0.0;
    for (idx, &v) in u.values().iter().enumerate() {
        if v <= 0.0 {
            continue;
        }
        let w = v.powf(p);
        mass += w;
        let c = grid.coords(idx);
        for axis in 0..3 {
            sums[axis] += phase[c[axis]] * w;
        }
    }
    if !(mass > 0.0) {
        return Err(Error::BarycenterUndefined { axis: 0, ratio: 0.0 });
    }
    let mut out = [0.0; 3];
    for axis in 0..3 {
        let ratio = sums[axis].norm() / mass;
        if ratio < 1e-12 {
            return Err(Error::BarycenterUndefined { axis, ratio });
        }
        out[axis] = (sums[axis].arg() / (2.0 * PI) * l).rem_euclid(l);
        if out[axis] >= l {
            out[axis] -= l;
        }
    }
    Ok(out)
}

/// Global maximum and count of prominent strict local maxima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxPoint {
    pub point: TorusPoint,
    pub index: usize,
    pub value: f64,
    pub n_local_maxima: usize,
}

/// Grid argmax (first index on ties) and the number of strict 26-neighbour
/// maxima with value at least half the maximum.
pub fn max_point(u: &ScalarField) -> MaxPoint {
    let grid = u.grid();
    let n = grid.n_per_axis() as i64;
    let vals = u.values();
    let mut best = 0;
    for (i, &v) in vals.iter().enumerate() {
        if v > vals[best] {
            best = i;
        }
    }
    let max = vals[best];
    let mut count = 0;
    for (idx, &v) in vals.iter().enumerate() {
        if v < 0.5 * max {
            continue;
        }
        let [i, j, k] = grid.coords(idx).map(|c| c as i64);
        let strict = (-1..=1).all(|dk: i64| {
            (-1..=1).all(|dj: i64| {
                (-1..=1).all(|di: i64| {
                    if di == 0 && dj == 0 && dk == 0 {
                        return true;
                    }
                    let nb = grid.index(
                        (i + di).rem_euclid(n) as usize,
                        (j + dj).rem_euclid(n) as usize,
                        (k + dk).rem_euclid(n) as usize,
                    );
                    vals[nb] < v
                })
            })
        });
        if strict {
            count += 1;
        }
    }
    MaxPoint {
        point: grid.position(best),
        index: best,
        value: max,
        n_local_maxima: count,
    }
}

/// `(1/ε³)∫_{d(x,q)<radius}(u⁺)ᵖ` divided by `(2p/(p−2))·m_∞`.
pub fn concentration_ratio(
    u: &ScalarField,
    q: TorusPoint,
    radius: f64,
    params: &SystemParams,
    m_inf: f64,
) -> Result<f64> {
    let grid = u.grid();
    if !(radius > 0.0 && radius <= 0.5 * grid.period_length() * (1.0 + 1e-12)) {
        return Err(Error::param("radius", format!("must lie in (0, L/2], got {radius}")));
    }
    if !(m_inf > 0.0) {
        return Err(Error::param("m_inf", "must be positive"));
    }
    let p = params.p;
    let mut s = 0.0;
    for (idx, &v) in u.values().iter().enumerate() {
        if v > 0.0 && grid.distance(&grid.position(idx), &q) < radius {
            s += v.powf(p);
        }
    }
    let ball = s * grid.cell_volume() / params.epsilon.powi(3);
    Ok(ball / (2.0 * p / (p - 2.0) * m_inf))
}

/// `max |u − W|` with `W` the standard peak centred at the maximum of `u`.
pub fn profile_error(u: &ScalarField, params: &SystemParams, profile: &RadialProfile) -> Result<f64> {
    let mp = max_point(u);
    let spec = PeakSpec::standard(u.grid(), mp.point, params.epsilon)?;
    let w = build_peak(u.grid(), &spec, profile)?;
    Ok(u.sub(&w)?.max_abs())
}

/// Positive constant solution and its energy density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantBranch {
    pub c_star: f64,
    /// `c²/4 + (¼ − 1/p)cᵖ`, so that `J_ε(c_*) = vol·coefficient/ε³`.
    pub energy_coefficient: f64,
    /// `c^{p−2} − 4πc² − 1` at the returned root.
    pub residual: f64,
}

pub fn constant_branch(p: f64) -> Result<ConstantBranch> {
    if !(p > 4.0 && p < 6.0) {
        return Err(Error::param("p", format!("must lie in (4, 6), got {p}")));
    }
    let f = |c: f64| c.powf(p - 2.0) - 4.0 * PI * c * c - 1.0;
    // Divided by c² and taken in log form, (p−4)·ln c = ln(4π + c⁻²) is
    // increasing in y = ln c and free of cancellation as p → 4.
    let h = |y: f64| (p - 4.0) * y - (4.0 * PI + (-2.0 * y).exp()).ln();
    let lo = (4.0 * PI).ln() / (p - 4.0);
    let mut hi = lo + 1.0;
    while h(hi) <= 0.0 {
        hi += hi - lo;
    }
    let c = bisect(h, lo, hi, 0.0)
        .ok_or(Error::Bracket { p, lo: lo.exp(), hi: hi.exp() })?
        .exp();
    Ok(ConstantBranch {
        c_star: c,
        energy_coefficient: 0.25 * c * c + (0.25 - 1.0 / p) * c.powf(p),
        residual: f(c),
    })
}

/// Sup-norm surrogates of `φ_u` and its derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiSmallness {
    pub value: f64,
    pub gradient: f64,
    pub laplacian: f64,
}

impl PhiSmallness {
    pub fn total(&self) -> f64 {
        self.value + self.gradient + self.laplacian
    }
}

/// `max|φ_u|`, `max|∇φ_u|`, `max|Δφ_u|` with spectral derivatives.
pub fn phi_smallness(u: &ScalarField, a: f64) -> Result<PhiSmallness> {
    let phi = solve_phi(u, a)?;
    let d: Vec<ScalarField> = (0..3).map(|axis| phi.derivative(axis)).collect();
    let gradient = (0..u.grid().len())
        .map(|i| (d[0].values()[i].powi(2) + d[1].values()[i].powi(2) + d[2].values()[i].powi(2)).sqrt())
        .fold(0.0, f64::max);
    Ok(PhiSmallness {
        value: phi.max_abs(),
        gradient,
        laplacian: phi.laplacian().max_abs(),
    })
}

/// Per-solution diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileDiagnostics {
    pub max_point: TorusPoint,
    pub max_value: f64,
    pub min_value: f64,
    pub n_local_maxima: usize,
    pub barycenter: Option<TorusPoint>,
    pub concentration_ratio: f64,
    pub profile_error: f64,
    pub phi_c2: f64,
}

/// Collects all diagnostics; the concentration ball has radius `L/4`.
pub fn diagnose(
    u: &ScalarField,
    params: &SystemParams,
    profile: &RadialProfile,
    m_inf: f64,
) -> Result<ProfileDiagnostics> {
    let mp = max_point(u);
    let radius = 0.25 * u.grid().period_length();
    Ok(ProfileDiagnostics {
        max_point: mp.point,
        max_value: mp.value,
        min_value: u.min(),
        n_local_maxima: mp.n_local_maxima,
        barycenter: barycenter(u, params.p).ok(),
        concentration_ratio: concentration_ratio(u, mp.point, radius, params, m_inf)?,
        profile_error: profile_error(u, params, profile)?,
        phi_c2: phi_smallness(u, params.a)?.total(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.0, 2.0), 1.0);
        assert_eq!(cutoff(1.0, 2.0), 1.0);
        assert_eq!(cutoff(1.5, 2.0), 0.5);
        assert_eq!(cutoff(2.0, 2.0), 0.0);
        assert_eq!(cutoff(3.0, 2.0), 0.0);
    }

    #[test]
    fn standard_radius_bounds() {
        let l = 2.0 * PI;
        assert_eq!(standard_cutoff_radius(l, 0.1), l / 4.0);
        assert_eq!(standard_cutoff_radius(l, 0.4), 1.6);
        assert_eq!(standard_cutoff_radius(l, 2.0), l / 2.0);
    }

    #[test]
    fn spec_validation() {
        let g = TorusGrid::new(8, 2.0 * PI).unwrap();
        assert!(PeakSpec::new(&g, [0.0; 3], 0.1, 4.0).is_err());
        assert!(PeakSpec::new(&g, [0.0; 3], 0.5, 1.0).is_err());
        assert!(PeakSpec::new(&g, [f64::NAN, 0.0, 0.0], 0.1, 1.0).is_err());
        let s = PeakSpec::new(&g, [-1.0, 0.0, 7.0], 0.1, 1.0).unwrap();
        assert!((s.center[0] - (2.0 * PI - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn constant_branch_p5() {
        let cb = constant_branch(5.0).unwrap();
        assert!((cb.c_star - 12.5727).abs() < 1e-4);
        assert!(cb.residual.abs() < 1e-10);
        assert!(cb.c_star > 4.0 * PI);
        assert!(constant_branch(3.0).is_err());
    }

    #[test]
    fn barycenter_constant_is_undefined() {
        let g = TorusGrid::new(8, 2.0 * PI).unwrap();
        assert!(matches!(
            barycenter(&ScalarField::constant(&g, 1.0), 5.0),
            Err(Error::BarycenterUndefined { .. })
        ));
        assert!(barycenter(&ScalarField::constant(&g, -1.0), 5.0).is_err());
    }

    #[test]
    fn max_point_of_constant() {
        let g = TorusGrid::new(8, 2.0 * PI).unwrap();
        let mp = max_point(&ScalarField::constant(&g, 3.0));
        assert_eq!(mp.index, 0);
        assert_eq!(mp.n_local_maxima, 0);
    }

    #[test]
    fn phi_smallness_trivial() {
        let g = TorusGrid::new(8, 2.0 * PI).unwrap();
        let z = phi_smallness(&ScalarField::zeros(&g), 0.25).unwrap();
        assert_eq!(z.total(), 0.0);
        let one = phi_smallness(&ScalarField::constant(&g, 1.0), 0.25).unwrap();
        assert!((one.value - 4.0 * PI).abs() < 1e-12);
        assert!(one.gradient < 1e-12 && one.laplacian < 1e-12);
    }
}
