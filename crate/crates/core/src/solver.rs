//! Projected Sobolev-gradient descent on the Nehari set, multistart over
//! peak centres, and warm-started continuation in ε.

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{barycenter, build_peak, PeakSpec};
use crate::error::{Error, Result};
use crate::grid::{ScalarField, TorusGrid, TorusPoint};
use crate::ground_state::RadialProfile;
use crate::nehari::{Functional, NehariProjection, SystemParams};

/// Coefficient of variation below which a field counts as constant.
pub const CONSTANCY_THRESHOLD: f64 = 1e-3;
/// Minimum number of grid points across the peak diameter `4ε`.
pub const RESOLUTION_POINTS: f64 = 6.0;
/// Relative L² distance below which two solutions are identified.
pub const DEDUP_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Threshold on `‖grad‖_ε / ‖u‖_ε`.
    pub grad_tol: f64,
    pub step_init: f64,
    pub backtrack_factor: f64,
    pub armijo_c: f64,
    /// Upper bound on the trial step after successful iterations.
    pub max_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iters: 2000,
            grad_tol: 1e-6,
            step_init: 1.0,
            backtrack_factor: 0.5,
            armijo_c: 1e-4,
            max_step: 4.0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::param("max_iters", "must be positive"));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::param("grad_tol", "must be positive"));
        }
        if !(self.step_init > 0.0 && self.step_init.is_finite()) {
            return Err(Error::param("step_init", "must be positive"));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::param("backtrack_factor", "must lie in (0, 1)"));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 0.5) {
            return Err(Error::param("armijo_c", "must lie in (0, 1/2)"));
        }
        if !(self.max_step >= self.step_init) {
            return Err(Error::param("max_step", "must be at least step_init"));
        }
        Ok(())
    }
}

/// One line of the iteration log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub field: ScalarField,
    pub params: SystemParams,
    pub energy: f64,
    /// Final `‖grad‖_ε / ‖u‖_ε`.
    pub grad_norm: f64,
    pub iterations: usize,
    /// Projection scale of every accepted iterate, the initial one first.
    pub t_history: Vec<f64>,
    pub energy_history: Vec<f64>,
    pub converged: bool,
    /// Relative L² residual of the stationary equation.
    pub pde_residual: f64,
    /// Coefficient of variation of the field is at least [`CONSTANCY_THRESHOLD`].
    pub nonconstant: bool,
    /// Fewer than [`RESOLUTION_POINTS`] grid points across `4ε`.
    pub under_resolved: bool,
}

/// Coefficient of variation `std(u)/|mean(u)|`.
pub fn coefficient_of_variation(u: &ScalarField) -> f64 {
    let m = u.mean();
    let var = u.values().iter().map(|v| (v - m).powi(2)).sum::<f64>() / u.values().len() as f64;
    if m == 0.0 {
        f64::INFINITY
    } else {
        var.sqrt() / m.abs()
    }
}

pub fn is_under_resolved(grid: &TorusGrid, epsilon: f64) -> bool {
    4.0 * epsilon / grid.spacing() < RESOLUTION_POINTS
}

pub fn minimize_from(u0: &ScalarField, params: &SystemParams, opts: &SolverOptions) -> Result<SolveReport> {
    minimize_observed(u0, params, opts, &mut |_| {})
}

/// [`minimize_from`] with a callback invoked once per iteration.
pub fn minimize_observed(
    u0: &ScalarField,
    params: &SystemParams,
    opts: &SolverOptions,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<SolveReport> {
    opts.validate()?;
    let f = Functional::new(u0.grid(), *params)?;
    let mut cur = f.project(u0)?;
    let mut t_history = vec![cur.t];
    let mut energy_history = vec![cur.energy];
    let mut step = opts.step_init;
    let mut iterations = 0;
    let min_step = opts.step_init * 1e-14;

    let (grad_norm, pde_residual, converged) = loop {
        let g = f.grad_with_phi(&cur.field, &cur.phi)?;
        let g_sq = f.inner(&g, &g)?;
        let rel = (g_sq / cur.coefficients.a).sqrt();
        observer(&IterationRecord {
            iter: iterations,
            energy: cur.energy,
            grad_norm: rel,
            t: *t_history.last().unwrap(),
        });
        if rel <= opts.grad_tol {
            let res = f.pde_residual_with_phi(&cur.field, &cur.phi)?;
            if res <= 10.0 * opts.grad_tol {
                break (rel, res, true);
            }
        }
        if iterations >= opts.max_iters {
            let res = f.pde_residual_with_phi(&cur.field, &cur.phi)?;
            break (rel, res, false);
        }

        let mut s = step;
        let accepted: NehariProjection = loop {
            let trial = cur.field.axpy(-s, &g)?;
            match f.project(&trial) {
                Ok(next) if next.energy <= cur.energy - opts.armijo_c * s * g_sq => break next,
                Ok(_) | Err(Error::ProjectionUndefined) | Err(Error::ScaleOutOfRange { .. }) => {}
                Err(e) => return Err(e),
            }
            s *= opts.backtrack_factor;
            if s < min_step {
                if rel <= opts.grad_tol {
                    // Stationary to round-off but the residual test did not pass.
                    let res = f.pde_residual_with_phi(&cur.field, &cur.phi)?;
                    return Ok(finish(cur, *params, rel, iterations, t_history, energy_history, false, res));
                }
                return Err(Error::NonDescent {
                    iteration: iterations,
                    step: s,
                    grad_norm: rel,
                    last: Box::new(cur.field),
                });
            }
        };
        iterations += 1;
        t_history.push(accepted.t);
        energy_history.push(accepted.energy);
        cur = accepted;
        step = (s / opts.backtrack_factor).min(opts.max_step);
    };
    Ok(finish(cur, *params, grad_norm, iterations, t_history, energy_history, converged, pde_residual))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    cur: NehariProjection,
    params: SystemParams,
    grad_norm: f64,
    iterations: usize,
    t_history: Vec<f64>,
    energy_history: Vec<f64>,
    converged: bool,
    pde_residual: f64,
) -> SolveReport {
    let nonconstant = coefficient_of_variation(&cur.field) >= CONSTANCY_THRESHOLD;
    let under_resolved = is_under_resolved(cur.field.grid(), params.epsilon);
    SolveReport {
        energy: cur.energy,
        field: cur.field,
        params,
        grad_norm,
        iterations,
        t_history,
        energy_history,
        converged,
        pde_residual,
        nonconstant,
        under_resolved,
    }
}

/// Warm start from a previous solution at a smaller (or equal) ε.
pub fn continue_in_epsilon(
    report: &SolveReport,
    next: &SystemParams,
    opts: &SolverOptions,
) -> Result<SolveReport> {
    if next.epsilon > report.params.epsilon {
        return Err(Error::param(
            "epsilon",
            format!("continuation needs ε ≤ {}, got {}", report.params.epsilon, next.epsilon),
        ));
    }
    minimize_from(&report.field, next, opts)
}

/// Outcome for one seed of a multistart batch.
#[derive(Debug)]
pub struct SeedRun {
    pub seed_index: usize,
    pub seed: TorusPoint,
    /// Nehari projection of the initial peak.
    pub initial: Result<NehariProjection>,
    pub result: Result<SolveReport>,
}

#[derive(Debug)]
pub struct MultistartReport {
    /// One entry per seed, in input order.
    pub runs: Vec<SeedRun>,
    /// Indices into `runs` of pairwise distinct solutions, by increasing energy.
    pub distinct: Vec<usize>,
}

impl MultistartReport {
    pub fn solutions(&self) -> impl Iterator<Item = &SolveReport> {
        self.distinct
            .iter()
            .filter_map(move |&i| self.runs[i].result.as_ref().ok())
    }
}

/// Solve from a standard peak at every seed; seeds run concurrently.
pub fn multistart(
    grid: &TorusGrid,
    seeds: &[TorusPoint],
    params: &SystemParams,
    profile: &RadialProfile,
    opts: &SolverOptions,
) -> Result<MultistartReport> {
    if seeds.is_empty() {
        return Err(Error::param("seeds", "must be nonempty"));
    }
    opts.validate()?;
    let runs: Vec<SeedRun> = seeds
        .par_iter()
        .enumerate()
        .map(|(seed_index, &seed)| {
            let initial = PeakSpec::standard(grid, seed, params.epsilon)
                .and_then(|spec| build_peak(grid, &spec, profile))
                .and_then(|w| Functional::new(grid, *params)?.project(&w));
            let result = match &initial {
                Ok(proj) => minimize_from(&proj.field, params, opts),
                Err(e) => Err(Error::Format(format!("initial peak failed: {e}"))),
            };
            SeedRun {
                seed_index,
                seed,
                initial,
                result,
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..runs.len())
        .filter(|&i| runs[i].result.is_ok())
        .collect();
    let energy = |i: usize| runs[i].result.as_ref().map(|r| r.energy).unwrap_or(f64::INFINITY);
    order.sort_by(|&i, &j| energy(i).total_cmp(&energy(j)).then(i.cmp(&j)));
    let mut distinct: Vec<usize> = Vec::new();
    for i in order {
        let r = runs[i].result.as_ref().unwrap();
        let dup = distinct.iter().any(|&j| {
            let s = runs[j].result.as_ref().unwrap();
            translation_distance(&r.field, &s.field, params.p).map_or(false, |d| d < DEDUP_TOLERANCE)
        });
        if !dup {
            distinct.push(i);
        }
    }
    Ok(MultistartReport { runs, distinct })
}

/// Relative L² distance between `f` and the best grid translate of `g`:
/// barycenters are aligned first, then the 27 neighbouring shifts are tried.
pub fn translation_distance(f: &ScalarField, g: &ScalarField, p: f64) -> Result<f64> {
    let grid = f.grid();
    let n = grid.n_per_axis() as i64;
    let h = grid.spacing();
    let base = match (barycenter(f, p), barycenter(g, p)) {
        (Ok(bf), Ok(bg)) => {
            let mut s = [0i64; 3];
            for axis in 0..3 {
                let cells = ((bf[axis] - bg[axis]) / h).round() as i64;
                s[axis] = (cells + n / 2).rem_euclid(n) - n / 2;
            }
            s
        }
        _ => [0; 3],
    };
    let mut best = f64::INFINITY;
    for dk in -1..=1 {
        for dj in -1..=1 {
            for di in -1..=1 {
                let shifted = g.shift([base[0] + di, base[1] + dj, base[2] + dk]);
                best = best.min(f.relative_l2_distance(&shifted)?);
            }
        }
    }
    Ok(best)
}
