mod common;

use std::sync::OnceLock;

use common::grid;
use sbpp_core::analysis::{build_peak, max_point, PeakSpec};
use sbpp_core::nehari::{energy_on_nehari, Functional};
use sbpp_core::solver::*;
use sbpp_core::{find_ground_state, Error, RadialProfile, ScalarField, SystemParams, TorusGrid};

fn profile() -> &'static RadialProfile {
    static P: OnceLock<RadialProfile> = OnceLock::new();
    P.get_or_init(|| find_ground_state(5.0, 1e-10).unwrap())
}

fn peak_report() -> &'static (TorusGrid, SolveReport) {
    static R: OnceLock<(TorusGrid, SolveReport)> = OnceLock::new();
    R.get_or_init(|| {
        let g = grid(32);
        let params = SystemParams::new(5.0, 0.25, 0.6).unwrap();
        let w = build_peak(&g, &PeakSpec::standard(&g, [1.0, 2.0, 3.0], 0.6).unwrap(), profile()).unwrap();
        let r = minimize_from(&w, &params, &SolverOptions::default()).unwrap();
        (g, r)
    })
}

#[test]
fn descent_from_peak_converges() {
    let (_, r) = peak_report();
    assert!(r.converged, "grad {} res {}", r.grad_norm, r.pde_residual);
    assert!(r.grad_norm <= 1e-6 && r.pde_residual <= 1e-5);
    assert!(r.energy_history.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(r.energy_history.len(), r.iterations + 1);
    assert_eq!(r.t_history.len(), r.iterations + 1);
    assert_eq!(*r.energy_history.last().unwrap(), r.energy);
    assert!(r.nonconstant && !r.under_resolved);
    let reduced = energy_on_nehari(&r.field, &r.params).unwrap();
    assert!((reduced - r.energy).abs() <= 1e-9 * r.energy);
    assert!(r.field.max() >= 1.0 - 1e-3);
    assert!(r.energy > 0.0);
    assert_eq!(max_point(&r.field).n_local_maxima, 1);
}

#[test]
fn restart_from_solution_is_a_fixed_point() {
    let (_, r) = peak_report();
    let again = minimize_from(&r.field, &r.params, &SolverOptions::default()).unwrap();
    assert!(again.converged && again.iterations <= 2);
    assert!((again.energy - r.energy).abs() <= 1e-10 * r.energy);
    let same = continue_in_epsilon(r, &r.params, &SolverOptions::default()).unwrap();
    assert!(same.field.relative_l2_distance(&r.field).unwrap() < 1e-6);
    let larger = r.params.with_epsilon(0.9).unwrap();
    assert!(continue_in_epsilon(r, &larger, &SolverOptions::default()).is_err());
}

#[test]
fn observer_sees_every_iteration() {
    let g = grid(16);
    let params = SystemParams::new(5.0, 0.25, 0.8).unwrap();
    let u0 = ScalarField::from_fn(&g, |x| 1.0 + 0.5 * x[0].cos());
    let mut log = Vec::new();
    let r = minimize_observed(&u0, &params, &SolverOptions::default(), &mut |rec| log.push(*rec)).unwrap();
    assert_eq!(log.len(), r.iterations + 1);
    assert!(log.iter().enumerate().all(|(i, rec)| rec.iter == i));
    assert_eq!(log.last().unwrap().grad_norm, r.grad_norm);
}

#[test]
fn iteration_cap_reports_unconverged() {
    let g = grid(16);
    let params = SystemParams::new(5.0, 0.25, 0.8).unwrap();
    let u0 = ScalarField::from_fn(&g, |x| 1.0 + 0.5 * x[0].cos() * x[1].sin());
    let opts = SolverOptions { max_iters: 1, ..SolverOptions::default() };
    let r = minimize_from(&u0, &params, &opts).unwrap();
    assert!(!r.converged);
    assert_eq!(r.iterations, 1);
}

#[test]
fn nonpositive_start_is_rejected() {
    let g = grid(8);
    let params = SystemParams::new(5.0, 0.25, 0.8).unwrap();
    let r = minimize_from(&ScalarField::constant(&g, -1.0), &params, &SolverOptions::default());
    assert!(matches!(r, Err(Error::ProjectionUndefined)));
}

#[test]
fn multistart_deduplicates_translates() {
    let g = grid(16);
    let params = SystemParams::new(5.0, 0.25, 0.7).unwrap();
    let seeds = [[1.0, 1.0, 1.0], [1.0, 1.0, 1.0], [1.0 + 4.0 * g.spacing(), 1.0, 1.0]];
    let ms = multistart(&g, &seeds, &params, profile(), &SolverOptions::default()).unwrap();
    assert_eq!(ms.runs.len(), 3);
    assert!(ms.runs.iter().all(|r| r.result.is_ok()));
    assert_eq!(ms.distinct.len(), 1);
    assert!(multistart(&g, &[], &params, profile(), &SolverOptions::default()).is_err());
}

#[test]
fn per_seed_errors_do_not_abort_batch() {
    let g = grid(16);
    // ε too large for a standard peak on this torus: the seed fails, batch still returns.
    let params = SystemParams::new(5.0, 0.25, 2.0).unwrap();
    let ms = multistart(&g, &[[0.0; 3], [1.0, 0.0, 0.0]], &params, profile(), &SolverOptions::default()).unwrap();
    assert_eq!(ms.runs.len(), 2);
    assert!(ms.runs.iter().all(|r| r.result.is_err()));
    assert!(ms.distinct.is_empty());
}

#[test]
fn constant_branch_at_large_epsilon() {
    let g = grid(16);
    let l = g.period_length();
    let params = SystemParams::new(5.0, 0.25, l).unwrap();
    let cb = sbpp_core::analysis::constant_branch(5.0).unwrap();
    let on_branch = minimize_from(&ScalarField::constant(&g, 2.0), &params, &SolverOptions::default()).unwrap();
    assert!(on_branch.converged && !on_branch.nonconstant);
    assert!((on_branch.field.mean() - cb.c_star).abs() < 1e-8 * cb.c_star);
    let const_energy = g.volume() * cb.energy_coefficient / l.powi(3);
    assert!((on_branch.energy - const_energy).abs() < 1e-9 * const_energy);

    // A perturbation leaves the (saddle) branch for a far lower level.
    let u0 = ScalarField::from_fn(&g, |x| 1.0 + 0.3 * x[0].cos());
    let r = minimize_from(&u0, &params, &SolverOptions::default()).unwrap();
    assert!(r.converged && r.nonconstant);
    assert!(r.energy < 0.1 * const_energy);
}

#[test]
fn translation_distance_aligns_peaks() {
    let g = grid(16);
    let w = build_peak(&g, &PeakSpec::standard(&g, [1.0, 2.0, 3.0], 0.4).unwrap(), profile()).unwrap();
    let moved = w.shift([5, -3, 7]);
    assert!(translation_distance(&w, &moved, 5.0).unwrap() < 1e-14);
    let f = Functional::new(&g, SystemParams::new(5.0, 0.25, 0.4).unwrap()).unwrap();
    assert!(f.energy(&w).unwrap() > 0.0);
}
