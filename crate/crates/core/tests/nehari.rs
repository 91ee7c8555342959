mod common;

use std::f64::consts::PI;

use common::{grid, smooth_field};
use proptest::prelude::*;
use sbpp_core::analysis::constant_branch;
use sbpp_core::nehari::{
    energy, energy_on_nehari, grad, inner_eps, nehari_residual, nehari_scale, project_nehari, Functional,
};
use sbpp_core::{Products, ScalarField, SystemParams};

fn params(eps: f64) -> SystemParams {
    SystemParams::new(5.0, 0.25, eps).unwrap()
}

fn directional_error(u: &ScalarField, h: &ScalarField, p: &SystemParams, tau: f64) -> (f64, f64) {
    let fd = (energy(&u.axpy(tau, h).unwrap(), p).unwrap() - energy(&u.axpy(-tau, h).unwrap(), p).unwrap())
        / (2.0 * tau);
    let g = grad(u, p).unwrap();
    let exact = inner_eps(&g, h, p.epsilon).unwrap();
    let scale = (inner_eps(&g, &g, p.epsilon).unwrap() * inner_eps(h, h, p.epsilon).unwrap()).sqrt();
    ((fd - exact).abs(), scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn gradient_matches_central_difference(
        u in smooth_field(16, 1.0, 0.15), h in smooth_field(16, 0.0, 0.3), eps in 0.3f64..1.0
    ) {
        let p = params(eps);
        let (e2, scale) = directional_error(&u, &h, &p, 1e-2);
        let (e3, _) = directional_error(&u, &h, &p, 1e-3);
        let (e4, _) = directional_error(&u, &h, &p, 1e-4);
        prop_assert!(e4 <= 1e-5 * scale, "rel error {}", e4 / scale);
        // Second order: a tenfold smaller τ gains two digits until the
        // round-off floor |J|·1e-13/τ is reached.
        let noise = 1e-13 * energy(&u, &p).unwrap().abs() / 1e-3;
        prop_assert!(e3 <= 0.02 * e2 || e3 <= noise, "{e2:e} -> {e3:e}");
    }

    #[test]
    fn projection_properties(u in smooth_field(16, 0.5, 0.5), eps in 0.25f64..1.0, s in 0.1f64..10.0) {
        let p = params(eps);
        let pr = project_nehari(&u, &p).unwrap();
        prop_assert!(pr.t > 0.0);
        prop_assert!(pr.nehari_residual.abs() <= 1e-10 * pr.field.norm_eps_sq(eps).unwrap());
        let again = project_nehari(&pr.field, &p).unwrap();
        prop_assert!((again.t - 1.0).abs() < 1e-10);
        let scaled = project_nehari(&u.scale(s), &p).unwrap();
        prop_assert!(pr.field.relative_l2_distance(&scaled.field).unwrap() < 1e-10);
        let reduced = energy_on_nehari(&pr.field, &p).unwrap();
        prop_assert!((reduced - pr.energy).abs() <= 1e-9 * pr.energy);
        let direct = energy(&pr.field, &p).unwrap();
        prop_assert!((direct - pr.energy).abs() <= 1e-9 * pr.energy);
        prop_assert!(pr.energy > 0.0);
    }

    #[test]
    fn single_sign_change_on_ray(u in smooth_field(16, 0.3, 0.6), eps in 0.25f64..1.0) {
        let p = params(eps);
        let k = Functional::new(u.grid(), p).unwrap().coefficients(&u).unwrap();
        let g = |t: f64| k.a + k.b * t * t - k.c * t.powf(3.0);
        let signs: Vec<bool> = (0..=600).map(|i| g(10f64.powf(-3.0 + 6.0 * i as f64 / 600.0)) > 0.0).collect();
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        prop_assert_eq!(changes, 1);
        let t = nehari_scale(k.a, k.b, k.c, 5.0).unwrap();
        prop_assert!(g(t).abs() <= 1e-10 * k.a);
    }

    #[test]
    fn scalar_root_is_ray_consistent(a in 0.01f64..100.0, b in 0.0f64..100.0, c in 0.01f64..100.0, p in 4.01f64..5.99) {
        let g = |t: f64| a + b * t * t - c * t.powf(p - 2.0);
        let t = match nehari_scale(a, b, c, p) {
            Ok(t) => t,
            Err(_) => {
                prop_assert!(g(1e6) > 0.0 || g(1e-6) < 0.0);
                return Ok(());
            }
        };
        let res = a * t * t + b * t.powi(4) - c * t.powf(p);
        prop_assert!(res.abs() <= 1e-10 * (a * t * t + b * t.powi(4)));
    }
}

#[test]
fn scalar_example_matches_bisection() {
    assert_eq!(nehari_scale(1.0, 0.0, 1.0, 5.0).unwrap(), 1.0);
    let t = nehari_scale(1.0, 0.1, 1.0, 5.0).unwrap();
    let oracle = sbpp_core::scalar::bisect(|t| t.powi(3) - 0.1 * t * t - 1.0, 0.5, 2.0, 1e-15).unwrap();
    assert!((t - oracle).abs() < 1e-9);
}

#[test]
fn constant_branch_is_on_nehari() {
    let cb = constant_branch(5.0).unwrap();
    let g = grid(8);
    for eps in [1.0, 0.5, 0.25] {
        let p = params(eps);
        let u = ScalarField::constant(&g, cb.c_star);
        let scale = u.norm_eps_sq(eps).unwrap();
        assert!(nehari_residual(&u, &p).unwrap().abs() < 1e-10 * scale);
        let e = energy(&u, &p).unwrap();
        let reduced = energy_on_nehari(&u, &p).unwrap();
        assert!((e - reduced).abs() < 1e-9 * e);
        let closed = g.volume() * cb.energy_coefficient / eps.powi(3);
        assert!((e - closed).abs() < 1e-10 * e);
    }
}

#[test]
fn negative_constant_gradient_is_constant() {
    let g = grid(8);
    let p = params(0.5);
    let gr = grad(&ScalarField::constant(&g, -1.0), &p).unwrap();
    // Density (1/ε³)(−1 − 4π) mapped by ε³/(1 + 0).
    for v in gr.values() {
        assert!((v + 1.0 + 4.0 * PI).abs() < 1e-10);
    }
}

#[test]
fn projected_energy_floor_is_stable_in_epsilon() {
    // Lower bound of |u⁺|_{p,ε} over projected fields does not collapse.
    let g = grid(16);
    let fields: Vec<ScalarField> = (0..6)
        .map(|j| ScalarField::from_fn(&g, |x| 1.0 + 0.4 * ((j + 1) as f64 * x[0]).cos() * x[1].sin()))
        .collect();
    let mut floors = Vec::new();
    for eps in [0.5, 0.25, 0.125] {
        let p = params(eps);
        let m = fields
            .iter()
            .map(|u| {
                let pr = project_nehari(u, &p).unwrap();
                assert!(pr.energy > 0.0);
                pr.field.positive_part().lp_norm_eps(5.0, eps).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        floors.push(m);
    }
    assert!(floors.iter().all(|&f| f > 1.0), "{floors:?}");
}

#[test]
fn dealiased_products_keep_gradient_consistent() {
    let g = grid(16);
    let p = params(0.6).with_products(Products::Dealiased);
    let u = ScalarField::from_fn(&g, |x| 1.0 + 0.2 * x[0].cos() + 0.1 * (x[1] + x[2]).sin());
    let h = ScalarField::from_fn(&g, |x| (2.0 * x[2]).cos() - 0.3 * x[0].sin());
    let (err, scale) = directional_error(&u, &h, &p, 1e-4);
    assert!(err <= 1e-5 * scale, "{err:e} vs {scale:e}");
}
