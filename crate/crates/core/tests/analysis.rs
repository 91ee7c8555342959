mod common;

use std::f64::consts::PI;
use std::sync::OnceLock;

use common::grid;
use proptest::prelude::*;
use sbpp_core::analysis::*;
use sbpp_core::nehari::{energy, project_nehari};
use sbpp_core::{find_ground_state, Error, RadialProfile, ScalarField, SystemParams};

fn profile() -> &'static RadialProfile {
    static P: OnceLock<RadialProfile> = OnceLock::new();
    P.get_or_init(|| find_ground_state(5.0, 1e-10).unwrap())
}

#[test]
fn peak_center_and_support() {
    let g = grid(32);
    let xi = [g.spacing() * 5.0, g.spacing() * 7.0, 0.0];
    let spec = PeakSpec::new(&g, xi, 0.3, 1.5).unwrap();
    let w = build_peak(&g, &spec, profile()).unwrap();
    let centre = g.index(5, 7, 0);
    assert_eq!(w.values()[centre], profile().u0());
    for (idx, &v) in w.values().iter().enumerate() {
        let d = g.distance(&g.position(idx), &xi);
        if d >= 1.5 {
            assert_eq!(v, 0.0);
        } else if d <= 0.75 {
            assert_eq!(v, profile().evaluate(d / 0.3));
        } else {
            assert!(v >= 0.0 && v <= profile().evaluate(d / 0.3));
        }
    }
}

#[test]
fn peak_spec_violations() {
    let g = grid(16);
    let bad = PeakSpec { center: [0.0; 3], epsilon: 0.5, cutoff_radius: 1.0 };
    assert!(matches!(build_peak(&g, &bad, profile()), Err(Error::Parameter { .. })));
}

#[test]
fn barycenter_of_peak() {
    let g = grid(32);
    let xi = [1.0, 5.5, 3.0];
    let w = build_peak(&g, &PeakSpec::standard(&g, xi, 0.3).unwrap(), profile()).unwrap();
    let b = barycenter(&w, 5.0).unwrap();
    assert!(g.distance(&b, &xi) < g.spacing());
}

#[test]
fn antipodal_peaks_have_no_direction() {
    let g = grid(32);
    let l = g.period_length();
    let xi = [0.0, 1.0, 2.0];
    let a = build_peak(&g, &PeakSpec::standard(&g, xi, 0.3).unwrap(), profile()).unwrap();
    let b = a.shift([16, 0, 0]);
    let both = a.add(&b).unwrap();
    match barycenter(&both, 5.0) {
        Err(Error::BarycenterUndefined { axis, .. }) => assert_eq!(axis, 0),
        Ok(p) => panic!("expected undefined, got {p:?} (L = {l})"),
        Err(e) => panic!("{e}"),
    }
    let mp = max_point(&both);
    assert_eq!(mp.n_local_maxima, 2);
}

#[test]
fn max_point_of_peak() {
    let g = grid(32);
    let xi = [1.02, 2.0, 4.4];
    let w = build_peak(&g, &PeakSpec::standard(&g, xi, 0.3).unwrap(), profile()).unwrap();
    let mp = max_point(&w);
    assert_eq!(mp.n_local_maxima, 1);
    let nearest = (0..g.len())
        .min_by(|&i, &j| g.distance(&g.position(i), &xi).total_cmp(&g.distance(&g.position(j), &xi)))
        .unwrap();
    assert_eq!(mp.index, nearest);
    assert_eq!(mp.value, w.max());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn translation_equivariance(i in 0i64..32, j in 0i64..32, k in 0i64..32) {
        let g = grid(32);
        let xi = [0.9, 2.3, 4.1];
        let w = build_peak(&g, &PeakSpec::standard(&g, xi, 0.3).unwrap(), profile()).unwrap();
        let shifted = w.shift([i, j, k]);
        let l = g.period_length();
        let h = g.spacing();
        let b0 = barycenter(&w, 5.0).unwrap();
        let b1 = barycenter(&shifted, 5.0).unwrap();
        for (axis, s) in [i, j, k].into_iter().enumerate() {
            let expect = (b0[axis] + s as f64 * h).rem_euclid(l);
            let diff = (b1[axis] - expect).rem_euclid(l);
            prop_assert!(diff.min(l - diff) < 1e-12 * l);
        }
        let m0 = max_point(&w);
        let m1 = max_point(&shifted);
        let c0 = g.coords(m0.index);
        let expect = g.index(
            (c0[0] as i64 + i).rem_euclid(32) as usize,
            (c0[1] as i64 + j).rem_euclid(32) as usize,
            (c0[2] as i64 + k).rem_euclid(32) as usize,
        );
        prop_assert_eq!(m1.index, expect);
        prop_assert_eq!(m1.value, m0.value);
        prop_assert_eq!(m1.n_local_maxima, m0.n_local_maxima);
    }

    #[test]
    fn psi_map_is_ray_invariant(s in 0.05f64..20.0) {
        let g = grid(16);
        let params = SystemParams::new(5.0, 0.25, 0.5).unwrap();
        let xi = [1.0, 2.0, 3.0];
        let r = standard_cutoff_radius(g.period_length(), 0.5);
        let psi = psi_map(&g, xi, &params, profile(), r).unwrap();
        let w = build_peak(&g, &PeakSpec::new(&g, xi, 0.5, r).unwrap(), profile()).unwrap();
        let other = project_nehari(&w.scale(s), &params).unwrap();
        prop_assert!(psi.field.relative_l2_distance(&other.field).unwrap() < 1e-10);
    }

    #[test]
    fn constant_branch_root(p in 4.5f64..5.95) {
        let cb = constant_branch(p).unwrap();
        prop_assert!(cb.c_star > (4.0 * PI).powf(1.0 / (p - 4.0)));
        let f = cb.c_star.powf(p - 2.0);
        prop_assert!(cb.residual.abs() < 1e-10 * f);
    }
}

#[test]
fn constant_branch_examples() {
    let cb = constant_branch(5.0).unwrap();
    assert!((cb.c_star - 12.5727).abs() < 5e-5);
    assert!((cb.c_star - (4.0 * PI + 1.0 / (16.0 * PI * PI))).abs() < 1e-3);
    assert!(cb.residual.abs() < 1e-10);
    let hi = constant_branch(5.9).unwrap();
    assert!(hi.c_star.is_finite() && hi.c_star > (4.0 * PI).powf(1.0 / 1.9));

    let g = grid(8);
    let u = ScalarField::constant(&g, cb.c_star);
    let scaled: Vec<f64> = [1.0, 0.5, 0.25]
        .iter()
        .map(|&e| energy(&u, &SystemParams::new(5.0, 0.25, e).unwrap()).unwrap() * e * e * e)
        .collect();
    for s in &scaled {
        assert!((s - scaled[0]).abs() <= 1e-12 * scaled[0]);
    }
    assert!((scaled[0] - g.volume() * cb.energy_coefficient).abs() <= 1e-12 * scaled[0]);
}

#[test]
fn concentration_and_profile_error() {
    let g = grid(32);
    let params = SystemParams::new(5.0, 0.25, 0.3).unwrap();
    let m_inf = profile().limit_energy();
    assert_eq!(concentration_ratio(&ScalarField::zeros(&g), [0.0; 3], 1.0, &params, m_inf).unwrap(), 0.0);
    let xi = [3.0, 3.0, 3.0];
    let w = build_peak(&g, &PeakSpec::standard(&g, xi, 0.3).unwrap(), profile()).unwrap();
    let ball = concentration_ratio(&w, xi, g.period_length() / 4.0, &params, m_inf).unwrap();
    let whole = concentration_ratio(&w, xi, g.period_length() / 2.0 * 1.75, &params, m_inf);
    assert!(whole.is_err());
    let whole = concentration_ratio(&w, xi, g.period_length() / 2.0, &params, m_inf).unwrap();
    assert!(ball / whole > 0.99);
    assert!(concentration_ratio(&w, xi, 0.0, &params, m_inf).is_err());

    let mp = max_point(&w);
    let wc = build_peak(&g, &PeakSpec::standard(&g, mp.point, 0.3).unwrap(), profile()).unwrap();
    assert!(profile_error(&wc, &params, profile()).unwrap() < 1e-14);
    let c = ScalarField::constant(&g, 2.0);
    let e = profile_error(&c, &params, profile()).unwrap();
    // |2 − W| peaks either at the centre or where W vanishes.
    assert!((e - (profile().u0() - 2.0).max(2.0)).abs() < 1e-12);
}

#[test]
fn phi_smallness_values() {
    let g = grid(16);
    assert_eq!(phi_smallness(&ScalarField::zeros(&g), 0.25).unwrap().total(), 0.0);
    let one = phi_smallness(&ScalarField::constant(&g, 1.0), 0.25).unwrap();
    assert!((one.value - 4.0 * PI).abs() < 1e-12);
    assert!(one.gradient < 1e-12 && one.laplacian < 1e-12);
}
