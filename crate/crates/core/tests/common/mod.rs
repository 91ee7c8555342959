#![allow(dead_code)]

use std::f64::consts::PI;

use proptest::prelude::*;
use sbpp_core::{ScalarField, TorusGrid};

pub fn grid(n: usize) -> TorusGrid {
    TorusGrid::new(n, 2.0 * PI).unwrap()
}

/// `base + Σ c·trig(k·x)` over wavevectors with entries in `{-2..2}`.
pub fn smooth_field(n: usize, base: f64, amp: f64) -> impl Strategy<Value = ScalarField> {
    prop::collection::vec((-2i32..=2, -2i32..=2, -2i32..=2, -1.0f64..1.0, any::<bool>()), 6).prop_map(
        move |modes| {
            let g = grid(n);
            ScalarField::from_fn(&g, |x| {
                base + modes
                    .iter()
                    .map(|&(a, b, c, w, sine)| {
                        let ph = a as f64 * x[0] + b as f64 * x[1] + c as f64 * x[2];
                        amp * w * if sine { ph.sin() } else { ph.cos() }
                    })
                    .sum::<f64>()
            })
        },
    )
}
