//! Dormand–Prince 5(4) stepper with standard PI-free step control.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Difference between the 5th- and embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

/// Outcome of one attempted step of size `h` from `(x, y)`.
pub(crate) struct Attempt<const N: usize> {
    pub y: [f64; N],
    /// Scaled error norm; the step is acceptable when `<= 1`.
    pub err: f64,
}

pub(crate) fn attempt<const N: usize, F>(
    f: &F,
    x: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    tol: Tolerances,
) -> Attempt<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let comb = |terms: &[(f64, &[f64; N])]| -> [f64; N] {
        let mut out = *y;
        for (c, k) in terms {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
        out
    };
    let k2 = f(x + C2 * h, &comb(&[(A21, k1)]));
    let k3 = f(x + C3 * h, &comb(&[(A31, k1), (A32, &k2)]));
    let k4 = f(x + C4 * h, &comb(&[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(
        x + C5 * h,
        &comb(&[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        x + h,
        &comb(&[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y_new = comb(&[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(x + h, &y_new);

    let mut acc = 0.0;
    for i in 0..N {
        let e = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
        acc += (e / sc).powi(2);
    }
    Attempt {
        y: y_new,
        err: (acc / N as f64).sqrt(),
    }
}

/// Step-size multiplier from an error estimate (order 5, safety 0.9).
pub(crate) fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_exponential_to_tolerance() {
        let f = |_x: f64, y: &[f64; 1]| [-y[0]];
        let tol = Tolerances {
            rtol: 1e-10,
            atol: 1e-14,
        };
        let (mut x, mut y, mut h): (f64, [f64; 1], f64) = (0.0, [1.0], 0.1);
        while x < 5.0 {
            h = h.min(5.0 - x);
            let k1 = f(x, &y);
            let a = attempt(&f, x, &y, &k1, h, tol);
            if a.err <= 1.0 {
                x += h;
                y = a.y;
            }
            h *= step_factor(a.err);
        }
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-11);
    }
}
