//! Positive radial ground state of `-ΔU + U = U^{p-1}` on ℝ³.
//!
//! The radial ODE `u'' + (2/r)u' - u + u^{p-1} = 0` is shot from `u(0) = u0`,
//! `u'(0) = 0`. Too small a `u0` turns back up before decaying
//! ([`ShootOutcome::TurnedBack`]); too large a `u0` crosses zero
//! ([`ShootOutcome::CrossedZero`]). Bisection on `u0` converges to the ground
//! state, whose integrated part is spliced with the tail `c e^{-κr}/r`.

mod dopri;
mod table;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use dopri::{attempt, step_factor, Tolerances};

pub use table::{read_profile, write_profile};

/// Lower end of the default shooting bracket (the center value exceeds 1).
pub const BRACKET_LO: f64 = 1.001;
/// Upper end of the default shooting bracket.
pub const BRACKET_HI: f64 = 1000.0;

/// Integration controls for [`shoot`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    pub rtol: f64,
    pub atol: f64,
    pub r_max: f64,
    /// Spacing of the recorded (uniform) radial table.
    pub node_spacing: f64,
    /// Splice into the closed-form tail once `u < splice_fraction * u0`.
    pub splice_fraction: f64,
    /// Largest relative gap between the two bracketing trajectories that is
    /// still trusted when building the table.
    pub bracket_gap: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            rtol: 1e-10,
            atol: 1e-14,
            r_max: 40.0,
            node_spacing: 0.001,
            splice_fraction: 1e-8,
            bracket_gap: 1e-4,
        }
    }
}

impl ShootOptions {
    /// Same options with both ODE tolerances scaled by `factor`.
    pub fn with_tolerance_scale(self, factor: f64) -> Self {
        ShootOptions {
            rtol: self.rtol * factor,
            atol: self.atol * factor,
            ..self
        }
    }
}

#[derive(Debug, Clone)]
pub enum ShootOutcome {
    /// `u` reached zero at `r` (initial value above the ground state).
    CrossedZero { r: f64 },
    /// `u'` returned to zero with `u > 0` at `r` (initial value below it).
    TurnedBack { r: f64 },
    /// `u` decayed to the splice level while still decreasing.
    Decayed(RadialProfile),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Event {
    CrossedZero(f64),
    TurnedBack(f64),
    Decayed,
}

struct Trajectory {
    u0: f64,
    u: Vec<f64>,
    du: Vec<f64>,
    event: Event,
}

fn check_p(p: f64) -> Result<()> {
    if p > 4.0 && p < 6.0 {
        Ok(())
    } else {
        Err(Error::param("p", format!("must lie in (4, 6), got {p}")))
    }
}

// With `stop_on_decay`, a trajectory that reaches the splice level while
// decaying at a tail-like rate ends as `Decayed`; otherwise integration runs
// on to a turning point or a zero.
fn integrate(p: f64, u0: f64, opts: &ShootOptions, stop_on_decay: bool) -> Result<Trajectory> {
    let rhs = |r: f64, y: &[f64; 2]| {
        let u = y[0];
        [y[1], -2.0 * y[1] / r + u - u.abs().powf(p - 2.0) * u]
    };
    let tol = Tolerances {
        rtol: opts.rtol,
        atol: opts.atol,
    };
    let dr = opts.node_spacing;
    let threshold = opts.splice_fraction * u0;

    // Series start u ≈ u0 + (u0 - u0^{p-1}) r²/6, scaled to the core width.
    let r0 = 1e-3 * u0.powf(-(p - 2.0) / 2.0).min(1.0);
    let curv = (u0 - u0.powf(p - 1.0)) / 3.0;
    let mut x = r0;
    let mut y = [u0 + 0.5 * curv * r0 * r0, curv * r0];
    let mut h = r0;

    let mut u = vec![u0];
    let mut du = vec![0.0];
    let mut next = dr;

    loop {
        if x >= opts.r_max {
            return Err(Error::Integration {
                r: x,
                u: y[0],
                du: y[1],
                reason: "no event before r_max",
            });
        }
        let target = next.min(opts.r_max);
        let step = h.min(target - x);
        if step < 1e-15 * (1.0 + x) {
            return Err(Error::Integration {
                r: x,
                u: y[0],
                du: y[1],
                reason: "step size underflow",
            });
        }
        let k1 = rhs(x, &y);
        let a = attempt(&rhs, x, &y, &k1, step, tol);
        h = step * step_factor(a.err);
        if a.err > 1.0 || !a.y.iter().all(|v| v.is_finite()) {
            continue;
        }
        let (x_prev, y_prev) = (x, y);
        let on_node = x + step >= target;
        x = if on_node { target } else { x + step };
        y = a.y;

        if y[0] <= 0.0 {
            let r = x_prev + (x - x_prev) * y_prev[0] / (y_prev[0] - y[0]);
            return Ok(Trajectory { u0, u, du, event: Event::CrossedZero(r) });
        }
        if y[1] >= 0.0 {
            let r = x_prev + (x - x_prev) * (-y_prev[1]) / (y[1] - y_prev[1]);
            return Ok(Trajectory { u0, u, du, event: Event::TurnedBack(r) });
        }
        if on_node {
            u.push(y[0]);
            du.push(y[1]);
            next = dr * u.len() as f64;
            let rate = -y[1] / y[0] - 1.0 / x;
            if stop_on_decay && y[0] < threshold && (0.9..=1.1).contains(&rate) {
                return Ok(Trajectory { u0, u, du, event: Event::Decayed });
            }
        }
    }
}

/// Integrate the radial ODE from `u0` until one of the three outcomes.
pub fn shoot(p: f64, u0: f64, opts: &ShootOptions) -> Result<ShootOutcome> {
    check_p(p)?;
    if !(u0 > 1.0) {
        return Err(Error::param("u0", format!("must exceed 1, got {u0}")));
    }
    if opts.r_max < 20.0 {
        return Err(Error::param("r_max", format!("must be >= 20, got {}", opts.r_max)));
    }
    let t = integrate(p, u0, opts, true)?;
    Ok(match t.event {
        Event::CrossedZero(r) => ShootOutcome::CrossedZero { r },
        Event::TurnedBack(r) => ShootOutcome::TurnedBack { r },
        Event::Decayed => {
            let s = t.u.len() - 1;
            ShootOutcome::Decayed(splice(p, t.u0, opts.node_spacing, &t.u[..=s], t.du[s])?)
        }
    })
}

/// Ground state by bisection on `u0` over the default bracket.
pub fn find_ground_state(p: f64, tol: f64) -> Result<RadialProfile> {
    find_ground_state_in(p, tol, BRACKET_LO, BRACKET_HI, &ShootOptions::default())
}

/// Ground state by bisection on `u0 ∈ [lo, hi]`; stops once the bracket is
/// narrower than `tol` (or cannot be split further).
pub fn find_ground_state_in(
    p: f64,
    tol: f64,
    lo: f64,
    hi: f64,
    opts: &ShootOptions,
) -> Result<RadialProfile> {
    check_p(p)?;
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    let bracket_err = || Error::Bracket { p, lo, hi };
    if !(lo > 1.0 && hi > lo) {
        return Err(bracket_err());
    }
    let mut t_lo = integrate(p, lo, opts, false)?;
    let mut t_hi = integrate(p, hi, opts, false)?;
    if !matches!(t_lo.event, Event::TurnedBack(_)) || !matches!(t_hi.event, Event::CrossedZero(_)) {
        return Err(bracket_err());
    }
    loop {
        let mid = 0.5 * (t_lo.u0 + t_hi.u0);
        if t_hi.u0 - t_lo.u0 < tol || mid <= t_lo.u0 || mid >= t_hi.u0 {
            break;
        }
        let t = integrate(p, mid, opts, false)?;
        match t.event {
            Event::TurnedBack(_) => t_lo = t,
            Event::CrossedZero(_) => t_hi = t,
            Event::Decayed => unreachable!("decay stop disabled"),
        }
    }

    // The ground state lies between the two trajectories; trust their mean
    // while they agree.
    let n = t_lo.u.len().min(t_hi.u.len());
    let u0 = 0.5 * (t_lo.u0 + t_hi.u0);
    let mut u = Vec::with_capacity(n);
    let mut du_last = 0.0;
    for j in 0..n {
        let m = 0.5 * (t_lo.u[j] + t_hi.u[j]);
        let gap = (t_lo.u[j] - t_hi.u[j]).abs();
        if j > 0 && gap > opts.bracket_gap * m {
            break;
        }
        u.push(m);
        du_last = 0.5 * (t_lo.du[j] + t_hi.du[j]);
        if m < opts.splice_fraction * u0 {
            break;
        }
    }
    u[0] = u0;
    splice(p, u0, opts.node_spacing, &u, du_last)
}

fn splice(p: f64, u0: f64, dr: f64, u: &[f64], du_last: f64) -> Result<RadialProfile> {
    let s = u.len() - 1;
    if s < 4 {
        return Err(Error::Integration {
            r: s as f64 * dr,
            u: u[s],
            du: du_last,
            reason: "too few reliable nodes to splice a tail",
        });
    }
    let r = s as f64 * dr;
    let rate = -du_last / u[s] - 1.0 / r;
    let amp = u[s] * r * (rate * r).exp();
    let mut values = u.to_vec();
    values[0] = u0;
    RadialProfile::new(p, dr, values, rate, amp)
}

/// Tabulated radial ground state on uniform nodes `r_j = j·Δr`, with the
/// closed-form tail `c e^{-κr}/r` beyond the last node.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    p: f64,
    spacing: f64,
    u_values: Vec<f64>,
    decay_rate: f64,
    tail_amplitude: f64,
    slopes: Vec<f64>,
}

/// Radial integrals of a profile (all include the analytic tail).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileIntegrals {
    /// `∫ |∇U|² + U²` over ℝ³.
    pub h1_norm_sq: f64,
    /// `∫ U²` over ℝ³.
    pub l2_norm_sq: f64,
    /// `∫ U^p` over ℝ³.
    pub lp_pow: f64,
}

impl ProfileIntegrals {
    /// `|‖U‖²_{H¹} − |U|ᵖ_p| / ‖U‖²_{H¹}`.
    pub fn nehari_identity_error(&self) -> f64 {
        (self.h1_norm_sq - self.lp_pow).abs() / self.h1_norm_sq
    }
}

impl RadialProfile {
    pub fn new(
        p: f64,
        spacing: f64,
        u_values: Vec<f64>,
        decay_rate: f64,
        tail_amplitude: f64,
    ) -> Result<Self> {
        check_p(p)?;
        if !(spacing > 0.0) || u_values.len() < 5 {
            return Err(Error::param("r_nodes", "need >= 5 uniformly spaced nodes"));
        }
        if !u_values.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::param("u_values", "must be finite and strictly positive"));
        }
        if !u_values.windows(2).all(|w| w[1] < w[0]) {
            return Err(Error::param("u_values", "must be strictly decreasing"));
        }
        if !(0.9..=1.1).contains(&decay_rate) {
            return Err(Error::param(
                "decay_rate",
                format!("fitted tail rate {decay_rate} outside [0.9, 1.1]"),
            ));
        }
        if !(tail_amplitude.is_finite() && tail_amplitude > 0.0) {
            return Err(Error::param("tail_amplitude", "must be positive"));
        }
        let mut prof = RadialProfile {
            p,
            spacing,
            u_values,
            decay_rate,
            tail_amplitude,
            slopes: Vec::new(),
        };
        prof.slopes = prof.monotone_slopes();
        Ok(prof)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn u0(&self) -> f64 {
        self.u_values[0]
    }

    pub fn decay_rate(&self) -> f64 {
        self.decay_rate
    }

    pub fn tail_amplitude(&self) -> f64 {
        self.tail_amplitude
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn u_values(&self) -> &[f64] {
        &self.u_values
    }

    pub fn r_nodes(&self) -> Vec<f64> {
        (0..self.u_values.len()).map(|j| self.node(j)).collect()
    }

    pub fn r_last(&self) -> f64 {
        self.node(self.u_values.len() - 1)
    }

    fn node(&self, j: usize) -> f64 {
        j as f64 * self.spacing
    }

    /// The tail `c e^{-κr}/r`.
    pub fn tail(&self, r: f64) -> f64 {
        self.tail_amplitude * (-self.decay_rate * r).exp() / r
    }

    fn tail_slope(&self, r: f64) -> f64 {
        -self.tail(r) * (self.decay_rate + 1.0 / r)
    }

    // Fritsch–Carlson slopes on uniform nodes; zero at the center, tail
    // derivative at the splice node.
    fn monotone_slopes(&self) -> Vec<f64> {
        let u = &self.u_values;
        let n = u.len();
        let h = self.spacing;
        let secant: Vec<f64> = u.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let mut d = vec![0.0; n];
        for j in 1..n - 1 {
            let (a, b) = (secant[j - 1], secant[j]);
            d[j] = if a * b <= 0.0 { 0.0 } else { 2.0 / (1.0 / a + 1.0 / b) };
        }
        let last = self.tail_slope(self.node(n - 1));
        // Keep the end slope inside the monotonicity region.
        d[n - 1] = last.max(3.0 * secant[n - 2]);
        d
    }

    /// `U(r)`: monotone cubic interpolation on the table, tail beyond it.
    pub fn evaluate(&self, r: f64) -> f64 {
        let r = r.abs();
        let n = self.u_values.len();
        if r >= self.r_last() {
            return self.tail(r.max(self.r_last()));
        }
        let h = self.spacing;
        let j = ((r / h) as usize).min(n - 2);
        let t = (r - self.node(j)) / h;
        let (y0, y1) = (self.u_values[j], self.u_values[j + 1]);
        let (d0, d1) = (self.slopes[j] * h, self.slopes[j + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1;
        v.max(0.0)
    }

    // Value at node index j, extended by evenness below 0 and by the tail
    // past the splice node.
    fn extended(&self, j: i64) -> f64 {
        let n = self.u_values.len() as i64;
        if j < 0 {
            self.u_values[(-j) as usize]
        } else if j < n {
            self.u_values[j as usize]
        } else {
            self.tail(j as f64 * self.spacing)
        }
    }

    /// Radial integrals by composite Simpson on the table plus tail quadrature.
    pub fn integrals(&self) -> ProfileIntegrals {
        let h = self.spacing;
        let n = self.u_values.len();
        let p = self.p;
        let mut g = Vec::with_capacity(n);
        let mut l2 = Vec::with_capacity(n);
        let mut lp = Vec::with_capacity(n);
        for j in 0..n {
            let ji = j as i64;
            // Fourth-order central difference.
            let du = (self.extended(ji - 2) - 8.0 * self.extended(ji - 1)
                + 8.0 * self.extended(ji + 1)
                - self.extended(ji + 2))
                / (12.0 * h);
            let r = self.node(j);
            let u = self.u_values[j];
            g.push(r * r * du * du);
            l2.push(r * r * u * u);
            lp.push(r * r * u.powf(p));
        }
        let r_end = self.r_last();
        let tail_l2 = tail_quadrature(r_end, self.decay_rate, |r| {
            let t = self.tail(r);
            r * r * t * t
        });
        let tail_g = tail_quadrature(r_end, self.decay_rate, |r| {
            let d = self.tail_slope(r);
            r * r * d * d
        });
        let tail_lp = tail_quadrature(r_end, self.decay_rate, |r| r * r * self.tail(r).powf(p));
        let four_pi = 4.0 * PI;
        let l2_norm_sq = four_pi * (simpson(&l2, h) + tail_l2);
        ProfileIntegrals {
            h1_norm_sq: four_pi * (simpson(&g, h) + tail_g) + l2_norm_sq,
            l2_norm_sq,
            lp_pow: four_pi * (simpson(&lp, h) + tail_lp),
        }
    }

    /// `m_∞ = (p−2)/(2p) |U|ᵖ_p`.
    pub fn limit_energy(&self) -> f64 {
        limit_energy(self)
    }
}

/// `m_∞ = (p−2)/(2p) |U|ᵖ_p`, by radial quadrature including the tail.
pub fn limit_energy(profile: &RadialProfile) -> f64 {
    let p = profile.p;
    (p - 2.0) / (2.0 * p) * profile.integrals().lp_pow
}

/// The same level through the Nehari identity, `(p−2)/(2p) ‖U‖²_{H¹}`.
pub fn limit_energy_from_h1(profile: &RadialProfile) -> f64 {
    let p = profile.p;
    (p - 2.0) / (2.0 * p) * profile.integrals().h1_norm_sq
}

// Composite Simpson on uniform samples; a 3/8 panel absorbs an odd interval.
fn simpson(f: &[f64], h: f64) -> f64 {
    let intervals = f.len() - 1;
    let (body, tail) = if intervals % 2 == 0 {
        (intervals, 0.0)
    } else {
        let k = intervals - 3;
        let t = 3.0 * h / 8.0 * (f[k] + 3.0 * f[k + 1] + 3.0 * f[k + 2] + f[k + 3]);
        (k, t)
    };
    let mut s = f[0] + f[body];
    for (j, v) in f.iter().enumerate().take(body).skip(1) {
        s += if j % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0 + tail
}

fn tail_quadrature(r0: f64, rate: f64, f: impl Fn(f64) -> f64) -> f64 {
    let span = 40.0 / rate;
    let n = 4000;
    let h = span / n as f64;
    let samples: Vec<f64> = (0..=n).map(|j| f(r0 + j as f64 * h)).collect();
    simpson(&samples, h)
}
