//! Periodic scalar fields on a uniform cubic grid over the flat 3-torus.
//!
//! Quadrature is the rectangle rule, which is exact for trigonometric
//! polynomials resolved by the grid. Derivatives and constant-coefficient
//! operators are applied as diagonal Fourier multipliers.
//!
//! Normalization: the forward transform carries `1/n³`, so a field is
//! `f(x) = Σ_k f̂(k) e^{ik·x}` and Parseval reads `∫ f² = L³ Σ |f̂(k)|²`.

mod dump;
mod fft;

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

pub use dump::{read_field, write_field, FieldDump, SBPF_MAGIC, SBPF_VERSION};

use crate::error::{Error, Result};
use fft::Fft3d;

/// A point on the torus, coordinates in `[0, L)`.
pub type TorusPoint = [f64; 3];

/// How quadratic pointwise products are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Products {
    /// Multiply grid values directly (aliasing accepted).
    #[default]
    Pointwise,
    /// 3/2-rule zero padding: the product of the two trigonometric
    /// interpolants, truncated back to the grid's modes.
    Dealiased,
}

/// Cubic grid with `n` points per axis on a torus of side `L`.
#[derive(Clone)]
pub struct TorusGrid {
    inner: Arc<GridInner>,
}

struct GridInner {
    n: usize,
    length: f64,
    fft: Fft3d,
    padded: OnceLock<Fft3d>,
    /// Wavenumber per axis index (signed mode times 2π/L).
    wave: Vec<f64>,
    /// |k|² per flat mode index.
    ksq: Vec<f64>,
}

impl TorusGrid {
    pub fn new(n_per_axis: usize, period_length: f64) -> Result<Self> {
        if n_per_axis < 8 || n_per_axis % 2 != 0 {
            return Err(Error::param(
                "n_per_axis",
                format!("must be even and >= 8, got {n_per_axis}"),
            ));
        }
        if !(period_length.is_finite() && period_length > 0.0) {
            return Err(Error::param(
                "period_length",
                format!("must be positive and finite, got {period_length}"),
            ));
        }
        let n = n_per_axis;
        let dk = 2.0 * PI / period_length;
        let wave: Vec<f64> = (0..n).map(|m| dk * signed_mode(m, n) as f64).collect();
        let mut ksq = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    ksq.push(wave[i] * wave[i] + wave[j] * wave[j] + wave[k] * wave[k]);
                }
            }
        }
        Ok(TorusGrid {
            inner: Arc::new(GridInner {
                n,
                length: period_length,
                fft: Fft3d::new(n),
                padded: OnceLock::new(),
                wave,
                ksq,
            }),
        })
    }

    pub fn n_per_axis(&self) -> usize {
        self.inner.n
    }

    pub fn period_length(&self) -> f64 {
        self.inner.length
    }

    pub fn spacing(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    pub fn len(&self) -> usize {
        self.inner.n.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.inner.length.powi(3)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    /// Flat index of grid node `(i, j, k)`.
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let n = self.inner.n;
        i + n * (j + n * k)
    }

    /// Inverse of [`TorusGrid::index`].
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.inner.n;
        [idx % n, (idx / n) % n, idx / (n * n)]
    }

    pub fn position(&self, idx: usize) -> TorusPoint {
        let h = self.spacing();
        self.coords(idx).map(|c| c as f64 * h)
    }

    /// |k|² of every mode, in flat storage order.
    pub fn wavenumber_sq(&self) -> &[f64] {
        &self.inner.ksq
    }

    /// Wavenumber along one axis for a per-axis mode index.
    pub fn wavenumber(&self, m: usize) -> f64 {
        self.inner.wave[m]
    }

    /// Periodic distance between two torus points.
    pub fn distance(&self, a: &TorusPoint, b: &TorusPoint) -> f64 {
        let l = self.inner.length;
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                let d = (x - y).rem_euclid(l);
                let d = d.min(l - d);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Wrap a point into `[0, L)³`.
    pub fn wrap(&self, p: &TorusPoint) -> TorusPoint {
        let l = self.inner.length;
        p.map(|x| {
            let w = x.rem_euclid(l);
            if w >= l {
                0.0
            } else {
                w
            }
        })
    }

    fn padded_fft(&self) -> &Fft3d {
        self.inner
            .padded
            .get_or_init(|| Fft3d::new(3 * self.inner.n / 2))
    }

    fn same_as(&self, other: &TorusGrid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self == other
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.inner.n == other.inner.n && self.inner.length == other.inner.length
    }
}

impl std::fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TorusGrid")
            .field("n_per_axis", &self.inner.n)
            .field("period_length", &self.inner.length)
            .finish()
    }
}

fn signed_mode(m: usize, n: usize) -> i64 {
    if m < n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Real sampled field. Operations never mutate; they return new fields.
#[derive(Clone)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("grid", &self.grid)
            .field("max", &self.max())
            .field("min", &self.min())
            .finish()
    }
}

impl ScalarField {
    /// Wrap values in x-fastest order. Rejects wrong length and non-finite entries.
    pub fn new(grid: &TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::param(
                "values",
                format!("expected {} values, got {}", grid.len(), values.len()),
            ));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(
                "values",
                format!("non-finite value at index {pos}"),
            ));
        }
        Ok(Self::from_vec(grid, values))
    }

    pub(crate) fn from_vec(grid: &TorusGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn constant(grid: &TorusGrid, c: f64) -> Self {
        Self::from_vec(grid, vec![c; grid.len()])
    }

    pub fn zeros(grid: &TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Sample `f` at every node position.
    pub fn from_fn(grid: &TorusGrid, f: impl Fn(TorusPoint) -> f64) -> Self {
        let values = (0..grid.len()).map(|idx| f(grid.position(idx))).collect();
        Self::from_vec(grid, values)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_vec(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_grid(other)?;
        Ok(Self::from_vec(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a + c * b)
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    /// Quadratic product of two fields.
    pub fn product(&self, other: &ScalarField, mode: Products) -> Result<Self> {
        self.check_grid(other)?;
        match mode {
            Products::Pointwise => self.zip_map(other, |a, b| a * b),
            Products::Dealiased => Ok(self.dealiased_product(other)),
        }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `∫ f dμ` by the rectangle rule, `h³ Σ f`.
    pub fn integrate(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().sum::<f64>()
    }

    /// `∫ f g dμ`.
    pub fn dot(&self, other: &ScalarField) -> Result<f64> {
        self.check_grid(other)?;
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum();
        Ok(self.grid.cell_volume() * s)
    }

    /// Pointwise `max(f, 0)`.
    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(0.0))
    }

    /// `(1/ε)|∇f|₂² + (1/ε³)|f|₂²`, gradient term via Parseval.
    pub fn norm_eps_sq(&self, epsilon: f64) -> Result<f64> {
        check_epsilon(epsilon)?;
        Ok(self.spectrum().norm_eps_sq(epsilon))
    }

    /// `((1/ε³)∫|f|ᵖ)^{1/p}`.
    pub fn lp_norm_eps(&self, p: f64, epsilon: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::param("p", format!("must be >= 1, got {p}")));
        }
        check_epsilon(epsilon)?;
        Ok(self.lp_power_eps(p, epsilon).powf(1.0 / p))
    }

    /// `(1/ε³)∫|f|ᵖ`, the p-th power of [`ScalarField::lp_norm_eps`].
    pub(crate) fn lp_power_eps(&self, p: f64, epsilon: f64) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        self.grid.cell_volume() * s / epsilon.powi(3)
    }

    /// Forward transform (normalized by `1/n³`).
    pub fn spectrum(&self) -> Spectrum {
        let mut coeffs: Vec<Complex64> =
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.grid.inner.fft.forward(&mut coeffs);
        let scale = 1.0 / self.grid.len() as f64;
        for c in &mut coeffs {
            *c *= scale;
        }
        Spectrum {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// `m(|k|²) f̂(k)` transformed back.
    pub fn apply_multiplier(&self, m: &Multiplier) -> Result<Self> {
        if !self.grid.same_as(&m.grid) {
            return Err(Error::GridMismatch);
        }
        let mut spec = self.spectrum();
        for (c, s) in spec.coeffs.iter_mut().zip(&m.table) {
            *c *= *s;
        }
        Ok(spec.into_field())
    }

    /// Spectral `Δf`.
    pub fn laplacian(&self) -> Self {
        let mut spec = self.spectrum();
        for (c, s) in spec.coeffs.iter_mut().zip(self.grid.wavenumber_sq()) {
            *c *= -s;
        }
        spec.into_field()
    }

    /// Spectral `∂f/∂x_axis`, Nyquist mode zeroed.
    pub fn derivative(&self, axis: usize) -> Self {
        assert!(axis < 3, "axis out of range");
        let n = self.grid.n_per_axis();
        let mut spec = self.spectrum();
        for (idx, c) in spec.coeffs.iter_mut().enumerate() {
            let m = self.grid.coords(idx)[axis];
            let k = if m == n / 2 {
                0.0
            } else {
                self.grid.wavenumber(m)
            };
            *c *= Complex64::new(0.0, k);
        }
        spec.into_field()
    }

    /// Circular shift by whole grid cells: result(x) = self(x - shift·h).
    pub fn shift(&self, shift: [i64; 3]) -> Self {
        let n = self.grid.n_per_axis() as i64;
        let mut out = vec![0.0; self.values.len()];
        for (idx, v) in self.values.iter().enumerate() {
            let c = self.grid.coords(idx);
            let t: Vec<usize> = c
                .iter()
                .zip(&shift)
                .map(|(&ci, &s)| (ci as i64 + s).rem_euclid(n) as usize)
                .collect();
            out[self.grid.index(t[0], t[1], t[2])] = *v;
        }
        Self::from_vec(&self.grid, out)
    }

    /// Relative L² distance `|f - g|₂ / max(|f|₂, |g|₂)`.
    pub fn relative_l2_distance(&self, other: &ScalarField) -> Result<f64> {
        let d = self.sub(other)?;
        let num = d.dot(&d)?.sqrt();
        let den = self.dot(self)?.sqrt().max(other.dot(other)?.sqrt());
        Ok(if den > 0.0 { num / den } else { 0.0 })
    }

    fn check_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn dealiased_product(&self, other: &ScalarField) -> Self {
        let n = self.grid.n_per_axis();
        let fft = self.grid.padded_fft();
        let m = fft.size();
        let a = pad(&self.spectrum().coeffs, n, m);
        let b = pad(&other.spectrum().coeffs, n, m);
        let mut work = a;
        let mut wb = b;
        fft.inverse(&mut work);
        fft.inverse(&mut wb);
        for (x, y) in work.iter_mut().zip(&wb) {
            *x = Complex64::new(x.re * y.re, 0.0);
        }
        fft.forward(&mut work);
        let scale = 1.0 / (m * m * m) as f64;
        for c in &mut work {
            *c *= scale;
        }
        Spectrum {
            grid: self.grid.clone(),
            coeffs: truncate(&work, n, m),
        }
        .into_field()
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::param(
            "epsilon",
            format!("must be positive, got {epsilon}"),
        ))
    }
}

// Padded positions for a base per-axis mode; the Nyquist mode is split
// evenly between ±n/2 so the padded interpolant stays real.
fn padded_positions(mb: usize, n: usize, m: usize) -> ([usize; 2], usize) {
    let s = signed_mode(mb, n);
    if mb == n / 2 {
        ([n / 2, m - n / 2], 2)
    } else {
        let p = if s >= 0 { s as usize } else { (m as i64 + s) as usize };
        ([p, p], 1)
    }
}

fn pad(coeffs: &[Complex64], n: usize, m: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); m * m * m];
    for k in 0..n {
        let (pk, ck) = padded_positions(k, n, m);
        for j in 0..n {
            let (pj, cj) = padded_positions(j, n, m);
            for i in 0..n {
                let (pi, ci) = padded_positions(i, n, m);
                let c = coeffs[i + n * (j + n * k)] / (ci * cj * ck) as f64;
                for &zk in &pk[..ck] {
                    for &zj in &pj[..cj] {
                        for &zi in &pi[..ci] {
                            out[zi + m * (zj + m * zk)] += c;
                        }
                    }
                }
            }
        }
    }
    out
}

// Inverse of `pad`: keep |mode| < n/2 and fold ±n/2 into the base Nyquist mode.
fn truncate(coeffs: &[Complex64], n: usize, m: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); n * n * n];
    for k in 0..n {
        let (pk, ck) = padded_positions(k, n, m);
        for j in 0..n {
            let (pj, cj) = padded_positions(j, n, m);
            for i in 0..n {
                let (pi, ci) = padded_positions(i, n, m);
                let mut acc = Complex64::default();
                for &zk in &pk[..ck] {
                    for &zj in &pj[..cj] {
                        for &zi in &pi[..ci] {
                            acc += coeffs[zi + m * (zj + m * zk)];
                        }
                    }
                }
                out[i + n * (j + n * k)] = acc;
            }
        }
    }
    out
}

/// Fourier coefficients of a field, `f̂(k) = n⁻³ Σ f(x) e^{-ik·x}`.
#[derive(Clone)]
pub struct Spectrum {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `L³ Σ w(|k|²) |f̂(k)|²`, the quadratic form of an isotropic symbol.
    pub fn weighted_power(&self, w: impl Fn(f64) -> f64) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .zip(self.grid.wavenumber_sq())
            .map(|(c, &s)| w(s) * c.norm_sqr())
            .sum();
        self.grid.volume() * s
    }

    pub fn norm_eps_sq(&self, epsilon: f64) -> f64 {
        let (a, b) = (1.0 / epsilon, 1.0 / epsilon.powi(3));
        self.weighted_power(|s| a * s + b)
    }

    /// `L³ Σ w(|k|²) Re(f̂ ĝ*)`, the bilinear form of an isotropic symbol.
    pub fn weighted_inner(&self, other: &Spectrum, w: impl Fn(f64) -> f64) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .zip(self.grid.wavenumber_sq())
            .map(|((a, b), &s)| w(s) * (a * b.conj()).re)
            .sum();
        self.grid.volume() * s
    }

    /// Inverse transform; the imaginary round-off is discarded.
    pub fn into_field(self) -> ScalarField {
        let mut data = self.coeffs;
        self.grid.inner.fft.inverse(&mut data);
        ScalarField::from_vec(&self.grid, data.iter().map(|c| c.re).collect())
    }
}

/// Isotropic diagonal Fourier operator, tabulated on every mode of a grid.
#[derive(Clone)]
pub struct Multiplier {
    grid: TorusGrid,
    table: Vec<f64>,
}

impl Multiplier {
    /// Tabulate `symbol(|k|²)`; fails if any attainable value is non-finite.
    pub fn new(grid: &TorusGrid, symbol: impl Fn(f64) -> f64) -> Result<Self> {
        let mut table = Vec::with_capacity(grid.len());
        for &s in grid.wavenumber_sq() {
            let v = symbol(s);
            if !v.is_finite() {
                return Err(Error::NonFiniteSymbol { s });
            }
            table.push(v);
        }
        Ok(Multiplier {
            grid: grid.clone(),
            table,
        })
    }

    pub fn identity(grid: &TorusGrid) -> Self {
        Multiplier {
            grid: grid.clone(),
            table: vec![1.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Pointwise reciprocal symbol.
    pub fn recip(&self) -> Result<Self> {
        let mut table = Vec::with_capacity(self.table.len());
        for (v, &s) in self.table.iter().zip(self.grid.wavenumber_sq()) {
            let r = 1.0 / v;
            if !r.is_finite() {
                return Err(Error::NonFiniteSymbol { s });
            }
            table.push(r);
        }
        Ok(Multiplier {
            grid: self.grid.clone(),
            table,
        })
    }

    pub fn apply(&self, f: &ScalarField) -> Result<ScalarField> {
        f.apply_multiplier(self)
    }
}
