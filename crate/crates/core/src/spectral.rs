//! Periodic spectral grids and the functional calculus of `P(D)` on them:
//! propagator, resolvent and the β-times integrated group, together with
//! the probe-based scaling experiments.
//!
//! Conventions: the grid covers `[-L, L)^n` with the origin at index 0,
//! `dx = 2L/N`, `dξ = π/L`. A field `u` and its continuous Fourier
//! transform are linked by `u(x) = (2π)^{-n} ∫ û(ξ) e^{i x·ξ} dξ`.

use crate::error::{Error, Result};
use crate::exponents::{n_p, Exponents};
use crate::fft::{signed_index, FftNd};
use crate::fit::{loglog, DecayFit};
use crate::geometry;
use crate::quadrature::{integrate_gk, GkOptions};
use crate::sphere;
use crate::symbol::PolySymbol;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::gamma;
use std::f64::consts::PI;
use std::sync::Arc;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Spectral energy fraction tolerated beyond `BAND_FRACTION` of Nyquist.
pub const BAND_TAIL_BUDGET: f64 = 1e-8;
pub const BAND_FRACTION: f64 = 0.8;
/// Energy fraction tolerated in the wrap-around zone, and spectral energy
/// fraction allowed to outrun the propagation reach.
pub const BOUNDARY_BUDGET: f64 = 1e-8;

/// Below this `|t P|` the Riemann–Liouville multiplier is integrated on the
/// real segment; above it the contour representation is used.
const RL_DIRECT_PHASE: f64 = 40.0;

/// Parallel sum with a fixed association order, so the result does not
/// depend on the thread count.
pub(crate) fn ordered_sum<T, S, F>(items: &[T], f: F) -> S
where
    T: Sync,
    S: Send + std::iter::Sum<S>,
    F: Fn(&T) -> S + Sync,
{
    items
        .par_chunks(4096)
        .map(|c| c.iter().map(&f).sum::<S>())
        .collect::<Vec<S>>()
        .into_iter()
        .sum()
}

/// Smooth cutoff: 1 on `s <= 0`, 0 on `s >= 1`, `C^∞` in between.
pub fn smooth_step_down(s: f64) -> f64 {
    if s <= 0.0 {
        return 1.0;
    }
    if s >= 1.0 {
        return 0.0;
    }
    let b = |x: f64| (-1.0 / x).exp();
    let a = b(1.0 - s);
    a / (a + b(s))
}

/// Band window `W(|ξ|/ξ_c)`: flat up to `0.6 ξ_c`, zero from `ξ_c` on.
pub fn band_window(r: f64, band: f64) -> f64 {
    smooth_step_down((r / band - 0.6) / 0.4)
}

struct GridInner {
    n: usize,
    len: usize,
    half_width: f64,
    symbol: PolySymbol,
    ptab: Vec<f64>,
    /// Group speed `|∇P(ξ_k)|`.
    vtab: Vec<f64>,
    fft: FftNd,
}

/// Periodic grid with cached symbol table. Cloning is cheap.
#[derive(Clone)]
pub struct SpectralGrid {
    inner: Arc<GridInner>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("n", &self.inner.n)
            .field("len", &self.inner.len)
            .field("half_width", &self.inner.half_width)
            .finish()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub n: usize,
    pub points_per_axis: usize,
    pub half_width: f64,
    pub dx: f64,
    pub dxi: f64,
    pub nyquist: f64,
}

impl SpectralGrid {
    pub fn new(symbol: &PolySymbol, len: usize, half_width: f64) -> Result<Self> {
        if len < 4 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "points per axis must be a power of two >= 4 (got {len})"
            )));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidArgument(format!("half-width must be positive (got {half_width})")));
        }
        let n = symbol.dim();
        let total = len
            .checked_pow(n as u32)
            .filter(|t| *t <= 1 << 26)
            .ok_or_else(|| Error::InvalidArgument(format!("grid {len}^{n} is too large")))?;
        let dxi = PI / half_width;
        let axis: Vec<f64> = (0..len).map(|j| signed_index(j, len) as f64 * dxi).collect();
        let (ptab, vtab): (Vec<f64>, Vec<f64>) = (0..total)
            .into_par_iter()
            .map_init(
                || vec![0.0; n],
                |xi, k| {
                    fill_coords(k, len, n, &axis, xi);
                    (symbol.value(xi), sphere::norm(&symbol.gradient_unchecked(xi)))
                },
            )
            .unzip();
        Ok(Self {
            inner: Arc::new(GridInner {
                n,
                len,
                half_width,
                symbol: symbol.clone(),
                ptab,
                vtab,
                fft: FftNd::new(n, len),
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.n
    }

    pub fn points_per_axis(&self) -> usize {
        self.inner.len
    }

    pub fn half_width(&self) -> f64 {
        self.inner.half_width
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.inner.half_width / self.inner.len as f64
    }

    pub fn dxi(&self) -> f64 {
        PI / self.inner.half_width
    }

    pub fn nyquist(&self) -> f64 {
        self.dxi() * (self.inner.len / 2) as f64
    }

    pub fn total(&self) -> usize {
        self.inner.ptab.len()
    }

    /// Volume element `dx^n` of the discrete norms.
    pub fn cell(&self) -> f64 {
        self.dx().powi(self.inner.n as i32)
    }

    pub fn symbol(&self) -> &PolySymbol {
        &self.inner.symbol
    }

    /// `P(ξ_k)` in FFT storage order.
    pub fn p_table(&self) -> &[f64] {
        &self.inner.ptab
    }

    pub fn info(&self) -> GridInfo {
        GridInfo {
            n: self.dim(),
            points_per_axis: self.points_per_axis(),
            half_width: self.half_width(),
            dx: self.dx(),
            dxi: self.dxi(),
            nyquist: self.nyquist(),
        }
    }

    /// Signed per-axis indices of storage position `k`.
    pub fn signed_indices(&self, k: usize) -> Vec<i64> {
        let (n, len) = (self.inner.n, self.inner.len);
        (0..n)
            .map(|a| signed_index((k / len.pow((n - 1 - a) as u32)) % len, len))
            .collect()
    }

    /// Storage position of the given signed per-axis indices (taken mod N).
    pub fn index_of(&self, idx: &[i64]) -> usize {
        let len = self.inner.len as i64;
        idx.iter().fold(0usize, |acc, &i| acc * len as usize + i.rem_euclid(len) as usize)
    }

    pub fn position(&self, k: usize) -> Vec<f64> {
        let dx = self.dx();
        self.signed_indices(k).into_iter().map(|i| i as f64 * dx).collect()
    }

    pub fn frequency(&self, k: usize) -> Vec<f64> {
        let dxi = self.dxi();
        self.signed_indices(k).into_iter().map(|i| i as f64 * dxi).collect()
    }

    fn map_coords<F>(&self, step: f64, f: F) -> Vec<Complex64>
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let (n, len) = (self.inner.n, self.inner.len);
        let axis: Vec<f64> = (0..len).map(|j| signed_index(j, len) as f64 * step).collect();
        (0..self.total())
            .into_par_iter()
            .map_init(
                || vec![0.0; n],
                |x, k| {
                    fill_coords(k, len, n, &axis, x);
                    f(x)
                },
            )
            .collect()
    }

    /// Sample a function of position.
    pub fn field<F>(&self, f: F) -> StateField
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        StateField {
            grid: self.clone(),
            values: self.map_coords(self.dx(), f),
        }
    }

    /// Build the field whose continuous Fourier transform is `û`, sampled on
    /// the frequency lattice.
    pub fn from_spectrum<F>(&self, uhat: F) -> StateField
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let mut values = self.map_coords(self.dxi(), uhat);
        self.inner.fft.inverse(&mut values);
        let s = self.dx().powi(-(self.inner.n as i32));
        values.par_iter_mut().for_each(|z| *z *= s);
        StateField { grid: self.clone(), values }
    }

    /// Unnormalized discrete spectrum `Σ_x u(x) e^{-i x·ξ}`.
    pub fn spectrum(&self, u: &StateField) -> Vec<Complex64> {
        let mut v = u.values.clone();
        self.inner.fft.forward(&mut v);
        v
    }

    fn from_raw_spectrum(&self, mut v: Vec<Complex64>) -> StateField {
        self.inner.fft.inverse(&mut v);
        StateField { grid: self.clone(), values: v }
    }

    /// Apply the Fourier multiplier `m(k, P(ξ_k))`.
    pub fn apply_multiplier<M>(&self, u: &StateField, m: M) -> StateField
    where
        M: Fn(usize, f64) -> Complex64 + Sync,
    {
        let mut v = self.spectrum(u);
        self.multiply_spectrum(&mut v, m);
        self.from_raw_spectrum(v)
    }

    fn multiply_spectrum<M>(&self, v: &mut [Complex64], m: M)
    where
        M: Fn(usize, f64) -> Complex64 + Sync,
    {
        let p = &self.inner.ptab;
        v.par_iter_mut().enumerate().for_each(|(k, z)| *z *= m(k, p[k]));
    }

    /// Band and wrap-around diagnostics for evolving `u` up to time `|t|`.
    pub fn confinement(&self, u: &StateField, t: f64) -> Confinement {
        let spec = self.spectrum(u);
        self.confinement_from(u, &spec, t)
    }

    fn confinement_from(&self, u: &StateField, spec: &[Complex64], t: f64) -> Confinement {
        let (band_tail, speed) = self.spectral_profile(spec);
        self.assess(u, band_tail, speed, t)
    }

    /// Energy fraction beyond `BAND_FRACTION` of Nyquist, and the group speed
    /// exceeded by at most `BOUNDARY_BUDGET` of the spectral energy.
    fn spectral_profile(&self, spec: &[Complex64]) -> (f64, f64) {
        let cut = BAND_FRACTION * self.nyquist();
        let dxi = self.dxi();
        let mut total = 0.0;
        let mut tail = 0.0;
        let mut by_speed = Vec::new();
        for (k, z) in spec.iter().enumerate() {
            let e = z.norm_sqr();
            if e == 0.0 {
                continue;
            }
            total += e;
            if self.signed_indices(k).iter().any(|&i| (i as f64 * dxi).abs() > cut) {
                tail += e;
            }
            by_speed.push((self.inner.vtab[k], e));
        }
        if total == 0.0 {
            return (0.0, 0.0);
        }
        by_speed.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
        let allowed = BOUNDARY_BUDGET * total;
        let mut acc = 0.0;
        let mut speed = 0.0;
        for (v, e) in by_speed {
            acc += e;
            if acc > allowed {
                speed = v;
                break;
            }
        }
        (tail / total, speed)
    }

    fn assess(&self, u: &StateField, band_tail: f64, speed: f64, t: f64) -> Confinement {
        let reach = t.abs() * speed;
        let edge = self.half_width() - reach;
        let dx = self.dx();
        let mut outside = 0.0;
        let mut mass = 0.0;
        for (k, z) in u.values.iter().enumerate() {
            let e = z.norm_sqr();
            mass += e;
            if e > 0.0 && self.signed_indices(k).iter().any(|&i| (i as f64 * dx).abs() > edge) {
                outside += e;
            }
        }
        let boundary_mass = if mass > 0.0 { outside / mass } else { 0.0 };
        let mut reasons = Vec::new();
        if band_tail > BAND_TAIL_BUDGET {
            reasons.push(format!(
                "spectral tail beyond {BAND_FRACTION} Nyquist is {band_tail:.3e} (budget {BAND_TAIL_BUDGET:.0e})"
            ));
        }
        if edge <= 0.0 {
            reasons.push(format!(
                "propagation reach {reach:.3} exceeds half-width {:.3}",
                self.half_width()
            ));
        } else if boundary_mass > BOUNDARY_BUDGET {
            reasons.push(format!(
                "mass within reach {reach:.3} of the boundary is {boundary_mass:.3e} (budget {BOUNDARY_BUDGET:.0e})"
            ));
        }
        Confinement {
            band_tail,
            reach,
            boundary_mass,
            ok: reasons.is_empty(),
            reasons,
        }
    }

    /// `e^{itP(D)} u0`, refusing when the confinement budget is violated.
    pub fn propagate(&self, u0: &StateField, t: f64) -> Result<StateField> {
        if t == 0.0 {
            return Ok(u0.clone());
        }
        let c = self.confinement(u0, t);
        if !c.ok {
            return Err(Error::Precondition(format!("propagate(t = {t}): {}", c.reasons.join("; "))));
        }
        Ok(self.propagate_unchecked(u0, t))
    }

    /// `e^{itP(D)} u0` without the confinement check.
    pub fn propagate_unchecked(&self, u0: &StateField, t: f64) -> StateField {
        self.apply_multiplier(u0, |_, p| Complex64::from_polar(1.0, t * p))
    }

    /// `(λ - iP(D))^{-1} f`.
    pub fn resolvent_apply(&self, f: &StateField, lambda: Complex64) -> Result<StateField> {
        check_resolvent_point(lambda)?;
        Ok(self.apply_multiplier(f, |_, p| 1.0 / (lambda - Complex64::new(0.0, p))))
    }

    /// `T(t) u0` for the β-times integrated group generated by `iP(D)`.
    ///
    /// Frequencies where `û0` vanishes exactly are skipped (the product is 0
    /// regardless of the multiplier value).
    pub fn integrated_group(&self, u0: &StateField, t: f64, beta: f64) -> Result<StateField> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!("beta must be >= 0 (got {beta})")));
        }
        if beta == 0.0 {
            return self.propagate(u0, t);
        }
        let c = self.confinement(u0, t);
        if !c.ok {
            return Err(Error::Precondition(format!(
                "integrated_group(t = {t}): {}",
                c.reasons.join("; ")
            )));
        }
        self.integrated_group_spectrum(self.spectrum(u0), t, beta)
    }

    fn integrated_group_spectrum(&self, mut v: Vec<Complex64>, t: f64, beta: f64) -> Result<StateField> {
        if beta == 0.0 {
            self.multiply_spectrum(&mut v, |_, pk| Complex64::from_polar(1.0, t * pk));
            return Ok(self.from_raw_spectrum(v));
        }
        let table = self.rl_table(t, beta, |k| v[k] != ZERO)?;
        for (z, m) in v.iter_mut().zip(&table) {
            *z *= m;
        }
        Ok(self.from_raw_spectrum(v))
    }

    /// Riemann–Liouville multiplier at the frequencies selected by `need`
    /// (zero elsewhere), evaluated once per distinct symbol value.
    fn rl_table(&self, t: f64, beta: f64, need: impl Fn(usize) -> bool + Sync) -> Result<Vec<Complex64>> {
        let p = &self.inner.ptab;
        let mut distinct: Vec<f64> = (0..p.len()).filter(|&k| need(k)).map(|k| p[k]).collect();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let vals: Vec<Result<Complex64>> = distinct.par_iter().map(|&pk| rl_multiplier(beta, t, pk)).collect();
        let failed: Vec<f64> = distinct
            .iter()
            .zip(&vals)
            .filter(|(_, v)| v.is_err())
            .map(|(pk, _)| *pk)
            .collect();
        if let Some(pk) = failed.first() {
            return Err(Error::Numerical(format!(
                "integrated-group quadrature failed at {} symbol values (first P = {pk:.4})",
                failed.len()
            )));
        }
        let vals: Vec<Complex64> = vals.into_iter().map(|v| v.expect("checked")).collect();
        Ok((0..p.len())
            .into_par_iter()
            .map(|k| if need(k) { vals[distinct.partition_point(|&q| q < p[k])] } else { ZERO })
            .collect())
    }
}

fn fill_coords(k: usize, len: usize, n: usize, axis: &[f64], out: &mut [f64]) {
    let mut r = k;
    for a in (0..n).rev() {
        out[a] = axis[r % len];
        r /= len;
    }
}

fn check_resolvent_point(lambda: Complex64) -> Result<()> {
    if lambda.re == 0.0 || !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(Error::Precondition(format!(
            "Re lambda must be nonzero: the spectrum of iP(D) is the imaginary axis (lambda = {lambda})"
        )));
    }
    Ok(())
}

/// Wrap-around diagnostics. `reach` is `|t|` times the group speed exceeded
/// by at most `BOUNDARY_BUDGET` of the spectral energy.
#[derive(Debug, Clone, Serialize)]
pub struct Confinement {
    pub band_tail: f64,
    pub reach: f64,
    pub boundary_mass: f64,
    pub ok: bool,
    pub reasons: Vec<String>,
}

/// Complex samples on a [`SpectralGrid`].
#[derive(Debug, Clone)]
pub struct StateField {
    grid: SpectralGrid,
    values: Vec<Complex64>,
}

impl StateField {
    pub fn from_values(grid: &SpectralGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.total() {
            return Err(Error::DimensionMismatch {
                expected: grid.total(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Discrete `L^p` norm `(Σ |u|^p dx^n)^{1/p}`; `p = ∞` gives the max.
    pub fn norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        }
        let s: f64 = if p == 2.0 {
            ordered_sum(&self.values, |z| z.norm_sqr())
        } else if p == 1.0 {
            ordered_sum(&self.values, |z| z.norm())
        } else {
            ordered_sum(&self.values, |z| z.norm().powf(p))
        };
        (s * self.grid.cell()).powf(1.0 / p)
    }

    /// Circular shift by whole grid cells.
    pub fn translate(&self, shift: &[i64]) -> StateField {
        let g = &self.grid;
        let mut out = vec![ZERO; self.values.len()];
        for (k, z) in self.values.iter().enumerate() {
            let idx: Vec<i64> = g.signed_indices(k).iter().zip(shift).map(|(a, b)| a + b).collect();
            out[g.index_of(&idx)] = *z;
        }
        StateField {
            grid: g.clone(),
            values: out,
        }
    }

    pub fn conj(&self) -> StateField {
        self.map(|z| z.conj())
    }

    pub fn map<F: Fn(Complex64) -> Complex64 + Sync>(&self, f: F) -> StateField {
        StateField {
            grid: self.grid.clone(),
            values: self.values.par_iter().map(|z| f(*z)).collect(),
        }
    }

    /// Pointwise combination `f(self, other)`.
    pub fn zip<F>(&self, other: &StateField, f: F) -> StateField
    where
        F: Fn(Complex64, Complex64) -> Complex64 + Sync,
    {
        StateField {
            grid: self.grid.clone(),
            values: self.values.par_iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn add(&self, other: &StateField) -> StateField {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &StateField) -> StateField {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: Complex64) -> StateField {
        self.map(|z| z * s)
    }

    /// `‖self − other‖_2 / ‖other‖_2`.
    pub fn rel_l2(&self, other: &StateField) -> f64 {
        self.sub(other).norm(2.0) / other.norm(2.0)
    }
}

/// Riemann–Liouville multiplier `(1/Γ(β)) ∫_0^t (t−s)^{β−1} e^{isP} ds`.
///
/// `β = 0` is `e^{itP}`, `β = 1` uses the closed form, and negative `t`
/// selects the `−iP(D)` branch.
pub fn rl_multiplier(beta: f64, t: f64, p: f64) -> Result<Complex64> {
    if t < 0.0 {
        return rl_multiplier(beta, -t, -p);
    }
    if beta == 0.0 {
        return Ok(Complex64::from_polar(1.0, t * p));
    }
    if beta == 1.0 {
        return Ok(rl_first(t, p));
    }
    rl_multiplier_quadrature(beta, t, p)
}

/// Closed form `(e^{itP} − 1)/(iP)`, equal to `t` at `P = 0`.
pub fn rl_first(t: f64, p: f64) -> Complex64 {
    let z = t * p;
    if z == 0.0 {
        return Complex64::new(t, 0.0);
    }
    let h = (0.5 * z).sin();
    t * Complex64::new(z.sin() / z, 2.0 * h * h / z)
}

/// General-β path of [`rl_multiplier`] (no closed-form shortcut).
///
/// For `|tP| <= 40` the integral is taken on the real segment after the
/// substitution `s = t(1 − v^{1/β})`, which removes the endpoint singularity:
/// the multiplier becomes `t^β/Γ(β+1) ∫_0^1 e^{itP(1 − v^{1/β})} dv`. Beyond
/// that the segment is deformed into two damped rays, giving
/// `e^{itP}(−i)^β P^{−β} + (i/Γ(β)) ∫_0^∞ (t − iy)^{β−1} e^{−yP} dy`.
pub fn rl_multiplier_quadrature(beta: f64, t: f64, p: f64) -> Result<Complex64> {
    if t < 0.0 {
        return rl_multiplier_quadrature(beta, -t, -p);
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("quadrature path needs beta > 0 (got {beta})")));
    }
    if t == 0.0 {
        return Ok(ZERO);
    }
    if t * p.abs() <= RL_DIRECT_PHASE {
        rl_direct(beta, t, p)
    } else {
        rl_contour(beta, t, p)
    }
}

const RL_OPTS: GkOptions = GkOptions {
    abs_tol: 1e-15,
    rel_tol: 1e-13,
    max_intervals: 2000,
};

fn rl_direct(beta: f64, t: f64, p: f64) -> Result<Complex64> {
    let z = t * p;
    let lead = t.powf(beta) / gamma(beta + 1.0);
    if z == 0.0 {
        return Ok(Complex64::new(lead, 0.0));
    }
    let inv = 1.0 / beta;
    let r = integrate_gk(
        |v, out| out[0] = Complex64::from_polar(1.0, z * (1.0 - v.powf(inv))),
        0.0,
        1.0,
        &[],
        1,
        RL_OPTS,
    );
    if !r.converged {
        return Err(Error::Numerical(format!("RL quadrature did not converge (beta = {beta}, tP = {z})")));
    }
    Ok(lead * r.value[0])
}

fn rl_contour(beta: f64, t: f64, p: f64) -> Result<Complex64> {
    let (pa, flip) = if p < 0.0 { (-p, true) } else { (p, false) };
    let r = integrate_gk(
        |w, out| out[0] = Complex64::new(t, -w / pa).powf(beta - 1.0) * (-w).exp(),
        0.0,
        45.0,
        &[5.0, 15.0],
        1,
        RL_OPTS,
    );
    if !r.converged {
        return Err(Error::Numerical(format!(
            "RL contour tail did not converge (beta = {beta}, tP = {})",
            t * p
        )));
    }
    let head = Complex64::from_polar(pa.powf(-beta), t * pa - 0.5 * PI * beta);
    let tail = Complex64::new(0.0, 1.0 / (gamma(beta) * pa)) * r.value[0];
    let v = head + tail;
    Ok(if flip { v.conj() } else { v })
}

/// Gaussian probe widths in units of `1 / band`, spaced by `2^{1/3}`.
pub const GAUSSIAN_WIDTHS: [f64; 4] = [4.3, 5.4, 6.8, 8.6];

/// A labelled probe field.
#[derive(Debug, Clone)]
pub struct Probe {
    pub label: String,
    pub field: StateField,
}

/// Probe family: four centred Gaussians, four modulated bumps and eight
/// random band-limited fields, all cut off smoothly at `|ξ| = band`.
///
/// `modulations` lists unit directions for the modulated bumps (two are
/// used, each at two carrier strengths); fewer than two fall back to the
/// axes.
pub fn probe_family(grid: &SpectralGrid, band: f64, seed: u64, modulations: &[Vec<f64>]) -> Result<Vec<Probe>> {
    let n = grid.dim();
    if !(band > 0.0) || band > BAND_FRACTION * grid.nyquist() {
        return Err(Error::InvalidArgument(format!(
            "probe band {band} must lie in (0, {BAND_FRACTION} * Nyquist = {:.4}]",
            BAND_FRACTION * grid.nyquist()
        )));
    }
    let mut probes = Vec::new();
    // positive, so ‖u‖_1 = ∫u; spectral energy beyond `band` is e^{-s²} < 1e-8
    for s in GAUSSIAN_WIDTHS {
        let sigma = s / band;
        probes.push(Probe {
            label: format!("gaussian:{s}"),
            field: grid.from_spectrum(|xi| {
                let r2 = xi.iter().map(|v| v * v).sum::<f64>();
                Complex64::new((-0.5 * sigma * sigma * r2).exp(), 0.0)
            }),
        });
    }
    let mut dirs: Vec<Vec<f64>> = modulations.iter().take(2).cloned().collect();
    while dirs.len() < 2 {
        let mut e = vec![0.0; n];
        e[dirs.len() % n] = 1.0;
        dirs.push(e);
    }
    for (d, dir) in dirs.iter().enumerate() {
        for a in [0.3, 0.6] {
            let kappa: Vec<f64> = dir.iter().map(|v| v * a * band).collect();
            let sigma = 2.0 / band;
            probes.push(Probe {
                label: format!("modulated:{d}:{a}"),
                field: grid.from_spectrum(|xi| {
                    let d2: f64 = xi.iter().zip(&kappa).map(|(x, k)| (x - k) * (x - k)).sum();
                    Complex64::new((-0.5 * sigma * sigma * d2).exp() * band_window(sphere::norm(xi), band), 0.0)
                }),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for j in 0..8 {
        let parts: Vec<(Complex64, Vec<f64>, Vec<f64>, f64)> = (0..6)
            .map(|_| {
                let amp = Complex64::new(sphere::normal_deviate(&mut rng), sphere::normal_deviate(&mut rng));
                let y: Vec<f64> = sphere::random_direction(n, &mut rng)
                    .into_iter()
                    .map(|v| v * rng.gen::<f64>() * 4.0 / band)
                    .collect();
                let kappa: Vec<f64> = sphere::random_direction(n, &mut rng)
                    .into_iter()
                    .map(|v| v * rng.gen::<f64>() * 0.5 * band)
                    .collect();
                let sigma = rng.gen_range(0.5..2.0) / band;
                (amp, y, kappa, sigma)
            })
            .collect();
        probes.push(Probe {
            label: format!("random:{j}"),
            field: grid.from_spectrum(|xi| {
                let w = band_window(sphere::norm(xi), band);
                if w == 0.0 {
                    return ZERO;
                }
                let mut acc = ZERO;
                for (amp, y, kappa, sigma) in &parts {
                    let d2: f64 = xi.iter().zip(kappa).map(|(x, k)| (x - k) * (x - k)).sum();
                    acc += amp * Complex64::from_polar((-0.5 * sigma * sigma * d2).exp(), -sphere::dot(xi, y));
                }
                acc * w
            }),
        });
    }
    Ok(probes)
}

/// Unit directions of Σ at its smallest and largest Gaussian curvature,
/// used as modulation carriers for the probe family.
pub fn curvature_extremes(symbol: &PolySymbol) -> Result<Vec<Vec<f64>>> {
    let pts = geometry::sample_surface(symbol, 256)?;
    let mut lo = (f64::INFINITY, pts[0].xi.clone());
    let mut hi = (f64::NEG_INFINITY, pts[0].xi.clone());
    for sp in &pts {
        let k = geometry::gaussian_curvature(symbol, &sp.xi)?;
        if k < lo.0 {
            lo = (k, sp.xi.clone());
        }
        if k > hi.0 {
            hi = (k, sp.xi.clone());
        }
    }
    Ok([lo.1, hi.1]
        .into_iter()
        .map(|mut v| {
            sphere::normalize(&mut v);
            v
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioRow {
    /// Time or `Re λ`.
    pub x: f64,
    pub track: String,
    pub probe: String,
    pub ratio: f64,
}

/// Slope fit of the probe-maximal ratio on one track.
#[derive(Debug, Clone, Serialize)]
pub struct TrackFit {
    pub track: String,
    pub fit: DecayFit,
    /// Probe attaining the maximum at each abscissa.
    pub argmax: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub p: f64,
    #[serde(serialize_with = "crate::exponents::ser_f64")]
    pub q: f64,
    pub predicted_slope: f64,
    pub tracks: Vec<TrackFit>,
    pub rows: Vec<RatioRow>,
    pub warnings: Vec<String>,
}

fn fit_track(track: &str, xs: &[f64], rows: &[RatioRow], predicted: f64) -> Result<TrackFit> {
    let mut ys = Vec::with_capacity(xs.len());
    let mut argmax = Vec::with_capacity(xs.len());
    for &x in xs {
        let best = rows
            .iter()
            .filter(|r| r.track == track && r.x == x)
            .max_by(|a, b| a.ratio.total_cmp(&b.ratio))
            .ok_or_else(|| Error::Precondition(format!("no confined probe on track {track} at {x}")))?;
        ys.push(best.ratio);
        argmax.push(best.probe.clone());
    }
    Ok(TrackFit {
        track: track.to_string(),
        fit: loglog(xs, &ys, predicted)?,
        argmax,
    })
}

/// Ratios `‖e^{itP(D)}u‖_q / ‖u‖_p` over the probe family and times;
/// the maximum is fitted against `(n/m)(1/q − 1/p)`. A probe that is not
/// confined at some time is skipped there and listed in the warnings.
pub fn dispersive_probe(
    grid: &SpectralGrid,
    ex: &Exponents,
    p: f64,
    q: f64,
    times: &[f64],
    probes: &[Probe],
) -> Result<ScalingReport> {
    let predicted = ex.dispersive_exponent(p, q)?;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for pr in probes {
        let spec = grid.spectrum(&pr.field);
        let (band_tail, speed) = grid.spectral_profile(&spec);
        let base = pr.field.norm(p);
        for &t in times {
            let c = grid.assess(&pr.field, band_tail, speed, t);
            if !c.ok {
                warnings.push(format!("skipped {} at t = {t}: {}", pr.label, c.reasons.join("; ")));
                continue;
            }
            let mut v = spec.clone();
            grid.multiply_spectrum(&mut v, |_, pk| Complex64::from_polar(1.0, t * pk));
            rows.push(RatioRow {
                x: t.abs(),
                track: "t".into(),
                probe: pr.label.clone(),
                ratio: grid.from_raw_spectrum(v).norm(q) / base,
            });
        }
    }
    let xs: Vec<f64> = times.iter().map(|t| t.abs()).collect();
    let tracks = vec![fit_track("t", &xs, &rows, predicted)?];
    Ok(ScalingReport {
        p,
        q,
        predicted_slope: predicted,
        tracks,
        rows,
        warnings,
    })
}

/// Ratios `‖R(λ)u‖_q / ‖u‖_p` along `λ = a` and `λ = a(1 + i)` for `a` in
/// the ladder, fitted against `(n/m)(1/p − 1/q) − 1`.
///
/// For `p = q = 2` the exact discrete operator norm `max_k |λ − iP(ξ_k)|^{-1}`
/// is recorded as an extra probe named `operator-norm`.
pub fn resolvent_probe(
    grid: &SpectralGrid,
    ex: &Exponents,
    p: f64,
    q: f64,
    re_ladder: &[f64],
    probes: &[Probe],
) -> Result<ScalingReport> {
    let predicted = ex.resolvent_exponent(p, q)?;
    if re_ladder.iter().any(|a| !(*a > 0.0)) {
        return Err(Error::InvalidArgument("Re lambda ladder must be positive".into()));
    }
    let tracks = [("im=0", 0.0), ("im=re", 1.0)];
    let mut rows = Vec::new();
    for pr in probes {
        let spec = grid.spectrum(&pr.field);
        let base = pr.field.norm(p);
        for &(name, slope) in &tracks {
            for &a in re_ladder {
                let lambda = Complex64::new(a, slope * a);
                let mut v = spec.clone();
                grid.multiply_spectrum(&mut v, |_, pk| 1.0 / (lambda - Complex64::new(0.0, pk)));
                rows.push(RatioRow {
                    x: a,
                    track: name.into(),
                    probe: pr.label.clone(),
                    ratio: grid.from_raw_spectrum(v).norm(q) / base,
                });
            }
        }
    }
    if p == 2.0 && q == 2.0 {
        for &(name, slope) in &tracks {
            for &a in re_ladder {
                let lambda = Complex64::new(a, slope * a);
                let best = grid
                    .p_table()
                    .par_iter()
                    .map(|pk| (lambda - Complex64::new(0.0, *pk)).norm())
                    .reduce(|| f64::INFINITY, f64::min);
                rows.push(RatioRow {
                    x: a,
                    track: name.into(),
                    probe: "operator-norm".into(),
                    ratio: 1.0 / best,
                });
            }
        }
    }
    let fits = tracks
        .iter()
        .map(|(name, _)| fit_track(name, re_ladder, &rows, predicted))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalingReport {
        p,
        q,
        predicted_slope: predicted,
        tracks: fits,
        rows,
        warnings: Vec::new(),
    })
}

/// Ratios `‖T(t)u‖_p / ‖u‖_p` for the β-times integrated group (unconfined
/// probes skipped as in [`dispersive_probe`]), fitted
/// against the envelope slope `β`.
pub fn growth_probe(grid: &SpectralGrid, p: f64, beta: f64, times: &[f64], probes: &[Probe]) -> Result<ScalingReport> {
    let np = n_p(grid.dim(), p);
    let mut warnings = Vec::new();
    if beta <= np {
        warnings.push(format!(
            "beta = {beta} does not exceed n_p = {np}; the growth bound is not guaranteed"
        ));
    }
    let spectra: Vec<(Vec<Complex64>, f64, f64)> = probes
        .iter()
        .map(|pr| {
            let spec = grid.spectrum(&pr.field);
            let (band_tail, speed) = grid.spectral_profile(&spec);
            (spec, band_tail, speed)
        })
        .collect();
    let mut rows = Vec::new();
    for &t in times {
        let mut live = Vec::new();
        for (pr, (spec, band_tail, speed)) in probes.iter().zip(&spectra) {
            let c = grid.assess(&pr.field, *band_tail, *speed, t);
            if c.ok {
                live.push((pr, spec));
            } else {
                warnings.push(format!("skipped {} at t = {t}: {}", pr.label, c.reasons.join("; ")));
            }
        }
        // one multiplier table per time, shared by the confined probes
        let table = grid.rl_table(t, beta, |k| live.iter().any(|(_, s)| s[k] != ZERO))?;
        for (pr, spec) in live {
            let v: Vec<Complex64> = spec.iter().zip(&table).map(|(a, b)| a * b).collect();
            rows.push(RatioRow {
                x: t.abs(),
                track: "t".into(),
                probe: pr.label.clone(),
                ratio: grid.from_raw_spectrum(v).norm(p) / pr.field.norm(p),
            });
        }
    }
    let xs: Vec<f64> = times.iter().map(|t| t.abs()).collect();
    let tracks = vec![fit_track("t", &xs, &rows, beta)?];
    Ok(ScalingReport {
        p,
        q: p,
        predicted_slope: beta,
        tracks,
        rows,
        warnings,
    })
}

/// Outcome of comparing `λ^β ∫_0^∞ e^{−λt} T(t) u dt` with `R(λ) u`.
#[derive(Debug, Clone, Serialize)]
pub struct LaplaceCheck {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub beta: f64,
    pub truncation: f64,
    pub quadrature_error: f64,
    pub relative_error: f64,
    pub converged: bool,
}

/// Laplace-transform identity for the integrated group (`β = 0` is the
/// propagator itself), evaluated frequency by frequency on the support of
/// `û` with adaptive quadrature in `t` truncated where the tail is below
/// `1e-12` relative.
pub fn laplace_check(grid: &SpectralGrid, u: &StateField, lambda: Complex64, beta: f64) -> Result<LaplaceCheck> {
    check_resolvent_point(lambda)?;
    if lambda.re < 0.0 {
        return Err(Error::Precondition("Laplace representation needs Re lambda > 0".into()));
    }
    let spec = grid.spectrum(u);
    // frequencies where û is zero to working precision carry no information
    let peak = spec.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let support: Vec<usize> = (0..spec.len()).filter(|&k| spec[k].norm() > 1e-15 * peak).collect();
    let mut pv: Vec<f64> = support.iter().map(|&k| grid.p_table()[k]).collect();
    pv.sort_by(f64::total_cmp);
    pv.dedup();
    let a = lambda.re;
    // |T(t)| <= t^β/Γ(β+1): pick T with the damped tail below 1e-12 |λ|^{-β-1}
    let scale = lambda.norm().powf(-beta - 1.0);
    let mut tcap = 1.0;
    while (-a * tcap).exp() * tcap.max(1.0).powf(beta) / (a * gamma(beta + 1.0)) * (1.0 + beta / (a * tcap)) > 1e-12 * scale {
        tcap *= 1.25;
    }
    let pmax = pv.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let panels = ((pmax * tcap / 3.0).ceil() as usize).clamp(4, 4000);
    let breaks: Vec<f64> = (1..panels).map(|i| tcap * i as f64 / panels as f64).collect();
    let mut failure = None;
    let r = integrate_gk(
        |t, out| {
            let damp = (-lambda * t).exp();
            for (o, &p) in out.iter_mut().zip(&pv) {
                *o = match rl_multiplier(beta, t, p) {
                    Ok(m) => damp * m,
                    Err(e) => {
                        failure = Some(e);
                        ZERO
                    }
                };
            }
        },
        0.0,
        tcap,
        &breaks,
        pv.len(),
        GkOptions {
            abs_tol: 1e-14 * scale,
            rel_tol: 1e-11,
            max_intervals: 20000,
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let lb = lambda.powf(beta);
    let mut num = 0.0;
    let mut den = 0.0;
    for &k in &support {
        let p = grid.p_table()[k];
        let v = r.value[pv.partition_point(|&q| q < p)];
        let exact = spec[k] / (lambda - Complex64::new(0.0, p));
        num += (lb * v * spec[k] - exact).norm_sqr();
        den += exact.norm_sqr();
    }
    Ok(LaplaceCheck {
        lambda_re: lambda.re,
        lambda_im: lambda.im,
        beta,
        truncation: tcap,
        quadrature_error: r.error,
        relative_error: (num / den).sqrt(),
        converged: r.converged,
    })
}

/// `L²` conservation and the group law `e^{i t₂ P} e^{i t₁ P} = e^{i(t₁+t₂)P}`.
#[derive(Debug, Clone, Serialize)]
pub struct PropagatorIdentities {
    pub t1: f64,
    pub t2: f64,
    /// Largest `|‖e^{itP}u‖_2 / ‖u‖_2 − 1|` over `t₁, t₂, t₁ + t₂`.
    pub l2_drift: f64,
    pub group_law: f64,
}

pub fn propagator_identities(grid: &SpectralGrid, u: &StateField, t1: f64, t2: f64) -> Result<PropagatorIdentities> {
    let a = grid.propagate(u, t1)?;
    let b = grid.propagate(&a, t2)?;
    let c = grid.propagate(u, t1 + t2)?;
    let n0 = u.norm(2.0);
    let l2_drift = [&a, &b, &c].iter().map(|v| (v.norm(2.0) / n0 - 1.0).abs()).fold(0.0, f64::max);
    Ok(PropagatorIdentities {
        t1,
        t2,
        l2_drift,
        group_law: b.rel_l2(&c),
    })
}

/// Relative residuals of the resolvent relations at `λ, μ`.
#[derive(Debug, Clone, Serialize)]
pub struct ResolventIdentities {
    pub lambda: Complex64,
    pub mu: Complex64,
    /// `(λ − iP) R(λ) f = f`.
    pub defining: f64,
    /// `R(λ) − R(μ) = (μ − λ) R(λ) R(μ)`.
    pub identity: f64,
    /// `conj(R(λ) conj f) = −R(−λ̄) f`.
    pub conjugation: f64,
    /// `max |λ − iP| / min |λ − iP|` over the spectral support of `f`: the
    /// factor by which rounding in `R(λ) f` is amplified in the defining
    /// relation.
    pub amplification: f64,
}

impl ResolventIdentities {
    pub fn worst(&self) -> f64 {
        self.defining.max(self.identity).max(self.conjugation)
    }

    /// Worst of the two relations that involve resolvents only.
    pub fn relations(&self) -> f64 {
        self.identity.max(self.conjugation)
    }

    /// Rounding floor for the defining relation, `32 ε · amplification`.
    pub fn defining_floor(&self) -> f64 {
        32.0 * f64::EPSILON * self.amplification
    }
}

pub fn resolvent_identities(grid: &SpectralGrid, f: &StateField, lambda: Complex64, mu: Complex64) -> Result<ResolventIdentities> {
    let rl = grid.resolvent_apply(f, lambda)?;
    let rm = grid.resolvent_apply(f, mu)?;
    let back = grid.apply_multiplier(&rl, |_, p| lambda - Complex64::new(0.0, p));
    let lhs = rl.sub(&rm);
    let rhs = grid.resolvent_apply(&rm, lambda)?.scale(mu - lambda);
    let a = grid.resolvent_apply(&f.conj(), lambda)?.conj();
    let b = grid.resolvent_apply(f, -lambda.conj())?.scale(Complex64::new(-1.0, 0.0));
    let spec = grid.spectrum(f);
    let peak = spec.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let (lo, hi) = spec
        .iter()
        .zip(grid.p_table())
        .filter(|(z, _)| z.norm() > 1e-15 * peak)
        .map(|(_, &p)| (lambda - Complex64::new(0.0, p)).norm())
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d), hi.max(d)));
    Ok(ResolventIdentities {
        lambda,
        mu,
        defining: back.rel_l2(f),
        identity: lhs.rel_l2(&rhs),
        conjugation: a.rel_l2(&b),
        amplification: if hi > 0.0 { hi / lo } else { 1.0 },
    })
}

/// Quadrature path of the `β = 1` multiplier against `(e^{itP} − 1)/(iP)`
/// on the numerical support of `û`.
#[derive(Debug, Clone, Serialize)]
pub struct ClosedFormCheck {
    pub t: f64,
    pub symbol_values: usize,
    /// Largest `|quadrature − closed form| / |closed form|`.
    pub max_relative: f64,
    /// `‖T_quad(t)u − T_closed(t)u‖_2 / ‖T_closed(t)u‖_2`.
    pub field_relative: f64,
}

pub fn closed_form_check(grid: &SpectralGrid, u: &StateField, t: f64) -> Result<ClosedFormCheck> {
    let spec = grid.spectrum(u);
    let peak = spec.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let p = grid.p_table();
    let mut pv: Vec<f64> = (0..spec.len()).filter(|&k| spec[k].norm() > 1e-15 * peak).map(|k| p[k]).collect();
    pv.sort_by(f64::total_cmp);
    pv.dedup();
    let quad = pv
        .par_iter()
        .map(|&pk| rl_multiplier_quadrature(1.0, t, pk))
        .collect::<Result<Vec<_>>>()?;
    let max_relative = pv
        .iter()
        .zip(&quad)
        .map(|(&pk, q)| {
            let c = rl_first(t, pk);
            (q - c).norm() / c.norm()
        })
        .fold(0.0, f64::max);
    let lookup = |pk: f64| pv.binary_search_by(|q| q.total_cmp(&pk)).ok().map(|i| quad[i]);
    let a = grid.apply_multiplier(u, |_, pk| lookup(pk).unwrap_or(ZERO));
    let b = grid.apply_multiplier(u, |_, pk| if lookup(pk).is_some() { rl_first(t, pk) } else { ZERO });
    Ok(ClosedFormCheck {
        t,
        symbol_values: pv.len(),
        max_relative,
        field_relative: a.rel_l2(&b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::{prop_assert, proptest, ProptestConfig};

    fn circle() -> PolySymbol {
        PolySymbol::radial(2, 4).unwrap()
    }

    fn small_grid() -> SpectralGrid {
        SpectralGrid::new(&circle(), 64, 24.0).unwrap()
    }

    // û = e^{-s²|ξ|²/2}: spatially Gaussian, unlike the compactly windowed bump
    fn gauss(grid: &SpectralGrid, s: f64) -> StateField {
        grid.from_spectrum(|xi| Complex64::new((-0.5 * s * s * sphere::dot(xi, xi)).exp(), 0.0))
    }

    fn bump(grid: &SpectralGrid, band: f64) -> StateField {
        grid.from_spectrum(|xi| {
            let r = sphere::norm(xi);
            Complex64::new((-0.5 * r * r).exp() * band_window(r, band), 0.0)
        })
    }

    #[test]
    fn p_table_matches_symbol() {
        let g = small_grid();
        for k in [0, 5, 700, 4000] {
            assert_eq!(g.p_table()[k], g.symbol().value(&g.frequency(k)));
        }
    }

    #[test]
    fn index_round_trip() {
        let g = small_grid();
        for k in [0, 1, 63, 64, 2047, 4095] {
            assert_eq!(g.index_of(&g.signed_indices(k)), k);
        }
    }

    #[test]
    fn from_spectrum_matches_gaussian() {
        // û = e^{-2|ξ|²}  <->  u = e^{-|x|²/8} / (8π)
        let g = small_grid();
        let u = g.from_spectrum(|xi| Complex64::new((-2.0 * sphere::dot(xi, xi)).exp(), 0.0));
        for k in [0, 3, 130, 200] {
            let x = g.position(k);
            let want = (-sphere::dot(&x, &x) / 8.0).exp() / (8.0 * PI);
            assert!((u.values()[k].re - want).abs() < 1e-12, "{k} {} {want}", u.values()[k]);
        }
    }

    #[test]
    fn propagate_unitary_and_group_law() {
        let g = small_grid();
        let u = gauss(&g, 3.0);
        assert_eq!(g.propagate(&u, 0.0).unwrap().values(), u.values());
        let a = g.propagate(&u, 0.1).unwrap();
        assert!((a.norm(2.0) / u.norm(2.0) - 1.0).abs() < 1e-12);
        let b = g.propagate(&a, 0.15).unwrap();
        let c = g.propagate(&u, 0.25).unwrap();
        assert!(b.rel_l2(&c) < 1e-12);
    }

    #[test]
    fn propagate_refuses_unconfined() {
        let g = small_grid();
        let u = bump(&g, 1.5);
        let err = g.propagate(&u, 50.0).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)), "{err}");
        // unresolved high-frequency content
        let rough = g.field(|x| Complex64::new(if x[0] == 0.0 && x[1] == 0.0 { 1.0 } else { 0.0 }, 0.0));
        assert!(!g.confinement(&rough, 0.1).ok);
    }

    #[test]
    fn resolvent_defining_equation_and_zero_mode() {
        let g = small_grid();
        let f = bump(&g, 2.0);
        let lambda = Complex64::new(0.7, -1.3);
        let u = g.resolvent_apply(&f, lambda).unwrap();
        let back = g.apply_multiplier(&u, |_, p| lambda - Complex64::new(0.0, p));
        assert!(back.rel_l2(&f) < 1e-12);
        let c = g.field(|_| Complex64::new(2.0, 1.0));
        let r = g.resolvent_apply(&c, lambda).unwrap();
        let want = Complex64::new(2.0, 1.0) / lambda;
        assert!(r.values().iter().all(|z| (z - want).norm() < 1e-12));
        assert!(g.resolvent_apply(&f, Complex64::new(0.0, 2.0)).is_err());
    }

    #[test]
    fn resolvent_identity_and_conjugation() {
        let g = small_grid();
        let probes = probe_family(&g, 2.0, 7, &[]).unwrap();
        let (l, mu) = (Complex64::new(1.5, 0.4), Complex64::new(0.5, -2.0));
        for pr in probes.iter().step_by(3) {
            let f = &pr.field;
            let lhs = g.resolvent_apply(f, l).unwrap().sub(&g.resolvent_apply(f, mu).unwrap());
            let rhs = g.resolvent_apply(&g.resolvent_apply(f, mu).unwrap(), l).unwrap().scale(mu - l);
            assert!(lhs.rel_l2(&rhs) < 1e-11);
            // conjugation flips the sign in front of P: conj R(λ) conj = −R(−λ̄)
            let a = g.resolvent_apply(f, -l.conj()).unwrap().scale(Complex64::new(-1.0, 0.0));
            let b = g.resolvent_apply(&f.conj(), l).unwrap().conj();
            assert!(a.rel_l2(&b) < 1e-12);
        }
    }

    #[test]
    fn rl_quadrature_matches_closed_forms() {
        for &t in &[0.3, 1.0, 2.5] {
            for &p in &[0.0, 0.01, 1.0, -3.0, 12.0, 39.0, 41.0, 400.0, -2500.0] {
                let q = rl_multiplier_quadrature(1.0, t, p).unwrap();
                let c = rl_first(t, p);
                assert!((q - c).norm() <= 1e-10 * c.norm().max(1e-3), "t={t} p={p} {q} {c}");
                if (t * p).abs() > 1.0 {
                    // β = 2: (J_1 − t) / (iP)
                    let want = (c - t) / Complex64::new(0.0, p);
                    let got = rl_multiplier_quadrature(2.0, t, p).unwrap();
                    assert!((got - want).norm() <= 1e-10 * want.norm(), "beta 2 t={t} p={p}");
                }
            }
        }
    }

    #[test]
    fn rl_semigroup_in_beta() {
        // ∫_0^t J_1(s) ds = J_2(t)
        for &(t, p) in &[(1.0, 3.0), (2.0, 25.0), (1.5, -8.0)] {
            let r = integrate_gk(
                |s, out| out[0] = rl_first(s, p),
                0.0,
                t,
                &[],
                1,
                GkOptions::default(),
            );
            let j2 = rl_multiplier_quadrature(2.0, t, p).unwrap();
            assert!((r.value[0] - j2).norm() < 1e-8, "{} {}", r.value[0], j2);
        }
    }

    #[test]
    fn rl_regimes_agree() {
        // both representations hold for every P; compare them across the switch
        for &beta in &[0.5, 1.7, 2.2] {
            for &p in &[5.0, 25.0, 40.0, 60.0, -45.0] {
                let a = rl_direct(beta, 1.0, p).unwrap();
                let b = rl_contour(beta, 1.0, p).unwrap();
                assert!((a - b).norm() < 1e-12 * a.norm().max(1.0), "{beta} {p}: {a} {b}");
            }
        }
    }

    #[test]
    fn integrated_group_beta_zero_and_one() {
        let g = small_grid();
        let u = gauss(&g, 3.0);
        let a = g.integrated_group(&u, 0.25, 0.0).unwrap();
        assert_eq!(a.values(), g.propagate(&u, 0.25).unwrap().values());
        let b = g.integrated_group(&u, 0.25, 1.0).unwrap();
        let c = g.apply_multiplier(&u, |_, p| rl_first(0.25, p));
        assert!(b.rel_l2(&c) < 1e-14);
        let neg = g.integrated_group(&u, -0.25, 1.5).unwrap();
        let pos = g.integrated_group(&u.conj(), 0.25, 1.5).unwrap().conj();
        // u real and even in ξ, so the −iP branch is the conjugate
        assert!(neg.rel_l2(&pos) < 1e-12);
    }

    #[test]
    fn identity_reports() {
        let g = small_grid();
        let u = gauss(&g, 3.0);
        let pi = propagator_identities(&g, &u, 0.1, 0.15).unwrap();
        assert!(pi.l2_drift < 1e-12 && pi.group_law < 1e-12, "{pi:?}");
        let ri = resolvent_identities(&g, &bump(&g, 2.0), Complex64::new(1.5, 0.4), Complex64::new(0.5, -2.0)).unwrap();
        assert!(ri.worst() < 1e-11, "{ri:?}");
        let cf = closed_form_check(&g, &u, 1.0).unwrap();
        assert!(cf.max_relative < 1e-10 && cf.field_relative < 1e-10, "{cf:?}");
        assert!(cf.symbol_values > 10);
    }

    #[test]
    fn laplace_identities_small_grid() {
        let g = SpectralGrid::new(&circle(), 32, 12.0).unwrap();
        let u = bump(&g, 1.4);
        let r = laplace_check(&g, &u, Complex64::new(2.0, 0.5), 0.0).unwrap();
        assert!(r.relative_error < 1e-6, "{r:?}");
        let r = laplace_check(&g, &u, Complex64::new(3.0, 0.0), 2.2).unwrap();
        assert!(r.relative_error < 1e-4, "{r:?}");
    }

    #[test]
    fn translation_invariance_of_ratios() {
        let g = small_grid();
        let u = gauss(&g, 3.0);
        let v = u.translate(&[5, -3]);
        let a = g.propagate(&u, 0.2).unwrap().norm(f64::INFINITY) / u.norm(1.0);
        let b = g.propagate(&v, 0.2).unwrap().norm(f64::INFINITY) / v.norm(1.0);
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn probe_family_is_band_limited() {
        let g = small_grid();
        let probes = probe_family(&g, 1.5, 3, &curvature_extremes(g.symbol()).unwrap()).unwrap();
        assert_eq!(probes.len(), 16);
        for pr in &probes {
            let c = g.confinement(&pr.field, 0.0);
            assert!(c.band_tail < 1e-20, "{}: {c:?}", pr.label);
        }
        assert!(probe_family(&g, 10.0, 3, &[]).is_err());
    }

    #[test]
    fn two_two_resolvent_norm_is_exact() {
        let g = small_grid();
        let ex = Exponents::new(4, 2, 2).unwrap();
        let probes = probe_family(&g, 1.5, 1, &[]).unwrap();
        let rep = resolvent_probe(&g, &ex, 2.0, 2.0, &[1.0, 2.0, 4.0], &probes).unwrap();
        let fit = &rep.tracks[0].fit;
        assert!((fit.slope + 1.0).abs() < 1e-12);
        for (x, y) in fit.x.iter().zip(&fit.y) {
            assert_relative_eq!(*y, 1.0 / x, max_relative = 1e-12);
        }
    }

    #[test]
    fn dispersive_two_two_is_flat() {
        let g = small_grid();
        let ex = Exponents::new(4, 2, 2).unwrap();
        let probes: Vec<Probe> = [2.5, 3.0, 4.0]
            .iter()
            .map(|&s| Probe {
                label: format!("gauss:{s}"),
                field: gauss(&g, s),
            })
            .collect();
        let rep = dispersive_probe(&g, &ex, 2.0, 2.0, &[0.05, 0.1, 0.2], &probes).unwrap();
        assert!(rep.tracks[0].fit.slope.abs() < 1e-12);
        assert!(rep.rows.iter().all(|r| (r.ratio - 1.0).abs() < 1e-12));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn norms_are_log_convex(seed in 0u64..1000, theta in 0.05f64..0.95) {
            let g = SpectralGrid::new(&circle(), 16, 4.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let vals: Vec<Complex64> = (0..g.total())
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let u = StateField::from_values(&g, vals).unwrap();
            for (p, r) in [(1.0, 2.0), (1.5, 4.0), (2.0, f64::INFINITY)] {
                let q = 1.0 / (theta / p + (1.0 - theta) / r);
                let lhs = u.norm(q);
                let rhs = u.norm(p).powf(theta) * u.norm(r).powf(1.0 - theta);
                prop_assert!(lhs <= rhs * (1.0 + 1e-12));
            }
        }
    }
}
