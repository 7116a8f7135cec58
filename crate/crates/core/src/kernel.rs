//! The free kernel `K = F^{-1}(e^{itP})`: a surface-quadrature evaluator,
//! an independent FFT evaluator, the homogeneity scaling identity, and
//! log-log decay fits.
//!
//! Writing `y = tξ` with `ξ ∈ Σ`, the measure identity `dy = t^{n-1} dt ·
//! ρ(ω)^n dω` reduces the kernel at `t = 1` to
//!
//! ```text
//! K_ε(x) = (2π)^{-n} ∫_{S^{n-1}} I_ε(⟨x, ξ(ω)⟩) ρ(ω)^n dω,
//! I_ε(a) = ∫_0^∞ e^{i(t^m + a t)} t^{n-1} [(1 − χ(t)) + χ(t) e^{-εt}] dt,
//! ```
//!
//! where `χ` rises from 0 at `t = 1` to 1 at `t = 2`. The profile `I_ε` does
//! not depend on `P`, so it is tabulated once per `(m, n)`.

use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::fit::{loglog, DecayFit};
use crate::geometry::surface_rule;
use crate::quadrature::{integrate_gk, GkOptions};
use crate::spectral::{ordered_sum, smooth_step_down, SpectralGrid};
use crate::sphere;
use crate::symbol::PolySymbol;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub const DEFAULT_EPS: [f64; 5] = [0.5, 0.25, 0.125, 0.0625, 0.03125];

const PANEL_WIDTH: f64 = 0.5;
const CHEB_NODES: usize = 16;

/// `C^4` smoothstep: 0 for `t <= 1`, 1 for `t >= 2`.
pub fn cutoff(t: f64) -> f64 {
    let u = (t - 1.0).clamp(0.0, 1.0);
    u.powi(5) * (126.0 + u * (-420.0 + u * (540.0 + u * (-315.0 + 70.0 * u))))
}

/// Stationary radius `t0 = (|a|/m)^{1/(m-1)}` of the phase `t^m + a t`
/// for `a < 0`, and 0 otherwise.
pub fn critical_radius(m: u32, a: f64) -> f64 {
    if a >= 0.0 {
        0.0
    } else {
        (-a / m as f64).powf(1.0 / (m as f64 - 1.0))
    }
}

/// Tabulated profiles `I_ε(a)` for an ε schedule, plus the `ε = 0` limit
/// taken directly on the deformed contour (last component).
#[derive(Debug, Clone)]
pub struct OscillatoryPlan {
    pub m: u32,
    pub n: usize,
    pub eps: Vec<f64>,
    pub a_max: f64,
    panels: usize,
    values: Vec<Complex64>,
    /// Largest quadrature error estimate over the table nodes.
    pub build_error: f64,
    /// Largest interpolation error found against direct evaluation.
    pub interpolation_error: f64,
}

impl OscillatoryPlan {
    pub fn new(m: u32, n: usize, a_max: f64, eps: &[f64]) -> Result<Self> {
        if m < 2 || m % 2 != 0 || n < 2 {
            return Err(Error::InvalidArgument(format!("need even m >= 2 and n >= 2 (m = {m}, n = {n})")));
        }
        if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument(
                "epsilon schedule must be positive and strictly decreasing".into(),
            ));
        }
        if !(a_max > 0.0) || !a_max.is_finite() {
            return Err(Error::InvalidArgument(format!("a_max must be positive (got {a_max})")));
        }
        let panels = (2.0 * a_max / PANEL_WIDTH).ceil() as usize;
        let a_max = panels as f64 * PANEL_WIDTH / 2.0;
        let dim = eps.len() + 1;
        let nodes = cheb_nodes();
        let chunks: Vec<(Vec<Complex64>, f64, bool)> = (0..panels * CHEB_NODES)
            .into_par_iter()
            .map(|i| {
                let (pi, j) = (i / CHEB_NODES, i % CHEB_NODES);
                let lo = -a_max + pi as f64 * PANEL_WIDTH;
                let a = lo + 0.5 * PANEL_WIDTH * (nodes[j] + 1.0);
                profile_direct(m, n, eps, a)
            })
            .collect();
        if let Some(c) = chunks.iter().find(|c| !c.2) {
            return Err(Error::Numerical(format!(
                "profile quadrature did not converge (error estimate {:.3e})",
                c.1
            )));
        }
        let build_error = chunks.iter().map(|c| c.1).fold(0.0, f64::max);
        let mut values = Vec::with_capacity(panels * CHEB_NODES * dim);
        for c in chunks {
            values.extend(c.0);
        }
        let mut plan = Self {
            m,
            n,
            eps: eps.to_vec(),
            a_max,
            panels,
            values,
            build_error,
            interpolation_error: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut worst: f64 = 0.0;
        let mut buf = vec![ZERO; dim];
        for _ in 0..24 {
            let a = rng.gen_range(-plan.a_max..plan.a_max);
            let (direct, _, _) = profile_direct(m, n, eps, a);
            plan.profile(a, &mut buf)?;
            for (x, y) in buf.iter().zip(&direct) {
                worst = worst.max((x - y).norm());
            }
        }
        plan.interpolation_error = worst;
        Ok(plan)
    }

    pub fn dim(&self) -> usize {
        self.eps.len() + 1
    }

    /// Interpolated profiles at `a`; components follow `eps`, then `ε = 0`.
    pub fn profile(&self, a: f64, out: &mut [Complex64]) -> Result<()> {
        if !(a.abs() <= self.a_max) {
            return Err(Error::InvalidArgument(format!(
                "profile argument {a} outside the tabulated range ±{}",
                self.a_max
            )));
        }
        let s = (a + self.a_max) / PANEL_WIDTH;
        let pi = (s.floor() as usize).min(self.panels - 1);
        let u = 2.0 * (s - pi as f64) - 1.0;
        let dim = self.dim();
        let base = &self.values[pi * CHEB_NODES * dim..(pi + 1) * CHEB_NODES * dim];
        let nodes = cheb_nodes();
        out.iter_mut().for_each(|z| *z = ZERO);
        let mut den = 0.0;
        for j in 0..CHEB_NODES {
            let d = u - nodes[j];
            if d == 0.0 {
                out.copy_from_slice(&base[j * dim..(j + 1) * dim]);
                return Ok(());
            }
            let w = cheb_weight(j) / d;
            den += w;
            for (o, v) in out.iter_mut().zip(&base[j * dim..(j + 1) * dim]) {
                *o += w * v;
            }
        }
        out.iter_mut().for_each(|z| *z /= den);
        Ok(())
    }

    /// Direct evaluation of all profiles at `a` (returns values and the
    /// quadrature error estimate).
    pub fn profile_direct(&self, a: f64) -> (Vec<Complex64>, f64) {
        let (v, e, _) = profile_direct(self.m, self.n, &self.eps, a);
        (v, e)
    }
}

fn cheb_nodes() -> [f64; CHEB_NODES] {
    std::array::from_fn(|j| (PI * (j as f64 + 0.5) / CHEB_NODES as f64).cos())
}

fn cheb_weight(j: usize) -> f64 {
    let s = (PI * (j as f64 + 0.5) / CHEB_NODES as f64).sin();
    if j % 2 == 0 {
        s
    } else {
        -s
    }
}

/// All profiles at one `a`: real segment `[0, T0]` split at
/// `{1, 2, t0/2, t0, 2 t0}` and at phase-change steps, then the ray
/// `T0 + s e^{iπ/(2m)}` on which the integrand decays monotonically.
fn profile_direct(m: u32, n: usize, eps: &[f64], a: f64) -> (Vec<Complex64>, f64, bool) {
    let dim = eps.len() + 1;
    let mf = m as f64;
    let mi = m as i32;
    let t0 = critical_radius(m, a);
    let tseg = 2f64.max(1.25 * t0);
    let g = a.abs().max(mf * tseg.powi(mi - 1) + a);
    let panels = ((tseg * g / 4.0).ceil() as usize).max(4);
    let mut breaks: Vec<f64> = (1..panels).map(|i| tseg * i as f64 / panels as f64).collect();
    breaks.extend([1.0, 2.0, 0.5 * t0, t0, 2.0 * t0].into_iter().filter(|b| *b > 0.0 && *b < tseg));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    let opts = GkOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-12,
        max_intervals: 20000,
    };
    let seg = integrate_gk(
        |t, out| {
            let base = Complex64::from_polar(t.powi(n as i32 - 1), t.powi(mi) + a * t);
            let c = cutoff(t);
            for (o, e) in out.iter_mut().zip(eps) {
                *o = base * ((1.0 - c) + c * (-e * t).exp());
            }
            out[dim - 1] = base;
        },
        0.0,
        tseg,
        &breaks,
        dim,
        opts,
    );
    let dir = Complex64::from_polar(1.0, PI / (2.0 * mf));
    let size = |s: f64| {
        let t = tseg + s * dir;
        let ph = Complex64::new(0.0, 1.0) * (t.powi(mi) + a * t);
        ph.re.exp() * t.norm().powi(n as i32 - 1)
    };
    let mut smax = 1.0;
    while size(smax) > 1e-18 && smax < 1e6 {
        smax *= 1.3;
    }
    let ray_breaks: Vec<f64> = (1..32).map(|i| smax * i as f64 / 32.0).collect();
    let ray = integrate_gk(
        |s, out| {
            let t = tseg + s * dir;
            let base = (Complex64::new(0.0, 1.0) * (t.powi(mi) + a * t)).exp() * t.powi(n as i32 - 1) * dir;
            for (o, e) in out.iter_mut().zip(eps) {
                *o = base * (-e * t).exp();
            }
            out[dim - 1] = base;
        },
        0.0,
        smax,
        &ray_breaks,
        dim,
        opts,
    );
    let v = seg.value.iter().zip(&ray.value).map(|(x, y)| x + y).collect();
    (v, seg.error + ray.error, seg.converged && ray.converged)
}

/// Limit `ε → 0` by Neville extrapolation at 0; returns the entry with the
/// smallest estimated error and that estimate.
pub fn richardson(eps: &[f64], vals: &[Complex64]) -> (Complex64, f64) {
    let k = eps.len();
    let mut tab = vec![vec![ZERO; k]; k];
    for i in 0..k {
        tab[i][0] = vals[i];
    }
    let mut best = (vals[k - 1], if k > 1 { (vals[k - 1] - vals[k - 2]).norm() } else { f64::INFINITY });
    for j in 1..k {
        for i in j..k {
            let (ei, ej) = (eps[i], eps[i - j]);
            tab[i][j] = (ei * tab[i - 1][j - 1] - ej * tab[i][j - 1]) / (ei - ej);
            let err = (tab[i][j] - tab[i][j - 1]).norm();
            if err < best.1 {
                best = (tab[i][j], err);
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SurfaceOptions {
    pub start_count: usize,
    pub max_count: usize,
    /// Stop doubling once the Σ-integral changes by less than this.
    pub change_tol: f64,
    /// Results with an error estimate above `max(flag_abs, flag_rel |K|)`
    /// are flagged.
    pub flag_abs: f64,
    pub flag_rel: f64,
}

impl Default for SurfaceOptions {
    fn default() -> Self {
        Self {
            start_count: 256,
            max_count: 1 << 18,
            change_tol: 1e-8,
            flag_abs: 1e-6,
            flag_rel: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelValue {
    pub x: Vec<f64>,
    pub r: f64,
    pub value: Complex64,
    pub error: f64,
    pub richardson_error: f64,
    pub contour_limit: Complex64,
    pub by_eps: Vec<Complex64>,
    pub surface_points: usize,
    pub surface_change: f64,
    /// `r / |∇φ(ξ_-)|`, i.e. `-min_Σ ⟨x, ξ⟩`.
    pub r_bar: f64,
    /// Critical radius at `r_bar` and its split companions `t0/2`, `2 t0`.
    pub t0: f64,
    pub flagged: bool,
}

/// `K(x)` at `t = 1` from the tabulated profiles and the surface rule.
pub fn eval_kernel_surface(
    p: &PolySymbol,
    plan: &OscillatoryPlan,
    x: &[f64],
    opts: &SurfaceOptions,
) -> Result<KernelValue> {
    let n = p.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    if plan.m != p.degree() || plan.n != n {
        return Err(Error::InvalidArgument("plan was built for a different (m, n)".into()));
    }
    let dim = plan.dim();
    let norm_const = (2.0 * PI).powi(-(n as i32));
    let sum_at = |count: usize| -> Result<(Vec<Complex64>, f64, f64)> {
        let rule = surface_rule(p, count)?;
        let mut acc = vec![ZERO; dim];
        let mut buf = vec![ZERO; dim];
        let mut amin = f64::INFINITY;
        let mut wsum = 0.0;
        for (xi, w) in &rule {
            let a = sphere::dot(x, xi);
            amin = amin.min(a);
            wsum += w;
            plan.profile(a, &mut buf)?;
            for (s, b) in acc.iter_mut().zip(&buf) {
                *s += w * b;
            }
        }
        acc.iter_mut().for_each(|z| *z *= norm_const);
        Ok((acc, amin, wsum))
    };
    let per_count = if n == 2 { 1 } else { 2 };
    let mut count = opts.start_count.max(8);
    let (mut cur, mut amin, mut wsum) = sum_at(count)?;
    let mut change = f64::INFINITY;
    while count * 2 <= opts.max_count {
        count *= 2;
        let (next, a2, w2) = sum_at(count)?;
        change = next.iter().zip(&cur).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        cur = next;
        amin = a2;
        wsum = w2;
        if change < opts.change_tol {
            break;
        }
    }
    let by_eps = cur[..dim - 1].to_vec();
    let contour = cur[dim - 1];
    let (value, rich_err) = richardson(&plan.eps, &by_eps);
    let interp = plan.interpolation_error.max(plan.build_error) * wsum * norm_const;
    let error = rich_err + (value - contour).norm() + change + interp;
    let r = sphere::norm(x);
    let r_bar = (-amin).max(0.0);
    Ok(KernelValue {
        x: x.to_vec(),
        r,
        value,
        error,
        richardson_error: rich_err,
        contour_limit: contour,
        by_eps,
        surface_points: count.pow(per_count as u32) * if n == 2 { 1 } else { 2 },
        surface_change: change,
        r_bar,
        t0: critical_radius(p.degree(), -r_bar),
        flagged: !(error <= opts.flag_abs.max(opts.flag_rel * value.norm())) || change >= opts.change_tol,
    })
}

/// Upper bound for `|⟨x, ξ⟩|` over Σ at `|x| = r`, to size a plan.
pub fn profile_range(p: &PolySymbol, r_max: f64) -> Result<f64> {
    let pts = crate::geometry::sample_surface(p, 4096)?;
    let rho = pts.iter().map(|s| sphere::norm(&s.xi)).fold(0.0, f64::max);
    Ok(r_max * rho * 1.01 + 1.0)
}

/// Windowed FFT kernel at time `t` on a grid.
#[derive(Debug, Clone)]
pub struct FftKernel {
    pub grid: SpectralGrid,
    pub t: f64,
    /// Taper radii `(r1, r2)`; `None` means no taper.
    pub window: Option<(f64, f64)>,
    pub values: Vec<Complex64>,
    /// `|Σ|K|² dx^n / ((2π)^{-n} Σ|m|² dξ^n) − 1|`.
    pub plancherel_error: f64,
    /// `t · max |∇P|` over the window support.
    pub reach: f64,
    support: Vec<(Vec<f64>, Complex64)>,
}

fn taper(r: f64, window: Option<(f64, f64)>) -> f64 {
    match window {
        None => 1.0,
        Some((r1, r2)) => smooth_step_down((r - r1) / (r2 - r1)),
    }
}

/// `F^{-1}(e^{itP} W)` on the grid, refusing when the windowed kernel would
/// wrap around the periodic box (`t · max|∇P| > 0.9 L`).
pub fn eval_kernel_fft(grid: &SpectralGrid, t: f64, window: Option<(f64, f64)>) -> Result<FftKernel> {
    if let Some((r1, r2)) = window {
        if !(0.0 < r1 && r1 < r2) {
            return Err(Error::InvalidArgument(format!("window radii must satisfy 0 < r1 < r2 ({r1}, {r2})")));
        }
        if r2 > grid.nyquist() {
            return Err(Error::Precondition(format!(
                "window radius {r2} exceeds Nyquist {:.4}",
                grid.nyquist()
            )));
        }
    }
    let p = grid.symbol();
    let mut support = Vec::new();
    let mut vmax: f64 = 0.0;
    for (k, &pk) in grid.p_table().iter().enumerate() {
        let xi = grid.frequency(k);
        let w = taper(sphere::norm(&xi), window);
        if w > 0.0 {
            vmax = vmax.max(sphere::norm(&p.gradient_unchecked(&xi)));
            support.push((xi, Complex64::from_polar(w, t * pk)));
        }
    }
    let reach = t.abs() * vmax;
    if t != 0.0 && reach > 0.9 * grid.half_width() {
        return Err(Error::Precondition(format!(
            "aliasing risk: t * max|grad P| = {reach:.3} exceeds 0.9 L = {:.3}",
            0.9 * grid.half_width()
        )));
    }
    let field = grid.from_spectrum(|xi| Complex64::from_polar(taper(sphere::norm(xi), window), t * p.value(xi)));
    let n = grid.dim() as i32;
    let lhs = field.norm(2.0).powi(2);
    let rhs: f64 = support.iter().map(|(_, m)| m.norm_sqr()).sum::<f64>() * (grid.dxi() / (2.0 * PI)).powi(n);
    Ok(FftKernel {
        grid: grid.clone(),
        t,
        window,
        values: field.into_values(),
        plancherel_error: (lhs / rhs - 1.0).abs(),
        reach,
        support,
    })
}

impl FftKernel {
    /// Value at grid storage index `k`.
    pub fn at_index(&self, k: usize) -> Complex64 {
        self.values[k]
    }

    /// Trigonometric interpolation at an arbitrary point (direct Fourier
    /// sum over the window support).
    pub fn at(&self, x: &[f64]) -> Complex64 {
        let n = self.grid.dim() as i32;
        let s: Complex64 = ordered_sum(&self.support, |(xi, m)| m * Complex64::from_polar(1.0, sphere::dot(x, xi)));
        s * (self.grid.dxi() / (2.0 * PI)).powi(n)
    }
}

/// Grid points on the rays `j · dx · e` for axis and diagonal directions `e`
/// with radius in `[r_lo, r_hi]`; returns (storage index, position).
pub fn ray_points(grid: &SpectralGrid, r_lo: f64, r_hi: f64) -> Vec<(usize, Vec<f64>)> {
    let n = grid.dim();
    let mut dirs: Vec<Vec<i64>> = Vec::new();
    for a in 0..n {
        let mut e = vec![0i64; n];
        e[a] = 1;
        dirs.push(e.clone());
        e[a] = -1;
        dirs.push(e);
    }
    dirs.push(vec![1; n]);
    let mut d = vec![1; n];
    d[0] = -1;
    dirs.push(d);
    let dx = grid.dx();
    let mut out = Vec::new();
    for e in &dirs {
        let len = (e.iter().map(|v| (v * v) as f64).sum::<f64>()).sqrt() * dx;
        let j0 = (r_lo / len).ceil() as i64;
        let j1 = (r_hi / len).floor() as i64;
        for j in j0.max(1)..=j1 {
            let idx: Vec<i64> = e.iter().map(|v| v * j).collect();
            let x: Vec<f64> = idx.iter().map(|&i| i as f64 * dx).collect();
            out.push((grid.index_of(&idx), x));
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct AgreementRow {
    pub x: Vec<f64>,
    pub r: f64,
    pub surface: Complex64,
    pub fft: Complex64,
    pub difference: f64,
    pub surface_error: f64,
    pub window_bias: f64,
    pub budget: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AgreementReport {
    pub rows: Vec<AgreementRow>,
    pub plancherel_error: f64,
    pub max_ratio: f64,
    pub pass: bool,
}

/// Compare the two evaluators at grid points with `|x| ∈ [r_lo, r_hi]`.
///
/// The FFT error is the pointwise difference between the primary window and
/// a second window scaled by `bias_scale`; the budget is three times the sum
/// of both estimates (plus a round-off floor of `1e-12 · max|K|`).
pub fn compare_evaluators(
    plan: &OscillatoryPlan,
    grid: &SpectralGrid,
    window: (f64, f64),
    bias_scale: f64,
    r_lo: f64,
    r_hi: f64,
    opts: &SurfaceOptions,
) -> Result<AgreementReport> {
    let p = grid.symbol();
    let main = eval_kernel_fft(grid, 1.0, Some(window))?;
    let alt = eval_kernel_fft(grid, 1.0, Some((window.0 * bias_scale, window.1 * bias_scale)))?;
    let pts = ray_points(grid, r_lo, r_hi);
    let vals = pts
        .par_iter()
        .map(|(_, x)| eval_kernel_surface(p, plan, x, opts))
        .collect::<Result<Vec<_>>>()?;
    let scale = vals.iter().map(|v| v.value.norm()).fold(0.0, f64::max);
    let mut rows = Vec::new();
    let mut max_ratio: f64 = 0.0;
    for ((k, x), kv) in pts.iter().zip(vals) {
        let f = main.at_index(*k);
        let bias = (f - alt.at_index(*k)).norm();
        let budget = 3.0 * (kv.error + bias) + 1e-12 * scale;
        let difference = (kv.value - f).norm();
        max_ratio = max_ratio.max(difference / budget);
        rows.push(AgreementRow {
            x: x.clone(),
            r: kv.r,
            surface: kv.value,
            fft: f,
            difference,
            surface_error: kv.error,
            window_bias: bias,
            budget,
        });
    }
    Ok(AgreementReport {
        rows,
        plancherel_error: main.plancherel_error.max(alt.plancherel_error),
        max_ratio,
        pass: max_ratio <= 1.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub t: f64,
    pub samples: usize,
    /// `max |t^{n/m} K_t(t^{1/m} y) − K_1(y)| / max |K_1(y)|` over samples.
    pub rel_linf: f64,
    pub plancherel_error: f64,
    pub reach: f64,
}

/// Check `K_t(x) = t^{-n/m} K_1(t^{-1/m} x)` on sample points `y` with
/// `|y| ∈ [r_lo, r_hi]`. The window at time `t` is `W(t^{1/m} ξ)`, so the
/// identity holds exactly for the windowed kernels and the residual measures
/// discretization and interpolation error only.
pub fn scaling_check(
    grid: &SpectralGrid,
    times: &[f64],
    window: (f64, f64),
    r_lo: f64,
    r_hi: f64,
) -> Result<Vec<ScalingRow>> {
    let p = grid.symbol();
    let (m, n) = (p.degree() as f64, grid.dim() as f64);
    let base = eval_kernel_fft(grid, 1.0, Some(window))?;
    let pts = ray_points(grid, r_lo, r_hi);
    let scale = pts.iter().map(|(k, _)| base.at_index(*k).norm()).fold(0.0, f64::max);
    let mut rows = Vec::new();
    for &t in times {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!("scaling times must be positive (got {t})")));
        }
        let s = t.powf(1.0 / m);
        let field = eval_kernel_fft(grid, t, Some((window.0 / s, window.1 / s)))?;
        let amp = t.powf(n / m);
        let worst = pts
            .par_iter()
            .map(|(k, y)| {
                let x: Vec<f64> = y.iter().map(|v| v * s).collect();
                (amp * field.at(&x) - base.at_index(*k)).norm()
            })
            .reduce(|| 0.0, f64::max);
        rows.push(ScalingRow {
            t,
            samples: pts.len(),
            rel_linf: worst / scale,
            plancherel_error: field.plancherel_error,
            reach: field.reach,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRow {
    pub r: f64,
    pub direction: usize,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    pub error: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayExperiment {
    pub k: u32,
    pub h: f64,
    pub slack: f64,
    pub directions: Vec<Vec<f64>>,
    pub rows: Vec<DecayRow>,
    pub per_direction: Vec<DecayFit>,
    pub envelope: DecayFit,
    pub flagged: usize,
    pub pass: bool,
}

/// Equally spaced directions on the upper half circle (`n = 2`) or a
/// Fibonacci half sphere (`n = 3`); `K` is even so half suffices.
pub fn half_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    if n == 2 {
        (0..count)
            .map(|i| {
                let th = PI * i as f64 / count as f64;
                vec![th.cos(), th.sin()]
            })
            .collect()
    } else {
        sphere::sample(n, 2 * count)
            .into_iter()
            .filter(|v| v[n - 1] >= 0.0)
            .collect()
    }
}

/// Fit `log|K|` against `log r` per direction and for the envelope
/// (maximum over directions); passes when the envelope slope is at most
/// `−h(m, n, k) + slack` and no value was flagged.
pub fn fit_decay(
    p: &PolySymbol,
    k: u32,
    plan: &OscillatoryPlan,
    ladder: &[f64],
    directions: &[Vec<f64>],
    slack: f64,
    opts: &SurfaceOptions,
) -> Result<DecayExperiment> {
    if ladder.len() < 6 {
        return Err(Error::InvalidArgument(format!(
            "decay ladder needs at least 6 radii (got {})",
            ladder.len()
        )));
    }
    if directions.is_empty() {
        return Err(Error::InvalidArgument("no directions given".into()));
    }
    let ex = Exponents::new(p.degree(), p.dim(), k)?;
    let jobs: Vec<(usize, f64)> = (0..directions.len())
        .flat_map(|d| ladder.iter().map(move |&r| (d, r)))
        .collect();
    let vals = jobs
        .par_iter()
        .map(|&(d, r)| {
            let x: Vec<f64> = directions[d].iter().map(|v| v * r).collect();
            eval_kernel_surface(p, plan, &x, opts).map(|kv| DecayRow {
                r,
                direction: d,
                re: kv.value.re,
                im: kv.value.im,
                abs: kv.value.norm(),
                error: kv.error,
                flagged: kv.flagged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut per_direction = Vec::new();
    let mut env = vec![0.0f64; ladder.len()];
    for d in 0..directions.len() {
        let ys: Vec<f64> = vals.iter().filter(|v| v.direction == d).map(|v| v.abs).collect();
        for (e, y) in env.iter_mut().zip(&ys) {
            *e = e.max(*y);
        }
        per_direction.push(loglog(ladder, &ys, -ex.h)?);
    }
    let envelope = loglog(ladder, &env, -ex.h)?;
    let flagged = vals.iter().filter(|v| v.flagged).count();
    let pass = envelope.within_envelope(slack) && flagged == 0;
    Ok(DecayExperiment {
        k,
        h: ex.h,
        slack,
        directions: directions.to_vec(),
        rows: vals,
        per_direction,
        envelope,
        flagged,
        pass,
    })
}
