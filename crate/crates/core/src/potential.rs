//! The perturbed operator `iP(D) + V`: admissibility of the potential
//! exponents, the Born-series resolvent with a direct-solve cross-check,
//! Strang-split time evolution and the checks built on it.

use crate::error::{Error, Result};
use crate::exponents::{conj, de_f64, interval_s, n_p, ser_f64, specialized_check, Exponents, Interval, IntervalKind, SpecializedCheck};
use crate::fit::{linear, loglog, DecayFit};
use crate::quadrature::gauss_legendre_on;
use crate::spectral::{ordered_sum, smooth_step_down, Probe, SpectralGrid, StateField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Closed-form or file-backed potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialDescriptor {
    /// `(amplitude + i·imag) e^{-|x - center|² / (2 width²)}`.
    GaussianBump {
        amplitude: f64,
        #[serde(default)]
        imag: f64,
        width: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    /// Samples stored as JSON: `points_per_axis`, `half_width`, `re`, and
    /// optionally `im`, in the grid's row-major order.
    GridFile { path: PathBuf },
    /// `amplitude |x|^{-exponent}` cut off smoothly between `radius` and
    /// `2 radius`; the origin sample uses `|x| = dx/2`.
    InversePower { amplitude: f64, exponent: f64, radius: f64 },
}

/// A potential together with its split `V = V₁ + V₂` and declared
/// exponents `s₁, s₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub descriptor: PotentialDescriptor,
    #[serde(deserialize_with = "de_f64", serialize_with = "ser_f64")]
    pub s1: f64,
    #[serde(deserialize_with = "de_f64", serialize_with = "ser_f64")]
    pub s2: f64,
    /// `V₁ = V·1(|x| ≤ split_radius)`; absent means `V₂ = 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_radius: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFileData {
    points_per_axis: usize,
    half_width: f64,
    re: Vec<f64>,
    #[serde(default)]
    im: Option<Vec<f64>>,
}

/// A potential sampled on a grid.
#[derive(Debug, Clone)]
pub struct Potential {
    label: String,
    s: [f64; 2],
    field: StateField,
    parts: [StateField; 2],
    norms: [f64; 2],
    singular: bool,
}

/// Serializable description of a sampled potential.
#[derive(Debug, Clone, Serialize)]
pub struct PotentialSummary {
    pub label: String,
    #[serde(serialize_with = "ser_f64")]
    pub s1: f64,
    #[serde(serialize_with = "ser_f64")]
    pub s2: f64,
    /// Discrete `‖V_j‖_{s_j}`.
    pub norms: [f64; 2],
    pub sup_abs: f64,
    pub sup_re: f64,
    pub sup_im: f64,
    /// Set when `V₁` is not locally in `L^{s₁}`; excluded from acceptance runs.
    pub singular: bool,
}

impl Potential {
    /// Sample `spec` on `grid`. Relative file paths resolve against `base`.
    pub fn build(grid: &SpectralGrid, spec: &PotentialSpec, base: Option<&Path>) -> Result<Self> {
        let n = grid.dim() as f64;
        let (label, field, singular) = match &spec.descriptor {
            PotentialDescriptor::GaussianBump {
                amplitude,
                imag,
                width,
                center,
            } => {
                if !(*width > 0.0) || !amplitude.is_finite() || !imag.is_finite() {
                    return Err(Error::Config(format!(
                        "gaussian_bump needs finite amplitude and width > 0 (width = {width})"
                    )));
                }
                if !center.is_empty() && center.len() != grid.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: grid.dim(),
                        got: center.len(),
                    });
                }
                let amp = Complex64::new(*amplitude, *imag);
                let c = if center.is_empty() { vec![0.0; grid.dim()] } else { center.clone() };
                let w2 = 2.0 * width * width;
                let f = grid.field(|x| {
                    let d2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
                    amp * (-d2 / w2).exp()
                });
                (format!("gaussian_bump(amplitude={amp}, width={width})"), f, false)
            }
            PotentialDescriptor::GridFile { path } => {
                let full = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| Error::Config(format!("cannot read potential file {}: {e}", full.display())))?;
                let data: GridFileData = serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("potential file {}: {e}", full.display())))?;
                if data.points_per_axis != grid.points_per_axis() || data.half_width != grid.half_width() {
                    return Err(Error::Config(format!(
                        "potential file {} is sampled on N = {}, L = {} but the grid has N = {}, L = {}",
                        full.display(),
                        data.points_per_axis,
                        data.half_width,
                        grid.points_per_axis(),
                        grid.half_width()
                    )));
                }
                let im = data.im.unwrap_or_else(|| vec![0.0; data.re.len()]);
                if im.len() != data.re.len() {
                    return Err(Error::DimensionMismatch {
                        expected: data.re.len(),
                        got: im.len(),
                    });
                }
                let values = data.re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
                (format!("grid_file({})", path.display()), StateField::from_values(grid, values)?, false)
            }
            PotentialDescriptor::InversePower {
                amplitude,
                exponent,
                radius,
            } => {
                if !(*radius > 0.0) || !(*exponent > 0.0) || !amplitude.is_finite() {
                    return Err(Error::Config(format!(
                        "inverse_power needs finite amplitude, exponent > 0 and radius > 0 (exponent = {exponent}, radius = {radius})"
                    )));
                }
                let floor = 0.5 * grid.dx();
                let f = grid.field(|x| {
                    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let cut = smooth_step_down(r / radius - 1.0);
                    Complex64::new(amplitude * r.max(floor).powf(-exponent) * cut, 0.0)
                });
                // |x|^{-a} is locally in L^s only when a s < n
                let singular = exponent * spec.s1 >= n;
                (format!("inverse_power(amplitude={amplitude}, exponent={exponent})"), f, singular)
            }
        };
        Self::assemble(grid, label, field, spec.s1, spec.s2, spec.split_radius, singular)
    }

    /// Wrap an arbitrary field; `V₂ = 0`.
    pub fn from_field(field: StateField, s1: f64, s2: f64, label: &str) -> Result<Self> {
        let grid = field.grid().clone();
        Self::assemble(&grid, label.to_string(), field, s1, s2, None, false)
    }

    pub fn zero(grid: &SpectralGrid) -> Self {
        let field = grid.field(|_| ZERO);
        Self::from_field(field, f64::INFINITY, f64::INFINITY, "zero").expect("zero potential")
    }

    fn assemble(
        grid: &SpectralGrid,
        label: String,
        field: StateField,
        s1: f64,
        s2: f64,
        split_radius: Option<f64>,
        singular: bool,
    ) -> Result<Self> {
        for s in [s1, s2] {
            if !(s >= 1.0) {
                return Err(Error::Config(format!("declared exponent s = {s} must be >= 1")));
            }
        }
        if field.values().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical(format!("potential {label} has non-finite samples")));
        }
        let radius = split_radius.unwrap_or(f64::INFINITY);
        let mask = grid.field(|x| {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            Complex64::new(if r <= radius { 1.0 } else { 0.0 }, 0.0)
        });
        let v1 = field.zip(&mask, |a, b| a * b);
        let v2 = field.sub(&v1);
        let norms = [v1.norm(s1), v2.norm(s2)];
        if norms.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("potential {label} has non-finite L^s norms {norms:?}")));
        }
        Ok(Self {
            label,
            s: [s1, s2],
            field,
            parts: [v1, v2],
            norms,
            singular,
        })
    }

    pub fn field(&self) -> &StateField {
        &self.field
    }

    pub fn parts(&self) -> &[StateField; 2] {
        &self.parts
    }

    pub fn exponents(&self) -> [f64; 2] {
        self.s
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn sup_re(&self) -> f64 {
        self.field.values().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn summary(&self) -> PotentialSummary {
        let v = self.field.values();
        PotentialSummary {
            label: self.label.clone(),
            s1: self.s[0],
            s2: self.s[1],
            norms: self.norms,
            sup_abs: v.iter().map(|z| z.norm()).fold(0.0, f64::max),
            sup_re: self.sup_re(),
            sup_im: v.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max),
            singular: self.singular,
        }
    }
}

/// Verdict on `(p, s₁, s₂)`: each `s_j` must lie in `I'_p ∩ (n/m, ∞]`.
#[derive(Debug, Clone, Serialize)]
pub struct Admissibility {
    pub p: f64,
    #[serde(serialize_with = "ser_f64")]
    pub s1: f64,
    #[serde(serialize_with = "ser_f64")]
    pub s2: f64,
    /// `n/m`, the lower bound every `s_j` must exceed.
    pub floor: f64,
    pub interval: Interval,
    pub admissible: bool,
    pub reasons: Vec<String>,
    /// Integrated-group order must exceed `n_p + 1`.
    pub beta_threshold: f64,
    pub specialized: Option<SpecializedCheck>,
    /// Annotation on the generator for `p > 2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_route: Option<String>,
}

pub fn admissibility_gate(table: &Exponents, p: f64, s1: f64, s2: f64) -> Admissibility {
    let floor = table.n as f64 / table.m as f64;
    let mut reasons = Vec::new();
    let valid_p = p >= 1.0 && p.is_finite();
    let interval = if valid_p {
        interval_s(table.tau, p)
    } else {
        reasons.push(format!("p = {p} must be a finite number >= 1"));
        Interval::empty(IntervalKind::IPrime)
    };
    let upper = 2.0 + table.tau_conj;
    if valid_p && p >= upper {
        reasons.push(format!("I'_p is empty for p = {p} >= 2 + tau' = {upper}"));
    }
    for (j, s) in [s1, s2].into_iter().enumerate() {
        if !(s > floor) {
            reasons.push(format!("s{} = {s} is not > n/m = {floor}", j + 1));
        }
        if valid_p && !interval.empty && !interval.contains(s) {
            reasons.push(format!("s{} = {s} is not in I'_p = {interval}", j + 1));
        }
    }
    let dual_route = (valid_p && p > 2.0 && p < upper).then(|| {
        format!(
            "p > 2: the generator is the extension (-iP(D) + conj V)* built from the p' = {:.6} theory; \
             it coincides with iP(D) + V when every s_j >= max(p, p') = {:.6}",
            conj(p),
            p.max(conj(p))
        )
    });
    Admissibility {
        p,
        s1,
        s2,
        floor,
        interval,
        admissible: reasons.is_empty(),
        reasons,
        beta_threshold: if valid_p { n_p(table.n, p) + 1.0 } else { f64::NAN },
        specialized: valid_p.then(|| specialized_check(table, p)),
        dual_route,
    }
}

// Discrete ℓ^p norm of raw samples; the cell factor cancels in operator ratios.
fn lp(v: &[Complex64], p: f64) -> f64 {
    if p.is_infinite() {
        return v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    ordered_sum(v, |z| z.norm().powf(p)).powf(1.0 / p)
}

// Unit vector in ℓ^{p'} dual to `y`: `Σ conj(d) y = ‖y‖_p`.
fn duality_map(y: &[Complex64], p: f64) -> Vec<Complex64> {
    let norm = lp(y, p);
    if norm == 0.0 {
        return vec![ZERO; y.len()];
    }
    y.par_iter()
        .map(|z| {
            let a = z.norm();
            if a == 0.0 {
                ZERO
            } else {
                z / a * (a / norm).powf(p - 1.0)
            }
        })
        .collect()
}

fn check_lambda(lambda: Complex64) -> Result<()> {
    if !(lambda.re > 0.0) || !lambda.im.is_finite() || !lambda.re.is_finite() {
        return Err(Error::Precondition(format!(
            "the Born construction needs Re lambda > 0 (lambda = {lambda})"
        )));
    }
    Ok(())
}

/// `V (λ − iP(D))^{-1}` and its adjoint in the pairing `Σ conj(a) b`.
struct Composed<'a> {
    grid: &'a SpectralGrid,
    v: &'a StateField,
    lambda: Complex64,
}

impl Composed<'_> {
    fn apply(&self, x: &StateField) -> StateField {
        let lam = self.lambda;
        let r = self.grid.apply_multiplier(x, |_, p| 1.0 / (lam - Complex64::new(0.0, p)));
        r.zip(self.v, |a, b| a * b)
    }

    fn adjoint(&self, x: &StateField) -> StateField {
        let lam = self.lambda.conj();
        let w = x.zip(self.v, |a, b| a * b.conj());
        self.grid.apply_multiplier(&w, |_, p| 1.0 / (lam + Complex64::new(0.0, p)))
    }
}

/// Estimate `γ = ‖V (λ − iP(D))^{-1}‖_{L^p → L^p}`.
///
/// `p = 1` is exact (largest column sum, by FFT correlation). Otherwise the
/// value is the best lower bound found by Boyd's power iteration from a
/// fixed set of start vectors.
pub fn contraction(grid: &SpectralGrid, v: &Potential, lambda: Complex64, p: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("operator norm needs p >= 1, got {p}")));
    }
    let op = Composed {
        grid,
        v: v.field(),
        lambda,
    };
    if v.field().values().iter().all(|z| *z == ZERO) {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(column_norm(grid, &op));
    }
    let mut best: f64 = 0.0;
    for start in start_vectors(grid, v.field()) {
        best = best.max(boyd(&op, &start, p));
    }
    Ok(best)
}

fn column_norm(grid: &SpectralGrid, op: &Composed) -> f64 {
    let total = grid.total();
    let mut delta = vec![ZERO; total];
    delta[0] = Complex64::new(1.0, 0.0);
    let lam = op.lambda;
    let g = grid.apply_multiplier(
        &StateField::from_values(grid, delta).expect("grid-sized"),
        |_, p| 1.0 / (lam - Complex64::new(0.0, p)),
    );
    // column k has entries V_j g(j - k); its sum is (|V| * |g(-·)|)(k)
    let gv = g.values();
    let reflected: Vec<Complex64> = (0..total)
        .map(|k| {
            let idx: Vec<i64> = grid.signed_indices(k).iter().map(|i| -i).collect();
            Complex64::new(gv[grid.index_of(&idx)].norm(), 0.0)
        })
        .collect();
    let kernel = grid.spectrum(&StateField::from_values(grid, reflected).expect("grid-sized"));
    let weights = op.v.map(|z| Complex64::new(z.norm(), 0.0));
    let sums = grid.apply_multiplier(&weights, |k, _| kernel[k]);
    sums.values().iter().map(|z| z.re).fold(0.0, f64::max)
}

fn start_vectors(grid: &SpectralGrid, v: &StateField) -> Vec<StateField> {
    let mut out = Vec::new();
    let mut delta = vec![ZERO; grid.total()];
    delta[0] = Complex64::new(1.0, 0.0);
    out.push(StateField::from_values(grid, delta).expect("grid-sized"));
    out.push(grid.field(|x| Complex64::new((-0.5 * x.iter().map(|a| a * a).sum::<f64>()).exp(), 0.0)));
    out.push(v.map(|z| z.conj()));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..2 {
        let vals = (0..grid.total())
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        out.push(StateField::from_values(grid, vals).expect("grid-sized"));
    }
    out
}

fn boyd(op: &Composed, start: &StateField, p: f64) -> f64 {
    let grid = op.grid;
    let q = conj(p);
    let n0 = lp(start.values(), p);
    if n0 == 0.0 {
        return 0.0;
    }
    let mut x = start.scale(Complex64::new(1.0 / n0, 0.0));
    let mut best: f64 = 0.0;
    for _ in 0..60 {
        let y = op.apply(&x);
        let g = lp(y.values(), p);
        let gained = g > best * (1.0 + 1e-9);
        best = best.max(g);
        if g == 0.0 {
            break;
        }
        let d = StateField::from_values(grid, duality_map(y.values(), p)).expect("grid-sized");
        let z = op.adjoint(&d);
        let pairing: f64 = z.values().iter().zip(x.values()).map(|(a, b)| (a.conj() * b).re).sum();
        if lp(z.values(), q) <= pairing * (1.0 + 1e-12) || !gained {
            break;
        }
        x = StateField::from_values(grid, duality_map(z.values(), q)).expect("grid-sized");
    }
    best
}

/// Smallest `Re λ` (at fixed `Im λ`) with measured `γ < 1/2`.
#[derive(Debug, Clone, Serialize)]
pub struct OmegaSearch {
    pub im: f64,
    pub p: f64,
    pub omega: f64,
    /// `(Re λ, γ)` pairs visited, in order.
    pub ladder: Vec<(f64, f64)>,
}

/// Dyadic search from `Re λ = 1` followed by geometric bisection to a
/// relative width of `1e-3`.
pub fn find_omega(grid: &SpectralGrid, v: &Potential, p: f64, im: f64) -> Result<OmegaSearch> {
    let mut ladder = Vec::new();
    let gamma_at = |a: f64, ladder: &mut Vec<(f64, f64)>| -> Result<f64> {
        let g = contraction(grid, v, Complex64::new(a, im), p)?;
        ladder.push((a, g));
        Ok(g)
    };
    let (mut lo, mut hi);
    if gamma_at(1.0, &mut ladder)? < 0.5 {
        hi = 1.0;
        lo = 0.5;
        while gamma_at(lo, &mut ladder)? < 0.5 {
            hi = lo;
            lo *= 0.5;
            if lo < 1e-3 {
                return Ok(OmegaSearch { im, p, omega: hi, ladder });
            }
        }
    } else {
        lo = 1.0;
        hi = 2.0;
        while gamma_at(hi, &mut ladder)? >= 0.5 {
            lo = hi;
            hi *= 2.0;
            if hi > 1e9 {
                return Err(Error::Numerical(format!("contraction gamma >= 1/2 up to Re lambda = {hi:e}")));
            }
        }
    }
    while hi / lo > 1.0 + 1e-3 {
        let mid = (lo * hi).sqrt();
        if gamma_at(mid, &mut ladder)? < 0.5 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(OmegaSearch { im, p, omega: hi, ladder })
}

#[derive(Debug, Clone, Copy)]
pub struct BornOptions {
    /// Stop once `‖term‖_p / ‖partial sum‖_p` drops below this.
    pub increment_tol: f64,
    pub max_terms: usize,
    pub residual_tol: f64,
    pub gamma_threshold: f64,
}

impl Default for BornOptions {
    fn default() -> Self {
        Self {
            increment_tol: 1e-10,
            max_terms: 200,
            residual_tol: 1e-8,
            gamma_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BornSeriesResult {
    pub lambda: Complex64,
    pub p: f64,
    pub gamma: f64,
    pub terms: usize,
    /// Relative size of each added term.
    pub increments: Vec<f64>,
    /// `‖(λ − iP(D) − V)u − f‖_2 / ‖f‖_2` for the series solution.
    pub residual: f64,
    /// Same for the GMRES solution.
    pub direct_residual: f64,
    pub gmres_iterations: usize,
    /// `‖u_series − u_direct‖_2 / ‖u_direct‖_2`.
    pub series_vs_direct: f64,
    pub accepted: bool,
    #[serde(skip)]
    pub solution: Option<StateField>,
}

/// `(λ − iP(D) − V)^{-1} f` as `R₀ Σ_j (V R₀)^j f`, `R₀ = (λ − iP(D))^{-1}`.
///
/// Refuses when the gate rejects the exponents or the measured `γ` reaches
/// the threshold. The result carries the residual of the series solution
/// and its distance to a GMRES solve of `(I − V R₀) w = f`, `u = R₀ w`.
pub fn born_resolvent(
    grid: &SpectralGrid,
    v: &Potential,
    gate: &Admissibility,
    f: &StateField,
    lambda: Complex64,
    opts: BornOptions,
) -> Result<BornSeriesResult> {
    if !gate.admissible {
        return Err(Error::Inadmissible(format!(
            "potential exponents rejected for p = {}: {}",
            gate.p,
            gate.reasons.join("; ")
        )));
    }
    check_lambda(lambda)?;
    let p = gate.p;
    let gamma = contraction(grid, v, lambda, p)?;
    if !(gamma < opts.gamma_threshold) {
        let hint = match find_omega(grid, v, p, lambda.im) {
            Ok(o) => format!("; measured contraction drops below 1/2 from Re lambda ~ {:.4}", o.omega),
            Err(_) => String::new(),
        };
        return Err(Error::Precondition(format!(
            "gamma = ||V R0(lambda)||_{p} = {gamma:.4} >= {} at lambda = {lambda}{hint}",
            opts.gamma_threshold
        )));
    }
    let r0 = |u: &StateField| grid.apply_multiplier(u, |_, q| 1.0 / (lambda - Complex64::new(0.0, q)));
    let vf = v.field();
    let mut term = r0(f);
    let mut sum = term.clone();
    let mut increments = Vec::new();
    let mut terms = 1;
    while terms < opts.max_terms {
        term = r0(&term.zip(vf, |a, b| a * b));
        sum = sum.add(&term);
        terms += 1;
        let scale = lp(sum.values(), p);
        let inc = if scale > 0.0 { lp(term.values(), p) / scale } else { 0.0 };
        increments.push(inc);
        if inc < opts.increment_tol {
            break;
        }
        let k = increments.len();
        if k >= 6 && increments[k - 5..].windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Numerical(format!(
                "Born series diverging: increments grew for five consecutive terms (last {inc:.3e}) despite gamma = {gamma:.4}"
            )));
        }
    }
    let residual = resolvent_residual(grid, v, &sum, f, lambda);
    let (w, iterations) = gmres(
        |x| {
            let xf = StateField::from_values(grid, x.to_vec()).expect("grid-sized");
            let y = r0(&xf).zip(vf, |a, b| a * b);
            x.iter().zip(y.values()).map(|(a, b)| a - b).collect()
        },
        f.values(),
        40,
        1e-14,
        2000,
    );
    let direct = r0(&StateField::from_values(grid, w)?);
    let direct_residual = resolvent_residual(grid, v, &direct, f, lambda);
    let series_vs_direct = sum.rel_l2(&direct);
    Ok(BornSeriesResult {
        lambda,
        p,
        gamma,
        terms,
        increments,
        residual,
        direct_residual,
        gmres_iterations: iterations,
        series_vs_direct,
        accepted: residual < opts.residual_tol,
        solution: Some(sum),
    })
}

/// `‖(λ − iP(D) − V)u − f‖_2 / ‖f‖_2`.
pub fn resolvent_residual(grid: &SpectralGrid, v: &Potential, u: &StateField, f: &StateField, lambda: Complex64) -> f64 {
    let free = grid.apply_multiplier(u, |_, p| lambda - Complex64::new(0.0, p));
    let r = free.sub(&u.zip(v.field(), |a, b| a * b)).sub(f);
    r.norm(2.0) / f.norm(2.0)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let idx: Vec<usize> = (0..a.len()).collect();
    ordered_sum(&idx, |&i| a[i].conj() * b[i])
}

fn l2(a: &[Complex64]) -> f64 {
    ordered_sum(a, |z| z.norm_sqr()).sqrt()
}

/// Restarted GMRES with Givens rotations. Returns the solution and the
/// number of Krylov steps taken.
fn gmres<A>(op: A, b: &[Complex64], restart: usize, tol: f64, max_steps: usize) -> (Vec<Complex64>, usize)
where
    A: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let n = b.len();
    let bnorm = l2(b);
    let mut x = vec![ZERO; n];
    if bnorm == 0.0 {
        return (x, 0);
    }
    let mut steps = 0;
    let mut r = b.to_vec();
    loop {
        let beta = l2(&r);
        if beta / bnorm < tol || steps >= max_steps {
            return (x, steps);
        }
        let mut basis: Vec<Vec<Complex64>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut h = vec![vec![ZERO; restart]; restart + 1];
        let mut cs = vec![0.0; restart];
        let mut sn = vec![ZERO; restart];
        let mut g = vec![ZERO; restart + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut k = 0;
        while k < restart && steps < max_steps {
            let mut w = op(&basis[k]);
            for (i, vi) in basis.iter().enumerate() {
                let hij = dot(vi, &w);
                h[i][k] = hij;
                w.par_iter_mut().zip(vi).for_each(|(a, b)| *a -= hij * b);
            }
            let wn = l2(&w);
            h[k + 1][k] = Complex64::new(wn, 0.0);
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i].conj() * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let (a, bb) = (h[k][k], h[k + 1][k]);
            let rr = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if a.norm() == 0.0 {
                cs[k] = 0.0;
                sn[k] = Complex64::new(1.0, 0.0);
            } else {
                cs[k] = a.norm() / rr;
                sn[k] = a / a.norm() * bb.conj() / rr;
            }
            h[k][k] = cs[k] * a + sn[k] * bb;
            h[k + 1][k] = ZERO;
            g[k + 1] = -sn[k].conj() * g[k];
            g[k] *= cs[k];
            steps += 1;
            k += 1;
            if g[k].norm() / bnorm < tol || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|z| z / wn).collect());
        }
        let mut y = vec![ZERO; k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for j in i + 1..k {
                acc -= h[i][j] * y[j];
            }
            y[i] = acc / h[i][i];
        }
        for (yi, vi) in y.iter().zip(&basis) {
            x.par_iter_mut().zip(vi).for_each(|(a, b)| *a += yi * b);
        }
        let ax = op(&x);
        r = b.iter().zip(&ax).map(|(a, c)| a - c).collect();
    }
}

/// Strang splitting for `u_t = (iP(D) + V)u` with `steps` equal steps:
/// half potential step, exact free step, half potential step.
pub fn strang(grid: &SpectralGrid, v: &Potential, u0: &StateField, t: f64, steps: usize) -> StateField {
    let steps = steps.max(1);
    let h = t / steps as f64;
    let half = v.field().map(|z| (z * (0.5 * h)).exp());
    let full = half.zip(&half, |a, b| a * b);
    let mut u = u0.zip(&half, |a, b| a * b);
    for j in 0..steps {
        u = grid.propagate_unchecked(&u, h);
        let w = if j + 1 == steps { &half } else { &full };
        u = u.zip(w, |a, b| a * b);
    }
    u
}

/// Step-doubling tolerance for [`evolve`].
pub const DOUBLING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct Evolution {
    pub t: f64,
    pub dt: f64,
    pub steps: usize,
    /// `‖u_{dt} − u_{dt/2}‖_2 / ‖u_{dt/2}‖_2`.
    pub doubling_change: f64,
    #[serde(skip)]
    pub solution: Option<StateField>,
}

/// Evolve to time `t` with step at most `dt`, returning the half-step
/// solution once step doubling changes it by less than [`DOUBLING_TOL`].
pub fn evolve(grid: &SpectralGrid, v: &Potential, u0: &StateField, t: f64, dt: f64) -> Result<Evolution> {
    if !(dt > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("need dt > 0 and finite t (t = {t}, dt = {dt})")));
    }
    let c = grid.confinement(u0, t);
    if !c.ok {
        return Err(Error::Precondition(format!(
            "initial field not confined up to t = {t}: {}",
            c.reasons.join("; ")
        )));
    }
    let steps = ((t.abs() / dt).ceil() as usize).max(1);
    let coarse = strang(grid, v, u0, t, steps);
    let fine = strang(grid, v, u0, t, 2 * steps);
    let change = coarse.rel_l2(&fine);
    if !(change < DOUBLING_TOL) {
        return Err(Error::Numerical(format!(
            "step doubling changed the solution by {change:.3e} >= {DOUBLING_TOL:e} at dt = {:.4e}; reduce dt",
            t.abs() / steps as f64
        )));
    }
    Ok(Evolution {
        t,
        dt: t.abs() / (2 * steps) as f64,
        steps: 2 * steps,
        doubling_change: change,
        solution: Some(fine),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderReport {
    pub t: f64,
    pub dts: Vec<f64>,
    /// `‖u_dt − u_{dt/2}‖_2 / ‖u_{dt/2}‖_2`.
    pub errors: Vec<f64>,
    pub fit: DecayFit,
}

/// Fitted convergence order of [`strang`] against step-halved references.
pub fn strang_order(grid: &SpectralGrid, v: &Potential, u0: &StateField, t: f64, dts: &[f64]) -> Result<OrderReport> {
    let c = grid.confinement(u0, t);
    if !c.ok {
        return Err(Error::Precondition(format!(
            "initial field not confined up to t = {t}: {}",
            c.reasons.join("; ")
        )));
    }
    let mut used = Vec::new();
    let mut errors = Vec::new();
    for &dt in dts {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("step {dt} must be positive")));
        }
        let steps = ((t.abs() / dt).round() as usize).max(1);
        let a = strang(grid, v, u0, t, steps);
        let b = strang(grid, v, u0, t, 2 * steps);
        used.push(t.abs() / steps as f64);
        errors.push(a.rel_l2(&b));
    }
    let fit = loglog(&used, &errors, 2.0)?;
    Ok(OrderReport {
        t,
        dts: used,
        errors,
        fit,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DuhamelRow {
    pub t: f64,
    /// `‖u(t) − e^{itP}u0 − B₁(t)‖_2`.
    pub two_term: f64,
    /// `‖u(t) − e^{itP}u0 − B₁(t) − B₂(t)‖_2`.
    pub three_term: f64,
    pub two_term_over_t2: f64,
    pub two_term_over_t3: f64,
    pub three_term_over_t3: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DuhamelReport {
    pub rows: Vec<DuhamelRow>,
    /// max / min of `three_term / t³` over the rows.
    pub spread_t3: f64,
    /// max / min of `two_term / t³`; grows like `1/t` when `B₂ ≠ 0`.
    pub spread_two_term_t3: f64,
    pub spread_two_term_t2: f64,
    pub stabilized: bool,
}

/// Compare the evolution with its Duhamel expansion
/// `u = e^{itP}u0 + B₁ + B₂ + O(t³)`, where
/// `B₁(t) = ∫_0^t e^{i(t−s)P} V e^{isP} u0 ds` and
/// `B₂(t) = ∫_0^t e^{i(t−s)P} V B₁(s) ds`.
///
/// The reference solution is the Richardson combination of Strang runs with
/// 64 and 128 steps.
pub fn duhamel_check(grid: &SpectralGrid, v: &Potential, u0: &StateField, times: &[f64], nodes: usize) -> Result<DuhamelReport> {
    if times.len() < 2 {
        return Err(Error::InvalidArgument("need at least two times".into()));
    }
    let vf = v.field();
    let first = |t: f64| -> StateField {
        let (s, w) = gauss_legendre_on(nodes, 0.0, t);
        let mut acc = grid.field(|_| ZERO);
        for (s, w) in s.iter().zip(&w) {
            let inner = grid.propagate_unchecked(u0, *s).zip(vf, |a, b| a * b);
            acc = acc.add(&grid.propagate_unchecked(&inner, t - s).scale(Complex64::new(*w, 0.0)));
        }
        acc
    };
    let mut rows = Vec::new();
    for &t in times {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument(format!("times must be positive, got {t}")));
        }
        let c = grid.confinement(u0, t);
        if !c.ok {
            return Err(Error::Precondition(format!("initial field not confined up to t = {t}: {}", c.reasons.join("; "))));
        }
        let coarse = strang(grid, v, u0, t, 64);
        let fine = strang(grid, v, u0, t, 128);
        let u = fine.scale(Complex64::new(4.0 / 3.0, 0.0)).sub(&coarse.scale(Complex64::new(1.0 / 3.0, 0.0)));
        let free = grid.propagate_unchecked(u0, t);
        let b1 = first(t);
        let (s, w) = gauss_legendre_on(nodes, 0.0, t);
        let mut b2 = grid.field(|_| ZERO);
        for (s, w) in s.iter().zip(&w) {
            let inner = first(*s).zip(vf, |a, b| a * b);
            b2 = b2.add(&grid.propagate_unchecked(&inner, t - s).scale(Complex64::new(*w, 0.0)));
        }
        let r2 = u.sub(&free).sub(&b1);
        let r3 = r2.sub(&b2);
        let (two, three) = (r2.norm(2.0), r3.norm(2.0));
        rows.push(DuhamelRow {
            t,
            two_term: two,
            three_term: three,
            two_term_over_t2: two / (t * t),
            two_term_over_t3: two / t.powi(3),
            three_term_over_t3: three / t.powi(3),
        });
    }
    let spread = |f: &dyn Fn(&DuhamelRow) -> f64| {
        let v: Vec<f64> = rows.iter().map(f).collect();
        v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let spread_t3 = spread(&|r| r.three_term_over_t3);
    Ok(DuhamelReport {
        spread_two_term_t3: spread(&|r| r.two_term_over_t3),
        spread_two_term_t2: spread(&|r| r.two_term_over_t2),
        stabilized: spread_t3 <= 2.0,
        spread_t3,
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GronwallReport {
    pub t: f64,
    /// `‖u(t)‖_2 / ‖u0‖_2`.
    pub norm_ratio: f64,
    pub sup_re_v: f64,
    /// `e^{t sup Re V}`.
    pub bound: f64,
    /// For `V = iW`: `e^{t sup W}`, a weaker envelope than `bound`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub imaginary_envelope: Option<f64>,
    pub pass: bool,
}

/// Check `‖u(t)‖_2 ≤ e^{t sup Re V} ‖u0‖_2`, which holds exactly for each
/// split step since the free step is unitary.
pub fn gronwall_check(grid: &SpectralGrid, v: &Potential, u0: &StateField, t: f64, dt: f64) -> Result<GronwallReport> {
    let ev = evolve(grid, v, u0, t, dt)?;
    let u = ev.solution.expect("evolve returns the solution");
    let ratio = u.norm(2.0) / u0.norm(2.0);
    let s = v.summary();
    let bound = (t.abs() * s.sup_re).exp();
    let imaginary = v.field().values().iter().all(|z| z.re == 0.0);
    Ok(GronwallReport {
        t,
        norm_ratio: ratio,
        sup_re_v: s.sup_re,
        bound,
        imaginary_envelope: imaginary.then(|| (t.abs() * s.sup_im).exp()),
        pass: ratio <= bound * (1.0 + 1e-10),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthRow {
    pub probe: String,
    pub t: f64,
    pub norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthCheck {
    pub p: f64,
    pub beta: f64,
    pub beta_threshold: f64,
    /// Description of the normalizing norm, which is a proxy.
    pub proxy: String,
    pub times: Vec<f64>,
    /// Largest `‖u(t)‖_p / proxy(u0)` over the probes.
    pub envelope: Vec<f64>,
    pub omega_fit: f64,
    pub intercept: f64,
    /// Largest increase between consecutive slopes of `log envelope`;
    /// nonpositive for a concave curve.
    pub slope_increase: f64,
    pub concave: bool,
    pub finite: bool,
    pub pass: bool,
    pub rows: Vec<GrowthRow>,
    pub warnings: Vec<String>,
}

/// Slack on consecutive log-slopes before growth counts as convex.
pub const CONCAVITY_SLACK: f64 = 0.02;

/// Exponential-envelope check for `u_t = (iP(D) + V)u` in `L^p`.
///
/// Each probe is normalized by the proxy `‖F⁻¹((1 + |P|)^{⌈β⌉} û0)‖_p` in
/// place of the fractional power of the perturbed generator.
pub fn growth_check(
    grid: &SpectralGrid,
    v: &Potential,
    gate: &Admissibility,
    beta: f64,
    times: &[f64],
    probes: &[Probe],
    dt: f64,
) -> Result<GrowthCheck> {
    if !gate.admissible {
        return Err(Error::Inadmissible(format!(
            "potential exponents rejected for p = {}: {}",
            gate.p,
            gate.reasons.join("; ")
        )));
    }
    if !(beta > gate.beta_threshold) {
        return Err(Error::Precondition(format!(
            "beta = {beta} must exceed n_p + 1 = {}",
            gate.beta_threshold
        )));
    }
    if times.len() < 3 || times.windows(2).any(|w| !(w[1] > w[0])) || !(times[0] >= 0.0) {
        return Err(Error::InvalidArgument("need at least three increasing nonnegative times".into()));
    }
    let p = gate.p;
    let order = beta.ceil() as i32;
    let tmax = *times.last().expect("nonempty");
    let mut warnings = Vec::new();
    let live: Vec<&Probe> = probes
        .iter()
        .filter(|pr| {
            let c = grid.confinement(&pr.field, tmax);
            if !c.ok {
                warnings.push(format!("{} skipped: {}", pr.label, c.reasons.join("; ")));
            }
            c.ok
        })
        .collect();
    if live.is_empty() {
        return Err(Error::Precondition(format!("no probe is confined up to t = {tmax}")));
    }
    let mut rows = Vec::new();
    let mut envelope = vec![0.0f64; times.len()];
    for pr in live {
        let proxy = grid.apply_multiplier(&pr.field, |_, q| Complex64::new((1.0 + q.abs()).powi(order), 0.0)).norm(p);
        let mut u = pr.field.clone();
        let mut now = 0.0;
        for (i, &t) in times.iter().enumerate() {
            if t > now {
                let ev = evolve(grid, v, &u, t - now, dt)?;
                u = ev.solution.expect("evolve returns the solution");
                now = t;
            }
            let norm = u.norm(p);
            let ratio = norm / proxy;
            envelope[i] = envelope[i].max(ratio);
            rows.push(GrowthRow {
                probe: pr.label.clone(),
                t,
                norm,
                ratio,
            });
        }
    }
    let finite = envelope.iter().all(|e| e.is_finite() && *e > 0.0);
    let logs: Vec<f64> = envelope.iter().map(|e| e.ln()).collect();
    let (intercept, omega_fit) = linear(times, &logs);
    let slopes: Vec<f64> = times.windows(2).zip(logs.windows(2)).map(|(t, l)| (l[1] - l[0]) / (t[1] - t[0])).collect();
    let slope_increase = slopes.windows(2).map(|s| s[1] - s[0]).fold(f64::NEG_INFINITY, f64::max);
    let concave = slope_increase <= CONCAVITY_SLACK;
    Ok(GrowthCheck {
        p,
        beta,
        beta_threshold: gate.beta_threshold,
        proxy: format!("Sobolev proxy ||F^-1 (1 + |P|)^{order} F u0||_{p}, standing in for the fractional-power norm"),
        times: times.to_vec(),
        envelope,
        omega_fit,
        intercept,
        slope_increase,
        concave,
        finite,
        pass: finite && concave,
        rows,
        warnings,
    })
}
