//! Geometry of the level hypersurface `Sigma = {P = 1}`: finite type order,
//! convexity, Gauss–Kronecker curvature and support points.

use crate::error::{Error, Result};
use crate::optimize::{golden_section, nelder_mead};
use crate::sphere;
use crate::symbol::{factorial, PolySymbol};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

/// Curvature magnitude below which a sample is reported as a zero.
pub const CURVATURE_ZERO: f64 = 1e-8;
/// Tolerance on the support inequality.
pub const CONVEX_TOL: f64 = 1e-9;

/// A point of `Sigma` with its outward unit normal.
#[derive(Debug, Clone, Serialize)]
pub struct SurfacePoint {
    pub xi: Vec<f64>,
    pub normal: Vec<f64>,
    /// `|grad phi(xi)|` for `phi = P^{1/m}`; equals `|grad P(xi)| / m` on `Sigma`.
    pub grad_phi_norm: f64,
}

impl SurfacePoint {
    /// Project the ray through `omega` onto `Sigma`.
    pub fn on_ray(p: &PolySymbol, omega: &[f64]) -> Self {
        Self::at(p, ray_point(p, omega))
    }

    /// Build from a point assumed to satisfy `P(xi) = 1`.
    pub fn at(p: &PolySymbol, xi: Vec<f64>) -> Self {
        let m = p.degree() as f64;
        let g = p.gradient_unchecked(&xi);
        let gn = sphere::norm(&g);
        let pv = p.value(&xi);
        let normal = g.iter().map(|v| v / gn).collect();
        // grad phi = (1/m) P^{1/m - 1} grad P
        let grad_phi_norm = pv.powf(1.0 / m - 1.0) * gn / m;
        Self {
            xi,
            normal,
            grad_phi_norm,
        }
    }
}

/// Tunables for the sampling-based certificates.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GeometryOptions {
    pub surface_density: usize,
    pub direction_density: usize,
    pub delta_min: f64,
    pub refine_starts: usize,
}

impl GeometryOptions {
    pub fn for_dim(n: usize) -> Self {
        let (s, d) = match n {
            2 => (2048, 2048),
            3 => (1024, 512),
            _ => (512, 256),
        };
        Self {
            surface_density: s,
            direction_density: d,
            delta_min: 1e-6,
            refine_starts: 20,
        }
    }
}

/// Sample `Sigma` along the rays of a sphere sample.
pub fn sample_surface(p: &PolySymbol, density: usize) -> Result<Vec<SurfacePoint>> {
    p.check_elliptic(density.max(sphere::MIN_DENSITY))?;
    Ok(sphere::sample(p.dim(), density)
        .iter()
        .map(|w| SurfacePoint::on_ray(p, w))
        .collect())
}

fn ray_point(p: &PolySymbol, omega: &[f64]) -> Vec<f64> {
    let s = p.value(omega).powf(-1.0 / p.degree() as f64);
    omega.iter().map(|w| w * s).collect()
}

/// Outcome of [`detect_type`].
#[derive(Debug, Clone, Serialize)]
pub struct TypeCertificate {
    pub k: u32,
    pub delta: f64,
    /// Refined minimum of the order-`j` sum for each tested `j = 2..=k`.
    pub minima: Vec<f64>,
    pub witness_xi: Vec<f64>,
    pub witness_eta: Vec<f64>,
    pub pairs: usize,
}

/// Smallest values kept per order during the grid scan.
#[derive(Clone)]
struct Smallest {
    cap: usize,
    items: Vec<(f64, usize, usize)>,
}

impl Smallest {
    fn new(cap: usize) -> Self {
        Self {
            cap,
            items: Vec::with_capacity(cap + 1),
        }
    }

    fn push(&mut self, v: f64, i: usize, j: usize) {
        if self.items.len() == self.cap && v >= self.items[self.cap - 1].0 {
            return;
        }
        let pos = self.items.partition_point(|e| e.0 <= v);
        self.items.insert(pos, (v, i, j));
        self.items.truncate(self.cap);
    }

    fn merge(mut self, other: Self) -> Self {
        for (v, i, j) in other.items {
            self.push(v, i, j);
        }
        self
    }
}

/// `sum_{j=1}^{k} |nabla_eta^j (P - 1)(xi)|` for every `k = 1..=m`.
fn type_sums(p: &PolySymbol, xi: &[f64], eta: &[f64], coef: &mut [f64], scratch: &mut [f64], out: &mut [f64]) {
    p.poly().line_taylor_into(xi, eta, coef, scratch);
    let mut acc = 0.0;
    for j in 1..coef.len() {
        acc += (factorial(j as u32) * coef[j]).abs();
        out[j] = acc;
    }
}

fn type_sum_order(p: &PolySymbol, xi: &[f64], eta: &[f64], k: usize) -> f64 {
    let c = p.poly().line_taylor(xi, eta);
    (1..=k).map(|j| (factorial(j as u32) * c[j]).abs()).sum()
}

/// Certify the finite type of `Sigma` at sampling resolution.
///
/// The defining function is `P - 1`. For each order `k = 2..=m` the sum of
/// the first `k` directional derivatives is minimized over the product grid
/// of surface points and directions, then refined by Nelder–Mead in angle
/// coordinates from the smallest grid values. The first order whose refined
/// minimum exceeds `delta_min` is reported.
pub fn detect_type(p: &PolySymbol, opts: &GeometryOptions) -> Result<TypeCertificate> {
    p.check_elliptic(opts.surface_density.max(sphere::MIN_DENSITY))?;
    let n = p.dim();
    let m = p.degree() as usize;
    let omegas = sphere::sample(n, opts.surface_density);
    let surf: Vec<Vec<f64>> = omegas.iter().map(|w| ray_point(p, w)).collect();
    let dirs = sphere::sample(n, opts.direction_density);
    let cap = opts.refine_starts.max(1);

    let best: Vec<Smallest> = surf
        .par_iter()
        .enumerate()
        .fold(
            || {
                (
                    vec![Smallest::new(cap); m + 1],
                    vec![0.0; m + 1],
                    vec![0.0; m + 2],
                    vec![0.0; m + 1],
                )
            },
            |(mut best, mut coef, mut scratch, mut sums), (i, xi)| {
                for (j, eta) in dirs.iter().enumerate() {
                    type_sums(p, xi, eta, &mut coef, &mut scratch, &mut sums);
                    for k in 2..=m {
                        best[k].push(sums[k], i, j);
                    }
                }
                (best, coef, scratch, sums)
            },
        )
        .map(|(best, ..)| best)
        .reduce(
            || vec![Smallest::new(cap); m + 1],
            |a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
        );

    let step = 2.0 * std::f64::consts::PI / (opts.surface_density as f64).powf(1.0 / (n - 1) as f64);
    let mut minima = Vec::new();
    let mut last_witness = (Vec::new(), Vec::new(), f64::INFINITY);
    for (k, cands) in best.iter().enumerate().skip(2) {
        let mut lo = (f64::INFINITY, Vec::new(), Vec::new());
        for &(v, i, j) in &cands.items {
            if v < lo.0 {
                lo = (v, surf[i].clone(), dirs[j].clone());
            }
            let mut x0 = sphere::to_angles(&omegas[i]);
            x0.extend(sphere::to_angles(&dirs[j]));
            let objective = |a: &[f64]| {
                let w = sphere::from_angles(&a[..n - 1]);
                let eta = sphere::from_angles(&a[n - 1..]);
                type_sum_order(p, &ray_point(p, &w), &eta, k)
            };
            let (xa, fv) = nelder_mead(objective, &x0, 0.5 * step, 400, 1e-14);
            if fv < lo.0 {
                let w = sphere::from_angles(&xa[..n - 1]);
                lo = (fv, ray_point(p, &w), sphere::from_angles(&xa[n - 1..]));
            }
        }
        minima.push(lo.0);
        if lo.0 > opts.delta_min {
            return Ok(TypeCertificate {
                k: k as u32,
                delta: lo.0,
                minima,
                witness_xi: lo.1,
                witness_eta: lo.2,
                pairs: surf.len() * dirs.len(),
            });
        }
        last_witness = (lo.1, lo.2, lo.0);
    }
    Err(Error::TypeDetection {
        value: last_witness.2,
        delta_min: opts.delta_min,
        xi: last_witness.0,
        eta: last_witness.1,
    })
}

/// Outcome of [`check_convex`].
#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub convex: bool,
    /// Minimum over sampled pairs of `<xi - zeta, nu(xi)>`.
    pub margin: f64,
    /// Pair `(xi, zeta)` with the sharpest local violation, when nonconvex.
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
    /// Pair attaining `margin`, when nonconvex.
    pub margin_pair: Option<(Vec<f64>, Vec<f64>)>,
    pub density: usize,
}

/// Support-inequality convexity scan over all sampled pairs of `Sigma`.
///
/// `margin` is the signed distance of `zeta` below the tangent hyperplane at
/// `xi` (outward normal), minimized over pairs. Among violating pairs the
/// witness minimizes `margin / |xi - zeta|^2`, which localizes the violation
/// at the most negatively curved point.
pub fn check_convex(p: &PolySymbol, density: usize) -> Result<ConvexityReport> {
    let pts = sample_surface(p, density)?;
    let support: Vec<f64> = pts.iter().map(|s| sphere::dot(&s.xi, &s.normal)).collect();
    // (raw margin, i, j) and (normalized margin, i, j) per row
    let rows: Vec<((f64, usize, usize), (f64, usize, usize))> = pts
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut raw = (f64::INFINITY, i, i);
            let mut local = (f64::INFINITY, i, i);
            for (j, z) in pts.iter().enumerate() {
                let g = support[i] - sphere::dot(&z.xi, &s.normal);
                if g < raw.0 {
                    raw = (g, i, j);
                }
                if j != i && g < -CONVEX_TOL {
                    let d2: f64 = s.xi.iter().zip(&z.xi).map(|(a, b)| (a - b).powi(2)).sum();
                    let h = g / d2;
                    if h < local.0 {
                        local = (h, i, j);
                    }
                }
            }
            (raw, local)
        })
        .collect();
    let mut raw = (f64::INFINITY, 0, 0);
    let mut local_min = f64::INFINITY;
    for (r, l) in &rows {
        if r.0 < raw.0 {
            raw = *r;
        }
        local_min = local_min.min(l.0);
    }
    let convex = raw.0 >= -CONVEX_TOL;
    let (witness, margin_pair) = if convex {
        (None, None)
    } else {
        // first sample (in sampling order) attaining the local minimum, so
        // that symmetric copies resolve deterministically
        let tol = 1e-9 * local_min.abs();
        let l = rows
            .iter()
            .map(|r| r.1)
            .find(|l| l.0 <= local_min + tol)
            .expect("violation present");
        (
            Some((pts[l.1].xi.clone(), pts[l.2].xi.clone())),
            Some((pts[raw.1].xi.clone(), pts[raw.2].xi.clone())),
        )
    };
    Ok(ConvexityReport {
        convex,
        margin: raw.0,
        witness,
        margin_pair,
        density: pts.len(),
    })
}

/// Gauss–Kronecker curvature of `Sigma` at `xi`.
///
/// Determinant of the Hessian of `P` restricted to the tangent space and
/// divided by `|grad P|`; positive for strictly convex `Sigma`.
pub fn gaussian_curvature(p: &PolySymbol, xi: &[f64]) -> Result<f64> {
    let n = p.dim();
    let g = p.gradient(xi)?;
    let h = p.hessian(xi)?;
    let gn = sphere::norm(&g);
    if gn == 0.0 {
        return Err(Error::Numerical("gradient vanishes; not a regular point".into()));
    }
    let basis = tangent_basis(&g);
    let hm = DMatrix::from_fn(n, n, |i, j| h[i][j]);
    let b = DMatrix::from_fn(n, n - 1, |i, j| basis[j][i]);
    let restricted = b.transpose() * hm * &b / gn;
    Ok(restricted.determinant())
}

/// Orthonormal basis of the complement of `g`.
fn tangent_basis(g: &[f64]) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut basis: Vec<Vec<f64>> = vec![g.iter().map(|v| v / sphere::norm(g)).collect()];
    // Gram-Schmidt against coordinate axes, most orthogonal first
    let mut axes: Vec<usize> = (0..n).collect();
    axes.sort_by(|&a, &b| g[a].abs().total_cmp(&g[b].abs()));
    for a in axes {
        let mut v = vec![0.0; n];
        v[a] = 1.0;
        for _ in 0..2 {
            for u in &basis {
                let d = sphere::dot(&v, u);
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= d * y);
            }
        }
        if sphere::normalize(&mut v) > 1e-8 {
            basis.push(v);
        }
        if basis.len() == n {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Sample points of `Sigma` with `|K| < CURVATURE_ZERO`.
pub fn curvature_zeros(p: &PolySymbol, density: usize) -> Result<Vec<Vec<f64>>> {
    let pts = sample_surface(p, density)?;
    let mut out = Vec::new();
    for s in pts {
        if gaussian_curvature(p, &s.xi)?.abs() < CURVATURE_ZERO {
            out.push(s.xi);
        }
    }
    Ok(out)
}

/// Support points `xi_+` (maximizing `<eta, xi>`) and `xi_-` (minimizing).
#[derive(Debug, Clone, Serialize)]
pub struct SupportPoints {
    pub plus: SurfacePoint,
    pub minus: SurfacePoint,
}

/// Inverse Gauss map: support points of `Sigma` in direction `eta`.
///
/// Refuses unless `convexity` certifies `Sigma` convex.
pub fn gauss_map_inverse(p: &PolySymbol, convexity: &ConvexityReport, eta: &[f64]) -> Result<SupportPoints> {
    if !convexity.convex {
        return Err(Error::Precondition(format!(
            "inverse Gauss map needs a convex level surface; support margin is {:.3e}",
            convexity.margin
        )));
    }
    if eta.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: eta.len(),
        });
    }
    let mut e = eta.to_vec();
    if sphere::normalize(&mut e) == 0.0 {
        return Err(Error::InvalidArgument("direction must be nonzero".into()));
    }
    let minus_e: Vec<f64> = e.iter().map(|v| -v).collect();
    Ok(SupportPoints {
        plus: support_point(p, &e),
        minus: support_point(p, &minus_e),
    })
}

fn support_point(p: &PolySymbol, eta: &[f64]) -> SurfacePoint {
    let n = p.dim();
    let height = |w: &[f64]| sphere::dot(eta, &ray_point(p, w));
    // coarse start from a sphere sample
    let start = sphere::sample(n, 1024)
        .into_iter()
        .max_by(|a, b| height(a).total_cmp(&height(b)))
        .expect("sample non-empty");
    let mut w = if n == 2 {
        let th0 = start[1].atan2(start[0]);
        let h = 2.0 * std::f64::consts::PI / 1024.0;
        let (th, _) = golden_section(|t| -height(&[t.cos(), t.sin()]), th0 - 2.0 * h, th0 + 2.0 * h, 1e-13);
        vec![th.cos(), th.sin()]
    } else {
        let a0 = sphere::to_angles(&start);
        let (a, _) = nelder_mead(|a| -height(&sphere::from_angles(a)), &a0, 0.05, 2000, 1e-16);
        sphere::from_angles(&a)
    };
    // Newton polish on grad P(xi) = mu eta, P(xi) = 1
    let mut xi = ray_point(p, &w);
    let residual = |xi: &[f64]| {
        let g = p.gradient_unchecked(xi);
        let gn = sphere::norm(&g);
        g.iter().zip(eta).map(|(a, b)| (a / gn - b).powi(2)).sum::<f64>().sqrt()
    };
    let mut res = residual(&xi);
    for _ in 0..30 {
        if res < 1e-14 {
            break;
        }
        let g = p.gradient_unchecked(&xi);
        let h = p.hessian(&xi).expect("dimension checked");
        let mu = sphere::dot(&g, eta);
        let mut a = DMatrix::zeros(n + 1, n + 1);
        let mut rhs = nalgebra::DVector::zeros(n + 1);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = h[i][j];
            }
            a[(i, n)] = -eta[i];
            a[(n, i)] = g[i];
            rhs[i] = -(g[i] - mu * eta[i]);
        }
        rhs[n] = -(p.value(&xi) - 1.0);
        let Some(step) = a.lu().solve(&rhs) else { break };
        let trial: Vec<f64> = (0..n).map(|i| xi[i] + step[i]).collect();
        // keep the iterate on Sigma
        let trial = ray_point(p, &trial);
        let tr = residual(&trial);
        if !(tr < res) {
            break;
        }
        xi = trial;
        res = tr;
    }
    w = xi.clone();
    sphere::normalize(&mut w);
    SurfacePoint::on_ray(p, &w)
}

/// Summary of the geometric analysis of `Sigma`.
#[derive(Debug, Clone, Serialize)]
pub struct SurfaceReport {
    pub k: u32,
    pub delta: f64,
    pub convex: bool,
    pub margin: f64,
    pub curvature_zeros: Vec<Vec<f64>>,
    pub density: usize,
    pub elliptic_min: f64,
    pub classical_regime: bool,
    pub negated: bool,
    pub type_minima: Vec<f64>,
    pub convexity_witness: Option<(Vec<f64>, Vec<f64>)>,
}

/// Run ellipticity, type, convexity and curvature checks.
pub fn analyze(p: &PolySymbol, opts: &GeometryOptions) -> Result<SurfaceReport> {
    let ell = p.check_elliptic(opts.surface_density.max(4096))?;
    let ty = detect_type(p, opts)?;
    let cv = check_convex(p, opts.surface_density)?;
    let zeros = curvature_zeros(p, opts.surface_density)?;
    Ok(SurfaceReport {
        k: ty.k,
        delta: ty.delta,
        convex: cv.convex,
        margin: cv.margin,
        curvature_zeros: zeros,
        density: opts.surface_density,
        elliptic_min: ell.positive_min,
        classical_regime: p.classical_regime(),
        negated: p.was_negated(),
        type_minima: ty.minima,
        convexity_witness: cv.witness,
    })
}

/// Quadrature for `int_Sigma g(xi) dsigma(xi) / |grad phi(xi)|`.
///
/// Uses the pushforward identity `dsigma / |grad phi| = rho(omega)^n d omega`
/// for the radial parametrization `xi = rho(omega) omega`. The rule is the
/// trapezoid rule in angle for `n = 2` and Gauss–Legendre in `cos theta`
/// times trapezoid in azimuth for `n = 3`. Returns `(xi, weight)` pairs.
pub fn surface_rule(p: &PolySymbol, count: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    let n = p.dim();
    let mut out = Vec::new();
    match n {
        2 => {
            let h = 2.0 * std::f64::consts::PI / count as f64;
            for i in 0..count {
                let t = h * i as f64;
                let w = [t.cos(), t.sin()];
                let rho = p.value(&w).powf(-1.0 / p.degree() as f64);
                out.push((vec![rho * w[0], rho * w[1]], h * rho * rho));
            }
        }
        3 => {
            let nz = count.max(2);
            let na = 2 * nz;
            let (zs, wz) = crate::quadrature::gauss_legendre(nz);
            let h = 2.0 * std::f64::consts::PI / na as f64;
            for (z, wzi) in zs.iter().zip(&wz) {
                let s = (1.0 - z * z).sqrt();
                for j in 0..na {
                    let a = h * j as f64;
                    let w = [s * a.cos(), s * a.sin(), *z];
                    let rho = p.value(&w).powf(-1.0 / p.degree() as f64);
                    out.push((w.iter().map(|v| v * rho).collect(), wzi * h * rho.powi(3)));
                }
            }
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "surface quadrature implemented for n = 2, 3 only (n = {n})"
            )))
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quartic() -> PolySymbol {
        PolySymbol::sum_of_powers(2, 4).unwrap()
    }
    fn sextic() -> PolySymbol {
        PolySymbol::new(2, 6, vec![(vec![6, 0], 1.0), (vec![2, 4], 5.0), (vec![0, 6], 1.0)]).unwrap()
    }
    fn circle() -> PolySymbol {
        PolySymbol::radial(2, 4).unwrap()
    }
    fn convex_mixed() -> PolySymbol {
        PolySymbol::new(2, 4, vec![(vec![4, 0], 1.0), (vec![2, 2], 6.0), (vec![0, 4], 1.0)]).unwrap()
    }
    fn nonconvex() -> PolySymbol {
        PolySymbol::new(2, 4, vec![(vec![4, 0], 1.0), (vec![2, 2], -1.0), (vec![0, 4], 1.0)]).unwrap()
    }
    fn fast() -> GeometryOptions {
        GeometryOptions {
            surface_density: 256,
            direction_density: 256,
            ..GeometryOptions::for_dim(2)
        }
    }

    #[test]
    fn ray_projection_lands_on_sigma() {
        let p = quartic();
        let s = 0.5f64.sqrt();
        let pt = SurfacePoint::on_ray(&p, &[s, s]);
        let expect = 2f64.powf(-0.25);
        assert!((pt.xi[0] - expect).abs() < 1e-12 && (pt.xi[1] - expect).abs() < 1e-12);
        assert!((p.value(&pt.xi) - 1.0).abs() < 1e-12);
        let c = circle();
        let q = SurfacePoint::on_ray(&c, &[0.6, 0.8]);
        assert!((q.xi[0] - 0.6).abs() < 1e-15 && (q.xi[1] - 0.8).abs() < 1e-15);
        let single = PolySymbol::new(2, 4, vec![(vec![4, 0], 3.0), (vec![0, 4], 1.0)]).unwrap();
        let a = SurfacePoint::on_ray(&single, &[1.0, 0.0]);
        assert!((a.xi[0] - 3f64.powf(-0.25)).abs() < 1e-15);
    }

    #[test]
    fn surface_points_invariants() {
        for p in [quartic(), sextic(), convex_mixed()] {
            for s in sample_surface(&p, 128).unwrap() {
                assert!((p.value(&s.xi) - 1.0).abs() <= 1e-10);
                assert!((sphere::norm(&s.normal) - 1.0).abs() < 1e-14);
                let g = p.gradient_unchecked(&s.xi);
                assert!((s.grad_phi_norm - sphere::norm(&g) / p.degree() as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn type_orders() {
        assert_eq!(detect_type(&quartic(), &fast()).unwrap().k, 4);
        assert_eq!(detect_type(&sextic(), &fast()).unwrap().k, 4);
        let c = detect_type(&circle(), &fast()).unwrap();
        assert_eq!(c.k, 2);
        // brute-force oracle: for |xi|^4 the order-2 sum is 4|a| + 8a^2 + 4 >= 4
        assert!((c.delta - 4.0).abs() < 1e-6, "{}", c.delta);
    }

    #[test]
    fn top_order_delta_bound() {
        // at k = m the sum is at least m! min_sphere P
        let p = quartic();
        let cert = detect_type(&p, &fast()).unwrap();
        let minp = p.check_elliptic(4096).unwrap().positive_min;
        assert!(cert.delta >= 24.0 * minp - 1e-6);
    }

    #[test]
    fn type_sums_monotone_in_order() {
        let p = sextic();
        let mut c = vec![0.0; 7];
        let mut s = vec![0.0; 8];
        let mut out = vec![0.0; 7];
        for xi in sample_surface(&p, 64).unwrap() {
            for eta in sphere::sample(2, 64) {
                type_sums(&p, &xi.xi, &eta, &mut c, &mut s, &mut out);
                assert!(out.windows(2).skip(1).all(|w| w[1] >= w[0]));
            }
        }
    }

    #[test]
    fn convexity_verdicts() {
        for p in [quartic(), sextic(), circle(), convex_mixed()] {
            let r = check_convex(&p, 512).unwrap();
            assert!(r.convex, "margin {}", r.margin);
            assert!(r.margin <= 0.0 && r.margin >= -CONVEX_TOL);
        }
        let r = check_convex(&nonconvex(), 512).unwrap();
        assert!(!r.convex);
        let (xi, _) = r.witness.unwrap();
        assert!((xi[0] - 1.0).abs() < 0.02 && xi[1].abs() < 0.02, "{xi:?}");
    }

    #[test]
    fn convexity_invariant_under_scaling() {
        for p in [quartic(), nonconvex(), convex_mixed()] {
            let a = check_convex(&p, 256).unwrap();
            let b = check_convex(&p.scaled(16.0).unwrap(), 256).unwrap();
            assert_eq!(a.convex, b.convex);
        }
    }

    #[test]
    fn curvature_values() {
        let c = circle();
        for s in sample_surface(&c, 64).unwrap() {
            assert!((gaussian_curvature(&c, &s.xi).unwrap() - 1.0).abs() < 1e-8);
        }
        assert!(gaussian_curvature(&quartic(), &[1.0, 0.0]).unwrap().abs() < 1e-14);
        let d = SurfacePoint::on_ray(&convex_mixed(), &[0.5f64.sqrt(), 0.5f64.sqrt()]);
        assert!(gaussian_curvature(&convex_mixed(), &d.xi).unwrap().abs() < 1e-12);
        // radial symbols in 3D: unit sphere has K = 1
        let s3 = PolySymbol::radial(3, 4).unwrap();
        for s in sample_surface(&s3, 64).unwrap() {
            assert!((gaussian_curvature(&s3, &s.xi).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn curvature_matches_level_curve_formula() {
        // signed curvature of a level curve: (f2^2 f11 - 2 f1 f2 f12 + f1^2 f22) / |grad f|^3
        let p = nonconvex();
        for s in sample_surface(&p, 97).unwrap() {
            let g = p.gradient_unchecked(&s.xi);
            let h = p.hessian(&s.xi).unwrap();
            let num = g[1] * g[1] * h[0][0] - 2.0 * g[0] * g[1] * h[0][1] + g[0] * g[0] * h[1][1];
            let k = num / sphere::norm(&g).powi(3);
            assert!((gaussian_curvature(&p, &s.xi).unwrap() - k).abs() < 1e-10);
        }
    }

    #[test]
    fn curvature_zero_sets() {
        let z = curvature_zeros(&quartic(), 256).unwrap();
        assert_eq!(z.len(), 4);
        let z = curvature_zeros(&convex_mixed(), 256).unwrap();
        assert_eq!(z.len(), 4);
        assert!(curvature_zeros(&circle(), 256).unwrap().is_empty());
    }

    #[test]
    fn support_points() {
        let c = circle();
        let cv = check_convex(&c, 256).unwrap();
        let eta = [0.28, -0.96];
        let sp = gauss_map_inverse(&c, &cv, &eta).unwrap();
        assert!((sp.plus.xi[0] - 0.28).abs() < 1e-10 && (sp.plus.xi[1] + 0.96).abs() < 1e-10);
        assert!((sp.minus.xi[0] + 0.28).abs() < 1e-10);
        let q = quartic();
        let cv = check_convex(&q, 256).unwrap();
        let sp = gauss_map_inverse(&q, &cv, &[1.0, 0.0]).unwrap();
        assert!((sp.plus.xi[0] - 1.0).abs() < 1e-6 && sp.plus.xi[1].abs() < 1e-3);
    }

    #[test]
    fn gauss_map_round_trip() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for p in [quartic(), sextic(), convex_mixed()] {
            let cv = check_convex(&p, 256).unwrap();
            for _ in 0..50 {
                let eta = sphere::random_direction(2, &mut rng);
                let sp = gauss_map_inverse(&p, &cv, &eta).unwrap();
                let ang = sphere::dot(&sp.plus.normal, &eta).clamp(-1.0, 1.0).acos();
                assert!(ang < 1e-6, "angle {ang}");
                let id = sphere::dot(&eta, &sp.plus.xi) * sp.plus.grad_phi_norm;
                assert!((id - 1.0).abs() < 1e-8, "{id}");
                let id = sphere::dot(&eta, &sp.minus.xi) * sp.minus.grad_phi_norm;
                assert!((id + 1.0).abs() < 1e-8, "{id}");
            }
        }
    }

    #[test]
    fn inverse_gauss_map_refuses_nonconvex() {
        let p = nonconvex();
        let cv = check_convex(&p, 128).unwrap();
        assert!(matches!(gauss_map_inverse(&p, &cv, &[1.0, 0.0]), Err(Error::Precondition(_))));
    }

    #[test]
    fn surface_rule_measures() {
        // for |xi|^m, dsigma/|grad phi| is arc length, total 2 pi (n = 2) or 4 pi (n = 3)
        let c = circle();
        let tot: f64 = surface_rule(&c, 64).unwrap().iter().map(|x| x.1).sum();
        assert!((tot - 2.0 * std::f64::consts::PI).abs() < 1e-13);
        let s = PolySymbol::radial(3, 4).unwrap();
        let tot: f64 = surface_rule(&s, 16).unwrap().iter().map(|x| x.1).sum();
        assert!((tot - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        // n * |{P <= 1}| = int_Sigma <xi, nu> dsigma = int dsigma / |grad phi|
        // for xi1^4 + xi2^4 the area of the unit ball is Gamma(1/4)^2 / (2 Gamma(1/2))
        let q = quartic();
        let tot: f64 = surface_rule(&q, 512).unwrap().iter().map(|x| x.1).sum();
        let g = statrs::function::gamma::gamma;
        let area = g(0.25).powi(2) / (2.0 * g(0.5));
        assert!((tot - 2.0 * area).abs() < 1e-10, "{tot} vs {}", 2.0 * area);
    }

    proptest! {
        #[test]
        fn ray_points_have_unit_level(a in 0.0f64..6.283) {
            let w = [a.cos(), a.sin()];
            for p in [quartic(), sextic(), nonconvex()] {
                let x = ray_point(&p, &w);
                prop_assert!((p.value(&x) - 1.0).abs() < 1e-12);
            }
        }
    }
}
