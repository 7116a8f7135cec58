//! Homogeneous polynomial symbols `P(xi)` and their exact differential calculus.
//!
//! Coefficients are kept exactly as given and differentiation acts on the
//! coefficient table, so every derivative is exact up to evaluation round-off.

use crate::error::{Error, Result};
use crate::sphere;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::path::Path;

pub type MultiIndex = Vec<u32>;

/// Graded lexicographic order, largest first (`x1^m` precedes `x1^{m-1} x2`).
fn grlex_desc(a: &MultiIndex, b: &MultiIndex) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    db.cmp(&da).then_with(|| b.cmp(a))
}

/// A homogeneous polynomial in `n` real variables with canonical term list.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousPoly {
    n: usize,
    degree: u32,
    terms: Vec<(MultiIndex, f64)>,
}

impl HomogeneousPoly {
    pub fn new(n: usize, degree: u32, terms: Vec<(MultiIndex, f64)>) -> Result<Self> {
        let mut merged: Vec<(MultiIndex, f64)> = Vec::with_capacity(terms.len());
        for (alpha, c) in terms {
            if alpha.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: alpha.len(),
                });
            }
            let d: u32 = alpha.iter().sum();
            if d != degree {
                return Err(Error::InvalidSymbol(format!(
                    "multi-index {alpha:?} has degree {d}, expected {degree}"
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidSymbol(format!("non-finite coefficient {c}")));
            }
            match merged.iter_mut().find(|(a, _)| *a == alpha) {
                Some((_, acc)) => *acc += c,
                None => merged.push((alpha, c)),
            }
        }
        merged.retain(|(_, c)| *c != 0.0);
        merged.sort_by(|a, b| grlex_desc(&a.0, &b.0));
        Ok(Self {
            n,
            degree,
            terms: merged,
        })
    }

    pub fn zero(n: usize, degree: u32) -> Self {
        Self {
            n,
            degree,
            terms: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> &[(MultiIndex, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluate without a dimension check.
    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (alpha, c) in &self.terms {
            let mut t = *c;
            for (xi, &a) in x.iter().zip(alpha) {
                if a > 0 {
                    t *= xi.powi(a as i32);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.value(x))
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Partial derivative in variable `i`.
    pub fn partial(&self, i: usize) -> HomogeneousPoly {
        let mut alpha = vec![0; self.n];
        alpha[i] = 1;
        self.derivative(&alpha)
    }

    /// Exact mixed derivative `d^alpha`.
    pub fn derivative(&self, alpha: &[u32]) -> HomogeneousPoly {
        let order: u32 = alpha.iter().sum();
        if order > self.degree {
            return HomogeneousPoly::zero(self.n, 0);
        }
        let mut terms = Vec::new();
        'term: for (beta, c) in &self.terms {
            let mut coef = *c;
            let mut gamma = beta.clone();
            for (k, (&b, &a)) in beta.iter().zip(alpha).enumerate() {
                if a > b {
                    continue 'term;
                }
                // falling factorial b (b-1) ... (b-a+1)
                for s in 0..a {
                    coef *= (b - s) as f64;
                }
                gamma[k] = b - a;
            }
            terms.push((gamma, coef));
        }
        HomogeneousPoly::new(self.n, self.degree - order, terms)
            .expect("derivative of a canonical polynomial is canonical")
    }

    /// Taylor coefficients `c_j` of `s -> P(x + s v)`, `j = 0..=degree`.
    ///
    /// `out` must hold `degree + 1` entries and `scratch` at least as many.
    pub fn line_taylor_into(&self, x: &[f64], v: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        let m = self.degree as usize;
        out[..=m].iter_mut().for_each(|c| *c = 0.0);
        for (alpha, c) in &self.terms {
            // running product polynomial in s, stored in scratch[0..=deg]
            scratch[0] = *c;
            let mut deg = 0usize;
            for ((&a, &xi), &vi) in alpha.iter().zip(x).zip(v) {
                for _ in 0..a {
                    // multiply by (xi + s vi)
                    scratch[deg + 1] = 0.0;
                    for j in (0..=deg).rev() {
                        scratch[j + 1] += scratch[j] * vi;
                        scratch[j] *= xi;
                    }
                    deg += 1;
                }
            }
            for j in 0..=deg {
                out[j] += scratch[j];
            }
        }
    }

    pub fn line_taylor(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let m = self.degree as usize;
        let mut out = vec![0.0; m + 1];
        let mut scratch = vec![0.0; m + 2];
        self.line_taylor_into(x, v, &mut out, &mut scratch);
        out
    }
}

/// Result of `d^alpha P`, keeping track of the multi-index that produced it.
#[derive(Debug, Clone)]
pub struct MultiIndexDerivative {
    pub order: MultiIndex,
    pub poly: HomogeneousPoly,
}

/// Certificate returned by [`PolySymbol::check_elliptic`].
#[derive(Debug, Clone, Serialize)]
pub struct EllipticCertificate {
    pub positive_min: f64,
    pub argmin: Vec<f64>,
    pub samples: usize,
}

/// A homogeneous elliptic symbol of even degree `m` in `n >= 2` variables.
///
/// Immutable after construction; gradient and Hessian tables are cached.
#[derive(Debug, Clone)]
pub struct PolySymbol {
    poly: HomogeneousPoly,
    grad: Vec<HomogeneousPoly>,
    hess: Vec<Vec<HomogeneousPoly>>,
    negated: bool,
}

impl PartialEq for PolySymbol {
    fn eq(&self, other: &Self) -> bool {
        self.poly == other.poly
    }
}

impl PolySymbol {
    pub fn new(n: usize, m: u32, terms: Vec<(MultiIndex, f64)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSymbol(format!("dimension n={n} must be >= 2")));
        }
        if m < 2 || m % 2 != 0 {
            return Err(Error::InvalidSymbol(format!(
                "degree m={m} must be an even integer >= 2"
            )));
        }
        let poly = HomogeneousPoly::new(n, m, terms)?;
        if poly.is_zero() {
            return Err(Error::InvalidSymbol("zero polynomial".into()));
        }
        Ok(Self::from_poly(poly, false))
    }

    fn from_poly(poly: HomogeneousPoly, negated: bool) -> Self {
        let n = poly.dim();
        let grad: Vec<_> = (0..n).map(|i| poly.partial(i)).collect();
        let hess = grad
            .iter()
            .map(|g| (0..n).map(|j| g.partial(j)).collect())
            .collect();
        Self {
            poly,
            grad,
            hess,
            negated,
        }
    }

    /// `sum_i xi_i^m`.
    pub fn sum_of_powers(n: usize, m: u32) -> Result<Self> {
        let terms = (0..n)
            .map(|i| {
                let mut a = vec![0; n];
                a[i] = m;
                (a, 1.0)
            })
            .collect();
        Self::new(n, m, terms)
    }

    /// `|xi|^m` expanded by the multinomial theorem (`m` even).
    pub fn radial(n: usize, m: u32) -> Result<Self> {
        let half = m / 2;
        let mut terms = Vec::new();
        let mut idx = vec![0u32; n];
        fn rec(d: usize, left: u32, idx: &mut Vec<u32>, out: &mut Vec<(MultiIndex, f64)>, half: u32) {
            let n = idx.len();
            if d == n - 1 {
                idx[d] = left;
                let mut c = factorial(half);
                for &k in idx.iter() {
                    c /= factorial(k);
                }
                out.push((idx.iter().map(|k| 2 * k).collect(), c));
                return;
            }
            for k in 0..=left {
                idx[d] = k;
                rec(d + 1, left - k, idx, out, half);
            }
        }
        rec(0, half, &mut idx, &mut terms, half);
        Self::new(n, m, terms)
    }

    /// The negated symbol when `P < 0` away from the origin.
    ///
    /// Returns the symbol unchanged when it is already positive at `e_1`.
    pub fn normalize_sign(self) -> Self {
        let mut e1 = vec![0.0; self.dim()];
        e1[0] = 1.0;
        if self.poly.value(&e1) < 0.0 {
            let terms = self
                .poly
                .terms()
                .iter()
                .map(|(a, c)| (a.clone(), -c))
                .collect();
            let poly = HomogeneousPoly::new(self.dim(), self.degree(), terms).unwrap();
            Self::from_poly(poly, !self.negated)
        } else {
            self
        }
    }

    pub fn was_negated(&self) -> bool {
        self.negated
    }

    /// Multiply all coefficients by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        let terms = self
            .poly
            .terms()
            .iter()
            .map(|(a, c)| (a.clone(), c * s))
            .collect();
        Self::new(self.dim(), self.degree(), terms)
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    pub fn degree(&self) -> u32 {
        self.poly.degree()
    }

    pub fn poly(&self) -> &HomogeneousPoly {
        &self.poly
    }

    /// The standing assumption of the dispersive theory is `m >= 4`.
    pub fn classical_regime(&self) -> bool {
        self.degree() == 2
    }

    #[inline]
    pub fn value(&self, xi: &[f64]) -> f64 {
        self.poly.value(xi)
    }

    pub fn eval(&self, xi: &[f64]) -> Result<f64> {
        self.poly.eval(xi)
    }

    #[inline]
    pub fn gradient_unchecked(&self, xi: &[f64]) -> Vec<f64> {
        self.grad.iter().map(|g| g.value(xi)).collect()
    }

    pub fn gradient(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.poly.check_dim(xi)?;
        Ok(self.gradient_unchecked(xi))
    }

    pub fn hessian(&self, xi: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.poly.check_dim(xi)?;
        Ok(self
            .hess
            .iter()
            .map(|row| row.iter().map(|h| h.value(xi)).collect())
            .collect())
    }

    pub fn derivative(&self, alpha: &[u32]) -> Result<MultiIndexDerivative> {
        if alpha.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: alpha.len(),
            });
        }
        Ok(MultiIndexDerivative {
            order: alpha.to_vec(),
            poly: self.poly.derivative(alpha),
        })
    }

    /// `nabla_eta^j P(xi)`, the `j`-th derivative of `s -> P(xi + s eta)` at 0.
    ///
    /// `eta` must be a unit vector; orders beyond `m` give exactly zero.
    pub fn directional_derivative(&self, xi: &[f64], eta: &[f64], j: u32) -> Result<f64> {
        self.poly.check_dim(xi)?;
        self.poly.check_dim(eta)?;
        let norm = sphere::norm(eta);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "direction must be a unit vector, |eta| = {norm}"
            )));
        }
        if j > self.degree() {
            return Ok(0.0);
        }
        let c = self.poly.line_taylor(xi, eta);
        Ok(factorial(j) * c[j as usize])
    }

    /// Certify ellipticity at sampling resolution.
    ///
    /// Minimizes `P` over a sphere sample, then refines the ten worst samples
    /// with fifty steps of projected gradient descent.
    pub fn check_elliptic(&self, samples: usize) -> Result<EllipticCertificate> {
        if samples < sphere::MIN_DENSITY {
            return Err(Error::InvalidArgument(format!(
                "sampling density {samples} below minimum {}",
                sphere::MIN_DENSITY
            )));
        }
        let pts = sphere::sample(self.dim(), samples);
        let mut vals: Vec<(f64, usize)> = pts
            .iter()
            .enumerate()
            .map(|(i, w)| (self.value(w), i))
            .collect();
        vals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut best = (vals[0].0, pts[vals[0].1].clone());
        for &(_, i) in vals.iter().take(10) {
            let (v, w) = self.descend_on_sphere(pts[i].clone(), 50);
            if v < best.0 {
                best = (v, w);
            }
        }
        if best.0 <= 0.0 {
            return Err(Error::NotElliptic {
                min: best.0,
                witness: best.1,
            });
        }
        Ok(EllipticCertificate {
            positive_min: best.0,
            argmin: best.1,
            samples: pts.len(),
        })
    }

    fn descend_on_sphere(&self, mut w: Vec<f64>, steps: usize) -> (f64, Vec<f64>) {
        let mut val = self.value(&w);
        let mut step = 0.1;
        for _ in 0..steps {
            let g = self.gradient_unchecked(&w);
            let radial = sphere::dot(&g, &w);
            let tang: Vec<f64> = g.iter().zip(&w).map(|(gi, wi)| gi - radial * wi).collect();
            if sphere::norm(&tang) < 1e-15 {
                break;
            }
            loop {
                let mut trial: Vec<f64> = w.iter().zip(&tang).map(|(wi, ti)| wi - step * ti).collect();
                sphere::normalize(&mut trial);
                let tv = self.value(&trial);
                if tv < val {
                    w = trial;
                    val = tv;
                    step *= 1.5;
                    break;
                }
                step *= 0.5;
                if step < 1e-16 {
                    return (val, w);
                }
            }
        }
        (val, w)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let file: SymbolFile = if path.extension().and_then(|e| e.to_str()) == Some("toml") {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            serde_json::from_str(&text)?
        };
        Ok(Self::try_from(file)?.normalize_sign())
    }

    pub fn to_file(&self) -> SymbolFile {
        SymbolFile::from(self)
    }
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// On-disk symbol description, JSON or TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolFile {
    pub n: usize,
    pub m: u32,
    pub terms: Vec<TermEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEntry {
    pub alpha: Vec<u32>,
    pub c: f64,
}

impl TryFrom<SymbolFile> for PolySymbol {
    type Error = Error;

    fn try_from(f: SymbolFile) -> Result<Self> {
        PolySymbol::new(f.n, f.m, f.terms.into_iter().map(|t| (t.alpha, t.c)).collect())
    }
}

impl From<&PolySymbol> for SymbolFile {
    fn from(p: &PolySymbol) -> Self {
        SymbolFile {
            n: p.dim(),
            m: p.degree(),
            terms: p
                .poly()
                .terms()
                .iter()
                .map(|(a, c)| TermEntry {
                    alpha: a.clone(),
                    c: *c,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p44() -> PolySymbol {
        PolySymbol::sum_of_powers(2, 4).unwrap()
    }

    fn p6_type4() -> PolySymbol {
        PolySymbol::new(2, 6, vec![(vec![6, 0], 1.0), (vec![2, 4], 5.0), (vec![0, 6], 1.0)]).unwrap()
    }

    fn p_mixed() -> PolySymbol {
        PolySymbol::new(2, 4, vec![(vec![4, 0], 1.0), (vec![2, 2], 6.0), (vec![0, 4], 1.0)]).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p44().eval(&[1.0, 1.0]).unwrap(), 2.0);
        assert_eq!(p6_type4().eval(&[1.0, 0.0]).unwrap(), 1.0);
        // 1 + 6 + 1
        assert_eq!(p_mixed().eval(&[1.0, 1.0]).unwrap(), 8.0);
        assert!(matches!(
            p44().eval(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(p44().gradient(&[1.0, 0.0]).unwrap(), vec![4.0, 0.0]);
        let circle = PolySymbol::radial(2, 4).unwrap();
        // d/dxi2 (xi1^2 + xi2^2)^2 = 4 xi2 |xi|^2
        assert_eq!(circle.gradient(&[0.0, 1.0]).unwrap(), vec![0.0, 4.0]);
    }

    #[test]
    fn radial_expansion() {
        let p = PolySymbol::radial(2, 4).unwrap();
        let t: Vec<_> = p.poly().terms().to_vec();
        assert_eq!(t, vec![(vec![4, 0], 1.0), (vec![2, 2], 2.0), (vec![0, 4], 1.0)]);
        let p3 = PolySymbol::radial(3, 6).unwrap();
        let x = [0.3, -0.7, 1.1];
        let r2: f64 = x.iter().map(|v| v * v).sum();
        assert!((p3.value(&x) - r2.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn canonical_order_and_merge() {
        let p = PolySymbol::new(
            2,
            4,
            vec![(vec![0, 4], 1.0), (vec![4, 0], 0.5), (vec![4, 0], 0.5), (vec![2, 2], 0.0)],
        )
        .unwrap();
        assert_eq!(p.poly().terms(), &[(vec![4, 0], 1.0), (vec![0, 4], 1.0)]);
    }

    #[test]
    fn rejects_bad_symbols() {
        assert!(PolySymbol::new(2, 3, vec![(vec![3, 0], 1.0)]).is_err());
        assert!(PolySymbol::new(1, 4, vec![(vec![4], 1.0)]).is_err());
        assert!(PolySymbol::new(2, 4, vec![(vec![3, 0], 1.0)]).is_err());
        assert!(PolySymbol::new(2, 4, vec![]).is_err());
    }

    #[test]
    fn directional_derivative_examples() {
        let p = p44();
        assert_eq!(p.directional_derivative(&[1.0, 0.0], &[0.0, 1.0], 1).unwrap(), 0.0);
        // finite-difference oracle
        let h = 1e-5;
        let fd = (p.value(&[1.0 + h, 0.0]) - p.value(&[1.0 - h, 0.0])) / (2.0 * h);
        let dd = p.directional_derivative(&[1.0, 0.0], &[1.0, 0.0], 1).unwrap();
        assert!((dd - fd).abs() < 1e-6);
        assert!((dd - 4.0).abs() < 1e-14);
        assert_eq!(p.directional_derivative(&[1.0, 0.0], &[1.0, 0.0], 5).unwrap(), 0.0);
        assert!(p.directional_derivative(&[1.0, 0.0], &[2.0, 0.0], 1).is_err());
    }

    #[test]
    fn top_order_directional_derivative_is_constant() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for p in [p44(), p6_type4(), p_mixed(), PolySymbol::radial(3, 4).unwrap()] {
            let m = p.degree();
            for _ in 0..20 {
                let xi: Vec<f64> = (0..p.dim()).map(|_| sphere::normal_deviate(&mut rng)).collect();
                let eta = sphere::random_direction(p.dim(), &mut rng);
                let d = p.directional_derivative(&xi, &eta, m).unwrap();
                let expect = factorial(m) * p.value(&eta);
                assert!((d - expect).abs() <= 1e-10 * expect.abs(), "{d} vs {expect}");
            }
        }
    }

    #[test]
    fn elliptic_examples() {
        let c = p44().check_elliptic(4096).unwrap();
        assert!((c.positive_min - 0.5).abs() < 1e-12);
        assert!((c.argmin[0].abs() - 0.5f64.sqrt()).abs() < 1e-6);
        let c = PolySymbol::radial(2, 4).unwrap().check_elliptic(4096).unwrap();
        assert!((c.positive_min - 1.0).abs() < 1e-12);
        let bad = PolySymbol::new(2, 4, vec![(vec![4, 0], 1.0), (vec![0, 4], -1.0)]).unwrap();
        match bad.check_elliptic(4096) {
            Err(Error::NotElliptic { min, witness }) => {
                assert!(min <= 0.0);
                assert!(witness[1].abs() > 0.999, "{witness:?}");
            }
            other => panic!("expected failure witness, got {other:?}"),
        }
        assert!(p44().check_elliptic(8).is_err());
    }

    #[test]
    fn oracle_min_of_cos4_sin4() {
        // one-parameter calculus: f(th) = cos^4 + sin^4 = 1 - sin^2(2 th)/2, min 1/2
        let f = |th: f64| th.cos().powi(4) + th.sin().powi(4);
        let brute = (0..100_000)
            .map(|i| f(i as f64 * std::f64::consts::TAU / 100_000.0))
            .fold(f64::INFINITY, f64::min);
        let cert = p44().check_elliptic(256).unwrap();
        assert!((cert.positive_min - brute).abs() < 1e-9);
    }

    #[test]
    fn normalize_sign_negates_negative_symbols() {
        let neg = PolySymbol::new(2, 4, vec![(vec![4, 0], -1.0), (vec![0, 4], -1.0)]).unwrap();
        let pos = neg.normalize_sign();
        assert!(pos.was_negated());
        assert_eq!(pos, p44());
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let p = PolySymbol::new(
            2,
            6,
            vec![(vec![6, 0], 0.1), (vec![2, 4], 1.0 / 3.0), (vec![0, 6], std::f64::consts::PI)],
        )
        .unwrap();
        let json = serde_json::to_string(&p.to_file()).unwrap();
        let back = PolySymbol::try_from(serde_json::from_str::<SymbolFile>(&json).unwrap()).unwrap();
        assert_eq!(back, p);
        let toml_text = toml::to_string(&p.to_file()).unwrap();
        let back: SymbolFile = toml::from_str(&toml_text).unwrap();
        assert_eq!(PolySymbol::try_from(back).unwrap(), p);
    }

    fn symbols() -> Vec<PolySymbol> {
        vec![p44(), p6_type4(), p_mixed(), PolySymbol::radial(3, 4).unwrap(), PolySymbol::sum_of_powers(3, 6).unwrap()]
    }

    proptest! {
        #[test]
        fn homogeneity(idx in 0usize..5, s in 0.1f64..10.0, a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0) {
            let p = &symbols()[idx];
            let xi: Vec<f64> = [a, b, c][..p.dim()].to_vec();
            let scaled: Vec<f64> = xi.iter().map(|x| s * x).collect();
            let lhs = p.value(&scaled);
            let rhs = s.powi(p.degree() as i32) * p.value(&xi);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1e-300));
        }

        #[test]
        fn euler_identity(idx in 0usize..5, a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0) {
            let p = &symbols()[idx];
            let xi: Vec<f64> = [a, b, c][..p.dim()].to_vec();
            prop_assume!(sphere::norm(&xi) > 0.1);
            let g = p.gradient(&xi).unwrap();
            let ratio = sphere::dot(&xi, &g) / p.value(&xi);
            prop_assert!((ratio - p.degree() as f64).abs() < 1e-12 * p.degree() as f64);
        }

        #[test]
        fn derivatives_match_finite_differences(idx in 0usize..5, r in 0.5f64..2.0, a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, e1 in -1.0f64..1.0, e2 in -1.0f64..1.0, e3 in -1.0f64..1.0) {
            let p = &symbols()[idx];
            let n = p.dim();
            let mut xi: Vec<f64> = [a, b, c][..n].to_vec();
            prop_assume!(sphere::norm(&xi) > 0.1);
            sphere::normalize(&mut xi);
            xi.iter_mut().for_each(|x| *x *= r);
            let mut eta: Vec<f64> = [e1, e2, e3][..n].to_vec();
            prop_assume!(sphere::norm(&eta) > 0.1);
            sphere::normalize(&mut eta);
            let h = 1e-5;
            let f = |s: f64| {
                let x: Vec<f64> = xi.iter().zip(&eta).map(|(x, e)| x + s * e).collect();
                p.value(&x)
            };
            let fd1 = (f(h) - f(-h)) / (2.0 * h);
            let fd2 = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
            let d1 = p.directional_derivative(&xi, &eta, 1).unwrap();
            let d2 = p.directional_derivative(&xi, &eta, 2).unwrap();
            let scale = p.value(&xi).abs().max(1.0);
            prop_assert!((d1 - fd1).abs() <= 1e-5 * scale);
            prop_assert!((d2 - fd2).abs() <= 1e-5 * scale);
            // gradient components against the same oracle
            let g = p.gradient(&xi).unwrap();
            prop_assert!((sphere::dot(&g, &eta) - d1).abs() <= 1e-10 * scale);
            // Hessian contraction
            let hm = p.hessian(&xi).unwrap();
            let mut q = 0.0;
            for i in 0..n { for j in 0..n { q += eta[i] * hm[i][j] * eta[j]; } }
            prop_assert!((q - d2).abs() <= 1e-9 * scale);
        }

        #[test]
        fn mixed_derivatives_commute(idx in 0usize..5, i in 0usize..3, j in 0usize..3) {
            let p = &symbols()[idx];
            let n = p.dim();
            let (i, j) = (i % n, j % n);
            let a = p.poly().partial(i).partial(j);
            let b = p.poly().partial(j).partial(i);
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.degree(), p.degree() - 2);
        }
    }
}
