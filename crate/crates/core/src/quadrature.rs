//! Adaptive Gauss–Kronrod quadrature for vector-valued complex integrands,
//! plus fixed Gauss–Legendre rules.

use num_complex::Complex64;
use std::collections::BinaryHeap;

// 10-point Gauss / 21-point Kronrod abscissae and weights on [-1, 1].
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7, 9).
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Options for [`integrate_gk`].
#[derive(Debug, Clone, Copy)]
pub struct GkOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for GkOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GkResult {
    pub value: Vec<Complex64>,
    /// Sum of per-panel error estimates, in the max norm over components.
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<Complex64>,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [Complex64]) -> (Vec<Complex64>, f64)
where
    F: FnMut(f64, &mut [Complex64]),
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = vec![Complex64::new(0.0, 0.0); dim];
    let mut gauss = vec![Complex64::new(0.0, 0.0); dim];
    f(c, buf);
    for d in 0..dim {
        kron[d] += buf[d] * WGK[10];
    }
    for (j, (&x, &w)) in XGK.iter().zip(&WGK).enumerate().take(10) {
        for s in [-1.0, 1.0] {
            f(c + s * h * x, buf);
            for d in 0..dim {
                kron[d] += buf[d] * w;
                if j % 2 == 1 {
                    gauss[d] += buf[d] * WG[j / 2];
                }
            }
        }
    }
    let mut err: f64 = 0.0;
    for d in 0..dim {
        kron[d] *= h;
        gauss[d] *= h;
        err = err.max((kron[d] - gauss[d]).norm());
    }
    (kron, err)
}

/// Integrate a vector-valued complex function over `[a, b]`.
///
/// `breaks` are interior points where the integrand changes character; they
/// seed the panel list. The integrand writes `dim` values into its slice.
pub fn integrate_gk<F>(mut f: F, a: f64, b: f64, breaks: &[f64], dim: usize, opts: GkOptions) -> GkResult
where
    F: FnMut(f64, &mut [Complex64]),
{
    let mut points: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&x| x > a && x < b))
        .chain(std::iter::once(b))
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for w in points.windows(2) {
        let (value, error) = gk21(&mut f, w[0], w[1], dim, &mut buf);
        evals += 21;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    let total = |heap: &BinaryHeap<Panel>| {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        let mut e = 0.0;
        for p in heap.iter() {
            for d in 0..dim {
                v[d] += p.value[d];
            }
            e += p.error;
        }
        (v, e)
    };
    // running totals; refreshed from scratch periodically to limit drift
    let (mut v, mut e) = total(&heap);
    let mut converged = false;
    let mut since_refresh = 0;
    loop {
        if since_refresh >= 256 {
            (v, e) = total(&heap);
            since_refresh = 0;
        }
        let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if e <= opts.abs_tol.max(opts.rel_tol * scale) {
            (v, e) = total(&heap);
            let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if e <= opts.abs_tol.max(opts.rel_tol * scale) {
                converged = true;
                break;
            }
        }
        if heap.len() >= opts.max_intervals {
            break;
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        for d in 0..dim {
            v[d] -= worst.value[d];
        }
        e -= worst.error;
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk21(&mut f, lo, hi, dim, &mut buf);
            evals += 21;
            for d in 0..dim {
                v[d] += value[d];
            }
            e += error;
            heap.push(Panel { a: lo, b: hi, value, error });
        }
        since_refresh += 1;
    }
    let (value, error) = total(&heap);
    GkResult {
        value,
        error,
        evaluations: evals,
        intervals: heap.len(),
        converged,
    }
}

/// Scalar real convenience wrapper.
pub fn integrate_real<F>(mut f: F, a: f64, b: f64, opts: GkOptions) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let r = integrate_gk(
        |x, out: &mut [Complex64]| out[0] = Complex64::new(f(x), 0.0),
        a,
        b,
        &[],
        1,
        opts,
    );
    (r.value[0].re, r.error)
}

/// Scalar complex convenience wrapper.
pub fn integrate_complex<F>(mut f: F, a: f64, b: f64, breaks: &[f64], opts: GkOptions) -> (Complex64, f64, bool)
where
    F: FnMut(f64) -> Complex64,
{
    let r = integrate_gk(|x, out: &mut [Complex64]| out[0] = f(x), a, b, breaks, 1, opts);
    (r.value[0], r.error, r.converged)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (
        x.iter().map(|t| c + h * t).collect(),
        w.iter().map(|t| h * t).collect(),
    )
}
