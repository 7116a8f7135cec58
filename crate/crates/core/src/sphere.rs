//! Deterministic point sets on the unit sphere `S^{n-1}`.

use rand::Rng;
use std::f64::consts::PI;

/// Smallest sampling density accepted by the sphere-based certificates.
pub const MIN_DENSITY: usize = 64;

/// Sample roughly `count` directions on `S^{n-1}`.
///
/// Uniform angles for `n = 2` (the axes are always hit when `count` is a
/// multiple of 4), a Fibonacci lattice for `n = 3`, and a product grid in
/// hyperspherical angles for `n >= 4`.
pub fn sample(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        0 | 1 => vec![vec![1.0; n.max(1)]],
        2 => (0..count)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / count as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => fibonacci3(count),
        _ => angle_grid(n, count),
    }
}

fn fibonacci3(count: usize) -> Vec<Vec<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let th = golden * i as f64;
            vec![r * th.cos(), r * th.sin(), z]
        })
        .collect()
}

fn angle_grid(n: usize, count: usize) -> Vec<Vec<f64>> {
    let per = ((count as f64).powf(1.0 / (n - 1) as f64).ceil() as usize).max(4);
    let polar: Vec<f64> = (0..per).map(|i| PI * (i as f64 + 0.5) / per as f64).collect();
    let azim: Vec<f64> = (0..2 * per).map(|i| PI * i as f64 / per as f64).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n - 1];
    loop {
        let mut angles = Vec::with_capacity(n - 1);
        for (d, &i) in idx.iter().enumerate() {
            angles.push(if d == n - 2 { azim[i] } else { polar[i] });
        }
        out.push(from_angles(&angles));
        // odometer increment
        let mut d = 0;
        loop {
            if d == n - 1 {
                return out;
            }
            idx[d] += 1;
            let lim = if d == n - 2 { azim.len() } else { polar.len() };
            if idx[d] < lim {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Map hyperspherical angles `(phi_1, ..., phi_{n-1})` to a unit vector.
pub fn from_angles(angles: &[f64]) -> Vec<f64> {
    let n = angles.len() + 1;
    let mut x = vec![0.0; n];
    let mut sin_prod = 1.0;
    for (i, a) in angles.iter().enumerate() {
        x[i] = sin_prod * a.cos();
        sin_prod *= a.sin();
    }
    x[n - 1] = sin_prod;
    x
}

/// Inverse of [`from_angles`] for a unit (or nonzero) vector.
pub fn to_angles(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let tail = x[i + 1..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if i == n - 2 {
            out.push(x[n - 1].atan2(x[n - 2]));
        } else {
            out.push(tail.atan2(x[i]));
        }
    }
    out
}

/// Uniformly distributed random direction.
pub fn random_direction<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| normal_deviate(rng)).collect();
        let norm = norm(&v);
        if norm > 1e-8 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn normalize(v: &mut [f64]) -> f64 {
    let r = norm(v);
    if r > 0.0 {
        v.iter_mut().for_each(|x| *x /= r);
    }
    r
}

/// Box–Muller normal deviate.
pub fn normal_deviate<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}
