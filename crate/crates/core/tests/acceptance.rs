//! Acceptance battery: the eight criteria at their pinned tolerances.
//!
//! Runs without the libtest harness so the summary lines always print:
//! `cargo test --release --test acceptance`.

use num_complex::Complex64;
use schrodlab::error::Result;
use schrodlab::exponents::{n_p, sweep, Exponents};
use schrodlab::geometry::{analyze, detect_type, GeometryOptions};
use schrodlab::kernel::{
    compare_evaluators, fit_decay, half_directions, profile_range, scaling_check, OscillatoryPlan, SurfaceOptions,
    DEFAULT_EPS,
};
use schrodlab::potential::{
    admissibility_gate, born_resolvent, duhamel_check, strang_order, BornOptions, Potential, PotentialDescriptor,
    PotentialSpec,
};
use schrodlab::spectral::{
    closed_form_check, curvature_extremes, dispersive_probe, growth_probe, laplace_check, probe_family,
    propagator_identities, resolvent_identities, resolvent_probe, SpectralGrid, BAND_FRACTION,
};
use schrodlab::symbol::PolySymbol;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn radial() -> PolySymbol {
    PolySymbol::radial(2, 4).unwrap()
}

fn sum4() -> PolySymbol {
    PolySymbol::sum_of_powers(2, 4).unwrap()
}

fn sextic() -> PolySymbol {
    PolySymbol::new(2, 6, vec![(vec![6, 0], 1.0), (vec![2, 4], 5.0), (vec![0, 6], 1.0)]).unwrap()
}

fn nonconvex() -> PolySymbol {
    PolySymbol::new(2, 4, vec![(vec![4, 0], 1.0), (vec![2, 2], -1.0), (vec![0, 4], 1.0)]).unwrap()
}

fn geometry() -> Result<Outcome> {
    let opts = GeometryOptions::for_dim(2);
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, p, k, convex) in [
        ("x^4+y^4", sum4(), Some(4), true),
        ("x^6+5x^2y^4+y^6", sextic(), Some(4), true),
        ("(x^2+y^2)^2", radial(), Some(2), true),
        ("x^4-x^2y^2+y^4", nonconvex(), None, false),
    ] {
        let start = Instant::now();
        let r = analyze(&p, &opts)?;
        let cert = detect_type(&p, &opts)?;
        let secs = start.elapsed().as_secs_f64();
        let ok = k.is_none_or(|k| r.k == k && cert.k == k) && r.convex == convex && secs < 60.0;
        pass &= ok;
        parts.push(format!("{name}: k={} convex={} ({secs:.1}s)", r.k, r.convex));
    }
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
    })
}

fn exponent_sweep() -> Result<Outcome> {
    let start = Instant::now();
    let s = sweep(&[4, 6, 8], &[2, 3, 4], &[1.0, 1.25, 1.5, 1.75, 2.0], 1e-12)?;
    // h(m, n, k) and tau = n / h again, straight from the formula in floating point
    let mut worst: f64 = 0.0;
    for m in [4u32, 6, 8] {
        for n in [2usize, 3, 4] {
            for k in 2..=m {
                let (mf, nf, kf) = (m as f64, n as f64, k as f64);
                let h = (kf * (mf - 2.0) + 2.0 * (mf - kf) * (nf - 1.0)) / (2.0 * kf * (mf - 1.0));
                let ex = Exponents::new(m, n, k)?;
                worst = worst.max((ex.h - h).abs()).max((ex.tau - nf / h).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome {
        pass: s.violations.is_empty() && worst <= 1e-12 && secs < 1.0,
        detail: format!(
            "{} cases, {} containments, {} violations, formula drift {worst:.1e}, {secs:.3}s",
            s.cases,
            s.containment_checks,
            s.violations.len()
        ),
    })
}

fn kernel_decay() -> Result<Outcome> {
    let start = Instant::now();
    let ladder: Vec<f64> = (0..=10).map(|j| 8.0 * 2f64.powf(j as f64 / 2.0)).collect();
    let dirs = half_directions(2, 12);
    let opts = SurfaceOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, p, k) in [("radial", radial(), 2), ("x^4+y^4", sum4(), 4)] {
        let h = Exponents::new(4, 2, k)?.h;
        let plan = OscillatoryPlan::new(4, 2, profile_range(&p, 256.0)?, &DEFAULT_EPS)?;
        let e = fit_decay(&p, k, &plan, &ladder, &dirs, 0.1, &opts)?;
        let grid = SpectralGrid::new(&p, 2048, 410.0)?;
        let a = compare_evaluators(&plan, &grid, (3.0, 4.5), 0.8, 2.0, 20.0, &opts)?;
        let ok = e.envelope.slope <= -h + 0.1 && e.flagged == 0 && a.max_ratio <= 1.0;
        pass &= ok;
        parts.push(format!(
            "{name}: slope {:.4} vs -h {:.4}, agreement ratio {:.3}",
            e.envelope.slope, -h, a.max_ratio
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 900.0;
    parts.push(format!("{secs:.0}s"));
    Ok(Outcome {
        pass,
        detail: parts.join("; "),
    })
}

fn scaling() -> Result<Outcome> {
    let grid = SpectralGrid::new(&radial(), 1024, 300.0)?;
    let rows = scaling_check(&grid, &[1.0, 4.0, 16.0], (2.0, 3.0), 2.0, 20.0)?;
    let worst = rows.iter().map(|r| r.rel_linf).fold(0.0, f64::max);
    Ok(Outcome {
        pass: worst <= 1e-3,
        detail: format!("max relative L-inf {worst:.2e} over t in {{1, 4, 16}}"),
    })
}

fn propagator() -> Result<Outcome> {
    let p = radial();
    let grid = SpectralGrid::new(&p, 2048, 640.0)?;
    let ex = Exponents::new(4, 2, 2)?;
    let probes = probe_family(&grid, BAND_FRACTION * grid.nyquist(), 1, &curvature_extremes(&p)?)?;
    let ids = propagator_identities(&grid, &probes[0].field, 0.5, 0.5)?;
    let r = dispersive_probe(&grid, &ex, 1.0, f64::INFINITY, &[1.0, 2.0, 4.0, 8.0, 16.0], &probes)?;
    let slope = r.tracks[0].fit.slope;
    Ok(Outcome {
        pass: ids.l2_drift <= 1e-12 && ids.group_law <= 1e-12 && (slope + 0.5).abs() <= 0.05,
        detail: format!(
            "L2 drift {:.1e}, group law {:.1e}, (1, inf) slope {slope:.4}",
            ids.l2_drift, ids.group_law
        ),
    })
}

fn resolvent() -> Result<Outcome> {
    let p = radial();
    let ex = Exponents::new(4, 2, 2)?;
    let grid = SpectralGrid::new(&p, 1024, 64.0)?;
    let probes = probe_family(&grid, 20.0, 1, &curvature_extremes(&p)?)?;
    let ids = resolvent_identities(&grid, &probes[0].field, Complex64::new(1.5, 0.4), Complex64::new(0.5, -2.0))?;
    let small = SpectralGrid::new(&p, 64, 16.0)?;
    let f = &probe_family(&small, 4.0, 1, &[])?[0].field;
    let lap = laplace_check(&small, f, Complex64::new(2.0, 0.5), 0.0)?;
    let ladder = [1.0, 2.0, 4.0, 8.0, 16.0];
    let one = resolvent_probe(&grid, &ex, 1.0, f64::INFINITY, &ladder, &probes)?;
    let two = resolvent_probe(&grid, &ex, 2.0, 2.0, &ladder, &probes)?;
    let s1: Vec<f64> = one.tracks.iter().map(|t| t.fit.slope).collect();
    let s2: Vec<f64> = two.tracks.iter().map(|t| t.fit.slope).collect();
    let pass = ids.relations() <= 1e-11
        && lap.relative_error <= 1e-6
        && s1.iter().all(|s| (s + 0.5).abs() <= 0.07)
        && s2.iter().all(|s| (s + 1.0).abs() <= 1e-3);
    Ok(Outcome {
        pass,
        detail: format!(
            "identity/conjugation {:.1e}, Laplace {:.1e}, (1, inf) slopes {:.4?}, (2, 2) slopes {:.6?}",
            ids.relations(),
            lap.relative_error,
            s1,
            s2
        ),
    })
}

fn integrated() -> Result<Outcome> {
    let p = radial();
    let cf_grid = SpectralGrid::new(&p, 64, 16.0)?;
    let cf = closed_form_check(&cf_grid, &probe_family(&cf_grid, 4.0, 1, &[])?[0].field, 1.0)?;
    let small = SpectralGrid::new(&p, 32, 12.0)?;
    let beta = n_p(2, 1.0) + 1.2;
    let lap = laplace_check(&small, &probe_family(&small, 1.0, 1, &[])?[0].field, Complex64::new(3.0, 0.0), beta)?;
    let grid = SpectralGrid::new(&p, 256, 128.0)?;
    let probes = probe_family(&grid, 1.0, 1, &curvature_extremes(&p)?)?;
    let mut growth_ok = true;
    let mut slopes = Vec::new();
    for b in [n_p(2, 1.0) + 0.2, beta] {
        let s = growth_probe(&grid, 1.0, b, &[1.0, 2.0, 4.0, 8.0, 16.0], &probes)?.tracks[0].fit.slope;
        growth_ok &= s <= b + 0.1;
        slopes.push((b, s));
    }
    Ok(Outcome {
        pass: cf.max_relative <= 1e-10 && lap.relative_error <= 1e-4 && growth_ok,
        detail: format!(
            "closed form {:.1e}, Laplace at beta {beta} {:.1e}, growth (beta, slope) {:.4?}",
            cf.max_relative, lap.relative_error, slopes
        ),
    })
}

fn bump(amplitude: f64, imag: f64, width: f64) -> PotentialSpec {
    PotentialSpec {
        descriptor: PotentialDescriptor::GaussianBump {
            amplitude,
            imag,
            width,
            center: vec![],
        },
        s1: f64::INFINITY,
        s2: f64::INFINITY,
        split_radius: None,
    }
}

fn potential() -> Result<Outcome> {
    let p = radial();
    let ex = Exponents::new(4, 2, 2)?;
    let gates = [
        admissibility_gate(&ex, 2.0, f64::INFINITY, f64::INFINITY),
        admissibility_gate(&ex, 1.0, 1.2, 1.2),
        admissibility_gate(&ex, 3.5, 4.0, 4.0),
    ];
    // hand-computed: tau = 3 for (4, 2, 2), so tau' = 3/2 and I'_1 = [1, 3/2)
    let gates_ok = gates[0].admissible
        && gates[0].interval.bracket() == "{inf}"
        && gates[1].admissible
        && gates[1].interval.bracket() == "[1.0, 1.5)"
        && !gates[2].admissible
        && gates[2].interval.empty;

    let small = SpectralGrid::new(&p, 64, 16.0)?;
    let v = Potential::build(&small, &bump(0.1, 0.0, 1.0), None)?;
    let f = small.from_spectrum(|xi| Complex64::new((-0.5 * (xi[0] * xi[0] + xi[1] * xi[1])).exp(), 0.0));
    let born = born_resolvent(&small, &v, &gates[0], &f, Complex64::new(4.0, 0.0), BornOptions::default())?;

    let grid = SpectralGrid::new(&p, 128, 32.0)?;
    let u0 = grid.from_spectrum(|xi| Complex64::new((-4.5 * (xi[0] * xi[0] + xi[1] * xi[1])).exp(), 0.0));
    let v = Potential::build(&grid, &bump(0.5, 0.0, 2.0), None)?;
    let order = strang_order(&grid, &v, &u0, 1.0, &[1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0])?;
    let v = Potential::build(&grid, &bump(0.5, 0.2, 1.0), None)?;
    let d = duhamel_check(&grid, &v, &u0, &[0.2, 0.1, 0.05], 16)?;

    let pass = gates_ok
        && born.accepted
        && born.series_vs_direct <= 1e-9
        && (order.fit.slope - 2.0).abs() <= 0.15
        && d.spread_t3 <= 2.0;
    Ok(Outcome {
        pass,
        detail: format!(
            "gate cases {}, Born vs direct {:.1e}, Strang order {:.4}, Duhamel t^3 spread {:.3}",
            if gates_ok { "agree" } else { "DISAGREE" },
            born.series_vs_direct,
            order.fit.slope,
            d.spread_t3
        ),
    })
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 8] = [
        ("geometry", geometry),
        ("exponent sweep", exponent_sweep),
        ("kernel decay", kernel_decay),
        ("scaling identity", scaling),
        ("propagator", propagator),
        ("resolvent", resolvent),
        ("integrated group", integrated),
        ("potential", potential),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "[{}] {} {:<17} {} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            name,
            detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failures > 0 {
        println!("{failures} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
