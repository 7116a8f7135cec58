//! Resolvent of iP(D) + V by the Born series, cross-checked against a
//! GMRES solve, with the admissibility gate deciding whether to try.
//!
//! Run: `cargo run --release --example born_series`

use num_complex::Complex64;
use schrodlab::exponents::Exponents;
use schrodlab::potential::{
    admissibility_gate, born_resolvent, find_omega, BornOptions, Potential, PotentialDescriptor, PotentialSpec,
};
use schrodlab::spectral::SpectralGrid;
use schrodlab::symbol::PolySymbol;

fn main() -> schrodlab::error::Result<()> {
    let p = PolySymbol::radial(2, 4)?;
    let grid = SpectralGrid::new(&p, 64, 16.0)?;
    let ex = Exponents::new(4, 2, 2)?;

    for (pp, s1, s2) in [(2.0, f64::INFINITY, f64::INFINITY), (1.0, 1.2, 1.2), (3.5, 4.0, 4.0)] {
        let g = admissibility_gate(&ex, pp, s1, s2);
        println!("gate p = {pp}, s = ({s1}, {s2}): admissible {}, I'_p = {}", g.admissible, g.interval.bracket());
    }

    let spec = PotentialSpec {
        descriptor: PotentialDescriptor::GaussianBump {
            amplitude: 0.1,
            imag: 0.0,
            width: 1.0,
            center: vec![],
        },
        s1: f64::INFINITY,
        s2: f64::INFINITY,
        split_radius: None,
    };
    let v = Potential::build(&grid, &spec, None)?;
    let gate = admissibility_gate(&ex, 2.0, spec.s1, spec.s2);
    let f = grid.from_spectrum(|xi| Complex64::new((-0.5 * (xi[0] * xi[0] + xi[1] * xi[1])).exp(), 0.0));
    let r = born_resolvent(&grid, &v, &gate, &f, Complex64::new(4.0, 0.0), BornOptions::default())?;
    println!(
        "gamma {:.3}, {} terms, residual {:.2e}, series vs GMRES {:.2e}",
        r.gamma, r.terms, r.residual, r.series_vs_direct
    );
    let w = find_omega(&grid, &v, 2.0, 0.0)?;
    println!("gamma < 1/2 for Re lambda > {:.4}", w.omega);
    Ok(())
}
