//! Time evolution with a complex Gaussian potential: Strang splitting
//! order, the Duhamel expansion and the L^2 growth bound.
//!
//! Run: `cargo run --release --example perturbed_evolution`

use num_complex::Complex64;
use schrodlab::potential::{duhamel_check, gronwall_check, strang_order, Potential, PotentialDescriptor, PotentialSpec};
use schrodlab::spectral::SpectralGrid;
use schrodlab::symbol::PolySymbol;

fn bump(grid: &SpectralGrid, amplitude: f64, imag: f64, width: f64) -> schrodlab::error::Result<Potential> {
    let spec = PotentialSpec {
        descriptor: PotentialDescriptor::GaussianBump {
            amplitude,
            imag,
            width,
            center: vec![],
        },
        s1: f64::INFINITY,
        s2: f64::INFINITY,
        split_radius: None,
    };
    Potential::build(grid, &spec, None)
}

fn main() -> schrodlab::error::Result<()> {
    let p = PolySymbol::radial(2, 4)?;
    let grid = SpectralGrid::new(&p, 128, 32.0)?;
    let u0 = grid.from_spectrum(|xi| Complex64::new((-4.5 * (xi[0] * xi[0] + xi[1] * xi[1])).exp(), 0.0));

    let v = bump(&grid, 0.5, 0.0, 2.0)?;
    let o = strang_order(&grid, &v, &u0, 1.0, &[1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0])?;
    println!("Strang order {:.4}", o.fit.slope);

    let v = bump(&grid, 0.5, 0.2, 1.0)?;
    let d = duhamel_check(&grid, &v, &u0, &[0.2, 0.1, 0.05], 16)?;
    for row in &d.rows {
        println!(
            "t = {:<5} remainder/t^3 {:.4e}  first-order remainder/t^2 {:.4e}",
            row.t, row.three_term_over_t3, row.two_term_over_t2
        );
    }

    let v = bump(&grid, 0.5, 0.2, 2.0)?;
    let g = gronwall_check(&grid, &v, &u0, 1.0, 0.005)?;
    println!("|u(1)| / |u0| = {:.6} <= e^(sup Re V) = {:.6}: {}", g.norm_ratio, g.bound, g.pass);
    Ok(())
}
