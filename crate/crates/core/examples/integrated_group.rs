//! The β-times integrated group: the β = 1 closed form, the Laplace
//! identity for fractional β, and polynomial growth in t.
//!
//! Run: `cargo run --release --example integrated_group`

use num_complex::Complex64;
use schrodlab::exponents::n_p;
use schrodlab::spectral::{closed_form_check, growth_probe, laplace_check, probe_family, SpectralGrid};
use schrodlab::symbol::PolySymbol;

fn main() -> schrodlab::error::Result<()> {
    let p = PolySymbol::radial(2, 4)?;

    let small = SpectralGrid::new(&p, 32, 12.0)?;
    let f = &probe_family(&small, 1.0, 1, &[])?[0].field;
    let cf = closed_form_check(&small, f, 1.0)?;
    println!("beta = 1 quadrature vs closed form: {:.2e} over {} symbol values", cf.max_relative, cf.symbol_values);
    let beta = n_p(2, 1.0) + 1.2;
    let l = laplace_check(&small, f, Complex64::new(3.0, 0.0), beta)?;
    println!("Laplace identity at beta = {beta}: {:.2e}", l.relative_error);

    let grid = SpectralGrid::new(&p, 256, 128.0)?;
    let probes = probe_family(&grid, 1.0, 1, &[])?;
    for beta in [1.2, 2.2] {
        let r = growth_probe(&grid, 1.0, beta, &[1.0, 2.0, 4.0, 8.0, 16.0], &probes)?;
        println!("beta = {beta}: growth slope {:.4}", r.tracks[0].fit.slope);
    }
    Ok(())
}
