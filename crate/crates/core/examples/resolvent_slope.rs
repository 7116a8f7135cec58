//! Resolvent of iP(D): algebraic identities, the Laplace-transform
//! representation, and the Re λ slope of the L^1 -> L^inf norm.
//!
//! Run: `cargo run --release --example resolvent_slope`

use num_complex::Complex64;
use schrodlab::exponents::Exponents;
use schrodlab::spectral::{laplace_check, probe_family, resolvent_identities, resolvent_probe, SpectralGrid};
use schrodlab::symbol::PolySymbol;

fn main() -> schrodlab::error::Result<()> {
    let p = PolySymbol::radial(2, 4)?;
    let ex = Exponents::new(4, 2, 2)?;

    let small = SpectralGrid::new(&p, 64, 16.0)?;
    let f = &probe_family(&small, 4.0, 3, &[])?[0].field;
    let ids = resolvent_identities(&small, f, Complex64::new(1.5, 0.4), Complex64::new(0.5, -2.0))?;
    println!(
        "resolvent identity {:.2e}, conjugation {:.2e}, defining {:.2e}",
        ids.identity, ids.conjugation, ids.defining
    );
    let l = laplace_check(&small, f, Complex64::new(2.0, 0.5), 0.0)?;
    println!("Laplace representation: relative error {:.2e}", l.relative_error);

    let grid = SpectralGrid::new(&p, 1024, 64.0)?;
    let probes = probe_family(&grid, 20.0, 3, &[])?;
    let r = resolvent_probe(&grid, &ex, 1.0, f64::INFINITY, &[1.0, 2.0, 4.0, 8.0, 16.0], &probes)?;
    for t in &r.tracks {
        println!("track {}: slope {:.4} (predicted {:.4})", t.track, t.fit.slope, t.fit.predicted_slope);
    }
    Ok(())
}
