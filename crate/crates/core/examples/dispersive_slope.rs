//! L^1 -> L^inf decay of the propagator e^{itP(D)} over a seeded probe
//! family, with the propagator identities checked first.
//!
//! Run: `cargo run --release --example dispersive_slope`

use schrodlab::exponents::Exponents;
use schrodlab::spectral::{curvature_extremes, dispersive_probe, probe_family, propagator_identities, SpectralGrid};
use schrodlab::symbol::PolySymbol;

fn main() -> schrodlab::error::Result<()> {
    let p = PolySymbol::radial(2, 4)?;
    let grid = SpectralGrid::new(&p, 1024, 320.0)?;
    let ex = Exponents::new(4, 2, 2)?;
    let probes = probe_family(&grid, 0.8 * grid.nyquist(), 7, &curvature_extremes(&p)?)?;

    let ids = propagator_identities(&grid, &probes[0].field, 0.5, 0.25)?;
    println!("L2 drift {:.2e}, group law {:.2e}", ids.l2_drift, ids.group_law);

    let r = dispersive_probe(&grid, &ex, 1.0, f64::INFINITY, &[0.5, 1.0, 2.0, 4.0, 8.0], &probes)?;
    let fit = &r.tracks[0].fit;
    println!("slope {:.4} (predicted {:.4}), band ±{:.3}", fit.slope, fit.predicted_slope, fit.slope_band);
    for w in &r.warnings {
        println!("  note: {w}");
    }
    Ok(())
}
