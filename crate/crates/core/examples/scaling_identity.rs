//! The kernel at time t is the t = 1 kernel rescaled by t^{-1/m} in space
//! and t^{-n/m} in amplitude. Checked on an FFT grid.
//!
//! Run: `cargo run --release --example scaling_identity`

use schrodlab::kernel::scaling_check;
use schrodlab::spectral::SpectralGrid;
use schrodlab::symbol::PolySymbol;

fn main() -> schrodlab::error::Result<()> {
    let p = PolySymbol::radial(2, 4)?;
    let grid = SpectralGrid::new(&p, 1024, 300.0)?;
    for row in scaling_check(&grid, &[1.0, 4.0, 16.0], (2.0, 3.0), 2.0, 20.0)? {
        println!(
            "t = {:>4}: {} samples, relative L-inf mismatch {:.3e}, reach {:.1}",
            row.t, row.samples, row.rel_linf, row.reach
        );
    }
    Ok(())
}
