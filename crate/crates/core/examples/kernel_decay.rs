//! Pointwise decay of the free kernel along rays, fitted on a log-log
//! ladder, for the radial quartic (type 2) and x^4 + y^4 (type 4).
//!
//! Run: `cargo run --release --example kernel_decay`

use schrodlab::exponents::Exponents;
use schrodlab::kernel::{fit_decay, half_directions, profile_range, OscillatoryPlan, SurfaceOptions, DEFAULT_EPS};
use schrodlab::symbol::PolySymbol;

fn main() -> schrodlab::error::Result<()> {
    let ladder: Vec<f64> = (0..=6).map(|j| 8.0 * 2f64.powf(j as f64 / 2.0)).collect();
    let dirs = half_directions(2, 6);
    for (name, p, k) in [
        ("(x^2 + y^2)^2", PolySymbol::radial(2, 4)?, 2),
        ("x^4 + y^4", PolySymbol::sum_of_powers(2, 4)?, 4),
    ] {
        let h = Exponents::new(4, 2, k)?.h;
        let r_max = *ladder.last().unwrap();
        let plan = OscillatoryPlan::new(4, 2, profile_range(&p, r_max)?, &DEFAULT_EPS)?;
        let e = fit_decay(&p, k, &plan, &ladder, &dirs, 0.1, &SurfaceOptions::default())?;
        println!(
            "{name}: envelope slope {:.4} (predicted -h = {:.4}), flagged {}, pass {}",
            e.envelope.slope, -h, e.flagged, e.pass
        );
        for (r, a) in e.envelope.x.iter().zip(&e.envelope.y) {
            println!("  r = {r:>7.2}  max |K| = {a:.4e}");
        }
    }
    Ok(())
}
