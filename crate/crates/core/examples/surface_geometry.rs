//! Type, convexity and curvature of the level curve {P = 1} for a few
//! quartic and sextic symbols in the plane.
//!
//! Run: `cargo run --release --example surface_geometry`

use schrodlab::geometry::{analyze, gaussian_curvature, sample_surface, GeometryOptions};
use schrodlab::symbol::PolySymbol;

fn main() -> schrodlab::error::Result<()> {
    let symbols = [
        ("(x^2 + y^2)^2", PolySymbol::radial(2, 4)?),
        ("x^4 + y^4", PolySymbol::sum_of_powers(2, 4)?),
        (
            "x^6 + 5 x^2 y^4 + y^6",
            PolySymbol::new(2, 6, vec![(vec![6, 0], 1.0), (vec![2, 4], 5.0), (vec![0, 6], 1.0)])?,
        ),
        (
            "x^4 - x^2 y^2 + y^4",
            PolySymbol::new(2, 4, vec![(vec![4, 0], 1.0), (vec![2, 2], -1.0), (vec![0, 4], 1.0)])?,
        ),
    ];
    let opts = GeometryOptions::for_dim(2);
    println!("{:<24} {:>2} {:>7} {:>11} {:>8}", "symbol", "k", "convex", "margin", "zeros");
    for (name, p) in &symbols {
        let r = analyze(p, &opts)?;
        println!(
            "{:<24} {:>2} {:>7} {:>11.3e} {:>8}",
            name,
            r.k,
            r.convex,
            r.margin,
            r.curvature_zeros.len()
        );
    }

    // the curvature of x^4 + y^4 vanishes on the axes, which is what makes it type 4
    let p = &symbols[1].1;
    println!("\ncurvature along x^4 + y^4 = 1:");
    for sp in sample_surface(p, 16)?.iter().take(5) {
        let angle = sp.xi[1].atan2(sp.xi[0]).to_degrees();
        println!("  {angle:>7.2} deg  K = {:.6}", gaussian_curvature(p, &sp.xi)?);
    }
    Ok(())
}
