//! Exponent tables for the decay, resolvent and potential estimates, and
//! the comparison of the type-2 range with the nondegenerate theory.
//!
//! Run: `cargo run --release --example exponent_tables`

use schrodlab::exponents::{compare_nondegenerate, sweep, Exponents};

fn main() -> schrodlab::error::Result<()> {
    for (m, n, k) in [(4, 2, 2), (4, 2, 4), (6, 3, 4)] {
        let ex = Exponents::new(m, n, k)?;
        println!("(m, n, k) = ({m}, {n}, {k}): h = {:.6}, tau = {:.6}", ex.h, ex.tau);
        println!("  {:>5} {:>9} {:>22} {:>22} {:>6}", "p", "q(p)", "I_p", "I'_p", "n_p");
        for p in [1.0, 1.25, 1.5, 1.75, 2.0] {
            let t = ex.table(p)?;
            println!(
                "  {:>5} {:>9.4} {:>22} {:>22} {:>6.3}",
                p, t.q, t.i_p_bracket, t.i_prime_p_bracket, t.n_p
            );
        }
    }

    println!("\nnondegenerate comparison, m = 8, n = 4:");
    for p in [1.0, 1.5] {
        let c = compare_nondegenerate(8, 4, p)?;
        println!(
            "  p = {p}: ours {} vs {} (proper containment: {:?})",
            c.ours_bracket,
            c.theirs_bracket.as_deref().unwrap_or("-"),
            c.proper_containment
        );
    }

    let s = sweep(&[4, 6, 8], &[2, 3, 4], &[1.0, 1.25, 1.5, 1.75, 2.0], 1e-12)?;
    println!(
        "\nsweep: {} classes, {} cases, {} containment checks, {} violations",
        s.classes,
        s.cases,
        s.containment_checks,
        s.violations.len()
    );
    Ok(())
}
