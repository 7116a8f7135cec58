//! Drive an experiment from a config file through the library runner, the
//! same path the `schrodlab` binary takes.
//!
//! Run: `cargo run --release --example run_config -- [kind] [config] [out]`

use schrodlab::cli::{run_one, Kind};
use std::path::PathBuf;

fn main() -> schrodlab::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind = match args.next().as_deref() {
        None | Some("analyze") => Kind::Analyze,
        Some("exponents") => Kind::Exponents,
        Some("potential") => Kind::Potential,
        Some(other) => {
            eprintln!("this example handles analyze, exponents and potential (got {other})");
            std::process::exit(1);
        }
    };
    let default = match kind {
        Kind::Exponents => "exponents_sum4.toml",
        Kind::Potential => "potential_bump.toml",
        _ => "analyze_sextic.toml",
    };
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/configs").join(default));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("schrodlab-example"));
    let o = run_one(kind, &config, Some(&out), None)?;
    for c in o.summary["checks"].as_array().into_iter().flatten() {
        println!("{:<5} {} = {} (target {})", if c["pass"] == true { "pass" } else { "FAIL" }, c["name"], c["value"], c["target"]);
    }
    println!("reports in {}", o.out_dir.display());
    Ok(())
}
