use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_schrodlab"));
    c.env_remove("SCHRODLAB_THREADS");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/configs")
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> i32 {
    bin()
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

fn summary(out: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const RADIAL: &str = r#"{ n = 2, m = 4, terms = [
    { alpha = [4, 0], c = 1.0 }, { alpha = [2, 2], c = 2.0 }, { alpha = [0, 4], c = 1.0 } ] }"#;

#[test]
fn analyze_reports_type_four_and_convex() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    assert_eq!(run("analyze", &configs().join("analyze_sextic.toml"), &out, &[]), 0);
    let s = summary(&out);
    assert_eq!(s["result"]["surface"]["k"], 4);
    assert_eq!(s["result"]["surface"]["convex"], true);
    for f in ["data.csv", "plot.json", "metadata.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let csv = std::fs::read_to_string(out.join("data.csv")).unwrap();
    assert!(csv.starts_with("series,x,y\n"));
}

#[test]
fn exponents_interval_bracket() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "e.toml",
        "symbol = { n = 2, m = 4, terms = [{ alpha = [4, 0], c = 1.0 }, { alpha = [0, 4], c = 1.0 }] }\n[params]\nk = 4\np = [1.0]\n",
    );
    let out = dir.path().join("out");
    assert_eq!(run("exponents", &cfg, &out, &[]), 0);
    let s = summary(&out);
    assert_eq!(s["result"]["tables"][0]["i_p_bracket"], "(6.0, inf]");
    assert_eq!(s["result"]["k"], 4);
}

#[test]
fn malformed_configs_exit_one_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("broken.toml", "symbol = [unterminated".to_string()),
        ("unknown.toml", format!("symbol = {RADIAL}\n[params]\nexpect_kk = 2\n")),
        ("missing.json", r#"{"symbol": "no/such/file.toml"}"#.to_string()),
        ("config.yaml", "symbol: x".to_string()),
        ("wrongkind.toml", format!("kind = \"exponents\"\nsymbol = {RADIAL}\n")),
        ("badgrid.toml", format!("symbol = {RADIAL}\n[params]\ngrid = {{ N = 96, L = 8.0 }}\n")),
    ];
    for (name, text) in cases {
        let cfg = write(dir.path(), name, &text);
        let out = dir.path().join(format!("out-{name}"));
        let sub = if name == "badgrid.toml" { "dispersive" } else { "analyze" };
        assert_eq!(run(sub, &cfg, &out, &[]), 1, "{name}");
        assert!(!out.exists(), "{name} left outputs behind");
    }
}

#[test]
fn failed_assertion_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", &format!("symbol = {RADIAL}\n[params]\nexpect_k = 4\n"));
    let out = dir.path().join("out");
    assert_eq!(run("analyze", &cfg, &out, &[]), 2);
    let s = summary(&out);
    assert_eq!(s["pass"], false);
    assert_eq!(s["checks"][0]["pass"], false);
}

#[test]
fn singular_potential_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "p.toml",
        &format!(
            "symbol = {RADIAL}\n[params]\ngrid = {{ N = 32, L = 8.0 }}\n\
             potential = {{ s1 = 2.0, s2 = \"inf\", descriptor = {{ kind = \"inverse_power\", amplitude = 1.0, exponent = 1.0, radius = 2.0 }} }}\n\
             [params.born]\nlambda = [4.0, 0.0]\n"
        ),
    );
    let out = dir.path().join("out");
    let o = bin().args(["potential", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("singular"));
    assert!(!out.exists());
}

fn small_resolvent(dir: &Path) -> PathBuf {
    write(
        dir,
        "r.toml",
        &format!(
            "kind = \"resolvent\"\nsymbol = {RADIAL}\nseed = 5\n[params]\ngrid = {{ N = 128, L = 16.0 }}\n\
             band = 4.0\nladder = [1.0, 2.0, 4.0]\ntol = 10.0\ntwo_two_tol = 10.0\n"
        ),
    )
}

#[test]
fn summaries_are_byte_identical_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_resolvent(dir.path());
    let mut bodies = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}"));
        let code = bin()
            .env("SCHRODLAB_THREADS", threads)
            .args(["resolvent", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap()
            .code();
        assert_eq!(code, Some(0));
        bodies.push((std::fs::read(out.join("summary.json")).unwrap(), std::fs::read(out.join("data.csv")).unwrap()));
        let meta: Value = serde_json::from_slice(&std::fs::read(out.join("metadata.json")).unwrap()).unwrap();
        assert_eq!(meta["threads"].as_u64().unwrap().to_string(), threads);
    }
    assert!(bodies[0] == bodies[1], "reports differ between thread counts");
}

#[test]
fn seed_flag_overrides_config_and_changes_probes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_resolvent(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run("resolvent", &cfg, &a, &[]), 0);
    assert_eq!(run("resolvent", &cfg, &b, &["--seed", "6"]), 0);
    let (sa, sb) = (summary(&a), summary(&b));
    assert_eq!(sa["seed"], 5);
    assert_eq!(sb["seed"], 6);
    assert_ne!(sa["result"]["probe"], sb["result"]["probe"]);
}

#[test]
fn reports_embed_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_resolvent(dir.path());
    let out = dir.path().join("o");
    assert_eq!(run("resolvent", &cfg, &out, &[]), 0);
    let s = summary(&out);
    assert_eq!(s["symbol"]["m"], 4);
    assert_eq!(s["result"]["grid"]["points_per_axis"], 128);
    assert_eq!(s["params"]["ladder"], serde_json::json!([1.0, 2.0, 4.0]));
    assert_eq!(s["params"]["identity_tol"], 1e-11);
    assert!(s["explicit_params"].as_array().unwrap().iter().any(|k| k == "ladder"));
}

#[test]
fn suite_runs_entries_and_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let c = configs();
    let suite = write(
        dir.path(),
        "suite.json",
        &serde_json::json!({
            "kind": "suite",
            "runs": [c.join("analyze_radial4.toml"), c.join("analyze_nonconvex.json"), c.join("exponents_sum4.toml")]
        })
        .to_string(),
    );
    let out = dir.path().join("s");
    assert_eq!(run("suite", &suite, &out, &[]), 0);
    let s = summary(&out);
    assert_eq!(s["runs"].as_array().unwrap().len(), 3);
    assert!(out.join("analyze_nonconvex/summary.json").exists());
}

#[test]
fn toml_and_json_configs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let toml_cfg = write(dir.path(), "x.toml", &format!("symbol = {RADIAL}\n[params]\nexpect_k = 2\n"));
    let json_cfg = write(
        dir.path(),
        "x.json",
        r#"{"symbol": {"n": 2, "m": 4, "terms": [{"alpha": [4, 0], "c": 1.0}, {"alpha": [2, 2], "c": 2.0}, {"alpha": [0, 4], "c": 1.0}]},
            "params": {"expect_k": 2}}"#,
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run("analyze", &toml_cfg, &a, &[]), 0);
    assert_eq!(run("analyze", &json_cfg, &b, &[]), 0);
    assert_eq!(std::fs::read(a.join("summary.json")).unwrap(), std::fs::read(b.join("summary.json")).unwrap());
}

#[test]
fn help_exits_zero_and_bad_flags_exit_one() {
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(bin().args(["analyze"]).output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["frobnicate", "--config", "x.toml"]).output().unwrap().status.code(), Some(1));
}
