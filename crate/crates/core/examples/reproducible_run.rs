//! Checksummed outputs: run a short configuration, then re-run it from its
//! manifest and compare every file.
//!
//! cargo run --release --example reproducible_run

use qsd_duffing::runner::{parse_config, run, verify_manifest, MANIFEST_FILE};

const CONFIG: &str = r#"
[model]
gamma = 0.3
beta = 1.0

[protocol]
periods_total = 12
transient_periods = 2
fine_samples_per_period = 32

[seeds]
base = 11
trajectories = 2
"#;

fn main() -> qsd_duffing::Result<()> {
    let config = parse_config(CONFIG)?;
    let first = tempfile::tempdir()?;
    let outcome = run(&config, first.path(), None)?;
    for f in outcome.manifest.all_files() {
        println!("{}  {}", &f.sha256[..16], f.path);
    }
    let second = tempfile::tempdir()?;
    let checks = verify_manifest(&first.path().join(MANIFEST_FILE), second.path(), None)?;
    let matched = checks.iter().filter(|c| c.matches()).count();
    println!("re-run: {matched}/{} files identical", checks.len());
    Ok(())
}
