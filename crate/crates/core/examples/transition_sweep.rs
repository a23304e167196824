//! β sweep through the runner: per-β low-frequency rise, interwell counts,
//! section dispersion, and the transition verdict.
//!
//! cargo run --release --example transition_sweep -- [fig1|fig3] [periods] [out-dir]
//!
//! The full 600-period sweep over β = 0.1, 0.3, 1.0 takes several minutes
//! per β on one core.

use std::path::PathBuf;

use qsd_duffing::runner::{preset, sweep};

fn main() -> qsd_duffing::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "fig3".into());
    let periods: usize = args.next().map_or(600, |s| s.parse().expect("periods"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| format!("out/{name}")));

    let mut config = preset(&name)?;
    config.model.beta_list = Some(vec![0.1, 0.3, 1.0]);
    config.protocol.periods_total = periods;
    config.protocol.transient_periods = periods / 6;
    let outcome = sweep(&config, &out, None)?;

    println!("    β         R  crossings  tunneling  section rms");
    for r in &outcome.report.rows {
        println!(
            "{:>5} {:>9.3} {:>10} {:>10} {:>12.4}",
            r.beta, r.r, r.interwell_count, r.tunneling_count, r.section_rms
        );
    }
    println!("verdict: {}", outcome.report.verdict);
    for j in &outcome.manifest.jobs {
        for w in &j.warnings {
            println!("β={} note: {w}", j.beta);
        }
        if let Some(c) = &j.cause {
            println!("β={} aborted: {c}", j.beta);
        }
    }
    println!("outputs in {}", out.display());
    Ok(())
}
