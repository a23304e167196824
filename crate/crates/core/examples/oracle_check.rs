//! Ensemble of QSD trajectories against the master equation on the same
//! truncated basis, reported as z-scores per checkpoint.
//!
//! cargo run --release --example oracle_check -- [trajectories]

use qsd_duffing::runner::{oracle_check, preset};

fn main() -> qsd_duffing::Result<()> {
    let trajectories: usize = std::env::args()
        .nth(1)
        .map_or(100, |s| s.parse().expect("trajectories"));
    let mut config = preset("oracle")?;
    config.seeds.trajectories = trajectories;
    let dir = tempfile::tempdir()?;
    let o = oracle_check(&config, dir.path(), None)?;
    println!(" period   <Q> ens    oracle    <P> ens    oracle   E ens   oracle");
    for (i, s) in o.oracle.samples.iter().enumerate() {
        println!(
            "{:>7} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>7.4} {:>8.4}",
            i + 1,
            o.ensemble.mean_q[i],
            s.q,
            o.ensemble.mean_p[i],
            s.p,
            o.ensemble.mean_energy[i],
            s.energy
        );
    }
    println!("{} trajectories, max z {:.2}: {}", o.ensemble.count, o.max_z, if o.pass { "pass" } else { "fail" });
    Ok(())
}
