//! Interwell crossings of a QSD trajectory, split into over-barrier and
//! below-barrier (tunneling) events.
//!
//! cargo run --release --example tunneling_events -- [periods] [seed]

use qsd_duffing::diagnostics::{tunneling_events, DEFAULT_THRESHOLD_FRACTION};
use qsd_duffing::runner::{preset, simulate, trajectory_diagnostics, trajectory_seed};

fn main() -> qsd_duffing::Result<()> {
    let mut args = std::env::args().skip(1);
    let periods: usize = args.next().map_or(150, |s| s.parse().expect("periods"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    let mut config = preset("fig3")?;
    config.protocol.periods_total = periods;
    config.protocol.transient_periods = periods / 6;
    config.diagnostics.threshold_fraction = DEFAULT_THRESHOLD_FRACTION;

    let beta = 0.3;
    let record = simulate(&config, beta, trajectory_seed(seed, 0, 0))?;
    let diag = trajectory_diagnostics(&record, &config);
    let below = tunneling_events(&diag.events);
    println!(
        "Γ=0.3 β={beta}: {} crossings after period {}, {} below the barrier",
        diag.events.len(),
        config.protocol.transient_periods,
        below.len()
    );
    for e in diag.events.events.iter().take(12) {
        println!(
            "  t={:>8.2}  {:>2}  E={:+.4}{}",
            e.t,
            e.direction,
            e.energy,
            if e.below_barrier { "  tunneling" } else { "" }
        );
    }
    for w in &diag.warnings {
        println!("  note: {w}");
    }
    Ok(())
}
