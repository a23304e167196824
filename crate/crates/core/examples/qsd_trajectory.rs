//! One quantum-state-diffusion trajectory of the driven double well, in a
//! moving Fock basis.
//!
//! cargo run --release --example qsd_trajectory -- [beta] [periods] [seed]

use qsd_duffing::fock::{coherent_state, DEFAULT_COHERENT_TOLERANCE};
use qsd_duffing::model::{well_geometry, DuffingModel, ModelParams};
use qsd_duffing::qsd::{evolve, IntegratorConfig};
use qsd_duffing::runner::default_cutoff;
use qsd_duffing::Complex64;

fn main() -> qsd_duffing::Result<()> {
    let mut args = std::env::args().skip(1);
    let beta: f64 = args.next().map_or(0.3, |s| s.parse().expect("beta"));
    let periods: usize = args.next().map_or(40, |s| s.parse().expect("periods"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));

    let params = ModelParams::new(0.3, 0.3, 1.0, beta)?;
    let geometry = well_geometry(&params);
    let cutoff = default_cutoff(beta);
    let model = DuffingModel::new(params, cutoff)?;
    let config = IntegratorConfig {
        cutoff,
        ..Default::default()
    };
    let (psi, _) = coherent_state(Complex64::new(0.7, -0.2), cutoff, DEFAULT_COHERENT_TOLERANCE)?;
    let record = evolve(&psi, &model, &config, periods, 0, seed)?;

    println!("β={beta}  wells at ±{:.3}  N={cutoff}  seed {seed}", geometry.q_well);
    println!("period        βQ        βP    energy   deficit   leakage");
    for s in &record.strobes {
        println!(
            "{:>6} {:>9.4} {:>9.4} {:>9.4} {:>9.1e} {:>9.1e}",
            s.period,
            beta * s.q,
            beta * s.p,
            s.energy,
            s.norm_deficit_max,
            s.leakage_max
        );
    }
    println!("{} frame moves", record.frames.len());
    Ok(())
}
