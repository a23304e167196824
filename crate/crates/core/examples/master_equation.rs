//! Dense master-equation evolution of the driven double well: trace,
//! purity and positivity along the way.
//!
//! cargo run --release --example master_equation

use qsd_duffing::fock::{coherent_state, DEFAULT_COHERENT_TOLERANCE};
use qsd_duffing::lindblad::{evolve_density, DensityMatrix};
use qsd_duffing::model::{DuffingModel, ModelParams};
use qsd_duffing::Complex64;

fn main() -> qsd_duffing::Result<()> {
    let cutoff = 30;
    let model = DuffingModel::new(ModelParams::new(0.3, 0.3, 1.0, 1.0)?, cutoff)?;
    let (psi, _) = coherent_state(Complex64::new(0.7, -0.2), cutoff, DEFAULT_COHERENT_TOLERANCE)?;
    let rho = DensityMatrix::from_pure(&psi)?;
    let period = model.params.period();
    let checkpoints: Vec<f64> = (0..=5).map(|k| k as f64 * period).collect();
    let series = evolve_density(&rho, &model, period / 4096.0, &checkpoints)?;
    println!("     t       <Q>       <P>    energy    purity   min eig");
    for s in &series.samples {
        println!(
            "{:>6.2} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.1e}",
            s.t, s.q, s.p, s.energy, s.purity, s.min_eigenvalue
        );
    }
    println!(
        "{} steps, max trace drift {:.1e}, max hermiticity drift {:.1e}",
        series.steps, series.max_trace_drift, series.max_hermiticity_drift
    );
    Ok(())
}
