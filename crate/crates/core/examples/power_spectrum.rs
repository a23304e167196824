//! Hann-windowed periodogram, log-log spline smoothing and the
//! low-frequency rise `R`, on a classical chaotic series and a regular one.
//!
//! cargo run --release --example power_spectrum

use qsd_duffing::classical::{integrate, ClassicalState, Sampling};
use qsd_duffing::diagnostics::{
    low_freq_rise, periodogram, spline_smooth, Bands, DEFAULT_KNOT_COUNT,
};
use qsd_duffing::model::ModelParams;

fn main() -> qsd_duffing::Result<()> {
    let s0 = ClassicalState::new(0.99, -0.28);
    let bands = Bands::default();
    for gamma in [0.125, 0.3] {
        let params = ModelParams::new(gamma, 0.3, 1.0, 1.0)?;
        let dt = params.period() / 1024.0;
        let traj = integrate(s0, &params, dt, 600.0 * params.period(), Sampling::EveryStep)?;
        // 16 samples per period after a 100-period transient
        let q: Vec<f64> = traj.samples[100 * 1024..].iter().step_by(64).map(|s| s.q).collect();
        let raw = periodogram(&q, 64.0 * dt)?;
        let smooth = spline_smooth(&raw, DEFAULT_KNOT_COUNT)?;
        let r = low_freq_rise(&smooth, params.omega, &bands)?;
        println!("Γ={gamma}: {} bins, Δϖ={:.4}, R={r:+.3}", raw.omega.len(), raw.delta_omega());
        for target in [0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0] {
            let i = smooth
                .omega
                .iter()
                .position(|&w| w >= target)
                .unwrap_or(smooth.omega.len() - 1);
            println!(
                "   ϖ={:<6.3} raw {:>10.3e}  smooth {:>10.3e}",
                smooth.omega[i], raw.raw[i], smooth.smooth[i]
            );
        }
    }
    Ok(())
}
