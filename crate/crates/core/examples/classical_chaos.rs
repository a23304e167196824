//! Classical driven Duffing oscillator: Lyapunov exponents and strobed
//! sections for the chaotic (Γ = 0.125) and regular (Γ = 0.3) damping.
//!
//! cargo run --release --example classical_chaos

use qsd_duffing::classical::{integrate, lyapunov, ClassicalState, LyapunovConfig, Sampling};
use qsd_duffing::model::ModelParams;

fn main() -> qsd_duffing::Result<()> {
    let s0 = ClassicalState::new(0.7 * 2f64.sqrt(), -0.2 * 2f64.sqrt());
    for gamma in [0.125, 0.3] {
        let params = ModelParams::new(gamma, 0.3, 1.0, 1.0)?;
        let lyap = lyapunov(&params, s0, &LyapunovConfig::default())?;
        let dt = params.period() / 1000.0;
        let section = integrate(s0, &params, dt, 600.0 * params.period(), Sampling::Strobe)?;
        let post = &section.samples[100..];
        let distinct = post
            .windows(2)
            .filter(|w| (w[0].q - w[1].q).hypot(w[0].p - w[1].p) > 1e-6)
            .count();
        let hops = post.windows(2).filter(|w| w[0].q.signum() != w[1].q.signum()).count();
        println!(
            "Γ={gamma:<5}  λ_max {:+.4}  λ_min {:+.4}  sum {:+.4} (−2Γ = {:+.4})",
            lyap.lambda_max,
            lyap.lambda_min,
            lyap.lambda_max + lyap.lambda_min,
            -2.0 * gamma
        );
        println!("          section: {distinct} distinct successive points, {hops} sign changes");
        for s in post.iter().take(5) {
            println!("          ({:+.4}, {:+.4})", s.q, s.p);
        }
    }
    Ok(())
}
