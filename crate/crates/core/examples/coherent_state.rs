//! Coherent states in a truncated Fock basis, and shifting the basis origin.
//!
//! cargo run --release --example coherent_state

use qsd_duffing::fock::{build_standard_ops, coherent_state, DEFAULT_COHERENT_TOLERANCE};
use qsd_duffing::Complex64;

fn main() -> qsd_duffing::Result<()> {
    let alpha = Complex64::new(0.7, -0.2);
    // tolerance 1 accepts any deficit so small cutoffs can be shown
    for cutoff in [4, 6, 10, 20] {
        let (psi, deficit) = coherent_state(alpha, cutoff, 1.0)?;
        let a = psi.mean_annihilation();
        println!(
            "N={cutoff:>3}  deficit {deficit:.2e}  <a> = {:.6}{:+.6}i  leakage {:.2e}",
            a.re,
            a.im,
            psi.leakage()
        );
    }

    // Centroid is frame-independent; the in-frame amplitudes are not.
    let (psi, _) = coherent_state(alpha, 40, DEFAULT_COHERENT_TOLERANCE)?;
    let moved = psi.displace_frame(0.99, -0.28, 1e-12, 1e-6)?;
    let ops = build_standard_ops(40)?;
    let n_before = psi.expectation(&ops.number)?.re;
    let n_after = moved.expectation(&ops.number)?.re;
    println!("centroid before {:?}", psi.centroid());
    println!("centroid after  {:?}", moved.centroid());
    println!("<n> in frame: {n_before:.4} -> {n_after:.2e}");
    Ok(())
}
