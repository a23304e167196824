//! Truncated Fock-space linear algebra: states, banded operators,
//! expectation values and displaced-frame bookkeeping.

mod banded;
mod ops;
mod state;

pub use banded::{BandedLu, BandedOperator};
pub use ops::{annihilation, extended_quadratures, number, StandardOps, EXTENSION};
pub use state::{
    apply_displacement, coherent_state, FockState, DEFAULT_COHERENT_TOLERANCE,
    DEFAULT_DISPLACEMENT_TOLERANCE,
};

use num_complex::Complex64;

use crate::error::Result;

/// Operator set `{a, a†, N̂, Q, P, Q², P², Q⁴, QP+PQ}` on `cutoff` levels.
pub fn build_standard_ops(cutoff: usize) -> Result<StandardOps> {
    StandardOps::new(cutoff)
}

/// Exact banded product `A ψ`; the frame is carried over and the result is
/// not renormalized.
pub fn apply(op: &BandedOperator, state: &FockState) -> Result<FockState> {
    Ok(FockState {
        amplitudes: op.apply_vec(&state.amplitudes)?,
        frame_q: state.frame_q,
        frame_p: state.frame_p,
    })
}

pub fn expectation(state: &FockState, op: &BandedOperator) -> Result<Complex64> {
    state.expectation(op)
}

pub fn renormalize(state: FockState) -> Result<(FockState, f64)> {
    state.renormalized()
}

pub fn displace_frame(state: &FockState, dq: f64, dp: f64, tol: f64) -> Result<FockState> {
    state.displace_frame(dq, dp, tol, 1e-6)
}
