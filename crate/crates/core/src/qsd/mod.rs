//! Quantum state diffusion trajectories in a moving Fock basis.

mod integrator;
mod noise;

pub use integrator::{
    evolve, evolve_with_noise, maybe_recenter, qsd_step, FineSample, FrameEvent,
    HamiltonianScheme, IntegratorConfig, QsdStepper, StepReport, StrobeSample, TrajectoryRecord,
};
pub use noise::{NoiseSource, NoiseStream, PairSummed, Silent};

use num_complex::Complex64;

/// One increment `dξ` from `stream`.
pub fn sample_noise(stream: &mut NoiseStream, dt: f64) -> Complex64 {
    stream.sample(dt)
}
