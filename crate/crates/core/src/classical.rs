//! Classical reference dynamics `q̈ + 2Γq̇ + q³ − q = g cos(Ωt)`.
//!
//! Fixed-step RK4, strobed Poincaré sampling and Benettin Lyapunov
//! exponents from the co-integrated tangent flow.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Default steps per drive period.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 1000;

const DIVERGENCE: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassicalState {
    pub q: f64,
    pub p: f64,
    pub t: f64,
}

impl ClassicalState {
    pub fn new(q: f64, p: f64) -> Self {
        Self { q, p, t: 0.0 }
    }

    /// `p²/2 + q⁴/4 − q²/2`, the undriven energy.
    pub fn energy(&self) -> f64 {
        0.5 * self.p * self.p + 0.25 * self.q.powi(4) - 0.5 * self.q * self.q
    }

    fn check(&self) -> Result<()> {
        if !self.q.is_finite() || !self.p.is_finite() || self.q.abs() > DIVERGENCE {
            return Err(Error::NonFinite(format!(
                "classical state diverged at t = {}",
                self.t
            )));
        }
        Ok(())
    }
}

/// Tangent-space displacement `(dq, dp)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVector {
    pub dq: f64,
    pub dp: f64,
}

impl TangentVector {
    fn norm(&self) -> f64 {
        self.dq.hypot(self.dp)
    }
}

/// `(dq/dt, dp/dt)`; β does not enter.
pub fn classical_rhs(s: &ClassicalState, params: &ModelParams) -> (f64, f64) {
    let force = s.q - s.q.powi(3) + params.g * (params.omega * s.t).cos();
    (s.p, -2.0 * params.gamma * s.p + force)
}

fn tangent_rhs(s: &ClassicalState, v: &TangentVector, params: &ModelParams) -> (f64, f64) {
    (v.dp, -2.0 * params.gamma * v.dp + (1.0 - 3.0 * s.q * s.q) * v.dq)
}

pub fn rk4_step(s: &ClassicalState, params: &ModelParams, dt: f64) -> ClassicalState {
    rk4_step_with_tangents(s, &mut [], params, dt)
}

fn shifted(s: &ClassicalState, k: (f64, f64), h: f64) -> ClassicalState {
    ClassicalState {
        q: s.q + h * k.0,
        p: s.p + h * k.1,
        t: s.t + h,
    }
}

fn shifted_tangent(v: &TangentVector, k: (f64, f64), h: f64) -> TangentVector {
    TangentVector {
        dq: v.dq + h * k.0,
        dp: v.dp + h * k.1,
    }
}

/// One RK4 step of the state together with its variational equations.
fn rk4_step_with_tangents(
    s: &ClassicalState,
    tangents: &mut [TangentVector],
    params: &ModelParams,
    dt: f64,
) -> ClassicalState {
    let h = 0.5 * dt;
    let k1 = classical_rhs(s, params);
    let s2 = shifted(s, k1, h);
    let k2 = classical_rhs(&s2, params);
    let s3 = shifted(s, k2, h);
    let k3 = classical_rhs(&s3, params);
    let s4 = shifted(s, k3, dt);
    let k4 = classical_rhs(&s4, params);

    for v in tangents.iter_mut() {
        let l1 = tangent_rhs(s, v, params);
        let l2 = tangent_rhs(&s2, &shifted_tangent(v, l1, h), params);
        let l3 = tangent_rhs(&s3, &shifted_tangent(v, l2, h), params);
        let l4 = tangent_rhs(&s4, &shifted_tangent(v, l3, dt), params);
        v.dq += dt / 6.0 * (l1.0 + 2.0 * l2.0 + 2.0 * l3.0 + l4.0);
        v.dp += dt / 6.0 * (l1.1 + 2.0 * l2.1 + 2.0 * l3.1 + l4.1);
    }

    ClassicalState {
        q: s.q + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        p: s.p + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        t: s.t + dt,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    EveryStep,
    /// Once per drive period, at exact multiples of `2π/Ω`.
    Strobe,
}

#[derive(Clone, Debug)]
pub struct ClassicalTrajectory {
    pub params: ModelParams,
    pub dt: f64,
    pub sampling: Sampling,
    /// Sampled states; the initial state is not included.
    pub samples: Vec<ClassicalState>,
}

/// RK4 from `s0` over `[s0.t, s0.t + t_total]`.
///
/// Strobe sampling requires `dt` to divide the drive period.
pub fn integrate(
    s0: ClassicalState,
    params: &ModelParams,
    dt: f64,
    t_total: f64,
    sampling: Sampling,
) -> Result<ClassicalTrajectory> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let steps = (t_total / dt).round() as usize;
    let per_period = (params.period() / dt).round() as usize;
    if sampling == Sampling::Strobe
        && ((per_period as f64) * dt - params.period()).abs() > 1e-9 * params.period()
    {
        return Err(Error::InvalidParameter(format!(
            "dt = {dt} does not divide the drive period"
        )));
    }
    let mut samples = Vec::with_capacity(match sampling {
        Sampling::EveryStep => steps,
        Sampling::Strobe => steps / per_period.max(1),
    });
    let mut s = s0;
    for i in 1..=steps {
        s = rk4_step(&s, params, dt);
        s.check()?;
        match sampling {
            Sampling::EveryStep => samples.push(s),
            Sampling::Strobe if i % per_period == 0 => {
                let k = i / per_period;
                samples.push(ClassicalState {
                    t: s0.t + k as f64 * params.period(),
                    ..s
                });
            }
            Sampling::Strobe => {}
        }
    }
    Ok(ClassicalTrajectory {
        params: *params,
        dt,
        sampling,
        samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapunovConfig {
    pub steps_per_period: usize,
    pub total_periods: usize,
    pub transient_periods: usize,
    /// Steps between Gram–Schmidt renormalizations.
    pub renorm_interval: usize,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self {
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            total_periods: 5000,
            transient_periods: 100,
            renorm_interval: 10,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LyapunovEstimate {
    /// Largest exponent.
    pub lambda_max: f64,
    /// Second exponent; `λ₁ + λ₂ = −2Γ` for this flow.
    pub lambda_min: f64,
    /// Running estimate of `λ_max` sampled once per period after the transient.
    pub running: Vec<(f64, f64)>,
}

/// Benettin estimate of both Lyapunov exponents.
pub fn lyapunov(
    params: &ModelParams,
    s0: ClassicalState,
    config: &LyapunovConfig,
) -> Result<LyapunovEstimate> {
    if config.total_periods <= config.transient_periods || config.renorm_interval == 0 {
        return Err(Error::InvalidParameter(
            "need total_periods > transient_periods and renorm_interval > 0".into(),
        ));
    }
    let dt = params.period() / config.steps_per_period as f64;
    let mut s = s0;
    let transient_steps = config.transient_periods * config.steps_per_period;
    for _ in 0..transient_steps {
        s = rk4_step(&s, params, dt);
        s.check()?;
    }

    let mut tangents = [
        TangentVector { dq: 1.0, dp: 0.0 },
        TangentVector { dq: 0.0, dp: 1.0 },
    ];
    let mut sums = [0.0f64; 2];
    let t_start = s.t;
    let measure_steps = (config.total_periods - config.transient_periods) * config.steps_per_period;
    let mut running = Vec::new();
    for i in 1..=measure_steps {
        s = rk4_step_with_tangents(&s, &mut tangents, params, dt);
        s.check()?;
        if i % config.renorm_interval == 0 || i == measure_steps {
            // Gram–Schmidt on the pair.
            let n0 = tangents[0].norm();
            let e0 = TangentVector {
                dq: tangents[0].dq / n0,
                dp: tangents[0].dp / n0,
            };
            let proj = e0.dq * tangents[1].dq + e0.dp * tangents[1].dp;
            let w = TangentVector {
                dq: tangents[1].dq - proj * e0.dq,
                dp: tangents[1].dp - proj * e0.dp,
            };
            let n1 = w.norm();
            sums[0] += n0.ln();
            sums[1] += n1.ln();
            tangents = [
                e0,
                TangentVector {
                    dq: w.dq / n1,
                    dp: w.dp / n1,
                },
            ];
        }
        if i % config.steps_per_period == 0 {
            let elapsed = s.t - t_start;
            running.push((s.t, sums[0] / elapsed));
        }
    }
    let elapsed = s.t - t_start;
    Ok(LyapunovEstimate {
        lambda_max: sums[0] / elapsed,
        lambda_min: sums[1] / elapsed,
        running,
    })
}

/// Largest Lyapunov exponent; see [`lyapunov`].
pub fn lyapunov_max(
    params: &ModelParams,
    s0: ClassicalState,
    config: &LyapunovConfig,
) -> Result<f64> {
    Ok(lyapunov(params, s0, config)?.lambda_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(gamma: f64, g: f64) -> ModelParams {
        ModelParams::new(gamma, g, 1.0, 1.0).unwrap()
    }

    #[test]
    fn rhs_fixed_points_and_drive() {
        let p = params(0.3, 0.0);
        assert_eq!(classical_rhs(&ClassicalState::new(1.0, 0.0), &p), (0.0, 0.0));
        assert_eq!(classical_rhs(&ClassicalState::new(-1.0, 0.0), &p), (0.0, 0.0));
        assert_eq!(classical_rhs(&ClassicalState::new(0.0, 0.0), &p), (0.0, 0.0));
        let p = params(0.3, 0.3);
        assert_eq!(classical_rhs(&ClassicalState::new(0.0, 0.0), &p), (0.0, 0.3));
    }

    fn energy_drift(steps_per_period: usize) -> f64 {
        let p = params(0.0, 0.0);
        let s0 = ClassicalState::new(1.5, 0.5);
        let dt = p.period() / steps_per_period as f64;
        let traj = integrate(s0, &p, dt, 100.0 * p.period(), Sampling::Strobe).unwrap();
        let e0 = s0.energy();
        traj.samples
            .iter()
            .map(|s| ((s.energy() - e0) / e0).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn conservative_energy_drift_is_small_and_fourth_order() {
        let coarse = energy_drift(250);
        let fine = energy_drift(500);
        let default = energy_drift(DEFAULT_STEPS_PER_PERIOD);
        assert!(default < 1e-8, "drift {default}");
        let order = (coarse / fine).log2();
        // At least fourth order; the secular RK4 energy error can converge faster.
        assert!(order > 3.5, "observed order {order}");
    }

    #[test]
    fn damped_motion_relaxes_into_a_well() {
        let p = params(0.3, 0.0);
        let dt = p.period() / 1000.0;
        let traj = integrate(ClassicalState::new(2.0, 0.0), &p, dt, 60.0 * p.period(), Sampling::Strobe)
            .unwrap();
        let last = traj.samples.last().unwrap();
        assert!((last.q.abs() - 1.0).abs() < 1e-6 && last.p.abs() < 1e-6);
    }

    #[test]
    fn strobe_count() {
        let p = params(0.3, 0.3);
        let dt = p.period() / 1000.0;
        let traj = integrate(ClassicalState::new(1.0, 0.0), &p, dt, 500.0 * p.period(), Sampling::Strobe)
            .unwrap();
        assert_eq!(traj.samples.len(), 500);
        let t_last = traj.samples.last().unwrap().t;
        assert_eq!(t_last, 500.0 * p.period());
    }

    #[test]
    fn strobe_requires_commensurate_step() {
        let p = params(0.3, 0.3);
        assert!(integrate(ClassicalState::new(1.0, 0.0), &p, 0.0123, 10.0, Sampling::Strobe).is_err());
    }

    #[test]
    fn time_reversal_without_damping() {
        let p = params(0.0, 0.0);
        let s0 = ClassicalState::new(0.7, -0.3);
        let dt = p.period() / 1000.0;
        let mut s = s0;
        for _ in 0..5000 {
            s = rk4_step(&s, &p, dt);
        }
        for _ in 0..5000 {
            s = rk4_step(&s, &p, -dt);
        }
        assert!((s.q - s0.q).abs() < 1e-8 && (s.p - s0.p).abs() < 1e-8);
    }

    #[test]
    fn fixed_point_attractor_has_negative_exponent() {
        let p = params(0.3, 0.0);
        let cfg = LyapunovConfig {
            total_periods: 300,
            ..Default::default()
        };
        let est = lyapunov(&p, ClassicalState::new(2.0, 0.0), &cfg).unwrap();
        assert!(est.lambda_max < 0.0);
        assert!(((est.lambda_max + est.lambda_min) + 0.6).abs() < 0.03);
    }
}
