use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::noise::{NoiseSource, NoiseStream};
use crate::error::{Error, Result};
use crate::fock::{BandedLu, BandedOperator, FockState, DEFAULT_DISPLACEMENT_TOLERANCE};
use crate::model::{DuffingModel, FrameOperators, ModelParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Treatment of the `−iHψ dt` term within the Euler–Maruyama step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HamiltonianScheme {
    /// Plain explicit Euler, using `H − ⟨H⟩`.
    Explicit,
    /// Trapezoidal (Crank–Nicolson) at the step midpoint; the dissipative
    /// drift and the noise stay explicit.
    CrankNicolson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub steps_per_period: usize,
    pub hamiltonian: HamiltonianScheme,
    /// Heun predictor-corrector on the dissipative drift.
    pub predictor_corrector: bool,
    /// In-frame centroid distance that triggers a frame move.
    pub recenter_threshold: f64,
    pub moving_frame: bool,
    pub cutoff: usize,
    /// Bound on the top-two-level population.
    pub leakage_bound: f64,
    pub renormalize_every_step: bool,
    /// Fine samples per drive period (0 disables the fine series).
    pub fine_samples_per_period: usize,
    pub displacement_tolerance: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            steps_per_period: 4096,
            hamiltonian: HamiltonianScheme::CrankNicolson,
            predictor_corrector: false,
            recenter_threshold: 1.0,
            moving_frame: true,
            cutoff: 64,
            leakage_bound: 1e-6,
            renormalize_every_step: true,
            fine_samples_per_period: 1,
            displacement_tolerance: DEFAULT_DISPLACEMENT_TOLERANCE,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_period < 256 {
            return Err(Error::InvalidParameter(format!(
                "steps_per_period must be at least 256, got {}",
                self.steps_per_period
            )));
        }
        if !(self.recenter_threshold > 0.0) {
            return Err(Error::InvalidParameter("recenter_threshold must be positive".into()));
        }
        if self.cutoff < 4 {
            return Err(Error::CutoffTooSmall(self.cutoff));
        }
        if self.fine_samples_per_period > 0 && self.steps_per_period % self.fine_samples_per_period != 0 {
            return Err(Error::InvalidParameter(
                "fine_samples_per_period must divide steps_per_period".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    /// `|1 − ‖ψ‖²|` before renormalization.
    pub deficit: f64,
    pub leakage: f64,
}

/// One-trajectory integrator state: cached frame operators and scratch
/// buffers. Operators are rebuilt only when the state's frame moves.
#[derive(Clone, Debug)]
pub struct QsdStepper {
    params: ModelParams,
    config: IntegratorConfig,
    ops: FrameOperators,
    drive_wide: BandedOperator,
    system: BandedOperator,
    lu: BandedLu,
    k_psi: Vec<Complex64>,
    kk_psi: Vec<Complex64>,
    h_psi: Vec<Complex64>,
    rhs: Vec<Complex64>,
    predicted: Vec<Complex64>,
}

impl QsdStepper {
    pub fn new(model: &DuffingModel, config: IntegratorConfig) -> Result<Self> {
        config.validate()?;
        if model.cutoff() != config.cutoff {
            return Err(Error::CutoffMismatch {
                expected: config.cutoff,
                found: model.cutoff(),
            });
        }
        let ops = model.frame_operators(0.0, 0.0)?;
        Self::from_operators(model.params, config, ops)
    }

    /// Stepper over arbitrary operators (used for test models such as the
    /// damped harmonic oscillator). `ops.h_static` must have bandwidth ≥ 1.
    pub fn from_operators(
        params: ModelParams,
        config: IntegratorConfig,
        ops: FrameOperators,
    ) -> Result<Self> {
        let n = ops.cutoff();
        let b = ops.h_static.half_bandwidth().max(1);
        let h_static = ops.h_static.widened(b);
        let drive_wide = ops.drive.widened(b);
        let system = BandedOperator::identity(n).widened(b);
        let lu = BandedLu::factor(&system)?;
        Ok(Self {
            params,
            config,
            ops: FrameOperators { h_static, ..ops },
            drive_wide,
            system,
            lu,
            k_psi: vec![ZERO; n],
            kk_psi: vec![ZERO; n],
            h_psi: vec![ZERO; n],
            rhs: vec![ZERO; n],
            predicted: vec![ZERO; n],
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.config
    }

    pub fn operators(&self) -> &FrameOperators {
        &self.ops
    }

    /// Rebuilds the frame operators if the state's frame differs.
    pub fn sync_frame(&mut self, state: &FockState) -> Result<()> {
        if state.frame_q == self.ops.frame_q && state.frame_p == self.ops.frame_p {
            return Ok(());
        }
        let model = DuffingModel::new(self.params, self.config.cutoff)?;
        let ops = model.frame_operators(state.frame_q, state.frame_p)?;
        let b = self.ops.h_static.half_bandwidth();
        self.drive_wide = ops.drive.widened(b);
        self.ops = FrameOperators {
            h_static: ops.h_static.widened(b),
            ..ops
        };
        Ok(())
    }

    /// Dissipative drift `(⟨K†⟩K − ½K†K − ½|⟨K⟩|²)ψ`, accumulated as
    /// `out += scale · drift`. Also leaves `Kψ` in `self.k_psi`.
    fn add_drift(&mut self, psi: &[Complex64], scale: f64, out: &mut [Complex64]) -> Result<Complex64> {
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        self.ops.k.apply_into(psi, &mut self.k_psi)?;
        let mean_k: Complex64 = psi
            .iter()
            .zip(&self.k_psi)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            / norm;
        self.ops.k_dag_k.apply_into(psi, &mut self.kk_psi)?;
        let mk_conj = mean_k.conj();
        let c0 = -0.5 * mean_k.norm_sqr();
        for i in 0..psi.len() {
            out[i] += scale * (mk_conj * self.k_psi[i] - 0.5 * self.kk_psi[i] + c0 * psi[i]);
        }
        Ok(mean_k)
    }

    /// One step of the stochastic Schrödinger equation
    /// `dψ = −iHψ dt + (⟨K†⟩K − ½K†K − ½⟨K†⟩⟨K⟩)ψ dt + (K − ⟨K⟩)ψ dξ`.
    pub fn step(&mut self, state: &mut FockState, t: f64, dt: f64, dxi: Complex64) -> Result<StepReport> {
        self.sync_frame(state)?;
        let n = state.cutoff();
        let psi = std::mem::take(&mut state.amplitudes);
        let mut rhs = std::mem::take(&mut self.rhs);
        let result = self.step_inner(&psi, &mut rhs, t, dt, dxi);
        state.amplitudes = psi;
        debug_assert_eq!(rhs.len(), n);
        if let Err(e) = result {
            self.rhs = rhs;
            return Err(e);
        }
        state.amplitudes.copy_from_slice(&rhs);
        self.rhs = rhs;

        if state.amplitudes.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("amplitudes after step (dt too large?)".into()));
        }
        let deficit = if self.config.renormalize_every_step {
            state.renormalize()?
        } else {
            (1.0 - state.norm_sqr()).abs()
        };
        let leakage = state.leakage();
        if leakage > self.config.leakage_bound {
            return Err(Error::Leakage {
                leakage,
                bound: self.config.leakage_bound,
            });
        }
        Ok(StepReport { deficit, leakage })
    }

    fn step_inner(
        &mut self,
        psi: &[Complex64],
        rhs: &mut [Complex64],
        t: f64,
        dt: f64,
        dxi: Complex64,
    ) -> Result<()> {
        let n = psi.len();
        rhs.copy_from_slice(psi);
        let mean_k = self.add_drift(psi, dt, rhs)?;
        for i in 0..n {
            rhs[i] += (self.k_psi[i] - mean_k * psi[i]) * dxi;
        }

        if self.config.predictor_corrector {
            // Predictor with the explicit Hamiltonian, then average the drift.
            let c = self.params.drive(t);
            self.hamiltonian_apply(psi, c)?;
            let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
            let mean_h: Complex64 =
                psi.iter().zip(&self.h_psi).map(|(a, b)| a.conj() * b).sum::<Complex64>() / norm;
            let mut predicted = std::mem::take(&mut self.predicted);
            for i in 0..n {
                predicted[i] = rhs[i] - I * dt * (self.h_psi[i] - mean_h * psi[i]);
            }
            let mut correction = vec![ZERO; n];
            self.add_drift(&predicted, 0.5 * dt, &mut correction)?;
            self.add_drift(psi, -0.5 * dt, &mut correction)?;
            for i in 0..n {
                rhs[i] += correction[i];
            }
            self.predicted = predicted;
        }

        match self.config.hamiltonian {
            HamiltonianScheme::Explicit => {
                let c = self.params.drive(t);
                self.hamiltonian_apply(psi, c)?;
                let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
                let mean_h: Complex64 = psi
                    .iter()
                    .zip(&self.h_psi)
                    .map(|(a, b)| a.conj() * b)
                    .sum::<Complex64>()
                    / norm;
                for i in 0..n {
                    rhs[i] -= I * dt * (self.h_psi[i] - mean_h * psi[i]);
                }
            }
            HamiltonianScheme::CrankNicolson => {
                let c = self.params.drive(t + 0.5 * dt);
                self.hamiltonian_apply(psi, c)?;
                for i in 0..n {
                    rhs[i] -= I * (0.5 * dt) * self.h_psi[i];
                }
                // (I + i dt/2 H) ψ' = rhs
                let s = I * (0.5 * dt);
                {
                    let hs = self.ops.h_static.raw();
                    let dr = self.drive_wide.raw();
                    let b = self.ops.h_static.half_bandwidth();
                    let w = 2 * b + 1;
                    let sys = self.system.raw_mut();
                    for (i, v) in sys.iter_mut().enumerate() {
                        let diag = if i % w == b { 1.0 } else { 0.0 };
                        *v = Complex64::new(diag, 0.0) + s * (hs[i] + c * dr[i]);
                    }
                }
                self.lu.refactor(&self.system)?;
                self.lu.solve_in_place(rhs)?;
            }
        }
        Ok(())
    }

    fn hamiltonian_apply(&mut self, psi: &[Complex64], drive: f64) -> Result<()> {
        self.ops.h_static.apply_into(psi, &mut self.h_psi)?;
        self.ops.drive.apply_add(drive.into(), psi, &mut self.h_psi)
    }

    /// Moves the frame to the physical centroid when the in-frame centroid
    /// lies farther than the threshold from the origin. Returns whether a
    /// move happened.
    pub fn maybe_recenter(&mut self, state: &mut FockState) -> Result<bool> {
        if !self.config.moving_frame {
            return Ok(false);
        }
        let (q, p) = state.frame_centroid();
        if q.hypot(p) <= self.config.recenter_threshold {
            return Ok(false);
        }
        *state = state.displace_frame(
            q,
            p,
            self.config.displacement_tolerance,
            self.config.leakage_bound,
        )?;
        self.sync_frame(state)?;
        Ok(true)
    }

    /// Physical `(⟨Q⟩, ⟨P⟩, ⟨H_D⟩)` of a state in the stepper's frame.
    pub fn observe(&mut self, state: &FockState) -> Result<(f64, f64, f64)> {
        self.sync_frame(state)?;
        let (q, p) = state.centroid();
        let e = state.expectation(&self.ops.h_d)?.re;
        Ok((q, p, e))
    }
}

/// Single step on explicit frame operators; see [`QsdStepper::step`].
pub fn qsd_step(
    state: &FockState,
    t: f64,
    model: &DuffingModel,
    config: &IntegratorConfig,
    dt: f64,
    dxi: Complex64,
) -> Result<(FockState, StepReport)> {
    let mut stepper = QsdStepper::new(model, config.clone())?;
    let mut next = state.clone();
    let report = stepper.step(&mut next, t, dt, dxi)?;
    Ok((next, report))
}

/// Moves the frame of `state` to its centroid if the in-frame centroid
/// exceeds `config.recenter_threshold`.
pub fn maybe_recenter(state: &FockState, config: &IntegratorConfig) -> Result<FockState> {
    let (q, p) = state.frame_centroid();
    if !config.moving_frame || q.hypot(p) <= config.recenter_threshold {
        return Ok(state.clone());
    }
    state.displace_frame(q, p, config.displacement_tolerance, config.leakage_bound)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrobeSample {
    pub period: usize,
    pub t: f64,
    pub q: f64,
    pub p: f64,
    pub energy: f64,
    pub norm_deficit_max: f64,
    pub leakage_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FineSample {
    pub t: f64,
    pub q: f64,
    pub p: f64,
    pub energy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameEvent {
    pub t: f64,
    pub frame_q: f64,
    pub frame_p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub params: ModelParams,
    pub seed: u64,
    pub cutoff: usize,
    pub steps_per_period: usize,
    pub transient_periods: usize,
    /// Samples at `t_k = 2πk/Ω`, `k = 1..=periods_total`.
    pub strobes: Vec<StrobeSample>,
    /// Samples at the configured fine rate, starting at `t = 0`.
    pub fine: Vec<FineSample>,
    pub fine_samples_per_period: usize,
    pub frames: Vec<FrameEvent>,
}

impl TrajectoryRecord {
    pub fn fine_interval(&self) -> f64 {
        self.params.period() / self.fine_samples_per_period as f64
    }
}

/// Integrates one trajectory with noise drawn from `NoiseStream::new(seed)`.
pub fn evolve(
    initial: &FockState,
    model: &DuffingModel,
    config: &IntegratorConfig,
    periods_total: usize,
    transient_periods: usize,
    seed: u64,
) -> Result<TrajectoryRecord> {
    let mut noise = NoiseStream::new(seed);
    evolve_with_noise(initial, model, config, periods_total, transient_periods, seed, &mut noise)
}

pub fn evolve_with_noise<S: NoiseSource>(
    initial: &FockState,
    model: &DuffingModel,
    config: &IntegratorConfig,
    periods_total: usize,
    transient_periods: usize,
    seed: u64,
    noise: &mut S,
) -> Result<TrajectoryRecord> {
    if periods_total <= transient_periods {
        return Err(Error::InvalidParameter(format!(
            "periods_total ({periods_total}) must exceed transient_periods ({transient_periods})"
        )));
    }
    if initial.cutoff() != config.cutoff {
        return Err(Error::CutoffMismatch {
            expected: config.cutoff,
            found: initial.cutoff(),
        });
    }
    let params = model.params;
    let mut stepper = QsdStepper::new(model, config.clone())?;
    let steps = config.steps_per_period;
    let period = params.period();
    let dt = period / steps as f64;
    let fine_stride = if config.fine_samples_per_period > 0 {
        steps / config.fine_samples_per_period
    } else {
        0
    };

    let mut state = initial.clone();
    let mut record = TrajectoryRecord {
        params,
        seed,
        cutoff: config.cutoff,
        steps_per_period: steps,
        transient_periods,
        strobes: Vec::with_capacity(periods_total),
        fine: Vec::new(),
        fine_samples_per_period: config.fine_samples_per_period,
        frames: Vec::new(),
    };
    if state.frame_q != 0.0 || state.frame_p != 0.0 {
        record.frames.push(FrameEvent {
            t: 0.0,
            frame_q: state.frame_q,
            frame_p: state.frame_p,
        });
    }
    let abort = |period: usize, e: Error| Error::TrajectoryAborted {
        period,
        cause: Box::new(e),
    };

    if fine_stride > 0 {
        let (q, p, e) = stepper.observe(&state).map_err(|e| abort(0, e))?;
        record.fine.push(FineSample { t: 0.0, q, p, energy: e });
    }
    for k in 0..periods_total {
        let mut deficit_max = 0.0f64;
        let mut leakage_max = 0.0f64;
        for j in 0..steps {
            let step_index = k * steps + j;
            let t = step_index as f64 * dt;
            let dxi = noise.increment(dt);
            let report = stepper
                .step(&mut state, t, dt, dxi)
                .map_err(|e| abort(k + 1, e))?;
            deficit_max = deficit_max.max(report.deficit);
            leakage_max = leakage_max.max(report.leakage);
            if stepper.maybe_recenter(&mut state).map_err(|e| abort(k + 1, e))? {
                record.frames.push(FrameEvent {
                    t: t + dt,
                    frame_q: state.frame_q,
                    frame_p: state.frame_p,
                });
            }
            if fine_stride > 0 && (j + 1) % fine_stride == 0 {
                let (q, p, e) = stepper.observe(&state).map_err(|e| abort(k + 1, e))?;
                record.fine.push(FineSample {
                    t: (step_index + 1) as f64 * dt,
                    q,
                    p,
                    energy: e,
                });
            }
        }
        let (q, p, e) = stepper.observe(&state).map_err(|e| abort(k + 1, e))?;
        record.strobes.push(StrobeSample {
            period: k + 1,
            t: (k + 1) as f64 * period,
            q,
            p,
            energy: e,
            norm_deficit_max: deficit_max,
            leakage_max,
        });
    }
    Ok(record)
}
