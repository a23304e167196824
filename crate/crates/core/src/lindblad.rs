//! Dense master-equation integrator and ensemble reduction.
//!
//! The oracle evolves `dρ/dt = −i[H(t), ρ] + KρK† − ½{K†K, ρ}` on the same
//! truncated operators the trajectory integrator uses, so ensemble means of
//! trajectories can be compared with it directly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{BandedOperator, FockState};
use crate::model::{DuffingModel, FrameOperators, ModelParams};
use crate::qsd::TrajectoryRecord;

/// Dense cost guard for [`evolve_density`].
pub const MAX_ORACLE_CUTOFF: usize = 200;
/// Largest tolerated trace change in a single step.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-8;
/// Smallest eigenvalue accepted at a checkpoint.
pub const POSITIVITY_FLOOR: f64 = -1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Row-major `N×N` density matrix carried in a phase-space frame, with the
/// same convention as [`FockState`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    cutoff: usize,
    data: Vec<Complex64>,
    pub frame_q: f64,
    pub frame_p: f64,
}

impl DensityMatrix {
    pub fn zeros(cutoff: usize) -> Self {
        Self {
            cutoff,
            data: vec![ZERO; cutoff * cutoff],
            frame_q: 0.0,
            frame_p: 0.0,
        }
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩` in the state's frame.
    pub fn from_pure(state: &FockState) -> Result<Self> {
        let norm = state.norm_sqr();
        if !(norm > 0.0) {
            return Err(Error::ZeroVector);
        }
        let n = state.cutoff();
        let psi = &state.amplitudes;
        let mut rho = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                rho.data[i * n + j] = psi[i] * psi[j].conj() / norm;
            }
        }
        rho.frame_q = state.frame_q;
        rho.frame_p = state.frame_p;
        Ok(rho)
    }

    /// Row-major data of length `cutoff²`.
    pub fn from_dense(cutoff: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != cutoff * cutoff {
            return Err(Error::InvalidParameter(format!(
                "expected {} entries, got {}",
                cutoff * cutoff,
                data.len()
            )));
        }
        Ok(Self {
            cutoff,
            data,
            frame_q: 0.0,
            frame_p: 0.0,
        })
    }

    pub fn with_frame(mut self, frame_q: f64, frame_p: f64) -> Self {
        self.frame_q = frame_q;
        self.frame_p = frame_p;
        self
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cutoff + col]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.cutoff).map(|i| self.data[i * self.cutoff + i]).sum()
    }

    /// Largest `|ρᵢⱼ − conj(ρⱼᵢ)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.cutoff;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    /// `ρ ← (ρ + ρ†)/2`.
    pub fn hermitize(&mut self) {
        let n = self.cutoff;
        for i in 0..n {
            let d = &mut self.data[i * n + i];
            *d = Complex64::new(d.re, 0.0);
            for j in (i + 1)..n {
                let avg = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg.conj();
            }
        }
    }

    /// Rescales to unit trace and returns `|tr ρ − 1|` before rescaling.
    pub fn normalize_trace(&mut self) -> Result<f64> {
        let tr = self.trace().re;
        if !tr.is_finite() || tr <= 0.0 {
            return Err(Error::NonFinite(format!("density matrix trace {tr}")));
        }
        for v in &mut self.data {
            *v /= tr;
        }
        Ok((tr - 1.0).abs())
    }

    /// Checks the hermiticity and trace invariants at tolerance `1e−10`.
    pub fn check(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "density matrix is not hermitian (error {herm:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > 1e-10 {
            return Err(Error::NotNormalized(tr.re));
        }
        Ok(())
    }

    pub fn purity(&self) -> f64 {
        // tr ρ² = Σᵢⱼ |ρᵢⱼ|² for hermitian ρ
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    /// `tr(Aρ)`.
    pub fn expectation(&self, op: &BandedOperator) -> Result<Complex64> {
        if op.cutoff() != self.cutoff {
            return Err(Error::CutoffMismatch {
                expected: self.cutoff,
                found: op.cutoff(),
            });
        }
        let n = self.cutoff;
        let b = op.half_bandwidth();
        let mut sum = ZERO;
        for i in 0..n {
            for j in i.saturating_sub(b)..(i + b + 1).min(n) {
                sum += op.entry(i, j) * self.data[j * n + i];
            }
        }
        Ok(sum)
    }

    /// `(⟨Q⟩, ⟨P⟩)` relative to the frame origin.
    pub fn frame_centroid(&self) -> (f64, f64) {
        let n = self.cutoff;
        let mean_a: Complex64 = (1..n)
            .map(|k| (k as f64).sqrt() * self.data[k * n + k - 1])
            .sum();
        let s = std::f64::consts::SQRT_2;
        (s * mean_a.re, s * mean_a.im)
    }

    /// Physical `(⟨Q⟩, ⟨P⟩)`.
    pub fn centroid(&self) -> (f64, f64) {
        let (q, p) = self.frame_centroid();
        (self.frame_q + q, self.frame_p + p)
    }

    /// Smallest eigenvalue, by a dense hermitian eigensolve.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.cutoff;
        let m = DMatrix::from_fn(n, n, |i, j| self.data[i * n + j]);
        m.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// `out = A·X` for banded `A` and dense row-major `X`.
fn left_mul(a: &BandedOperator, x: &[Complex64], n: usize, out: &mut [Complex64]) {
    let b = a.half_bandwidth();
    out.iter_mut().for_each(|v| *v = ZERO);
    for i in 0..n {
        for k in i.saturating_sub(b)..(i + b + 1).min(n) {
            let aik = a.entry(i, k);
            if aik == ZERO {
                continue;
            }
            let (row_out, row_x) = (&mut out[i * n..(i + 1) * n], &x[k * n..(k + 1) * n]);
            for (o, v) in row_out.iter_mut().zip(row_x) {
                *o += aik * v;
            }
        }
    }
}

fn adjoint_in_place(x: &mut [Complex64], n: usize) {
    for i in 0..n {
        x[i * n + i] = x[i * n + i].conj();
        for j in (i + 1)..n {
            let (u, l) = (x[i * n + j], x[j * n + i]);
            x[i * n + j] = l.conj();
            x[j * n + i] = u.conj();
        }
    }
}

/// Lindblad generator over fixed frame operators.
#[derive(Clone, Debug)]
pub struct MasterEquation {
    params: ModelParams,
    ops: FrameOperators,
    /// `−iH_static − ½K†K`.
    g_static: BandedOperator,
    /// `−i·drive` on the same band as `g_static`.
    g_drive: BandedOperator,
}

impl MasterEquation {
    pub fn new(model: &DuffingModel, frame_q: f64, frame_p: f64) -> Result<Self> {
        Self::from_operators(model.params, model.frame_operators(frame_q, frame_p)?)
    }

    /// Generator over arbitrary operators; the drive coefficient comes from
    /// `params.drive(t)`.
    pub fn from_operators(params: ModelParams, ops: FrameOperators) -> Result<Self> {
        let b = ops
            .h_static
            .half_bandwidth()
            .max(ops.k_dag_k.half_bandwidth())
            .max(ops.drive.half_bandwidth());
        let g_static = ops
            .h_static
            .widened(b)
            .combine(-I, &ops.k_dag_k.widened(b), (-0.5).into())?;
        let g_drive = ops.drive.widened(b).scaled(-I);
        Ok(Self {
            params,
            ops,
            g_static,
            g_drive,
        })
    }

    pub fn operators(&self) -> &FrameOperators {
        &self.ops
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    fn check_frame(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.cutoff != self.ops.cutoff() {
            return Err(Error::CutoffMismatch {
                expected: self.ops.cutoff(),
                found: rho.cutoff,
            });
        }
        if rho.frame_q != self.ops.frame_q || rho.frame_p != self.ops.frame_p {
            return Err(Error::InvalidParameter(format!(
                "density frame ({}, {}) differs from operator frame ({}, {})",
                rho.frame_q, rho.frame_p, self.ops.frame_q, self.ops.frame_p
            )));
        }
        Ok(())
    }

    /// `dρ/dt` at time `t`, written as `Gρ + (Gρ)† + KρK†` with
    /// `G = −iH(t) − ½K†K`, which is exactly hermitian for hermitian `ρ`.
    pub fn rhs(&self, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        self.check_frame(rho)?;
        let n = rho.cutoff;
        let mut out = DensityMatrix::zeros(n);
        out.frame_q = rho.frame_q;
        out.frame_p = rho.frame_p;
        let mut scratch = vec![ZERO; n * n];
        self.rhs_into(&rho.data, t, &mut out.data, &mut scratch);
        Ok(out)
    }

    fn rhs_into(&self, rho: &[Complex64], t: f64, out: &mut [Complex64], scratch: &mut [Complex64]) {
        let n = self.ops.cutoff();
        let c = self.params.drive(t);
        let g = self.g_static.combine(1.0.into(), &self.g_drive, c.into()).expect("same cutoff");
        left_mul(&g, rho, n, scratch);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = scratch[i * n + j] + scratch[j * n + i].conj();
            }
        }
        // KρK† = K (Kρ)† for hermitian ρ
        left_mul(&self.ops.k, rho, n, scratch);
        adjoint_in_place(scratch, n);
        let mut kk = vec![ZERO; n * n];
        left_mul(&self.ops.k, scratch, n, &mut kk);
        for (o, v) in out.iter_mut().zip(&kk) {
            *o += v;
        }
    }
}

/// `dρ/dt` for the Duffing model in the density matrix's frame.
pub fn master_rhs(rho: &DensityMatrix, t: f64, model: &DuffingModel) -> Result<DensityMatrix> {
    MasterEquation::new(model, rho.frame_q, rho.frame_p)?.rhs(rho, t)
}

/// Observables of the oracle at one checkpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleSample {
    pub t: f64,
    pub q: f64,
    pub p: f64,
    pub energy: f64,
    pub purity: f64,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleSeries {
    pub samples: Vec<OracleSample>,
    /// Largest single-step trace change removed by renormalization.
    pub max_trace_drift: f64,
    pub max_hermiticity_drift: f64,
    pub steps: usize,
}

fn observe(rho: &DensityMatrix, eq: &MasterEquation, t: f64) -> Result<OracleSample> {
    let (q, p) = rho.centroid();
    let min_eigenvalue = rho.min_eigenvalue();
    if min_eigenvalue < POSITIVITY_FLOOR {
        return Err(Error::NotPositive(min_eigenvalue));
    }
    Ok(OracleSample {
        t,
        q,
        p,
        energy: rho.expectation(&eq.ops.h_d)?.re,
        purity: rho.purity(),
        min_eigenvalue,
    })
}

/// RK4 on the master equation from `t = 0` through the last checkpoint.
/// Every checkpoint must be a whole number of steps `dt`; `ρ` is
/// re-hermitized and re-normalized after each step.
pub fn evolve_with(
    rho0: &DensityMatrix,
    eq: &MasterEquation,
    dt: f64,
    checkpoints: &[f64],
) -> Result<OracleSeries> {
    let n = rho0.cutoff;
    if n > MAX_ORACLE_CUTOFF {
        return Err(Error::InvalidParameter(format!(
            "oracle cutoff {n} exceeds {MAX_ORACLE_CUTOFF}"
        )));
    }
    eq.check_frame(rho0)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let mut targets = Vec::with_capacity(checkpoints.len());
    for &t in checkpoints {
        let k = (t / dt).round();
        if t < 0.0 || (k * dt - t).abs() > 1e-9 * t.abs().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "checkpoint {t} is not on the dt = {dt} grid"
            )));
        }
        targets.push(k as usize);
    }
    if targets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("checkpoints must increase".into()));
    }

    let mut rho = rho0.clone();
    let mut series = OracleSeries {
        samples: Vec::with_capacity(checkpoints.len()),
        max_trace_drift: 0.0,
        max_hermiticity_drift: 0.0,
        steps: 0,
    };
    let mut scratch = vec![ZERO; n * n];
    let mut k = [vec![ZERO; n * n], vec![ZERO; n * n], vec![ZERO; n * n], vec![ZERO; n * n]];
    let mut stage = vec![ZERO; n * n];
    let mut step = 0usize;
    for (&target, &t_check) in targets.iter().zip(checkpoints) {
        while step < target {
            let t = step as f64 * dt;
            eq.rhs_into(&rho.data, t, &mut k[0], &mut scratch);
            for (s, (r, d)) in stage.iter_mut().zip(rho.data.iter().zip(&k[0])) {
                *s = r + d * (0.5 * dt);
            }
            eq.rhs_into(&stage, t + 0.5 * dt, &mut k[1], &mut scratch);
            for (s, (r, d)) in stage.iter_mut().zip(rho.data.iter().zip(&k[1])) {
                *s = r + d * (0.5 * dt);
            }
            eq.rhs_into(&stage, t + 0.5 * dt, &mut k[2], &mut scratch);
            for (s, (r, d)) in stage.iter_mut().zip(rho.data.iter().zip(&k[2])) {
                *s = r + d * dt;
            }
            eq.rhs_into(&stage, t + dt, &mut k[3], &mut scratch);
            for (i, r) in rho.data.iter_mut().enumerate() {
                *r += (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]) * (dt / 6.0);
            }
            if rho.data.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("density matrix (dt too large?)".into()));
            }
            series.max_hermiticity_drift = series.max_hermiticity_drift.max(rho.hermiticity_error());
            rho.hermitize();
            let drift = rho.normalize_trace()?;
            if drift > TRACE_DRIFT_LIMIT {
                return Err(Error::TraceDrift {
                    drift,
                    limit: TRACE_DRIFT_LIMIT,
                });
            }
            series.max_trace_drift = series.max_trace_drift.max(drift);
            step += 1;
        }
        series.samples.push(observe(&rho, eq, t_check)?);
    }
    series.steps = step;
    Ok(series)
}

/// [`evolve_with`] for the Duffing model in `rho0`'s frame.
pub fn evolve_density(
    rho0: &DensityMatrix,
    model: &DuffingModel,
    dt: f64,
    checkpoints: &[f64],
) -> Result<OracleSeries> {
    if rho0.cutoff > MAX_ORACLE_CUTOFF {
        return Err(Error::InvalidParameter(format!(
            "oracle cutoff {} exceeds {MAX_ORACLE_CUTOFF}",
            rho0.cutoff
        )));
    }
    let eq = MasterEquation::new(model, rho0.frame_q, rho0.frame_p)?;
    evolve_with(rho0, &eq, dt, checkpoints)
}

/// Per-checkpoint ensemble means with standard errors `std/√M`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub checkpoints: Vec<f64>,
    pub mean_q: Vec<f64>,
    pub stderr_q: Vec<f64>,
    pub mean_p: Vec<f64>,
    pub stderr_p: Vec<f64>,
    pub mean_energy: Vec<f64>,
    pub stderr_energy: Vec<f64>,
    pub count: usize,
}

impl EnsembleSummary {
    /// Largest `|mean − reference| / stderr` over all checkpoints and the
    /// three observables; a zero standard error with a nonzero difference
    /// gives infinity.
    pub fn max_z_score(&self, oracle: &OracleSeries) -> Result<f64> {
        if oracle.samples.len() != self.checkpoints.len()
            || oracle
                .samples
                .iter()
                .zip(&self.checkpoints)
                .any(|(s, t)| (s.t - t).abs() > 1e-9 * t.abs().max(1.0))
        {
            return Err(Error::CheckpointMismatch);
        }
        let z = |d: f64, se: f64| {
            if d == 0.0 {
                0.0
            } else if se == 0.0 {
                f64::INFINITY
            } else {
                d.abs() / se
            }
        };
        let mut worst = 0.0f64;
        for (i, s) in oracle.samples.iter().enumerate() {
            worst = worst
                .max(z(self.mean_q[i] - s.q, self.stderr_q[i]))
                .max(z(self.mean_p[i] - s.p, self.stderr_p[i]))
                .max(z(self.mean_energy[i] - s.energy, self.stderr_energy[i]));
        }
        Ok(worst)
    }
}

fn sample_at(record: &TrajectoryRecord, t: f64) -> Option<(f64, f64, f64)> {
    let close = |u: f64| (u - t).abs() <= 1e-9 * t.abs().max(1.0);
    record
        .fine
        .iter()
        .find(|s| close(s.t))
        .map(|s| (s.q, s.p, s.energy))
        .or_else(|| {
            record
                .strobes
                .iter()
                .find(|s| close(s.t))
                .map(|s| (s.q, s.p, s.energy))
        })
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Ensemble statistics of `(⟨Q⟩, ⟨P⟩, ⟨H_D⟩)` at the given times, read from
/// each record's fine or strobe samples. Records are summed in the order
/// given.
pub fn ensemble_reduce(records: &[TrajectoryRecord], checkpoints: &[f64]) -> Result<EnsembleSummary> {
    let first = records
        .first()
        .ok_or_else(|| Error::InsufficientData("no trajectory records".into()))?;
    let mut seeds = std::collections::HashSet::new();
    for r in records {
        if r.params != first.params
            || r.cutoff != first.cutoff
            || r.steps_per_period != first.steps_per_period
        {
            return Err(Error::InvalidParameter(
                "records do not share model and integrator settings".into(),
            ));
        }
        if !seeds.insert(r.seed) {
            return Err(Error::InvalidParameter(format!("seed {} appears twice", r.seed)));
        }
    }
    let m = records.len();
    let mut summary = EnsembleSummary {
        checkpoints: checkpoints.to_vec(),
        mean_q: Vec::new(),
        stderr_q: Vec::new(),
        mean_p: Vec::new(),
        stderr_p: Vec::new(),
        mean_energy: Vec::new(),
        stderr_energy: Vec::new(),
        count: m,
    };
    let (mut q, mut p, mut e) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    for &t in checkpoints {
        for (i, r) in records.iter().enumerate() {
            let (qi, pi, ei) = sample_at(r, t).ok_or(Error::CheckpointMismatch)?;
            q[i] = qi;
            p[i] = pi;
            e[i] = ei;
        }
        let (mq, sq) = mean_and_stderr(&q);
        let (mp, sp) = mean_and_stderr(&p);
        let (me, se) = mean_and_stderr(&e);
        summary.mean_q.push(mq);
        summary.stderr_q.push(sq);
        summary.mean_p.push(mp);
        summary.stderr_p.push(sp);
        summary.mean_energy.push(me);
        summary.stderr_energy.push(se);
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, BandedOperator};
    use crate::model::damped_oscillator_operators;
    use crate::qsd::{FineSample, StrobeSample};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_density(n: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let a = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let rho = &a * a.adjoint();
        let tr = rho.trace();
        let data = (0..n * n).map(|k| rho[(k / n, k % n)] / tr).collect();
        let mut d = DensityMatrix::from_dense(n, data).unwrap();
        d.hermitize();
        d
    }

    fn duffing(gamma: f64, beta: f64, n: usize) -> DuffingModel {
        DuffingModel::new(ModelParams::new(gamma, 0.3, 1.0, beta).unwrap(), n).unwrap()
    }

    #[test]
    fn rhs_is_traceless_and_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let model = duffing(0.3, 1.0, 12);
        for k in 0..20 {
            let rho = random_density(12, &mut rng);
            let d = master_rhs(&rho, 0.37 * k as f64, &model).unwrap();
            assert!(d.trace().norm() < 1e-12, "{}", d.trace());
            assert!(d.hermiticity_error() < 1e-12);
        }
    }

    #[test]
    fn amplitude_damping_rate() {
        let n = 6;
        let gamma: f64 = 0.2;
        let a = crate::fock::annihilation(n);
        let k = a.scaled((2.0 * gamma).sqrt().into());
        let k_dag = k.adjoint();
        let ops = FrameOperators {
            frame_q: 0.0,
            frame_p: 0.0,
            h_d: BandedOperator::zeros(n, 0),
            h_r: BandedOperator::zeros(n, 0),
            h_static: BandedOperator::zeros(n, 0),
            drive: BandedOperator::zeros(n, 0),
            k_dag_k: k_dag.mul(&k).unwrap().into_hermitian(),
            k,
            k_dag,
        };
        let params = ModelParams::new(gamma, 0.0, 1.0, 1.0).unwrap();
        let eq = MasterEquation::from_operators(params, ops).unwrap();
        let rho = DensityMatrix::from_pure(&FockState::number_state(1, n).unwrap()).unwrap();
        let d = eq.rhs(&rho, 0.0).unwrap();
        let dn = d.expectation(&crate::fock::number(n)).unwrap();
        assert!((dn.re + 2.0 * gamma).abs() < 1e-14, "{dn}");
    }

    #[test]
    fn cutoff_and_frame_mismatch() {
        let model = duffing(0.3, 1.0, 10);
        let rho = DensityMatrix::from_pure(&FockState::number_state(0, 8).unwrap()).unwrap();
        assert!(matches!(master_rhs(&rho, 0.0, &model), Err(Error::CutoffMismatch { .. })));
        let eq = MasterEquation::new(&model, 0.0, 0.0).unwrap();
        let rho = DensityMatrix::from_pure(&FockState::number_state(0, 10).unwrap())
            .unwrap()
            .with_frame(0.5, 0.0);
        assert!(eq.rhs(&rho, 0.0).is_err());
    }

    #[test]
    fn damped_oscillator_matches_analytic_mean() {
        let gamma = 0.1;
        let n = 30;
        let ops = damped_oscillator_operators(gamma, n, 0.0, 0.0).unwrap();
        let params = ModelParams::new(gamma, 0.0, 1.0, 1.0).unwrap();
        let eq = MasterEquation::from_operators(params, ops).unwrap();
        let (psi, _) = coherent_state(Complex64::new(1.2, 0.4), n, 1e-10).unwrap();
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let (q0, p0) = rho.centroid();
        let checkpoints = [1.0, 2.5, 5.0, 10.0];
        let series = evolve_with(&rho, &eq, 1e-3, &checkpoints).unwrap();
        // x'' + 2Γx' + x = 0
        let w = (1.0 - gamma * gamma).sqrt();
        for s in &series.samples {
            let t = s.t;
            let q = (-gamma * t).exp() * (q0 * (w * t).cos() + (p0 + gamma * q0) / w * (w * t).sin());
            assert!((s.q - q).abs() < 1e-6, "t={t}: {} vs {q}", s.q);
        }
    }

    #[test]
    fn unitary_evolution_keeps_purity() {
        let model = duffing(0.0, 1.0, 30);
        let (psi, _) = coherent_state(Complex64::new(0.7, -0.2), 30, 1e-10).unwrap();
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let period = model.params.period();
        // RK4 perturbs the zero eigenvalues of a pure state at O(dt⁴)
        let dt = period / 16384.0;
        let series = evolve_density(&rho, &model, dt, &[period]).unwrap();
        assert!((series.samples[0].purity - 1.0).abs() < 1e-8);
    }

    #[test]
    fn static_frame_offset_leaves_observables_unchanged() {
        let gamma = 0.1;
        let n = 40;
        let params = ModelParams::new(gamma, 0.0, 1.0, 1.0).unwrap();
        let (psi, _) = coherent_state(Complex64::new(0.9, -0.5), n, 1e-12).unwrap();
        let (dq, dp) = (0.8, -0.6);
        let shifted = psi.displace_frame(dq, dp, 1e-14, 1.0).unwrap();
        let plain = MasterEquation::from_operators(params, damped_oscillator_operators(gamma, n, 0.0, 0.0).unwrap()).unwrap();
        let moved = MasterEquation::from_operators(params, damped_oscillator_operators(gamma, n, dq, dp).unwrap()).unwrap();
        let checkpoints = [1.0, 3.0, 6.0];
        let a = evolve_with(&DensityMatrix::from_pure(&psi).unwrap(), &plain, 1e-3, &checkpoints).unwrap();
        let b = evolve_with(&DensityMatrix::from_pure(&shifted).unwrap(), &moved, 1e-3, &checkpoints).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((x.q - y.q).abs() < 1e-8, "{} vs {}", x.q, y.q);
            assert!((x.p - y.p).abs() < 1e-8, "{} vs {}", x.p, y.p);
            assert!((x.energy - y.energy).abs() < 1e-8);
        }
    }

    #[test]
    fn quartic_frame_difference_shrinks_with_cutoff() {
        let diff = |n: usize| {
            let model = duffing(0.3, 1.0, n);
            let (psi, _) = coherent_state(Complex64::new(0.7, -0.2), n, 1e-12).unwrap();
            let shifted = psi.displace_frame(0.4, -0.3, 1e-14, 1.0).unwrap();
            let dt = model.params.period() / 8192.0;
            let cp = [256.0 * dt];
            let a = evolve_density(&DensityMatrix::from_pure(&psi).unwrap(), &model, dt, &cp).unwrap();
            let b = evolve_density(&DensityMatrix::from_pure(&shifted).unwrap(), &model, dt, &cp).unwrap();
            (a.samples[0].q - b.samples[0].q).abs()
        };
        let (coarse, fine) = (diff(30), diff(50));
        assert!(fine < 0.2 * coarse, "{coarse:e} -> {fine:e}");
    }

    #[test]
    fn checkpoints_must_sit_on_the_grid() {
        let model = duffing(0.3, 1.0, 8);
        let rho = DensityMatrix::from_pure(&FockState::number_state(0, 8).unwrap()).unwrap();
        assert!(evolve_density(&rho, &model, 0.1, &[0.25]).is_err());
        assert!(evolve_density(&rho, &model, 0.1, &[0.2, 0.1]).is_err());
    }

    #[test]
    fn oversized_cutoff_is_rejected() {
        let model = duffing(0.3, 1.0, 201);
        let rho = DensityMatrix::zeros(201);
        assert!(evolve_density(&rho, &model, 0.1, &[0.1]).is_err());
    }

    #[test]
    fn invariants_of_a_random_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density(10, &mut rng);
        rho.check().unwrap();
        assert!(rho.min_eigenvalue() > -1e-12);
        assert!(rho.purity() <= 1.0 + 1e-12);
    }

    fn record(seed: u64, values: &[(f64, f64)]) -> TrajectoryRecord {
        TrajectoryRecord {
            params: ModelParams::new(0.3, 0.3, 1.0, 1.0).unwrap(),
            seed,
            cutoff: 10,
            steps_per_period: 16,
            transient_periods: 0,
            strobes: vec![StrobeSample {
                period: 1,
                t: 2.0 * std::f64::consts::PI,
                q: 0.0,
                p: 0.0,
                energy: 0.0,
                norm_deficit_max: 0.0,
                leakage_max: 0.0,
            }],
            fine: values
                .iter()
                .map(|&(t, q)| FineSample { t, q, p: -q, energy: 2.0 * q })
                .collect(),
            fine_samples_per_period: 4,
            frames: Vec::new(),
        }
    }

    #[test]
    fn single_record_reduces_to_itself() {
        let r = record(1, &[(0.0, 0.5), (1.0, 0.25)]);
        let s = ensemble_reduce(&[r], &[0.0, 1.0]).unwrap();
        assert_eq!(s.mean_q, vec![0.5, 0.25]);
        assert_eq!(s.mean_p, vec![-0.5, -0.25]);
        assert_eq!(s.mean_energy, vec![1.0, 0.5]);
        assert!(s.stderr_q.iter().all(|v| *v == 0.0));
        assert_eq!(s.count, 1);
    }

    #[test]
    fn constant_observable_has_zero_error() {
        let rs: Vec<_> = (0..5).map(|k| record(k, &[(0.0, 0.75), (1.0, 0.75)])).collect();
        let s = ensemble_reduce(&rs, &[0.0, 1.0]).unwrap();
        assert!(s.mean_q.iter().all(|v| (*v - 0.75).abs() < 1e-15));
        assert!(s.stderr_q.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn mismatched_grids_and_duplicate_seeds() {
        let a = record(1, &[(0.0, 0.5), (1.0, 0.25)]);
        let b = record(2, &[(0.0, 0.5), (1.5, 0.25)]);
        assert!(matches!(
            ensemble_reduce(&[a.clone(), b], &[0.0, 1.0]),
            Err(Error::CheckpointMismatch)
        ));
        assert!(ensemble_reduce(&[a.clone(), a], &[0.0]).is_err());
    }

    #[test]
    fn strobe_samples_serve_as_checkpoints() {
        let r = record(1, &[(0.0, 0.5)]);
        let s = ensemble_reduce(&[r], &[2.0 * std::f64::consts::PI]).unwrap();
        assert_eq!(s.mean_q, vec![0.0]);
    }
}
