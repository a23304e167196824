//! The dimensionless quantum Duffing model.
//!
//! `H(t) = H_D + H_R + c(t) Q` with
//! `H_D = P²/2 + (β²/4) Q⁴ − Q²/2`, `H_R = (Γ/2)(QP + PQ)`,
//! `c(t) = −(g/β) cos(Ωt)` and the single Lindblad operator
//! `K = √Γ (Q + iP) = √(2Γ) a`.
//!
//! Classical coordinates are `q = βQ`, `p = βP`; wells sit at `Q = ±1/β`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{extended_quadratures, BandedOperator, FockState};

/// Dimensional parameters in one consistent unit system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    pub m: f64,
    pub omega0: f64,
    /// Well half-separation length.
    pub l: f64,
    /// Damping rate.
    pub gamma: f64,
    /// Drive frequency.
    pub omega: f64,
    /// Dimensionless drive amplitude.
    pub g: f64,
    pub hbar: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m", self.m),
            ("omega0", self.omega0),
            ("l", self.l),
            ("omega", self.omega),
            ("hbar", self.hbar),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.g >= 0.0) || !(self.gamma >= 0.0) {
            return Err(Error::InvalidParameter("g and gamma must be non-negative".into()));
        }
        Ok(())
    }
}

/// Dimensionless parameters `{Γ, g, Ω, β}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Damping `Γ = γ/ω₀`.
    pub gamma: f64,
    /// Drive amplitude.
    pub g: f64,
    /// Drive frequency `Ω = ω/ω₀`.
    pub omega: f64,
    /// Quantum scale; `β²` is the effective Planck constant.
    pub beta: f64,
}

impl ModelParams {
    pub fn new(gamma: f64, g: f64, omega: f64, beta: f64) -> Result<Self> {
        let p = Self {
            gamma,
            g,
            omega,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Gamma must be non-negative, got {}",
                self.gamma
            )));
        }
        if !(self.omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Omega must be positive, got {}",
                self.omega
            )));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }

    /// Scalar drive schedule `c(t) = −(g/β) cos(Ωt)`.
    pub fn drive(&self, t: f64) -> f64 {
        -(self.g / self.beta) * (self.omega * t).cos()
    }

    /// Double-well potential `V(Q) = (β²/4) Q⁴ − Q²/2`.
    pub fn potential(&self, q: f64) -> f64 {
        let b2 = self.beta * self.beta;
        0.25 * b2 * q.powi(4) - 0.5 * q * q
    }
}

/// `Γ = γ/ω₀`, `Ω = ω/ω₀`, `β = √(ħ / (m l² ω₀))`, `g` unchanged.
pub fn reduce_params(p: &PhysicalParams) -> ModelParams {
    ModelParams {
        gamma: p.gamma / p.omega0,
        g: p.g,
        omega: p.omega / p.omega0,
        beta: (p.hbar / (p.m * p.l * p.l * p.omega0)).sqrt(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WellGeometry {
    /// Minima at `Q = ±q_well`.
    pub q_well: f64,
    pub barrier_energy: f64,
    pub well_depth: f64,
    pub well_frequency: f64,
    /// Harmonic zero-point estimate `½·√2` over the barrier depth `1/(4β²)`;
    /// at or above one the wavepacket effectively sees a single well.
    pub zero_point_ratio: f64,
}

impl WellGeometry {
    pub fn single_well_regime(&self) -> bool {
        self.zero_point_ratio >= 1.0
    }
}

pub fn well_geometry(params: &ModelParams) -> WellGeometry {
    let b2 = params.beta * params.beta;
    let depth = 0.25 / b2;
    let well_frequency = std::f64::consts::SQRT_2;
    WellGeometry {
        q_well: 1.0 / params.beta,
        barrier_energy: 0.0,
        well_depth: -depth,
        well_frequency,
        zero_point_ratio: 0.5 * well_frequency / depth,
    }
}

/// Model operators expressed in a phase-space frame centered at
/// `(frame_q, frame_p)`: every `Q` is replaced by `Q + frame_q` and every
/// `P` by `P + frame_p`, then projected onto the cutoff.
#[derive(Clone, Debug)]
pub struct FrameOperators {
    pub frame_q: f64,
    pub frame_p: f64,
    /// `H_D` in the frame, including its constant part.
    pub h_d: BandedOperator,
    /// `H_R` in the frame.
    pub h_r: BandedOperator,
    /// `H_D + H_R` with bandwidth 4.
    pub h_static: BandedOperator,
    /// Drive coupling `Q + frame_q`.
    pub drive: BandedOperator,
    pub k: BandedOperator,
    pub k_dag: BandedOperator,
    pub k_dag_k: BandedOperator,
}

impl FrameOperators {
    pub fn cutoff(&self) -> usize {
        self.h_d.cutoff()
    }
}

#[derive(Clone, Debug)]
pub struct DuffingModel {
    pub params: ModelParams,
    cutoff: usize,
}

impl DuffingModel {
    pub fn new(params: ModelParams, cutoff: usize) -> Result<Self> {
        params.validate()?;
        if cutoff < 2 {
            return Err(Error::CutoffTooSmall(cutoff));
        }
        Ok(Self { params, cutoff })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn frame_operators(&self, frame_q: f64, frame_p: f64) -> Result<FrameOperators> {
        frame_operators(&self.params, self.cutoff, frame_q, frame_p)
    }

    /// Physical `⟨H_D⟩`, evaluated through the state's frame.
    pub fn energy(&self, state: &FockState) -> Result<f64> {
        let ops = self.frame_operators(state.frame_q, state.frame_p)?;
        energy(state, &ops)
    }
}

/// Builds `{H_D, H_R, Q_drive, K}` in the zero frame.
pub fn build_model(params: &ModelParams, cutoff: usize) -> Result<FrameOperators> {
    frame_operators(params, cutoff, 0.0, 0.0)
}

pub fn frame_operators(
    params: &ModelParams,
    cutoff: usize,
    frame_q: f64,
    frame_p: f64,
) -> Result<FrameOperators> {
    params.validate()?;
    if cutoff < 2 {
        return Err(Error::CutoffTooSmall(cutoff));
    }
    let (q, p) = extended_quadratures(cutoff, frame_q, frame_p);
    let q2 = q.mul(&q)?;
    let q4 = q2.mul(&q2)?;
    let p2 = p.mul(&p)?;
    let b2 = params.beta * params.beta;
    let h_d = p2
        .scaled(0.5.into())
        .add(&q4.scaled((0.25 * b2).into()))?
        .add(&q2.scaled((-0.5).into()))?
        .truncated(cutoff)
        .into_hermitian();
    let h_r = q
        .mul(&p)?
        .add(&p.mul(&q)?)?
        .scaled((0.5 * params.gamma).into())
        .truncated(cutoff)
        .into_hermitian()
        .widened(4);
    let h_static = h_d.add(&h_r)?.into_hermitian();

    let drive = q.truncated(cutoff);
    let sqrt_gamma = params.gamma.sqrt();
    let k = q
        .combine(sqrt_gamma.into(), &p, Complex64::new(0.0, sqrt_gamma))?
        .truncated(cutoff);
    let k_dag = k.adjoint();
    let k_dag_k = k_dag.mul(&k)?.into_hermitian();
    Ok(FrameOperators {
        frame_q,
        frame_p,
        h_d,
        h_r,
        h_static,
        drive,
        k,
        k_dag,
        k_dag_k,
    })
}

/// Operators of the damped harmonic oscillator `H = ½(P² + Q²) + H_R`
/// with the same `K`, in the frame `(frame_q, frame_p)`. `h_d` holds
/// `½(P² + Q²)`.
pub fn damped_oscillator_operators(
    gamma: f64,
    cutoff: usize,
    frame_q: f64,
    frame_p: f64,
) -> Result<FrameOperators> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("gamma must be non-negative, got {gamma}")));
    }
    if cutoff < 2 {
        return Err(Error::CutoffTooSmall(cutoff));
    }
    let (q, p) = extended_quadratures(cutoff, frame_q, frame_p);
    let h_d = p
        .mul(&p)?
        .add(&q.mul(&q)?)?
        .scaled(0.5.into())
        .truncated(cutoff)
        .into_hermitian();
    let h_r = q
        .mul(&p)?
        .add(&p.mul(&q)?)?
        .scaled((0.5 * gamma).into())
        .truncated(cutoff)
        .into_hermitian();
    let h_static = h_d.add(&h_r)?.into_hermitian();
    let sqrt_gamma = gamma.sqrt();
    let k = q
        .combine(sqrt_gamma.into(), &p, Complex64::new(0.0, sqrt_gamma))?
        .truncated(cutoff);
    let k_dag = k.adjoint();
    let k_dag_k = k_dag.mul(&k)?.into_hermitian();
    Ok(FrameOperators {
        frame_q,
        frame_p,
        h_d,
        h_r,
        h_static,
        drive: q.truncated(cutoff),
        k,
        k_dag,
        k_dag_k,
    })
}

/// `⟨H_D⟩` of a state whose frame matches `ops`.
pub fn energy(state: &FockState, ops: &FrameOperators) -> Result<f64> {
    if state.frame_q != ops.frame_q || state.frame_p != ops.frame_p {
        return Err(Error::InvalidParameter(format!(
            "state frame ({}, {}) differs from operator frame ({}, {})",
            state.frame_q, state.frame_p, ops.frame_q, ops.frame_p
        )));
    }
    Ok(state.expectation(&ops.h_d)?.re)
}

/// `⟨H_D + H_ex(t)⟩`, the energy including the instantaneous drive term.
pub fn energy_with_drive(
    state: &FockState,
    ops: &FrameOperators,
    params: &ModelParams,
    t: f64,
) -> Result<f64> {
    let e = energy(state, ops)?;
    let q = state.expectation(&ops.drive)?.re;
    Ok(e + params.drive(t) * q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, DEFAULT_COHERENT_TOLERANCE};

    fn params(gamma: f64, beta: f64) -> ModelParams {
        ModelParams::new(gamma, 0.3, 1.0, beta).unwrap()
    }

    #[test]
    fn reduce_unit_inputs() {
        let p = PhysicalParams {
            m: 1.0,
            omega0: 1.0,
            l: 1.0,
            gamma: 0.3,
            omega: 1.0,
            g: 0.3,
            hbar: 1.0,
        };
        p.validate().unwrap();
        let r = reduce_params(&p);
        assert_eq!(r, ModelParams { gamma: 0.3, g: 0.3, omega: 1.0, beta: 1.0 });
        let r10 = reduce_params(&PhysicalParams { l: 10.0, ..p });
        assert!((r10.beta - 0.1).abs() < 1e-15);
        assert_eq!((r10.gamma, r10.omega), (r.gamma, r.omega));
    }

    #[test]
    fn reduce_scaled_units() {
        let omega0 = 2.5;
        let p = PhysicalParams {
            m: 3.0,
            omega0,
            l: 0.5,
            gamma: 0.125 * omega0,
            omega: omega0,
            g: 0.3,
            hbar: 0.2,
        };
        let r = reduce_params(&p);
        assert!((r.gamma - 0.125).abs() < 1e-15);
        assert!((r.omega - 1.0).abs() < 1e-15);
        assert!((r.beta - (0.2f64 / (3.0 * 0.25 * 2.5)).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn invalid_beta() {
        assert!(ModelParams::new(0.3, 0.3, 1.0, 0.0).is_err());
        assert!(ModelParams::new(0.3, 0.3, 1.0, -1.0).is_err());
        assert!(build_model(&ModelParams { gamma: 0.3, g: 0.3, omega: 1.0, beta: 0.0 }, 8).is_err());
    }

    #[test]
    fn vacuum_energy_and_lindblad_entry() {
        for beta in [0.1, 0.3, 1.0] {
            let ops = build_model(&params(0.125, beta), 16).unwrap();
            let e = ops.h_d.entry(0, 0).re;
            assert!((e - 3.0 * beta * beta / 16.0).abs() < 1e-14);
            assert!((ops.k.entry(0, 1).re - 0.5).abs() < 1e-15);
            assert!(ops.h_d.is_hermitian() && ops.h_r.is_hermitian());
        }
    }

    #[test]
    fn drive_schedule() {
        let p = params(0.3, 0.3);
        assert!((p.drive(0.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn geometry() {
        let g = well_geometry(&params(0.3, 1.0));
        assert_eq!(g.q_well, 1.0);
        assert_eq!(g.well_depth, -0.25);
        assert!((g.zero_point_ratio - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(g.single_well_regime());
        let p3 = params(0.3, 0.3);
        let g = well_geometry(&p3);
        assert!((g.q_well - 10.0 / 3.0).abs() < 1e-12);
        assert!((g.well_depth + 2.7777777777777777).abs() < 1e-12);
        assert!(!g.single_well_regime());
        assert!((p3.potential(g.q_well) - g.well_depth).abs() < 1e-12);
        assert_eq!(p3.potential(0.0), 0.0);
        let g = well_geometry(&params(0.3, 0.01));
        assert!((g.q_well - 100.0).abs() < 1e-9);
        assert!((g.well_depth + 2500.0).abs() < 1e-9);
    }

    /// Dense oracle: the well-bottom coherent state evaluated with plain
    /// matrices in the zero frame at a large cutoff.
    fn dense_energy(alpha: Complex64, n: usize, beta: f64) -> f64 {
        let (s, _) = coherent_state(alpha, n, DEFAULT_COHERENT_TOLERANCE).unwrap();
        let v = &s.amplitudes;
        // Dense Q and P on n + 4 levels.
        let m = n + 4;
        let mut q = vec![vec![Complex64::new(0.0, 0.0); m]; m];
        let mut p = q.clone();
        for k in 1..m {
            let r = (k as f64 / 2.0).sqrt();
            q[k - 1][k] = r.into();
            q[k][k - 1] = r.into();
            p[k][k - 1] = Complex64::new(0.0, r);
            p[k - 1][k] = Complex64::new(0.0, -r);
        }
        let mm = |a: &Vec<Vec<Complex64>>, b: &Vec<Vec<Complex64>>| {
            let mut c = vec![vec![Complex64::new(0.0, 0.0); m]; m];
            for i in 0..m {
                for k in 0..m {
                    if a[i][k].norm() == 0.0 {
                        continue;
                    }
                    for j in 0..m {
                        c[i][j] += a[i][k] * b[k][j];
                    }
                }
            }
            c
        };
        let q2 = mm(&q, &q);
        let q4 = mm(&q2, &q2);
        let p2 = mm(&p, &p);
        let mut e = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let h = 0.5 * p2[i][j] + 0.25 * beta * beta * q4[i][j] - 0.5 * q2[i][j];
                e += v[i].conj() * h * v[j];
            }
        }
        e.re
    }

    #[test]
    fn well_bottom_energy_matches_dense_oracle() {
        let beta = 0.3;
        let q0 = 1.0 / beta;
        let alpha = Complex64::new(q0 / std::f64::consts::SQRT_2, 0.0);
        let reference = dense_energy(alpha, 200, beta);
        // Moving-frame evaluation: vacuum in a frame centered at the well.
        let model = DuffingModel::new(params(0.3, beta), 24).unwrap();
        let vac = FockState {
            frame_q: q0,
            ..FockState::number_state(0, 24).unwrap()
        };
        let e = model.energy(&vac).unwrap();
        assert!((e - reference).abs() < 1e-9, "{e} vs {reference}");
        // Depth plus a positive zero-point correction.
        let depth = well_geometry(&params(0.3, beta)).well_depth;
        assert!(e > depth && e < depth + 1.5);
    }
}
