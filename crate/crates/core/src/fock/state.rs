use num_complex::Complex64;

use super::banded::BandedOperator;
use super::ops::{annihilation, check_cutoff};
use crate::error::{Error, Result};

/// Default tolerance on the truncated coherent-state norm deficit.
pub const DEFAULT_COHERENT_TOLERANCE: f64 = 1e-8;
/// Default tolerance for the displacement exponential series.
pub const DEFAULT_DISPLACEMENT_TOLERANCE: f64 = 1e-12;

const NORM_GUARD: f64 = 1e-6;

/// A pure state on a truncated Fock basis, carried in a phase-space frame.
///
/// The physical state is `D(frame) Σ cₙ|n⟩`, where `D(frame)` displaces the
/// origin to `(frame_q, frame_p)`. Physical centroids are therefore
/// `frame + ⟨·⟩_frame`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    pub amplitudes: Vec<Complex64>,
    pub frame_q: f64,
    pub frame_p: f64,
}

impl FockState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        check_cutoff(amplitudes.len())?;
        Ok(Self {
            amplitudes,
            frame_q: 0.0,
            frame_p: 0.0,
        })
    }

    /// Fock level `n` with unit amplitude.
    pub fn number_state(n: usize, cutoff: usize) -> Result<Self> {
        check_cutoff(cutoff)?;
        if n >= cutoff {
            return Err(Error::InvalidParameter(format!(
                "level {n} outside cutoff {cutoff}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); cutoff];
        amps[n] = 1.0.into();
        Self::new(amps)
    }

    pub fn cutoff(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Population of the top two levels.
    pub fn leakage(&self) -> f64 {
        let n = self.cutoff();
        self.amplitudes[n - 2..].iter().map(|c| c.norm_sqr()).sum()
    }

    /// Scales to unit norm, returning `|1 − Σ|cₙ|²|` measured before scaling.
    pub fn renormalize(&mut self) -> Result<f64> {
        let ns = self.norm_sqr();
        if ns == 0.0 {
            return Err(Error::ZeroVector);
        }
        if !ns.is_finite() {
            return Err(Error::NonFinite("state norm".into()));
        }
        let deficit = (1.0 - ns).abs();
        if deficit != 0.0 {
            let s = ns.sqrt().recip();
            self.amplitudes.iter_mut().for_each(|c| *c *= s);
        }
        Ok(deficit)
    }

    pub fn renormalized(mut self) -> Result<(Self, f64)> {
        let d = self.renormalize()?;
        Ok((self, d))
    }

    fn check_normalized(&self) -> Result<()> {
        let ns = self.norm_sqr();
        if (ns - 1.0).abs() > NORM_GUARD {
            return Err(Error::NotNormalized(ns));
        }
        Ok(())
    }

    /// `⟨ψ|A|ψ⟩` in the state's own frame.
    pub fn expectation(&self, op: &BandedOperator) -> Result<Complex64> {
        self.check_normalized()?;
        op.quadratic_form(&self.amplitudes)
    }

    /// `⟨a⟩` in the frame, without the normalization guard.
    pub fn mean_annihilation(&self) -> Complex64 {
        self.amplitudes
            .windows(2)
            .enumerate()
            .map(|(n, w)| w[0].conj() * w[1] * ((n + 1) as f64).sqrt())
            .sum()
    }

    /// In-frame centroid `(⟨Q⟩, ⟨P⟩)` derived from `⟨a⟩`.
    pub fn frame_centroid(&self) -> (f64, f64) {
        let alpha = self.mean_annihilation() / self.norm_sqr();
        (
            std::f64::consts::SQRT_2 * alpha.re,
            std::f64::consts::SQRT_2 * alpha.im,
        )
    }

    /// Physical centroid `frame + ⟨·⟩_frame`.
    pub fn centroid(&self) -> (f64, f64) {
        let (q, p) = self.frame_centroid();
        (self.frame_q + q, self.frame_p + p)
    }

    /// Re-expresses the same physical state in a frame shifted by `(dq, dp)`.
    pub fn displace_frame(&self, dq: f64, dp: f64, tol: f64, leakage_bound: f64) -> Result<Self> {
        self.check_normalized()?;
        if dq == 0.0 && dp == 0.0 {
            return Ok(self.clone());
        }
        let shift = Complex64::new(dq, dp) * std::f64::consts::FRAC_1_SQRT_2;
        let amplitudes = apply_displacement(&self.amplitudes, -shift, tol)?;
        let out = Self {
            amplitudes,
            frame_q: self.frame_q + dq,
            frame_p: self.frame_p + dp,
        };
        let leakage = out.leakage();
        if leakage > leakage_bound {
            return Err(Error::Leakage {
                leakage,
                bound: leakage_bound,
            });
        }
        Ok(out)
    }

    /// Overlap `⟨self|other⟩` of the in-frame amplitude vectors.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Truncated coherent state `|α⟩`, renormalized over the basis.
///
/// Returns the state and the norm deficit `1 − Σ|cₙ|²` before renormalization.
pub fn coherent_state(alpha: Complex64, cutoff: usize, tol: f64) -> Result<(FockState, f64)> {
    check_cutoff(cutoff)?;
    let mut amps = Vec::with_capacity(cutoff);
    let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amps.push(c);
    for n in 1..cutoff {
        c = c * alpha / (n as f64).sqrt();
        amps.push(c);
    }
    let mut state = FockState::new(amps)?;
    let deficit = 1.0 - state.norm_sqr();
    if deficit > tol {
        let r = alpha.norm();
        return Err(Error::Truncation {
            deficit,
            tolerance: tol,
            required_cutoff: (r * r + 8.0 * r).ceil() as usize,
        });
    }
    state.renormalize()?;
    Ok((state, deficit.max(0.0)))
}

/// `exp(z a† − z̄ a) v` by Taylor series with scaling and squaring.
pub fn apply_displacement(v: &[Complex64], z: Complex64, tol: f64) -> Result<Vec<Complex64>> {
    let n = v.len();
    let a = annihilation(n);
    let generator = a
        .adjoint()
        .combine(z, &a, -z.conj())
        .expect("same cutoff");
    let bound = generator.norm_bound();
    let mut squarings = 0u32;
    while bound / f64::from(1u32 << squarings) > 0.5 {
        squarings += 1;
    }
    let step = generator.scaled((1.0 / f64::from(1u32 << squarings)).into());

    let mut out = v.to_vec();
    let mut term = vec![Complex64::new(0.0, 0.0); n];
    let mut next = vec![Complex64::new(0.0, 0.0); n];
    let scale: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    for _ in 0..(1u32 << squarings) {
        term.copy_from_slice(&out);
        for k in 1..200 {
            step.apply_into(&term, &mut next)?;
            let inv = 1.0 / k as f64;
            let mut tnorm = 0.0;
            for (t, x) in term.iter_mut().zip(&next) {
                *t = x * inv;
                tnorm += t.norm_sqr();
            }
            out.iter_mut().zip(&term).for_each(|(o, t)| *o += t);
            if tnorm.sqrt() <= tol * scale * 1e-2 {
                break;
            }
        }
    }
    if out.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("displacement series".into()));
    }
    Ok(out)
}
